#pragma once

#include <span>

namespace abbias {

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
/// Continued-fraction evaluation, absolute accuracy well below 1e-12.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct WelchResult {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch (unequal-variance) two-sample t-test with Welch-Satterthwaite
/// degrees of freedom. Each sample needs at least two observations.
/// Zero-variance samples are handled exactly: equal means give t = 0, p = 1;
/// unequal means give an infinite statistic and p = 0.
WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys);

}  // namespace abbias
