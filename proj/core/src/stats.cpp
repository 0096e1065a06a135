#include "abbias/stats.hpp"

#include <cmath>
#include <limits>

#include "abbias/error.hpp"

namespace abbias {

namespace {

// Continued fraction for the incomplete beta function, modified Lentz
// iteration (Numerical Recipes form).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kEps = 1e-15;
  constexpr double kFpMin = 1e-300;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

struct Moments {
  double mean;
  double var;  // unbiased
  int n;
};

Moments moments(std::span<const double> xs) {
  const int n = static_cast<int>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, n > 1 ? ss / (n - 1) : 0.0, n};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ParameterError("incomplete beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  // Use the continued fraction on the side where it converges fast.
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("t-test: df must be positive");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw ParameterError("welch_t_test: each sample needs >= 2 observations");

  const Moments mx = moments(xs);
  const Moments my = moments(ys);
  const double sx = mx.var / mx.n;
  const double sy = my.var / my.n;
  const double se2 = sx + sy;

  WelchResult result;
  result.mean_x = mx.mean;
  result.mean_y = my.mean;

  if (se2 <= 0.0) {
    if (mx.mean == my.mean) {
      result.t = 0.0;
      result.df = static_cast<double>(mx.n + my.n - 2);
      result.p = 1.0;
    } else {
      result.t = std::copysign(std::numeric_limits<double>::infinity(),
                               mx.mean - my.mean);
      result.df = static_cast<double>(mx.n + my.n - 2);
      result.p = 0.0;
    }
    return result;
  }

  result.t = (mx.mean - my.mean) / std::sqrt(se2);
  result.df = se2 * se2 /
              (sx * sx / (mx.n - 1) + sy * sy / (my.n - 1));
  result.p = student_t_two_sided_p(result.t, result.df);
  return result;
}

}  // namespace abbias
