#pragma once

#include <functional>
#include <span>

namespace abbias {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_subdivisions = 10000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Worst-error-first interval refinement until the summed error estimate is
/// below abs_tol. Throws Error if the subdivision cap is hit first.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& opts = {});

/// Same, but seeds the subdivision with the given sorted breakpoints.
/// Integrands with a boundary layer (such as (1-p)^k near p = 0) need the
/// initial intervals to straddle the layer or the error estimate can miss it.
QuadratureResult integrate(const std::function<double(double)>& f,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts = {});

}  // namespace abbias
