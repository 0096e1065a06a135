#include "abbias/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <vector>

#include "abbias/error.hpp"

namespace abbias {

namespace {

// 15-point Kronrod extension of 7-point Gauss on [-1, 1].
// Layout per row: abscissa, Gauss weight (0 for Kronrod-only nodes),
// Kronrod weight.
constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

struct Interval {
  double a;
  double b;
  double value;
  double error;
};

Interval evaluate(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double y0 = f(center);
  double g7 = kNodes[0][1] * y0;
  double k15 = kNodes[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    double dx = half * kNodes[i][0];
    double y = f(center + dx) + f(center - dx);
    g7 += kNodes[i][1] * y;
    k15 += kNodes[i][2] * y;
  }
  g7 *= half;
  k15 *= half;
  return {a, b, k15, std::abs(k15 - g7)};
}

struct ByError {
  bool operator()(const Interval& lhs, const Interval& rhs) const {
    return lhs.error < rhs.error;
  }
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f,
                           std::span<const double> breakpoints,
                           const QuadratureOptions& opts) {
  if (breakpoints.size() < 2)
    throw ParameterError("integrate: need at least two breakpoints");

  std::priority_queue<Interval, std::vector<Interval>, ByError> queue;
  double total_error = 0.0;
  int subdivisions = 0;

  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw ParameterError("integrate: breakpoints must be strictly increasing");
    Interval iv = evaluate(f, breakpoints[i], breakpoints[i + 1]);
    total_error += iv.error;
    queue.push(iv);
  }

  while (total_error > opts.abs_tol) {
    if (subdivisions >= opts.max_subdivisions) {
      char msg[128];
      std::snprintf(msg, sizeof msg,
                    "integrate: subdivision cap %d reached before tolerance "
                    "(error %.3g > %.3g)",
                    opts.max_subdivisions, total_error, opts.abs_tol);
      throw Error(msg);
    }
    Interval worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b)
      throw Error("integrate: interval underflow; integrand too singular");
    Interval left = evaluate(f, worst.a, mid);
    Interval right = evaluate(f, mid, worst.b);
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
  }

  double value = 0.0;
  double error = 0.0;
  // Summing smallest-error intervals first keeps the accumulation stable.
  std::vector<Interval> parts;
  parts.reserve(queue.size());
  while (!queue.empty()) {
    parts.push_back(queue.top());
    queue.pop();
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    value += it->value;
    error += it->error;
  }
  return {value, error, subdivisions};
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& opts) {
  const double pts[2] = {a, b};
  return integrate(f, std::span<const double>(pts, 2), opts);
}

}  // namespace abbias
