#include "abbias/analytic.hpp"

#include <cmath>
#include <cstdio>

#include "abbias/error.hpp"
#include "abbias/quadrature.hpp"

namespace abbias {

namespace {

constexpr double kQuadTol = 1e-10;

// (1 - p)^k without cancellation for small p and large k.
double survival_pow(double p, int k) {
  if (p >= 1.0) return 0.0;
  return std::exp(static_cast<double>(k) * std::log1p(-p));
}

// Checks normalization for density classes; point masses are validated by
// validate() itself.
void require_normalized(const BehaviorModel& model) {
  validate(model);
  if (!has_density(model.activity)) return;
  if (std::holds_alternative<UniformDist>(model.activity)) return;
  if (std::holds_alternative<GridDensity>(model.activity)) return;  // checked
  // Beta densities are normalized analytically; verify the quadrature agrees
  // so singular shapes that the integrator cannot resolve fail loudly.
  auto f = [&](double p) { return density(model.activity, p); };
  double mass = integrate(f, 0.0, 1.0, {1e-8, 10000}).value;
  if (std::abs(mass - 1.0) > 1e-6)
    throw ModelError("model: density does not integrate to 1 (got " +
                     std::to_string(mass) + ")");
}

double point_mass_estimand(const PointMassDist& pm, const Polynomial& effect) {
  double acc = 0.0;
  for (const auto& mass : pm.masses)
    acc += mass.weight * effect(mass.p) * mass.p;
  return acc;
}

double point_mass_appearance(const PointMassDist& pm, int k) {
  double acc = 0.0;
  for (const auto& mass : pm.masses)
    acc += mass.weight * (1.0 - survival_pow(mass.p, k));
  return acc;
}

// Initial subdivision: the appearance integrand has a boundary layer in
// [0, ~10/k], and a grid density is discontinuous at every cell edge, which
// bisection from non-dyadic seeds can never align with.
std::vector<double> integration_breakpoints(const BehaviorModel& model,
                                            int k = 0) {
  std::vector<double> pts{0.0, 1.0};
  if (const auto* grid = std::get_if<GridDensity>(&model.activity)) {
    const std::size_t cells = grid->cells().size();
    pts.reserve(cells + 4);
    for (std::size_t i = 1; i < cells; ++i)
      pts.push_back(static_cast<double>(i) / static_cast<double>(cells));
  }
  if (k > 10) {
    pts.push_back(1.0 / k);
    pts.push_back(10.0 / k);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  out.reserve(pts.size());
  for (double p : pts)
    if (out.empty() || p - out.back() > 1e-12) out.push_back(p);
  if (out.back() != 1.0) out.back() = 1.0;
  return out;
}

}  // namespace

double compute_estimand(const BehaviorModel& model) {
  require_normalized(model);
  if (const auto* pm = std::get_if<PointMassDist>(&model.activity))
    return point_mass_estimand(*pm, model.effect);

  auto integrand = [&](double p) {
    return model.effect(p) * p * density(model.activity, p);
  };
  auto pts = integration_breakpoints(model);
  return integrate(integrand, pts, {kQuadTol, 10000}).value;
}

double compute_expected_naive(const BehaviorModel& model, int k) {
  if (k < 1) throw DurationError("compute_expected_naive: k must be >= 1");
  require_normalized(model);

  double numerator, appearance;
  if (const auto* pm = std::get_if<PointMassDist>(&model.activity)) {
    numerator = point_mass_estimand(*pm, model.effect);
    appearance = point_mass_appearance(*pm, k);
  } else {
    auto num_f = [&](double p) {
      return model.effect(p) * p * density(model.activity, p);
    };
    auto den_f = [&](double p) {
      return density(model.activity, p) * (1.0 - survival_pow(p, k));
    };
    numerator =
        integrate(num_f, integration_breakpoints(model), {kQuadTol, 10000})
            .value;
    appearance =
        integrate(den_f, integration_breakpoints(model, k), {kQuadTol, 10000})
            .value;
  }

  if (appearance < 1e-12)
    throw ModelError(
        "compute_expected_naive: appearance probability is zero; no user "
        "would ever show up");
  return numerator / appearance;
}

double compute_first_order_bias(const BehaviorModel& model, int k) {
  if (k < 1) throw DurationError("compute_first_order_bias: k must be >= 1");
  require_normalized(model);
  const double f0 = density_at_zero(model.activity);
  return compute_estimand(model) * f0 / static_cast<double>(k);
}

BiasAnalysis analyze_bias(const BehaviorModel& model, int k) {
  BiasAnalysis analysis;
  analysis.k = k;
  analysis.estimand = compute_estimand(model);
  analysis.expected_naive = compute_expected_naive(model, k);
  analysis.exact_bias = analysis.expected_naive - analysis.estimand;
  analysis.first_order_bias =
      analysis.estimand * density_at_zero(model.activity) / k;
  return analysis;
}

std::vector<BiasAnalysis> bias_curve(const BehaviorModel& model,
                                     std::span<const int> k_values) {
  if (k_values.empty())
    throw ParameterError("bias_curve: k_values must be nonempty");
  std::vector<BiasAnalysis> rows;
  rows.reserve(k_values.size());
  for (int k : k_values) rows.push_back(analyze_bias(model, k));
  return rows;
}

std::string bias_curve_csv(std::span<const BiasAnalysis> rows) {
  std::string out = "k,estimand,expected_naive,exact_bias,first_order_bias\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", row.k,
                  row.estimand, row.expected_naive, row.exact_bias,
                  row.first_order_bias);
    out += buf;
  }
  return out;
}

}  // namespace abbias
