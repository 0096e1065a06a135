#include "abbias/behavior_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "abbias/error.hpp"

namespace abbias {

namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace

GridDensity::GridDensity(std::vector<double> cell_values)
    : cells_(std::move(cell_values)) {
  if (cells_.empty())
    throw ParameterError("grid density: needs at least one cell");
  cdf_.resize(cells_.size());
  const double width = 1.0 / static_cast<double>(cells_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (!(cells_[i] >= 0.0))
      throw ParameterError("grid density: cell values must be >= 0");
    acc += cells_[i] * width;
    cdf_[i] = acc;
  }
  if (!(acc > 0.0)) throw ParameterError("grid density: total mass is zero");
}

GridDensity GridDensity::from_function(const std::function<double(double)>& f,
                                       int cells) {
  if (cells < 1) throw ParameterError("grid density: cells must be >= 1");
  std::vector<double> values(cells);
  double mass = 0.0;
  for (int i = 0; i < cells; ++i) {
    double mid = (i + 0.5) / cells;
    values[i] = f(mid);
    mass += values[i] / cells;
  }
  if (!(mass > 0.0))
    throw ParameterError("grid density: function has no positive mass");
  // Tabulation does not preserve the integral exactly; rescale so the grid
  // is a proper density in its own right.
  for (double& v : values) v /= mass;
  return GridDensity(std::move(values));
}

double GridDensity::density(double p) const {
  if (p < 0.0 || p > 1.0) return 0.0;
  auto idx = std::min<std::size_t>(
      static_cast<std::size_t>(p * static_cast<double>(cells_.size())),
      cells_.size() - 1);
  return cells_[idx];
}

double GridDensity::sample(SplitMix64& rng) const {
  const double target = rng.uniform01() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) --it;
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double width = 1.0 / static_cast<double>(cells_.size());
  const double left_mass = i == 0 ? 0.0 : cdf_[i - 1];
  const double cell_mass = cdf_[i] - left_mass;
  // Uniform within the cell; degenerate cells (zero mass) cannot be hit by
  // upper_bound except through ties, where the left edge is correct anyway.
  double frac = cell_mass > 0.0 ? (target - left_mass) / cell_mass : 0.0;
  return (static_cast<double>(i) + frac) * width;
}

void validate(const BehaviorModel& model) {
  if (!(model.noise_sd >= 0.0))
    throw ParameterError("model: noise_sd must be >= 0");

  if (const auto* beta = std::get_if<BetaDist>(&model.activity)) {
    if (!(beta->alpha > 0.0) || !(beta->beta > 0.0))
      throw ParameterError("model: Beta parameters must be positive");
  } else if (const auto* pm = std::get_if<PointMassDist>(&model.activity)) {
    if (pm->masses.empty())
      throw ParameterError("model: point-mass distribution has no masses");
    double total = 0.0;
    for (const auto& mass : pm->masses) {
      if (mass.p < 0.0 || mass.p > 1.0)
        throw ParameterError("model: point mass p must lie in [0, 1]");
      if (!(mass.weight >= 0.0))
        throw ParameterError("model: point mass weights must be >= 0");
      total += mass.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ModelError("model: point-mass weights must sum to 1");
  } else if (const auto* grid = std::get_if<GridDensity>(&model.activity)) {
    if (std::abs(grid->total_mass() - 1.0) > 1e-8)
      throw ModelError("model: grid density must integrate to 1");
  }
}

bool has_density(const ActivityDistribution& dist) {
  return !std::holds_alternative<PointMassDist>(dist);
}

double density(const ActivityDistribution& dist, double p) {
  if (const auto* grid = std::get_if<GridDensity>(&dist))
    return grid->density(p);
  if (std::holds_alternative<UniformDist>(dist))
    return (p >= 0.0 && p <= 1.0) ? 1.0 : 0.0;
  if (const auto* beta = std::get_if<BetaDist>(&dist)) {
    if (p <= 0.0 || p >= 1.0) {
      // Endpoint values of the Beta density where they are finite.
      if (p == 0.0)
        return beta->alpha > 1.0 ? 0.0
               : beta->alpha == 1.0
                   ? std::exp(-log_beta(beta->alpha, beta->beta))
                   : std::numeric_limits<double>::infinity();
      if (p == 1.0)
        return beta->beta > 1.0 ? 0.0
               : beta->beta == 1.0
                   ? std::exp(-log_beta(beta->alpha, beta->beta))
                   : std::numeric_limits<double>::infinity();
      return 0.0;
    }
    double log_pdf = (beta->alpha - 1.0) * std::log(p) +
                     (beta->beta - 1.0) * std::log1p(-p) -
                     log_beta(beta->alpha, beta->beta);
    return std::exp(log_pdf);
  }
  throw ModelError("density: point-mass distribution has no density");
}

double density_at_zero(const ActivityDistribution& dist) {
  if (std::holds_alternative<PointMassDist>(dist))
    throw ModelError("density_at_zero: point-mass model has no density");
  double f0 = density(dist, 0.0);
  if (!std::isfinite(f0))
    throw ModelError("density_at_zero: density diverges at 0");
  return f0;
}

double sample_activity(const ActivityDistribution& dist, SplitMix64& rng) {
  if (std::holds_alternative<UniformDist>(dist)) return rng.uniform01();
  if (const auto* beta = std::get_if<BetaDist>(&dist))
    return rng.beta(beta->alpha, beta->beta);
  if (const auto* grid = std::get_if<GridDensity>(&dist))
    return grid->sample(rng);
  const auto& masses = std::get<PointMassDist>(dist).masses;
  double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& mass : masses) {
    acc += mass.weight;
    if (u < acc) return mass.p;
  }
  return masses.back().p;
}

BehaviorModel example1_model() {
  BehaviorModel model;
  model.activity = UniformDist{};
  model.effect = Polynomial{0.0, 1.0};
  model.control = Polynomial{1.0};
  model.noise_sd = 0.01;
  return model;
}

BehaviorModel example2_model() {
  BehaviorModel model = example1_model();
  model.novelty = NoveltySpec{0.1};
  return model;
}

namespace {

nlohmann::json activity_to_json(const ActivityDistribution& dist) {
  nlohmann::json j;
  if (std::holds_alternative<UniformDist>(dist)) {
    j["type"] = "uniform";
  } else if (const auto* beta = std::get_if<BetaDist>(&dist)) {
    j["type"] = "beta";
    j["alpha"] = beta->alpha;
    j["beta"] = beta->beta;
  } else if (const auto* pm = std::get_if<PointMassDist>(&dist)) {
    j["type"] = "point_masses";
    auto arr = nlohmann::json::array();
    for (const auto& mass : pm->masses) arr.push_back({mass.p, mass.weight});
    j["masses"] = std::move(arr);
  } else {
    const auto& grid = std::get<GridDensity>(dist);
    j["type"] = "grid";
    j["cells"] = grid.cells();
  }
  return j;
}

ActivityDistribution activity_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "uniform") return UniformDist{};
  if (type == "beta")
    return BetaDist{j.at("alpha").get<double>(), j.at("beta").get<double>()};
  if (type == "point_masses") {
    PointMassDist pm;
    for (const auto& entry : j.at("masses"))
      pm.masses.push_back(
          {entry.at(0).get<double>(), entry.at(1).get<double>()});
    return pm;
  }
  if (type == "grid")
    return GridDensity(j.at("cells").get<std::vector<double>>());
  throw DataError("model json: unknown activity type '" + type + "'");
}

}  // namespace

std::string model_to_json(const BehaviorModel& model) {
  nlohmann::json j;
  j["activity"] = activity_to_json(model.activity);
  j["effect"] = model.effect.coeffs();
  j["control"] = model.control.coeffs();
  j["noise_sd"] = model.noise_sd;
  if (model.novelty) j["novelty"] = {{"amplitude", model.novelty->amplitude}};
  return j.dump();
}

BehaviorModel model_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  try {
    BehaviorModel model;
    model.activity = activity_from_json(j.at("activity"));
    if (j.contains("effect"))
      model.effect = Polynomial(j.at("effect").get<std::vector<double>>());
    if (j.contains("control"))
      model.control = Polynomial(j.at("control").get<std::vector<double>>());
    model.noise_sd = j.value("noise_sd", 0.0);
    if (j.contains("novelty"))
      model.novelty = NoveltySpec{j.at("novelty").at("amplitude").get<double>()};
    validate(model);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
}

}  // namespace abbias
