#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "abbias/polynomial.hpp"
#include "abbias/rng.hpp"

namespace abbias {

/// Uniform(0, 1) activity probabilities.
struct UniformDist {};

/// Beta(alpha, beta) activity probabilities; alpha, beta > 0.
struct BetaDist {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Discrete activity levels: mass `weight` at probability `p`.
struct PointMass {
  double p = 0.0;
  double weight = 0.0;
};

struct PointMassDist {
  std::vector<PointMass> masses;
};

/// Piecewise-constant density on a uniform grid over [0, 1]; cell i covers
/// [i/n, (i+1)/n) and holds the density value for that cell. Sampling is by
/// inverse CDF, exact for this density class.
class GridDensity {
 public:
  explicit GridDensity(std::vector<double> cell_values);

  /// Tabulates a continuous density onto `cells` cells (cell midpoint rule).
  static GridDensity from_function(const std::function<double(double)>& f,
                                   int cells = 4096);

  double density(double p) const;
  double sample(SplitMix64& rng) const;
  double total_mass() const { return cdf_.empty() ? 0.0 : cdf_.back(); }
  const std::vector<double>& cells() const { return cells_; }

 private:
  std::vector<double> cells_;
  std::vector<double> cdf_;  // cumulative mass at cell right edges
};

using ActivityDistribution =
    std::variant<UniformDist, BetaDist, PointMassDist, GridDensity>;

/// Treatment-effect inflation on a user's early active days: on a treated
/// user's n-th active day the effect is multiplied by (1 + amplitude / n).
struct NoveltySpec {
  double amplitude = 0.0;
};

/// Data-generating model for one experiment population: how often users show
/// up, what their outcomes look like, and optional novelty decay.
struct BehaviorModel {
  ActivityDistribution activity = UniformDist{};
  Polynomial effect{0.0, 1.0};   // expected per-active-day treatment effect
  Polynomial control{1.0};       // expected per-active-day control outcome
  double noise_sd = 0.0;         // additive Gaussian noise per active day
  std::optional<NoveltySpec> novelty;
};

/// Throws ParameterError / ModelError if the model is unusable: bad Beta
/// parameters, point-mass weights not summing to 1 or p outside [0, 1],
/// non-normalized grid density, negative noise_sd.
void validate(const BehaviorModel& model);

bool has_density(const ActivityDistribution& dist);
double density(const ActivityDistribution& dist, double p);

/// Pointwise density at p = 0 (the light-user limit). Throws ModelError for
/// point masses and for densities that diverge at 0 (Beta with alpha < 1).
double density_at_zero(const ActivityDistribution& dist);

double sample_activity(const ActivityDistribution& dist, SplitMix64& rng);

/// The two built-in simulation presets: p ~ Uniform(0,1), effect p, control 1,
/// noise 0.01; the second adds novelty with amplitude 0.1.
BehaviorModel example1_model();
BehaviorModel example2_model();

std::string model_to_json(const BehaviorModel& model);
BehaviorModel model_from_json(std::string_view json_text);

}  // namespace abbias
