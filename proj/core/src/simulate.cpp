#include "abbias/simulate.hpp"

#include <algorithm>

#include "abbias/error.hpp"
#include "abbias/rng.hpp"

namespace abbias {

namespace {

// Stream labels so population and panel draws never collide.
constexpr std::uint64_t kPopulationStream = 0x706f70;  // "pop"
constexpr std::uint64_t kPanelStream = 0x70616e;       // "pan"

}  // namespace

std::vector<PopulationMember> sample_population(const BehaviorModel& model,
                                                int n_treat, int n_control,
                                                std::uint64_t rng_seed) {
  if (n_treat < 1 || n_control < 1)
    throw ParameterError("sample_population: both arms need >= 1 user");
  validate(model);

  const int n = n_treat + n_control;
  std::vector<PopulationMember> population(n);
  for (int i = 0; i < n; ++i) {
    SplitMix64 rng(derive_seed(rng_seed, kPopulationStream,
                               static_cast<std::uint64_t>(i)));
    population[i].user_id = i + 1;
    population[i].activity_p = sample_activity(model.activity, rng);
    population[i].arm = i < n_treat ? Arm::treatment : Arm::control;
  }
  return population;
}

PanelDataset generate_panel(const std::vector<PopulationMember>& population,
                            const BehaviorModel& model, int k,
                            std::uint64_t rng_seed,
                            double treat_activity_shift, bool allow_short) {
  if (k < 1) throw DurationError("generate_panel: k must be >= 1");
  if (k < 2 && !allow_short)
    throw DurationError(
        "generate_panel: k must be >= 2 (leave-one-day-out needs two days; "
        "pass allow_short for single-day panels)");
  validate(model);

  PanelDataset panel;
  panel.k = k;
  panel.rows.reserve(population.size() * static_cast<std::size_t>(k) / 2);

  for (const auto& member : population) {
    panel.assignment[member.user_id] = member.arm;
    panel.truth[member.user_id] = member.activity_p;

    double active_p = member.activity_p;
    if (member.arm == Arm::treatment)
      active_p = std::clamp(active_p + treat_activity_shift, 0.0, 1.0);

    SplitMix64 rng(derive_seed(rng_seed, kPanelStream,
                               static_cast<std::uint64_t>(member.user_id)));
    const double control_mean = model.control(member.activity_p);
    const double effect_mean = model.effect(member.activity_p);

    int active_days = 0;
    for (int day = 1; day <= k; ++day) {
      const bool active = rng.bernoulli(active_p);
      const double noise = model.noise_sd * rng.normal();
      if (!active) continue;
      ++active_days;
      double outcome = control_mean + noise;
      if (member.arm == Arm::treatment) {
        double factor =
            model.novelty ? 1.0 + model.novelty->amplitude / active_days : 1.0;
        outcome += effect_mean * factor;
      }
      panel.rows.push_back({member.user_id, day, outcome});
    }
  }

  std::sort(panel.rows.begin(), panel.rows.end(),
            [](const PanelRow& a, const PanelRow& b) {
              return a.user_id != b.user_id ? a.user_id < b.user_id
                                            : a.day < b.day;
            });
  return panel;
}

}  // namespace abbias
