#pragma once

#include <cstdint>
#include <vector>

#include "abbias/behavior_model.hpp"
#include "abbias/panel.hpp"

namespace abbias {

struct PopulationMember {
  std::int64_t user_id = 0;
  double activity_p = 0.0;
  Arm arm = Arm::control;
};

/// Draws n_treat + n_control users with activity probabilities i.i.d. from
/// the model's activity distribution. User ids are 1..n, treatment first;
/// the arm never influences the activity draw. Each user's draw comes from a
/// seed split on the user index, so growing the population keeps earlier
/// users' values.
std::vector<PopulationMember> sample_population(const BehaviorModel& model,
                                                int n_treat, int n_control,
                                                std::uint64_t rng_seed);

/// Simulates a k-day panel: each user is active on each day independently
/// with probability p, and active days produce
///   control(p) + noise                                   (control arm)
///   control(p) + effect(p) * novelty_factor + noise      (treatment arm)
/// where novelty_factor is 1 + amplitude / (active days so far, counting
/// today) when the model has novelty, else 1.
///
/// `treat_activity_shift` adds a constant to treated users' activity
/// probability (clamped to [0, 1]). It exists to exercise the incrementality
/// diagnostic; outcome curves still use the user's drawn p.
///
/// k < 2 raises DurationError unless allow_short is set (single-day panels
/// are valid data but cannot feed the leave-one-day-out estimator).
PanelDataset generate_panel(const std::vector<PopulationMember>& population,
                            const BehaviorModel& model, int k,
                            std::uint64_t rng_seed,
                            double treat_activity_shift = 0.0,
                            bool allow_short = false);

}  // namespace abbias
