#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abbias/panel.hpp"

namespace abbias {

enum class Method { naive, jackknife, block_bootstrap };

std::string method_name(Method method);
Method method_from_name(std::string_view name);

struct EstimateResult {
  Method method = Method::naive;
  double point = 0.0;
  std::optional<double> variance;  // absent for the naive estimator
  int k = 0;
  int n_treat_appearing = 0;
  int n_control_appearing = 0;
};

/// Difference in per-day per-user average outcomes between arms, counting
/// only users with at least one active day in the window:
///   sum(treated outcomes) / (|window| * N_t) -
///   sum(control outcomes) / (|window| * N_c).
/// The default window is all k days. Appearing-user counts are taken within
/// the window. Throws DegenerateArmError if either arm is empty there.
EstimateResult naive_scaled(const PanelDataset& panel);
EstimateResult naive_scaled(const PanelDataset& panel,
                            std::span<const int> window_days);

/// Combines a full-window estimate with leave-one-out estimates:
/// k * full - (k - 1) * mean(loo). Exposed because the algebra is testable on
/// synthetic sequences independent of any panel.
double jackknife_point(double full_estimate, std::span<const double> loo_estimates);

/// Leave-one-day-out bias-adjusted estimator. Computes the naive estimate on
/// all k days and on each of the k windows that drop one day (re-counting
/// appearing users per window), then returns
///   point    = k * full - (k - 1) * mean(loo)
///   variance = k / (k - 1) * sum((loo_j - mean(loo))^2)
/// With classical_variance the variance factor is (k - 1) / k instead.
EstimateResult jackknife_adjusted(const PanelDataset& panel,
                                  bool classical_variance = false);

/// Moving-block bootstrap over days: each replicate draws ceil(k / block_len)
/// contiguous day blocks with replacement, truncates the concatenation to k
/// pseudo-days, and evaluates the naive estimator on the pseudo-panel
/// (re-counting appearing users). Returns
///   point    = 2 * full - mean(replicate estimates)
///   variance = sample variance of the replicate estimates.
EstimateResult block_bootstrap_adjusted(const PanelDataset& panel,
                                        int replicates, int block_len,
                                        std::uint64_t rng_seed);

struct IncrementalityReport {
  double mean_active_days_treat = 0.0;
  double mean_active_days_control = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool passed = true;
};

/// Tests whether mean active days per appearing user differ across arms
/// (Welch two-sample t-test). A rejection means the treatment moved visit
/// frequency and the estimators here should not be trusted.
IncrementalityReport check_incrementality(const PanelDataset& panel,
                                          double alpha);

std::string to_json(const EstimateResult& result);
std::string to_json(const IncrementalityReport& report);

}  // namespace abbias
