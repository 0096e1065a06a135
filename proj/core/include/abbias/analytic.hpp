#pragma once

#include <span>
#include <string>
#include <vector>

#include "abbias/behavior_model.hpp"

namespace abbias {

/// Closed-form bias decomposition for one experiment duration.
struct BiasAnalysis {
  int k = 0;
  double estimand = 0.0;          // integral of effect(p) * p * f(p)
  double expected_naive = 0.0;    // estimand / P(user appears), reweighted
  double exact_bias = 0.0;        // expected_naive - estimand
  double first_order_bias = 0.0;  // estimand * f(0) / k
};

/// Population average treatment effect of the scaled single-average metric:
/// integral over [0,1] of effect(p) * p * f(p) dp (finite sum for point
/// masses). Absolute accuracy 1e-10.
double compute_estimand(const BehaviorModel& model);

/// Expectation of the naive estimator for a k-day experiment:
///   estimand / integral of f(p) * (1 - (1-p)^k) dp.
/// The denominator is the appearance probability mass; if it vanishes the
/// model is degenerate and ModelError is raised.
double compute_expected_naive(const BehaviorModel& model, int k);

/// Leading bias term estimand * f(0) / k. Requires a finite pointwise
/// density at zero (grid densities use the first cell's value).
double compute_first_order_bias(const BehaviorModel& model, int k);

/// All four quantities for one k.
BiasAnalysis analyze_bias(const BehaviorModel& model, int k);

/// One BiasAnalysis per requested duration.
std::vector<BiasAnalysis> bias_curve(const BehaviorModel& model,
                                     std::span<const int> k_values);

/// Plot-ready CSV: `k,estimand,expected_naive,exact_bias,first_order_bias`.
std::string bias_curve_csv(std::span<const BiasAnalysis> rows);

}  // namespace abbias
