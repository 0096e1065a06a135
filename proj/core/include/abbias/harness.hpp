#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abbias/behavior_model.hpp"
#include "abbias/estimators.hpp"

namespace abbias {

struct BootstrapParams {
  int replicates = 100;
  int block_len = 1;
};

struct ExperimentConfig {
  BehaviorModel model;
  int k = 14;
  int n_treat = 1000;
  int n_control = 1000;
  int replications = 100;
  std::uint64_t master_seed = 0;
  std::vector<Method> methods{Method::naive, Method::jackknife};
  BootstrapParams bootstrap;
};

struct MethodSummary {
  double mean_estimate = 0.0;
  double mean_bias = 0.0;
  double std_error = 0.0;  // sample SD of the estimates / sqrt(replications)
};

struct MonteCarloSummary {
  double truth = 0.0;  // analytic estimand, never an empirical average
  int replications = 0;
  std::map<Method, MethodSummary> per_method;
};

/// Runs `replications` independent simulated experiments and aggregates
/// per-method mean bias against the analytic estimand. Replication r derives
/// its seeds from (master_seed, r), so the result is identical for any
/// worker count (0 = hardware concurrency). A failing replication aborts
/// with ReplicationError carrying its index.
MonteCarloSummary run_experiment(const ExperimentConfig& config,
                                 int workers = 0);

struct BiasCurveRow {
  int k = 0;
  double naive_bias = 0.0;
  double naive_se = 0.0;
  double jackknife_bias = 0.0;
  double jackknife_se = 0.0;
  double exact_bias = 0.0;
  double first_order_bias = 0.0;
};

/// Empirical (naive + jackknife) and analytic bias for each duration in
/// k_values, sharing the config's population sizes and seeds.
std::vector<BiasCurveRow> bias_vs_duration(const ExperimentConfig& config,
                                           std::span<const int> k_values,
                                           int workers = 0);

std::string bias_vs_duration_csv(std::span<const BiasCurveRow> rows);

struct Table1Row {
  Method method = Method::naive;
  int example = 1;
  double mean_bias = 0.0;
  double std_error = 0.0;
};

/// Runs the two built-in example configurations with all three estimators
/// and returns one row per (method, example).
std::vector<Table1Row> reproduce_table1(int replications,
                                        std::uint64_t master_seed,
                                        int workers = 0);

/// Same, but with the experiment configs read from a JSON array (element i
/// is example i+1). `replications` and `master_seed` override the file's
/// values so one config file serves any run length.
std::vector<Table1Row> reproduce_table1_from_config(std::string_view json_text,
                                                    int replications,
                                                    std::uint64_t master_seed,
                                                    int workers = 0);

/// `method,example,mean_bias,std_error` rows.
std::string table1_csv(std::span<const Table1Row> rows);

std::string summary_to_json(const MonteCarloSummary& summary);

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(std::string_view json_text);

/// The configs behind reproduce_table1 (examples 1 and 2).
ExperimentConfig table1_config(int example, int replications,
                               std::uint64_t master_seed);

}  // namespace abbias
