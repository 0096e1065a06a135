#include "abbias/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "abbias/analytic.hpp"
#include "abbias/error.hpp"
#include "abbias/rng.hpp"
#include "abbias/simulate.hpp"

namespace abbias {

namespace {

// Per-replication stream labels.
constexpr std::uint64_t kPopulationLabel = 1;
constexpr std::uint64_t kPanelLabel = 2;
constexpr std::uint64_t kBootstrapLabel = 3;

int resolve_workers(int workers, int jobs) {
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  return std::min(workers, jobs);
}

// Runs fn(0..jobs-1) on a small pool. Results must be written to
// index-addressed storage by fn; aggregation stays order-independent.
// The lowest-index failure wins so errors are schedule-independent too.
void parallel_for(int jobs, int workers, const std::function<void(int)>& fn) {
  workers = resolve_workers(workers, jobs);
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::mutex failure_mutex;
  int failed_index = -1;
  std::exception_ptr failure;

  auto body = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failed_index < 0 || i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();

  if (failure) std::rethrow_exception(failure);
}

void validate_config(const ExperimentConfig& config) {
  validate(config.model);
  if (config.k < 2) throw DurationError("experiment: k must be >= 2");
  if (config.n_treat < 1 || config.n_control < 1)
    throw ParameterError("experiment: both arms need >= 1 user");
  if (config.replications < 2)
    throw ParameterError("experiment: replications must be >= 2");
  if (config.methods.empty())
    throw ParameterError("experiment: methods must be nonempty");
  if (config.bootstrap.replicates < 2)
    throw ParameterError("experiment: bootstrap replicates must be >= 2");
  if (config.bootstrap.block_len < 1 || config.bootstrap.block_len > config.k)
    throw ParameterError("experiment: bootstrap block_len must be in 1..k");
}

std::vector<double> run_one_replication(const ExperimentConfig& config,
                                        int replication) {
  const std::uint64_t rep_seed =
      derive_seed(config.master_seed, static_cast<std::uint64_t>(replication));
  auto population =
      sample_population(config.model, config.n_treat, config.n_control,
                        derive_seed(rep_seed, kPopulationLabel));
  PanelDataset panel = generate_panel(population, config.model, config.k,
                                      derive_seed(rep_seed, kPanelLabel));

  std::vector<double> estimates;
  estimates.reserve(config.methods.size());
  for (Method method : config.methods) {
    switch (method) {
      case Method::naive:
        estimates.push_back(naive_scaled(panel).point);
        break;
      case Method::jackknife:
        estimates.push_back(jackknife_adjusted(panel).point);
        break;
      case Method::block_bootstrap:
        estimates.push_back(
            block_bootstrap_adjusted(panel, config.bootstrap.replicates,
                                     config.bootstrap.block_len,
                                     derive_seed(rep_seed, kBootstrapLabel))
                .point);
        break;
    }
  }
  return estimates;
}

}  // namespace

MonteCarloSummary run_experiment(const ExperimentConfig& config, int workers) {
  validate_config(config);

  const int reps = config.replications;
  std::vector<std::vector<double>> estimates(reps);
  parallel_for(reps, workers, [&](int r) {
    try {
      estimates[r] = run_one_replication(config, r);
    } catch (const std::exception& e) {
      throw ReplicationError(r, e.what());
    }
  });

  MonteCarloSummary summary;
  summary.truth = compute_estimand(config.model);
  summary.replications = reps;

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += estimates[r][m];
    mean /= reps;
    double ss = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double d = estimates[r][m] - mean;
      ss += d * d;
    }
    MethodSummary method_summary;
    method_summary.mean_estimate = mean;
    method_summary.mean_bias = mean - summary.truth;
    method_summary.std_error =
        std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps));
    summary.per_method[config.methods[m]] = method_summary;
  }
  return summary;
}

std::vector<BiasCurveRow> bias_vs_duration(const ExperimentConfig& config,
                                           std::span<const int> k_values,
                                           int workers) {
  if (k_values.empty())
    throw ParameterError("bias_vs_duration: k_values must be nonempty");
  for (int k : k_values)
    if (k < 2) throw DurationError("bias_vs_duration: every k must be >= 2");

  std::vector<BiasCurveRow> rows;
  rows.reserve(k_values.size());
  for (int k : k_values) {
    ExperimentConfig local = config;
    local.k = k;
    local.methods = {Method::naive, Method::jackknife};
    MonteCarloSummary summary = run_experiment(local, workers);
    BiasAnalysis analysis = analyze_bias(config.model, k);

    BiasCurveRow row;
    row.k = k;
    row.naive_bias = summary.per_method.at(Method::naive).mean_bias;
    row.naive_se = summary.per_method.at(Method::naive).std_error;
    row.jackknife_bias = summary.per_method.at(Method::jackknife).mean_bias;
    row.jackknife_se = summary.per_method.at(Method::jackknife).std_error;
    row.exact_bias = analysis.exact_bias;
    row.first_order_bias = analysis.first_order_bias;
    rows.push_back(row);
  }
  return rows;
}

std::string bias_vs_duration_csv(std::span<const BiasCurveRow> rows) {
  std::string out =
      "k,empirical_naive_bias,empirical_naive_se,empirical_jackknife_bias,"
      "empirical_jackknife_se,analytic_exact_bias,analytic_first_order_bias\n";
  char buf[220];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  row.k, row.naive_bias, row.naive_se, row.jackknife_bias,
                  row.jackknife_se, row.exact_bias, row.first_order_bias);
    out += buf;
  }
  return out;
}

ExperimentConfig table1_config(int example, int replications,
                               std::uint64_t master_seed) {
  if (example != 1 && example != 2)
    throw ParameterError("table1_config: example must be 1 or 2");
  ExperimentConfig config;
  config.model = example == 1 ? example1_model() : example2_model();
  config.k = 14;
  config.n_treat = 1000;
  config.n_control = 1000;
  config.replications = replications;
  // Different seeds per example; same style as per-replication splitting.
  config.master_seed =
      derive_seed(master_seed, static_cast<std::uint64_t>(example));
  config.methods = {Method::naive, Method::jackknife, Method::block_bootstrap};
  config.bootstrap = BootstrapParams{};
  return config;
}

std::vector<Table1Row> reproduce_table1(int replications,
                                        std::uint64_t master_seed,
                                        int workers) {
  if (replications < 2)
    throw ParameterError("reproduce_table1: replications must be >= 2");

  std::map<int, MonteCarloSummary> summaries;
  for (int example : {1, 2})
    summaries[example] = run_experiment(
        table1_config(example, replications, master_seed), workers);

  std::vector<Table1Row> rows;
  for (Method method :
       {Method::naive, Method::jackknife, Method::block_bootstrap})
    for (int example : {1, 2}) {
      const MethodSummary& ms = summaries[example].per_method.at(method);
      rows.push_back({method, example, ms.mean_bias, ms.std_error});
    }
  return rows;
}

std::vector<Table1Row> reproduce_table1_from_config(std::string_view json_text,
                                                    int replications,
                                                    std::uint64_t master_seed,
                                                    int workers) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("table1 config: ") + e.what());
  }
  if (!j.is_array() || j.empty())
    throw DataError("table1 config: expected a nonempty JSON array");

  std::vector<Table1Row> rows;
  std::vector<MonteCarloSummary> summaries;
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ExperimentConfig config = experiment_config_from_json(j[i].dump());
    config.replications = replications;
    config.master_seed = derive_seed(master_seed, i + 1);
    configs.push_back(std::move(config));
  }
  for (const auto& config : configs)
    summaries.push_back(run_experiment(config, workers));

  for (Method method :
       {Method::naive, Method::jackknife, Method::block_bootstrap})
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      auto it = summaries[i].per_method.find(method);
      if (it == summaries[i].per_method.end()) continue;
      rows.push_back({method, static_cast<int>(i) + 1, it->second.mean_bias,
                      it->second.std_error});
    }
  return rows;
}

std::string table1_csv(std::span<const Table1Row> rows) {
  std::string out = "method,example,mean_bias,std_error\n";
  char buf[120];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g\n",
                  method_name(row.method).c_str(), row.example, row.mean_bias,
                  row.std_error);
    out += buf;
  }
  return out;
}

namespace {

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace

std::string summary_to_json(const MonteCarloSummary& summary) {
  std::string out = "{\"truth\":" + json_number(summary.truth);
  out += ",\"replications\":" + std::to_string(summary.replications);
  out += ",\"methods\":{";
  bool first = true;
  for (const auto& [method, ms] : summary.per_method) {
    if (!first) out += ",";
    first = false;
    out += "\"" + method_name(method) + "\":{";
    out += "\"mean_estimate\":" + json_number(ms.mean_estimate);
    out += ",\"mean_bias\":" + json_number(ms.mean_bias);
    out += ",\"std_error\":" + json_number(ms.std_error);
    out += "}";
  }
  out += "}}";
  return out;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["model"] = nlohmann::json::parse(model_to_json(config.model));
  j["k"] = config.k;
  j["n_treat"] = config.n_treat;
  j["n_control"] = config.n_control;
  j["replications"] = config.replications;
  j["master_seed"] = config.master_seed;
  auto methods = nlohmann::json::array();
  for (Method m : config.methods) methods.push_back(method_name(m));
  j["methods"] = std::move(methods);
  j["bootstrap"] = {{"replicates", config.bootstrap.replicates},
                    {"block_len", config.bootstrap.block_len}};
  return j.dump(2);
}

ExperimentConfig experiment_config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config json: ") + e.what());
  }
  try {
    ExperimentConfig config;
    config.model = model_from_json(j.at("model").dump());
    config.k = j.value("k", config.k);
    config.n_treat = j.value("n_treat", config.n_treat);
    config.n_control = j.value("n_control", config.n_control);
    config.replications = j.value("replications", config.replications);
    config.master_seed = j.value("master_seed", config.master_seed);
    if (j.contains("methods")) {
      config.methods.clear();
      for (const auto& name : j.at("methods"))
        config.methods.push_back(method_from_name(name.get<std::string>()));
    }
    if (j.contains("bootstrap")) {
      const auto& b = j.at("bootstrap");
      config.bootstrap.replicates =
          b.value("replicates", config.bootstrap.replicates);
      config.bootstrap.block_len =
          b.value("block_len", config.bootstrap.block_len);
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config json: ") + e.what());
  }
}

}  // namespace abbias
