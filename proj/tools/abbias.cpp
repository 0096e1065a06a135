// abbias command-line frontend: simulate panels, estimate treatment effects
// from panel CSVs, evaluate the analytic bias curve, and rerun the built-in
// simulation study. All numeric work lives in abbias_core; this file only
// parses flags, moves bytes and maps errors to exit codes (0 ok, 1 bad
// input, 2 computation failure).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abbias/analytic.hpp"
#include "abbias/error.hpp"
#include "abbias/estimators.hpp"
#include "abbias/harness.hpp"
#include "abbias/panel.hpp"
#include "abbias/simulate.hpp"

namespace {

using namespace abbias;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 1;
constexpr int kExitComputation = 2;

std::vector<double> parse_double_list(const std::string& text,
                                      const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError(std::string(what) + ": bad number '" + item + "'");
    }
  }
  if (values.empty())
    throw ParameterError(std::string(what) + ": empty list");
  return values;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  for (double v : parse_double_list(text, what)) {
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
      throw ParameterError(std::string(what) + ": expected integers");
    values.push_back(i);
  }
  return values;
}

// Shared model flags. A model comes from --example, --model-json, or inline
// distribution flags, in that priority order.
struct ModelOptions {
  int example = 0;
  std::string model_json_path;
  std::string dist;
  double alpha = 1.0;
  double beta = 1.0;
  std::string masses;  // "p:w,p:w"
  std::string effect = "0,1";
  std::string control = "1";
  double noise_sd = 0.01;
  double novelty_amplitude = 0.0;
  bool has_novelty = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& opts) {
  auto* example =
      cmd->add_option("--example", opts.example,
                      "Built-in generator preset (1 or 2)")
          ->check(CLI::Range(1, 2));
  auto* json = cmd->add_option("--model-json", opts.model_json_path,
                               "Model description JSON file");
  example->excludes(json);
  json->excludes(example);
  cmd->add_option("--dist", opts.dist,
                  "Activity distribution: uniform, beta or point_masses")
      ->check(CLI::IsMember({"uniform", "beta", "point_masses"}));
  cmd->add_option("--alpha", opts.alpha, "Beta distribution alpha");
  cmd->add_option("--beta", opts.beta, "Beta distribution beta");
  cmd->add_option("--masses", opts.masses,
                  "Point masses as p:w pairs, e.g. 1:0.5,0.5:0.5");
  cmd->add_option("--effect", opts.effect,
                  "Treatment effect polynomial coefficients (ascending)");
  cmd->add_option("--control", opts.control,
                  "Control outcome polynomial coefficients (ascending)");
  cmd->add_option("--noise-sd", opts.noise_sd, "Outcome noise SD");
  cmd->add_option("--novelty-amplitude", opts.novelty_amplitude,
                  "Novelty decay amplitude (effect factor 1 + a/active-days)")
      ->each([&opts](const std::string&) { opts.has_novelty = true; });
}

BehaviorModel build_model(const ModelOptions& opts) {
  if (opts.example == 1) return example1_model();
  if (opts.example == 2) return example2_model();
  if (!opts.model_json_path.empty()) {
    std::ifstream in(opts.model_json_path, std::ios::binary);
    if (!in)
      throw ParameterError("cannot open model file '" + opts.model_json_path +
                           "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
  }
  if (opts.dist.empty())
    throw ParameterError(
        "no model given: use --example, --model-json or --dist");

  BehaviorModel model;
  if (opts.dist == "uniform") {
    model.activity = UniformDist{};
  } else if (opts.dist == "beta") {
    model.activity = BetaDist{opts.alpha, opts.beta};
  } else {
    if (opts.masses.empty())
      throw ParameterError("--dist point_masses requires --masses");
    PointMassDist pm;
    std::stringstream ss(opts.masses);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ParameterError("--masses: expected p:w, got '" + item + "'");
      try {
        pm.masses.push_back({std::stod(item.substr(0, colon)),
                             std::stod(item.substr(colon + 1))});
      } catch (const std::exception&) {
        throw ParameterError("--masses: bad number in '" + item + "'");
      }
    }
    model.activity = std::move(pm);
  }
  model.effect = Polynomial(parse_double_list(opts.effect, "--effect"));
  model.control = Polynomial(parse_double_list(opts.control, "--control"));
  model.noise_sd = opts.noise_sd;
  if (opts.has_novelty) model.novelty = NoveltySpec{opts.novelty_amplitude};
  validate(model);
  return model;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

PanelDataset load_panel(const std::string& path, std::optional<int> k_flag) {
  std::optional<int> k = k_flag;
  if (!k) k = read_sidecar_k(path);
  return read_panel_csv(path, k);
}

void warn_if_not_incremental(const PanelDataset& panel) {
  try {
    IncrementalityReport report = check_incrementality(panel, 0.05);
    if (!report.passed)
      std::fprintf(stderr,
                   "warning: mean active days differ across arms "
                   "(%.6g vs %.6g, p = %.6g); treatment may be changing "
                   "visit frequency and the estimates may not generalize\n",
                   report.mean_active_days_treat,
                   report.mean_active_days_control, report.p_value);
  } catch (const DegenerateArmError&) {
    // Too few users to run the diagnostic; the estimators themselves decide.
  }
}

// ---- subcommand runners -------------------------------------------------

int run_simulate(const ModelOptions& model_opts, int k, int n_treat,
                 int n_control, std::uint64_t seed, const std::string& out,
                 bool allow_short, double activity_shift) {
  BehaviorModel model = build_model(model_opts);
  auto population = sample_population(model, n_treat, n_control, seed);
  PanelDataset panel =
      generate_panel(population, model, k, seed, activity_shift, allow_short);
  write_panel_csv(panel, out);
  write_panel_sidecar(out, k, seed, model);
  ArmCounts counts = appearing_users(panel);
  std::printf("wrote %s: %zu rows, %d/%d treatment and %d/%d control users "
              "appearing (sidecar %s.json)\n",
              out.c_str(), panel.rows.size(), counts.treat, n_treat,
              counts.control, n_control, out.c_str());
  return kExitOk;
}

int run_estimate(const std::string& in, std::optional<int> k_flag,
                 const std::string& methods_text, int bootstrap_replicates,
                 int block_len, std::optional<std::uint64_t> seed,
                 bool classical_variance, const std::string& window_text) {
  PanelDataset panel = load_panel(in, k_flag);

  std::vector<Method> methods;
  {
    std::stringstream ss(methods_text);
    std::string item;
    while (std::getline(ss, item, ','))
      methods.push_back(method_from_name(item));
  }
  if (methods.empty()) throw ParameterError("--methods: empty list");

  std::optional<std::vector<int>> window;
  if (!window_text.empty()) {
    window = parse_int_list(window_text, "--window");
    for (Method m : methods)
      if (m != Method::naive)
        throw ParameterError("--window only applies to the naive estimator");
  }

  warn_if_not_incremental(panel);

  std::string out = "[";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out += ",";
    switch (methods[i]) {
      case Method::naive:
        out += to_json(window ? naive_scaled(panel, *window)
                              : naive_scaled(panel));
        break;
      case Method::jackknife:
        out += to_json(jackknife_adjusted(panel, classical_variance));
        break;
      case Method::block_bootstrap:
        if (!seed)
          throw ParameterError("block_bootstrap requires an explicit --seed");
        out += to_json(block_bootstrap_adjusted(panel, bootstrap_replicates,
                                                block_len, *seed));
        break;
    }
  }
  out += "]";
  std::printf("%s\n", out.c_str());
  return kExitOk;
}

int run_analytic(const ModelOptions& model_opts, int k) {
  BehaviorModel model = build_model(model_opts);
  const double estimand = compute_estimand(model);
  const double expected = compute_expected_naive(model, k);

  char buf[64];
  std::string out = "{\"k\":" + std::to_string(k);
  auto append = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, ",\"%s\":%.16e", key, v);
    out += buf;
  };
  append("estimand", estimand);
  append("expected_naive", expected);
  append("exact_bias", expected - estimand);
  try {
    append("first_order_bias", compute_first_order_bias(model, k));
  } catch (const ModelError& e) {
    out += ",\"first_order_bias\":null";
    std::fprintf(stderr, "warning: %s\n", e.what());
  }
  out += "}";
  std::printf("%s\n", out.c_str());
  return kExitOk;
}

int run_bias_curve(const ModelOptions& model_opts, const std::string& k_text,
                   bool analytic_only, int reps,
                   std::optional<std::uint64_t> seed, int n_treat,
                   int n_control, int workers, const std::string& out_path) {
  BehaviorModel model = build_model(model_opts);
  std::vector<int> k_values = parse_int_list(k_text, "--k-values");

  std::string csv;
  if (analytic_only) {
    csv = bias_curve_csv(bias_curve(model, k_values));
  } else {
    if (!seed)
      throw ParameterError(
          "--seed is required unless --analytic-only is given");
    ExperimentConfig config;
    config.model = model;
    config.n_treat = n_treat;
    config.n_control = n_control;
    config.replications = reps;
    config.master_seed = *seed;
    csv = bias_vs_duration_csv(bias_vs_duration(config, k_values, workers));
  }

  if (out_path.empty())
    std::fputs(csv.c_str(), stdout);
  else {
    write_text_file(out_path, csv);
    std::printf("wrote %s\n", out_path.c_str());
  }
  return kExitOk;
}

int run_reproduce_table1(int reps, std::uint64_t seed, int workers,
                         const std::string& out_path,
                         const std::string& json_path,
                         const std::string& config_path) {
  std::vector<Table1Row> rows;
  if (config_path.empty()) {
    rows = reproduce_table1(reps, seed, workers);
  } else {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ParameterError("cannot open config '" + config_path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    rows = reproduce_table1_from_config(buffer.str(), reps, seed, workers);
  }

  std::string csv = table1_csv(rows);
  if (out_path.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_file(out_path, csv);
    for (const auto& row : rows)
      std::printf("%-16s example %d  mean_bias %+.6g  std_error %.6g\n",
                  method_name(row.method).c_str(), row.example, row.mean_bias,
                  row.std_error);
    std::printf("wrote %s\n", out_path.c_str());
  }

  if (!json_path.empty()) {
    std::string json = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "%s{\"method\":\"%s\",\"example\":%d,\"mean_bias\":%.16e,"
                    "\"std_error\":%.16e}",
                    i ? "," : "", method_name(rows[i].method).c_str(),
                    rows[i].example, rows[i].mean_bias, rows[i].std_error);
      json += buf;
    }
    json += "]\n";
    write_text_file(json_path, json);
  }
  return kExitOk;
}

int run_check_incrementality(const std::string& in, std::optional<int> k_flag,
                             double alpha) {
  PanelDataset panel = load_panel(in, k_flag);
  IncrementalityReport report = check_incrementality(panel, alpha);
  std::printf("%s\n", to_json(report).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-user selection bias toolkit for fixed-duration A/B "
               "tests: simulate panels, estimate effects, quantify bias"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic panel CSV (plus .json sidecar)");
  ModelOptions sim_model;
  add_model_options(simulate, sim_model);
  int sim_k = 14, sim_n = 0, sim_n_treat = 1000, sim_n_control = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  bool sim_allow_short = false;
  double sim_shift = 0.0;
  simulate->add_option("--k", sim_k, "Experiment duration in days")->required();
  simulate->add_option("--n", sim_n, "Users per arm (sets both arms)");
  simulate->add_option("--n-treat", sim_n_treat, "Treatment arm size");
  simulate->add_option("--n-control", sim_n_control, "Control arm size");
  simulate->add_option("--seed", sim_seed, "Master RNG seed")->required();
  simulate->add_option("--out", sim_out, "Output CSV path")->required();
  simulate->add_flag("--allow-short", sim_allow_short,
                     "Permit k = 1 (output cannot feed the jackknife)");
  simulate->add_option("--treat-activity-shift", sim_shift,
                       "Shift treated users' activity probability (diagnostic "
                       "testing only)");

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "Run estimators on a panel CSV, JSON results to stdout");
  std::string est_in, est_methods = "naive,jackknife", est_window;
  int est_k = 0, est_breps = 100, est_blen = 1;
  std::uint64_t est_seed = 0;
  bool est_classical = false, est_seed_given = false;
  estimate->add_option("--in", est_in, "Panel CSV path")->required();
  estimate->add_option("--k", est_k, "Duration override (default: sidecar or max day)");
  estimate->add_option("--methods", est_methods,
                       "Comma list of naive,jackknife,block_bootstrap");
  estimate->add_option("--bootstrap-replicates", est_breps,
                       "Bootstrap replicate count");
  estimate->add_option("--block-len", est_blen, "Bootstrap block length (days)");
  estimate->add_option("--seed", est_seed, "Bootstrap RNG seed")
      ->each([&est_seed_given](const std::string&) { est_seed_given = true; });
  estimate->add_flag("--classical-jackknife-variance", est_classical,
                     "Use the (k-1)/k jackknife variance factor");
  estimate->add_option("--window", est_window,
                       "Day subset for the naive estimator, e.g. 1,2,5");

  // analytic
  auto* analytic = app.add_subcommand(
      "analytic", "Closed-form estimand, expected estimate and bias for one k");
  ModelOptions ana_model;
  add_model_options(analytic, ana_model);
  int ana_k = 14;
  analytic->add_option("--k", ana_k, "Experiment duration in days")->required();

  // bias-curve
  auto* curve = app.add_subcommand(
      "bias-curve", "Bias versus duration, analytic and/or simulated (CSV)");
  ModelOptions curve_model;
  add_model_options(curve, curve_model);
  std::string curve_k_values, curve_out;
  bool curve_analytic_only = false;
  int curve_reps = 100, curve_n_treat = 1000, curve_n_control = 1000,
      curve_workers = 0;
  std::uint64_t curve_seed = 0;
  bool curve_seed_given = false;
  curve->add_option("--k-values", curve_k_values, "Durations, e.g. 7,14,28")
      ->required();
  curve->add_flag("--analytic-only", curve_analytic_only,
                  "Skip simulation; emit closed-form columns only");
  curve->add_option("--reps", curve_reps, "Monte Carlo replications per k");
  curve->add_option("--seed", curve_seed, "Master RNG seed")
      ->each([&curve_seed_given](const std::string&) { curve_seed_given = true; });
  curve->add_option("--n-treat", curve_n_treat, "Treatment arm size");
  curve->add_option("--n-control", curve_n_control, "Control arm size");
  curve->add_option("--workers", curve_workers,
                    "Worker threads (0 = hardware)");
  curve->add_option("--out", curve_out, "Output CSV path (default stdout)");

  // reproduce-table1
  auto* table1 = app.add_subcommand(
      "reproduce-table1",
      "Rerun the built-in two-example study; CSV of per-method mean bias");
  int t1_reps = 100, t1_workers = 0;
  std::uint64_t t1_seed = 0;
  std::string t1_out, t1_json, t1_config;
  table1->add_option("--reps", t1_reps, "Replications per example");
  table1->add_option("--seed", t1_seed, "Master RNG seed")->required();
  table1->add_option("--workers", t1_workers, "Worker threads (0 = hardware)");
  table1->add_option("--out", t1_out, "Output CSV path (default stdout)");
  table1->add_option("--json", t1_json, "Also write summary JSON here");
  table1->add_option("--config", t1_config,
                     "Experiment config JSON array (default: built-ins, "
                     "mirrored in configs/table1.json)");

  // check-incrementality
  auto* check = app.add_subcommand(
      "check-incrementality",
      "Welch t-test on per-user active days across arms");
  std::string chk_in;
  int chk_k = 0;
  double chk_alpha = 0.05;
  check->add_option("--in", chk_in, "Panel CSV path")->required();
  check->add_option("--k", chk_k, "Duration override");
  check->add_option("--alpha", chk_alpha, "Significance level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (simulate->parsed()) {
      if (sim_n > 0) sim_n_treat = sim_n_control = sim_n;
      return run_simulate(sim_model, sim_k, sim_n_treat, sim_n_control,
                          sim_seed, sim_out, sim_allow_short, sim_shift);
    }
    if (estimate->parsed())
      return run_estimate(est_in,
                          est_k > 0 ? std::optional<int>(est_k) : std::nullopt,
                          est_methods, est_breps, est_blen,
                          est_seed_given ? std::optional<std::uint64_t>(est_seed)
                                         : std::nullopt,
                          est_classical, est_window);
    if (analytic->parsed()) return run_analytic(ana_model, ana_k);
    if (curve->parsed())
      return run_bias_curve(curve_model, curve_k_values, curve_analytic_only,
                            curve_reps,
                            curve_seed_given
                                ? std::optional<std::uint64_t>(curve_seed)
                                : std::nullopt,
                            curve_n_treat, curve_n_control, curve_workers,
                            curve_out);
    if (table1->parsed())
      return run_reproduce_table1(t1_reps, t1_seed, t1_workers, t1_out,
                                  t1_json, t1_config);
    if (check->parsed())
      return run_check_incrementality(
          chk_in, chk_k > 0 ? std::optional<int>(chk_k) : std::nullopt,
          chk_alpha);
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitComputation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitComputation;
  }
  return kExitOk;
}
