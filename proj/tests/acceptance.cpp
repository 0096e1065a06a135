// Acceptance suite: one line per criterion, nonzero exit if any fails.
// These are the end-to-end checks the library must hold: analytic closed
// forms, reproduction of the built-in simulation study within its Monte
// Carlo error, cross-checks between the simulation and quadrature paths,
// and byte-level determinism of the command-line frontend.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "abbias/analytic.hpp"
#include "abbias/error.hpp"
#include "abbias/estimators.hpp"
#include "abbias/harness.hpp"
#include "abbias/rng.hpp"
#include "abbias/simulate.hpp"

using namespace abbias;

namespace {

constexpr std::uint64_t kMasterSeed = 1902;

// Reference values and standard errors from the study this reproduces.
constexpr double kRefNaiveBias1 = 0.0220, kRefNaiveSe1 = 0.0023;
constexpr double kRefJackBias1 = -0.0022, kRefJackSe1 = 0.0026;
constexpr double kRefNaiveBias2 = 0.0373, kRefNaiveSe2 = 0.0020;
constexpr double kRefJackBias2 = 0.0132, kRefJackSe2 = 0.0023;
constexpr double kRefBootBias2 = 0.0232, kRefBootSe2 = 0.0022;

struct Check {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

const std::vector<Table1Row>& table1_rows() {
  static std::vector<Table1Row> rows = reproduce_table1(100, kMasterSeed);
  return rows;
}

Table1Row find_row(Method method, int example) {
  for (const auto& row : table1_rows())
    if (row.method == method && row.example == example) return row;
  throw Error("missing table row");
}

// Agreement band between our mean bias and a reference mean with its own
// sampling error: 3 standard errors of the difference.
bool agrees(double ours, double ours_se, double ref, double ref_se,
            double z = 3.0) {
  return std::abs(ours - ref) <= z * std::hypot(ours_se, ref_se);
}

Check criterion_analytic_ground_truth() {
  double estimand = compute_estimand(example1_model());
  double err = std::abs(estimand - 1.0 / 3.0);
  return {err <= 1e-10, fmt("estimand %.12f, |err| %.2e <= 1e-10", estimand, err)};
}

Check criterion_exact_bias_closed_form() {
  BehaviorModel model = example1_model();
  double bias = compute_expected_naive(model, 14) - compute_estimand(model);
  double err = std::abs(bias - 1.0 / 42.0);
  return {err <= 1e-9, fmt("bias %.12f vs 1/42, |err| %.2e <= 1e-9", bias, err)};
}

Check criterion_example1_reproduction() {
  Table1Row naive = find_row(Method::naive, 1);
  Table1Row jack = find_row(Method::jackknife, 1);
  bool naive_vs_ref = agrees(naive.mean_bias, naive.std_error, kRefNaiveBias1,
                             kRefNaiveSe1);
  bool naive_vs_oracle =
      std::abs(naive.mean_bias - 1.0 / 42.0) <= 3.0 * naive.std_error;
  bool jack_vs_ref =
      agrees(jack.mean_bias, jack.std_error, kRefJackBias1, kRefJackSe1);
  bool ordering = std::abs(jack.mean_bias) < std::abs(naive.mean_bias);
  return {naive_vs_ref && naive_vs_oracle && jack_vs_ref && ordering,
          fmt("naive %+.4f (se %.4f) vs %+.4f ref / %.4f oracle; "
              "jackknife %+.4f (se %.4f) vs %+.4f ref; |jack| < |naive| %s",
              naive.mean_bias, naive.std_error, kRefNaiveBias1, 1.0 / 42.0,
              jack.mean_bias, jack.std_error, kRefJackBias1,
              ordering ? "yes" : "NO")};
}

Check criterion_example2_reproduction() {
  Table1Row naive = find_row(Method::naive, 2);
  Table1Row jack = find_row(Method::jackknife, 2);
  Table1Row boot = find_row(Method::block_bootstrap, 2);
  bool naive_ok = agrees(naive.mean_bias, naive.std_error, kRefNaiveBias2,
                         kRefNaiveSe2);
  bool jack_ok =
      agrees(jack.mean_bias, jack.std_error, kRefJackBias2, kRefJackSe2);
  bool boot_ok = agrees(boot.mean_bias, boot.std_error, kRefBootBias2,
                        kRefBootSe2, 4.0);
  bool ordering = std::abs(jack.mean_bias) < std::abs(boot.mean_bias) &&
                  std::abs(boot.mean_bias) < std::abs(naive.mean_bias);
  return {naive_ok && jack_ok && boot_ok && ordering,
          fmt("naive %+.4f vs %+.4f; jackknife %+.4f vs %+.4f; bootstrap "
              "%+.4f vs %+.4f; |jack| < |boot| < |naive| %s",
              naive.mean_bias, kRefNaiveBias2, jack.mean_bias, kRefJackBias2,
              boot.mean_bias, kRefBootBias2, ordering ? "yes" : "NO")};
}

Check criterion_first_order_remainder() {
  BehaviorModel uniform = example1_model();
  BehaviorModel beta22;
  beta22.activity = BetaDist{2.0, 2.0};
  beta22.effect = Polynomial{0.0, 1.0};

  double max_uniform = 0.0, max_beta = 0.0;
  bool beta_first_order_zero = true;
  for (int k = 10; k <= 200; k += 10) {
    BiasAnalysis u = analyze_bias(uniform, k);
    double ru = std::abs(u.exact_bias - u.first_order_bias) * k * k;
    if (!std::isfinite(ru)) return {false, "non-finite remainder"};
    max_uniform = std::max(max_uniform, ru);

    BiasAnalysis b = analyze_bias(beta22, k);
    if (b.first_order_bias != 0.0) beta_first_order_zero = false;
    max_beta = std::max(max_beta, std::abs(b.exact_bias) * k * k);
  }
  // The uniform remainder is exactly zero, so the scaled residual must sit at
  // the quadrature noise floor; Beta(2,2) has f(0) = 0 and a bounded k^2 bias.
  bool ok = max_uniform < 1e-5 && beta_first_order_zero && max_beta < 2.5;
  return {ok, fmt("uniform max |rem|*k^2 %.2e (< 1e-5), Beta(2,2) first-order "
                  "zero %s, max |bias|*k^2 %.3f (< 2.5)",
                  max_uniform, beta_first_order_zero ? "yes" : "NO", max_beta)};
}

Check criterion_jackknife_identity() {
  SplitMix64 rng(kMasterSeed);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    double a = 20.0 * rng.uniform01() - 10.0;
    double b = 20.0 * rng.uniform01() - 10.0;
    int k = 2 + static_cast<int>(rng.below(99));
    std::vector<double> loo(k, a + b / (k - 1));
    double err = std::abs(jackknife_point(a + b / k, loo) - a) /
                 (1.0 + std::abs(a) + std::abs(b));
    worst = std::max(worst, err);
  }
  return {worst <= 1e-12,
          fmt("worst relative error %.2e <= 1e-12 over 100 sequences", worst)};
}

Check criterion_simulation_vs_quadrature() {
  SplitMix64 rng(derive_seed(kMasterSeed, 7));
  bool all_ok = true;
  std::string detail;
  for (int trial = 0; trial < 5; ++trial) {
    BehaviorModel model;
    model.activity = BetaDist{0.8 + 3.2 * rng.uniform01(),
                              0.8 + 3.2 * rng.uniform01()};
    model.effect = Polynomial{0.2 + rng.uniform01(), rng.uniform01(),
                              rng.uniform01()};
    model.control = Polynomial{1.0, rng.uniform01()};
    model.noise_sd = 0.01;

    ExperimentConfig config;
    config.model = model;
    config.k = 10;
    config.n_treat = 500;
    config.n_control = 500;
    config.replications = 500;
    config.master_seed = derive_seed(kMasterSeed, 100 + trial);
    config.methods = {Method::naive};

    MonteCarloSummary summary = run_experiment(config);
    double expected = compute_expected_naive(model, config.k);
    const MethodSummary& naive = summary.per_method.at(Method::naive);
    double gap = std::abs(naive.mean_estimate - expected);
    bool ok = gap <= 3.0 * naive.std_error;
    all_ok = all_ok && ok;
    detail += fmt("%s%.2f-sigma", trial ? ", " : "",
                  naive.std_error > 0 ? gap / naive.std_error : 0.0);
  }
  return {all_ok, "simulated mean vs quadrature: " + detail};
}

Check criterion_one_day_composition() {
  BehaviorModel model;
  model.activity = PointMassDist{{{1.0, 0.5}, {0.5, 0.5}}};
  model.effect = Polynomial{0.0, 1.0};
  model.control = Polynomial{1.0};

  const int reps = 10000;
  double appear_sum = 0.0, appear_sq = 0.0;
  double heavy_total = 0.0, appear_total = 0.0;
  double share_sum = 0.0, share_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto population = sample_population(
        model, 100, 100, derive_seed(kMasterSeed, 200, r));
    PanelDataset panel = generate_panel(
        population, model, 1, derive_seed(kMasterSeed, 201, r), 0.0, true);

    int appearing = 0, heavy = 0;
    std::int64_t last = -1;
    for (const auto& row : panel.rows) {
      if (row.user_id == last) continue;
      last = row.user_id;
      ++appearing;
      if (panel.truth.at(row.user_id) == 1.0) ++heavy;
    }
    appear_sum += appearing;
    appear_sq += static_cast<double>(appearing) * appearing;
    heavy_total += heavy;
    appear_total += appearing;
    double share = static_cast<double>(heavy) / appearing;
    share_sum += share;
    share_sq += share * share;
  }

  double mean_appear = appear_sum / reps;
  double sd_appear =
      std::sqrt((appear_sq - appear_sum * appear_sum / reps) / (reps - 1));
  double se_appear = sd_appear / std::sqrt(static_cast<double>(reps));

  // Pooled share (total heavy appearances over total appearances): the
  // per-replication ratio has a small curvature bias of order 1/users that
  // the pooled estimator does not.
  double pooled_share = heavy_total / appear_total;
  double sd_share =
      std::sqrt((share_sq - share_sum * share_sum / reps) / (reps - 1));
  double se_share = sd_share / std::sqrt(static_cast<double>(reps));

  bool appear_ok = std::abs(mean_appear - 150.0) <= 3.0 * se_appear;
  bool share_ok = std::abs(pooled_share - 2.0 / 3.0) <= 3.0 * se_share;
  return {appear_ok && share_ok,
          fmt("mean appearing %.3f vs 150 (se %.3f); heavy share %.5f vs "
              "%.5f (se %.5f)",
              mean_appear, se_appear, pooled_share, 2.0 / 3.0, se_share)};
}

Check criterion_cli_determinism() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() /
                 ("abbias_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  auto run = [&](const std::string& name, int workers) {
    std::string out = (dir / name).string();
    std::string cmd = std::string(ABBIAS_CLI_BIN) +
                      " reproduce-table1 --reps 10 --seed 4242 --workers " +
                      std::to_string(workers) + " --out " + out +
                      " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return std::string();
    std::ifstream in(out, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };

  std::string a = run("a.csv", 1);
  std::string b = run("b.csv", 3);
  std::string c = run("c.csv", 1);
  fs::remove_all(dir);

  bool ok = !a.empty() && a == b && a == c;
  return {ok, ok ? fmt("3 runs, %zu bytes each, byte-identical", a.size())
                 : "outputs differ or a run failed"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "analytic ground truth", criterion_analytic_ground_truth},
      {2, "exact bias closed form", criterion_exact_bias_closed_form},
      {3, "example 1 reproduction", criterion_example1_reproduction},
      {4, "example 2 reproduction", criterion_example2_reproduction},
      {5, "first-order remainder", criterion_first_order_remainder},
      {6, "jackknife identity", criterion_jackknife_identity},
      {7, "simulation vs quadrature", criterion_simulation_vs_quadrature},
      {8, "one-day experiment composition", criterion_one_day_composition},
      {9, "deterministic reproduction", criterion_cli_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.fn();
    } catch (const std::exception& e) {
      check = {false, std::string("exception: ") + e.what()};
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n",
                check.ok ? "PASS" : "FAIL", criterion.id, criterion.name,
                check.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!check.ok) ++failures;
  }

  if (failures)
    std::printf("%d of %zu criteria FAILED\n", failures, criteria.size());
  else
    std::printf("all %zu criteria passed\n", criteria.size());
  return failures;
}
