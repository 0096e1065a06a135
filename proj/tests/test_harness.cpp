#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "abbias/analytic.hpp"
#include "abbias/error.hpp"
#include "abbias/harness.hpp"
#include "doctest.h"

using namespace abbias;

namespace {

ExperimentConfig small_config(std::uint64_t seed) {
  ExperimentConfig config;
  config.model = example1_model();
  config.k = 7;
  config.n_treat = 120;
  config.n_control = 120;
  config.replications = 40;
  config.master_seed = seed;
  config.methods = {Method::naive, Method::jackknife, Method::block_bootstrap};
  config.bootstrap.replicates = 30;
  return config;
}

bool summaries_equal(const MonteCarloSummary& a, const MonteCarloSummary& b) {
  if (a.truth != b.truth || a.replications != b.replications) return false;
  if (a.per_method.size() != b.per_method.size()) return false;
  for (const auto& [method, ms] : a.per_method) {
    auto it = b.per_method.find(method);
    if (it == b.per_method.end()) return false;
    if (ms.mean_estimate != it->second.mean_estimate) return false;
    if (ms.mean_bias != it->second.mean_bias) return false;
    if (ms.std_error != it->second.std_error) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("summaries are identical for any worker count") {
  ExperimentConfig config = small_config(77);
  MonteCarloSummary serial = run_experiment(config, 1);
  MonteCarloSummary parallel4 = run_experiment(config, 4);
  MonteCarloSummary parallel3 = run_experiment(config, 3);
  CHECK(summaries_equal(serial, parallel4));
  CHECK(summaries_equal(serial, parallel3));
}

TEST_CASE("truth is the analytic estimand, not an empirical mean") {
  ExperimentConfig config = small_config(78);
  MonteCarloSummary summary = run_experiment(config, 2);
  CHECK(summary.truth == compute_estimand(config.model));
  for (const auto& [method, ms] : summary.per_method)
    CHECK(ms.mean_bias == ms.mean_estimate - summary.truth);
}

TEST_CASE("different master seeds give different but compatible answers") {
  MonteCarloSummary a = run_experiment(small_config(1001), 0);
  MonteCarloSummary b = run_experiment(small_config(2002), 0);
  const MethodSummary& na = a.per_method.at(Method::naive);
  const MethodSummary& nb = b.per_method.at(Method::naive);
  CHECK(na.mean_estimate != nb.mean_estimate);
  // reported standard errors describe the spread across reruns
  double z = std::abs(na.mean_bias - nb.mean_bias) /
             std::hypot(na.std_error, nb.std_error);
  CHECK(z < 4.0);
  CHECK(na.std_error / nb.std_error > 0.5);
  CHECK(na.std_error / nb.std_error < 2.0);
}

TEST_CASE("config validation") {
  ExperimentConfig config = small_config(1);
  config.replications = 1;
  CHECK_THROWS_AS(run_experiment(config), ParameterError);
  config = small_config(1);
  config.methods.clear();
  CHECK_THROWS_AS(run_experiment(config), ParameterError);
  config = small_config(1);
  config.k = 1;
  CHECK_THROWS_AS(run_experiment(config), DurationError);
  config = small_config(1);
  config.bootstrap.block_len = 99;
  CHECK_THROWS_AS(run_experiment(config), ParameterError);
}

TEST_CASE("a failing replication reports its index") {
  ExperimentConfig config;
  config.model = example1_model();
  config.model.activity = PointMassDist{{{0.02, 1.0}}};  // arms mostly empty
  config.k = 2;
  config.n_treat = 1;
  config.n_control = 1;
  config.replications = 20;
  config.master_seed = 5;
  config.methods = {Method::naive};
  try {
    run_experiment(config, 1);
    FAIL("expected a replication failure");
  } catch (const ReplicationError& e) {
    CHECK(e.replication() >= 0);
    CHECK(e.replication() < 20);
    CHECK(std::string(e.what()).find("replication") != std::string::npos);
  }
}

TEST_CASE("failure index does not depend on the schedule") {
  ExperimentConfig config;
  config.model = example1_model();
  config.model.activity = PointMassDist{{{0.15, 1.0}}};
  config.k = 2;
  config.n_treat = 2;
  config.n_control = 2;
  config.replications = 60;
  config.master_seed = 123;
  config.methods = {Method::naive};

  auto failing_index = [&](int workers) {
    try {
      run_experiment(config, workers);
      return -1;
    } catch (const ReplicationError& e) {
      return e.replication();
    }
  };
  int serial = failing_index(1);
  REQUIRE(serial >= 0);
  CHECK(failing_index(4) == serial);
}

TEST_CASE("bias curve tracks the analytic column") {
  ExperimentConfig config;
  config.model = example1_model();
  config.n_treat = 300;
  config.n_control = 300;
  config.replications = 150;
  config.master_seed = 909;

  const int ks[] = {7, 14, 28};
  auto rows = bias_vs_duration(config, ks, 0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].exact_bias == doctest::Approx(1.0 / 21).epsilon(1e-8));
  CHECK(rows[1].exact_bias == doctest::Approx(1.0 / 42).epsilon(1e-8));
  CHECK(rows[2].exact_bias == doctest::Approx(1.0 / 84).epsilon(1e-8));
  for (const auto& row : rows) {
    CHECK(std::abs(row.naive_bias - row.exact_bias) < 3 * row.naive_se);
    CHECK(std::abs(row.jackknife_bias) <=
          std::abs(row.naive_bias) + 3 * row.jackknife_se);
    CHECK(row.first_order_bias ==
          doctest::Approx(row.exact_bias).epsilon(1e-6));
  }

  std::string csv = bias_vs_duration_csv(rows);
  CHECK(csv.rfind("k,empirical_naive_bias,empirical_naive_se,"
                  "empirical_jackknife_bias,empirical_jackknife_se,"
                  "analytic_exact_bias,analytic_first_order_bias\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const int bad[] = {1};
  CHECK_THROWS_AS(bias_vs_duration(config, bad, 1), DurationError);
}

TEST_CASE("table rows cover methods x examples deterministically") {
  auto rows = reproduce_table1(4, 55, 0);
  REQUIRE(rows.size() == 6);
  int example_one = 0;
  for (const auto& row : rows)
    if (row.example == 1) ++example_one;
  CHECK(example_one == 3);

  auto again = reproduce_table1(4, 55, 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].method == again[i].method);
    CHECK(rows[i].example == again[i].example);
    CHECK(rows[i].mean_bias == again[i].mean_bias);
    CHECK(rows[i].std_error == again[i].std_error);
  }

  std::string csv = table1_csv(rows);
  CHECK(csv.rfind("method,example,mean_bias,std_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("estimator quality at study scale") {
  // 100 replications of the first built-in example. The jackknife must beat
  // the naive estimator on mean bias, and day-resampling bootstrap
  // correction should remove roughly half the bias without overshooting.
  MonteCarloSummary summary =
      run_experiment(table1_config(1, 100, 314159), 0);
  const MethodSummary& naive = summary.per_method.at(Method::naive);
  const MethodSummary& jack = summary.per_method.at(Method::jackknife);
  const MethodSummary& boot = summary.per_method.at(Method::block_bootstrap);

  CHECK(std::abs(jack.mean_bias) < std::abs(naive.mean_bias));
  CHECK(std::abs(naive.mean_bias - 1.0 / 42.0) < 3 * naive.std_error);
  CHECK(boot.mean_bias >= 0.000);
  CHECK(boot.mean_bias <= 0.016);
}

TEST_CASE("experiment config json round trip") {
  ExperimentConfig config = small_config(314);
  config.model = example2_model();
  std::string json = experiment_config_to_json(config);
  ExperimentConfig back = experiment_config_from_json(json);
  CHECK(experiment_config_to_json(back) == json);
  CHECK(back.master_seed == config.master_seed);
  CHECK(back.methods == config.methods);
  CHECK(back.bootstrap.replicates == config.bootstrap.replicates);

  CHECK_THROWS_AS(experiment_config_from_json("[]"), DataError);
  CHECK_THROWS_AS(
      experiment_config_from_json(
          "{\"model\":{\"activity\":{\"type\":\"uniform\"}},"
          "\"methods\":[\"magic\"]}"),
      ParameterError);
}

TEST_CASE("checked-in table config matches the built-in presets") {
  std::ifstream in(std::string(ABBIAS_CONFIG_DIR) + "/table1.json");
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();

  auto from_file = reproduce_table1_from_config(buffer.str(), 3, 99, 0);
  auto built_in = reproduce_table1(3, 99, 0);
  REQUIRE(from_file.size() == built_in.size());
  for (std::size_t i = 0; i < built_in.size(); ++i) {
    CHECK(from_file[i].method == built_in[i].method);
    CHECK(from_file[i].example == built_in[i].example);
    CHECK(from_file[i].mean_bias == built_in[i].mean_bias);
    CHECK(from_file[i].std_error == built_in[i].std_error);
  }
}

TEST_CASE("summary json carries truth and per-method stats") {
  MonteCarloSummary summary = run_experiment(small_config(8), 0);
  std::string json = summary_to_json(summary);
  CHECK(json.find("\"truth\":") != std::string::npos);
  CHECK(json.find("\"naive\"") != std::string::npos);
  CHECK(json.find("\"jackknife\"") != std::string::npos);
  CHECK(json.find("\"block_bootstrap\"") != std::string::npos);
  CHECK(json.find("\"replications\":40") != std::string::npos);
}
