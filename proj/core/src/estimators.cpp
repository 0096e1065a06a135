#include "abbias/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "abbias/error.hpp"
#include "abbias/rng.hpp"
#include "abbias/stats.hpp"

namespace abbias {

std::string method_name(Method method) {
  switch (method) {
    case Method::naive: return "naive";
    case Method::jackknife: return "jackknife";
    case Method::block_bootstrap: return "block_bootstrap";
  }
  return "unknown";
}

Method method_from_name(std::string_view name) {
  if (name == "naive") return Method::naive;
  if (name == "jackknife") return Method::jackknife;
  if (name == "block_bootstrap") return Method::block_bootstrap;
  throw ParameterError("unknown method '" + std::string(name) +
                       "' (expected naive, jackknife or block_bootstrap)");
}

namespace {

// Dense per-user view of a panel; built once per estimator call.
struct IndexedPanel {
  int k = 0;
  std::vector<Arm> arm;  // by dense user index, appearing users only
  std::vector<std::vector<std::pair<int, double>>> days;  // (day, outcome)
  int n_treat = 0;
  int n_control = 0;
};

IndexedPanel build_index(const PanelDataset& panel) {
  panel.validate();
  IndexedPanel idx;
  idx.k = panel.k;
  std::int64_t current = -1;
  for (const auto& row : panel.rows) {
    if (row.user_id != current) {
      current = row.user_id;
      Arm arm = panel.assignment.at(row.user_id);
      idx.arm.push_back(arm);
      idx.days.emplace_back();
      if (arm == Arm::treatment)
        ++idx.n_treat;
      else
        ++idx.n_control;
    }
    idx.days.back().emplace_back(row.day, row.outcome);
  }
  return idx;
}

struct WindowEstimate {
  double point = 0.0;
  int n_treat = 0;
  int n_control = 0;
};

// Naive estimator over a day multiset given as per-day multiplicities
// (index 0 unused). m is the total multiplicity. Users count as appearing if
// any day with multiplicity > 0 is active for them; sums weight outcomes by
// multiplicity.
WindowEstimate eval_window(const IndexedPanel& idx,
                           std::span<const int> day_mult, int m,
                           const char* what) {
  double sum_treat = 0.0, sum_control = 0.0;
  int n_treat = 0, n_control = 0;
  for (std::size_t u = 0; u < idx.days.size(); ++u) {
    double user_sum = 0.0;
    bool appears = false;
    for (const auto& [day, outcome] : idx.days[u]) {
      const int mult = day_mult[day];
      if (mult > 0) {
        appears = true;
        user_sum += mult * outcome;
      }
    }
    if (!appears) continue;
    if (idx.arm[u] == Arm::treatment) {
      ++n_treat;
      sum_treat += user_sum;
    } else {
      ++n_control;
      sum_control += user_sum;
    }
  }
  if (n_treat == 0 || n_control == 0)
    throw DegenerateArmError(std::string(what) + ": no appearing " +
                             (n_treat == 0 ? "treatment" : "control") +
                             " users in window");
  const double days = static_cast<double>(m);
  return {sum_treat / (days * n_treat) - sum_control / (days * n_control),
          n_treat, n_control};
}

std::vector<int> full_window(int k) {
  std::vector<int> mult(k + 1, 1);
  mult[0] = 0;
  return mult;
}

}  // namespace

EstimateResult naive_scaled(const PanelDataset& panel) {
  IndexedPanel idx = build_index(panel);
  WindowEstimate est = eval_window(idx, full_window(idx.k), idx.k, "naive");
  return {Method::naive, est.point, std::nullopt, idx.k, est.n_treat,
          est.n_control};
}

EstimateResult naive_scaled(const PanelDataset& panel,
                            std::span<const int> window_days) {
  if (window_days.empty())
    throw ParameterError("naive_scaled: window must be nonempty");
  IndexedPanel idx = build_index(panel);
  std::vector<int> mult(idx.k + 1, 0);
  int m = 0;
  for (int day : window_days) {
    if (day < 1 || day > idx.k)
      throw ParameterError("naive_scaled: window day " + std::to_string(day) +
                           " outside 1.." + std::to_string(idx.k));
    if (mult[day]++ == 0) ++m;
    if (mult[day] > 1)
      throw ParameterError("naive_scaled: duplicate window day " +
                           std::to_string(day));
  }
  WindowEstimate est = eval_window(idx, mult, m, "naive");
  return {Method::naive, est.point, std::nullopt, idx.k, est.n_treat,
          est.n_control};
}

double jackknife_point(double full_estimate,
                       std::span<const double> loo_estimates) {
  const double k = static_cast<double>(loo_estimates.size());
  double mean = 0.0;
  for (double v : loo_estimates) mean += v;
  mean /= k;
  return k * full_estimate - (k - 1.0) * mean;
}

EstimateResult jackknife_adjusted(const PanelDataset& panel,
                                  bool classical_variance) {
  IndexedPanel idx = build_index(panel);
  const int k = idx.k;
  if (k < 2)
    throw DurationError("jackknife: k must be >= 2, got " + std::to_string(k));

  std::vector<int> mult = full_window(k);
  WindowEstimate full = eval_window(idx, mult, k, "jackknife full window");

  std::vector<double> loo(k);
  for (int j = 1; j <= k; ++j) {
    mult[j] = 0;
    loo[j - 1] =
        eval_window(idx, mult, k - 1, "jackknife leave-one-out window").point;
    mult[j] = 1;
  }

  const double point = jackknife_point(full.point, loo);
  const double mean =
      std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double kd = static_cast<double>(k);
  const double variance =
      classical_variance ? (kd - 1.0) / kd * ss : kd / (kd - 1.0) * ss;

  return {Method::jackknife, point, variance, k, full.n_treat, full.n_control};
}

EstimateResult block_bootstrap_adjusted(const PanelDataset& panel,
                                        int replicates, int block_len,
                                        std::uint64_t rng_seed) {
  if (replicates < 2)
    throw ParameterError("block bootstrap: replicates must be >= 2");
  IndexedPanel idx = build_index(panel);
  const int k = idx.k;
  if (block_len < 1 || block_len > k)
    throw ParameterError("block bootstrap: block_len must be in 1..k");

  WindowEstimate full = eval_window(idx, full_window(k), k, "bootstrap");

  const int blocks = (k + block_len - 1) / block_len;
  const int start_range = k - block_len + 1;

  std::vector<double> estimates(replicates);
  std::vector<int> mult(k + 1);
  for (int b = 0; b < replicates; ++b) {
    SplitMix64 rng(derive_seed(rng_seed, static_cast<std::uint64_t>(b)));
    std::fill(mult.begin(), mult.end(), 0);
    int drawn = 0;
    for (int block = 0; block < blocks; ++block) {
      const int start =
          1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(start_range)));
      for (int offset = 0; offset < block_len && drawn < k; ++offset) {
        ++mult[start + offset];
        ++drawn;
      }
    }
    estimates[b] =
        eval_window(idx, mult, k, "bootstrap pseudo-panel").point;
  }

  double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
                static_cast<double>(replicates);
  double ss = 0.0;
  for (double v : estimates) ss += (v - mean) * (v - mean);
  const double variance = ss / static_cast<double>(replicates - 1);

  return {Method::block_bootstrap, 2.0 * full.point - mean, variance, k,
          full.n_treat, full.n_control};
}

IncrementalityReport check_incrementality(const PanelDataset& panel,
                                          double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ParameterError("check_incrementality: alpha must be in (0, 1)");
  IndexedPanel idx = build_index(panel);

  std::vector<double> treat_days, control_days;
  for (std::size_t u = 0; u < idx.days.size(); ++u) {
    auto count = static_cast<double>(idx.days[u].size());
    if (idx.arm[u] == Arm::treatment)
      treat_days.push_back(count);
    else
      control_days.push_back(count);
  }
  if (treat_days.size() < 2 || control_days.size() < 2)
    throw DegenerateArmError(
        "check_incrementality: each arm needs >= 2 appearing users");

  WelchResult welch = welch_t_test(treat_days, control_days);
  IncrementalityReport report;
  report.mean_active_days_treat = welch.mean_x;
  report.mean_active_days_control = welch.mean_y;
  report.t_statistic = welch.t;
  report.p_value = welch.p;
  report.alpha = alpha;
  report.passed = welch.p >= alpha;
  return report;
}

namespace {

// JSON number with guaranteed 17 significant digits (exact round trip).
// Non-finite values have no JSON representation and become null.
std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace

std::string to_json(const EstimateResult& result) {
  std::string out = "{\"method\":\"" + method_name(result.method) + "\"";
  out += ",\"point\":" + json_number(result.point);
  if (result.variance)
    out += ",\"variance\":" + json_number(*result.variance);
  out += ",\"k\":" + std::to_string(result.k);
  out += ",\"n_treat\":" + std::to_string(result.n_treat_appearing);
  out += ",\"n_control\":" + std::to_string(result.n_control_appearing);
  out += "}";
  return out;
}

std::string to_json(const IncrementalityReport& report) {
  std::string out = "{";
  out += "\"mean_active_days_treat\":" +
         json_number(report.mean_active_days_treat);
  out += ",\"mean_active_days_control\":" +
         json_number(report.mean_active_days_control);
  out += ",\"t\":" + json_number(report.t_statistic);
  out += ",\"p\":" + json_number(report.p_value);
  out += ",\"alpha\":" + json_number(report.alpha);
  out += std::string(",\"passed\":") + (report.passed ? "true" : "false");
  out += "}";
  return out;
}

}  // namespace abbias
