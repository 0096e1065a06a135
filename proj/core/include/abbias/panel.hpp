#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abbias/behavior_model.hpp"

namespace abbias {

enum class Arm { control = 0, treatment = 1 };

/// One active user-day. Inactive days have no row.
struct PanelRow {
  std::int64_t user_id = 0;
  int day = 0;
  double outcome = 0.0;
};

/// Observed panel from a k-day experiment. `assignment` may contain users
/// that never appeared (no rows); estimators ignore them. `truth` carries the
/// simulated activity probabilities for diagnostics only -- estimators never
/// read it.
struct PanelDataset {
  int k = 0;
  std::vector<PanelRow> rows;  // sorted by (user_id, day)
  std::map<std::int64_t, Arm> assignment;
  std::map<std::int64_t, double> truth;

  /// Checks the dataset invariants: k >= 1, days in 1..k, unique (user, day)
  /// pairs, every row's user present in assignment. Throws DataError.
  void validate() const;
};

struct ArmCounts {
  int treat = 0;
  int control = 0;
};

/// Users with at least one row, per arm.
ArmCounts appearing_users(const PanelDataset& panel);

/// Writes `user_id,day,outcome,treated` rows (LF endings, full precision).
void write_panel_csv(const PanelDataset& panel, const std::string& path);

/// Reads a panel CSV. If `k` is absent, the duration is taken as the largest
/// day present. Malformed input raises DataError with the offending line.
PanelDataset read_panel_csv(const std::string& path,
                            std::optional<int> k = std::nullopt);

/// Sidecar metadata written next to simulated panels (`<csv path>.json`).
void write_panel_sidecar(const std::string& csv_path, int k,
                         std::uint64_t seed, const BehaviorModel& model);

/// Reads `k` from a sidecar if one exists next to the CSV.
std::optional<int> read_sidecar_k(const std::string& csv_path);

}  // namespace abbias
