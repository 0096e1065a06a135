#include "abbias/panel.hpp"

#include <algorithm>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "abbias/error.hpp"

namespace abbias {

void PanelDataset::validate() const {
  if (k < 1) throw DataError("panel: k must be >= 1");
  const PanelRow* prev = nullptr;
  for (const auto& row : rows) {
    if (row.day < 1 || row.day > k)
      throw DataError("panel: day " + std::to_string(row.day) +
                      " outside 1.." + std::to_string(k) + " for user " +
                      std::to_string(row.user_id));
    if (!assignment.count(row.user_id))
      throw DataError("panel: user " + std::to_string(row.user_id) +
                      " has rows but no assignment");
    if (prev) {
      if (row.user_id < prev->user_id ||
          (row.user_id == prev->user_id && row.day <= prev->day)) {
        if (row.user_id == prev->user_id && row.day == prev->day)
          throw DataError("panel: duplicate (user, day) = (" +
                          std::to_string(row.user_id) + ", " +
                          std::to_string(row.day) + ")");
        throw DataError("panel: rows must be sorted by (user_id, day)");
      }
    }
    prev = &row;
  }
}

ArmCounts appearing_users(const PanelDataset& panel) {
  ArmCounts counts;
  std::int64_t current = 0;
  bool have_current = false;
  for (const auto& row : panel.rows) {
    if (have_current && row.user_id == current) continue;
    current = row.user_id;
    have_current = true;
    auto it = panel.assignment.find(row.user_id);
    if (it == panel.assignment.end())
      throw DataError("panel: user " + std::to_string(row.user_id) +
                      " has rows but no assignment");
    if (it->second == Arm::treatment)
      ++counts.treat;
    else
      ++counts.control;
  }
  return counts;
}

void write_panel_csv(const PanelDataset& panel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "user_id,day,outcome,treated\n";
  char buf[64];
  for (const auto& row : panel.rows) {
    auto it = panel.assignment.find(row.user_id);
    const int treated = (it != panel.assignment.end() &&
                         it->second == Arm::treatment)
                            ? 1
                            : 0;
    std::snprintf(buf, sizeof buf, "%.17g", row.outcome);
    out << row.user_id << ',' << row.day << ',' << buf << ',' << treated
        << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

namespace {

[[noreturn]] void bad_line(const std::string& path, int line,
                           const std::string& why) {
  throw DataError(path + ":" + std::to_string(line) + ": " + why);
}

// Strict field parsers; the whole field must be consumed.
std::int64_t parse_int64(const std::string& field, const std::string& path,
                         int line, const char* what) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(field.c_str(), &end, 10);
  if (field.empty() || errno != 0 || end != field.c_str() + field.size())
    bad_line(path, line, std::string("bad ") + what + " '" + field + "'");
  return v;
}

double parse_double(const std::string& field, const std::string& path,
                    int line, const char* what) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (field.empty() || errno == ERANGE ||
      end != field.c_str() + field.size() || !std::isfinite(v))
    bad_line(path, line, std::string("bad ") + what + " '" + field + "'");
  return v;
}

}  // namespace

PanelDataset read_panel_csv(const std::string& path, std::optional<int> k) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");

  PanelDataset panel;
  std::string line;
  int line_no = 0;

  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "user_id,day,outcome,treated")
    bad_line(path, line_no, "expected header 'user_id,day,outcome,treated'");

  int max_day = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.eof()) break;
      bad_line(path, line_no, "blank line");
    }
    std::string fields[4];
    int nf = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        if (nf >= 4) bad_line(path, line_no, "too many fields");
        fields[nf++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (nf != 4) bad_line(path, line_no, "expected 4 fields");

    PanelRow row;
    row.user_id = parse_int64(fields[0], path, line_no, "user_id");
    row.day = static_cast<int>(parse_int64(fields[1], path, line_no, "day"));
    row.outcome = parse_double(fields[2], path, line_no, "outcome");
    if (row.day < 1) bad_line(path, line_no, "day must be >= 1");
    if (k && row.day > *k)
      bad_line(path, line_no,
               "day " + std::to_string(row.day) + " exceeds k = " +
                   std::to_string(*k));

    Arm arm;
    if (fields[3] == "1")
      arm = Arm::treatment;
    else if (fields[3] == "0")
      arm = Arm::control;
    else
      bad_line(path, line_no, "treated must be 0 or 1, got '" + fields[3] + "'");

    auto [it, inserted] = panel.assignment.emplace(row.user_id, arm);
    if (!inserted && it->second != arm)
      bad_line(path, line_no,
               "user " + std::to_string(row.user_id) +
                   " appears in both arms");

    max_day = std::max(max_day, row.day);
    panel.rows.push_back(row);
  }

  if (panel.rows.empty()) throw DataError(path + ": no data rows");
  panel.k = k ? *k : max_day;

  std::sort(panel.rows.begin(), panel.rows.end(),
            [](const PanelRow& a, const PanelRow& b) {
              return a.user_id != b.user_id ? a.user_id < b.user_id
                                            : a.day < b.day;
            });
  for (std::size_t i = 1; i < panel.rows.size(); ++i)
    if (panel.rows[i].user_id == panel.rows[i - 1].user_id &&
        panel.rows[i].day == panel.rows[i - 1].day)
      throw DataError(path + ": duplicate (user, day) = (" +
                      std::to_string(panel.rows[i].user_id) + ", " +
                      std::to_string(panel.rows[i].day) + ")");

  panel.validate();
  return panel;
}

void write_panel_sidecar(const std::string& csv_path, int k,
                         std::uint64_t seed, const BehaviorModel& model) {
  nlohmann::json j;
  j["k"] = k;
  j["seed"] = seed;
  j["model"] = nlohmann::json::parse(model_to_json(model));
  std::ofstream out(csv_path + ".json", std::ios::binary);
  if (!out) throw DataError("cannot open '" + csv_path + ".json' for writing");
  out << j.dump(2) << '\n';
}

std::optional<int> read_sidecar_k(const std::string& csv_path) {
  std::ifstream in(csv_path + ".json", std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    auto j = nlohmann::json::parse(buffer.str());
    if (j.contains("k")) return j.at("k").get<int>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("sidecar '" + csv_path + ".json' is not valid JSON");
  }
  return std::nullopt;
}

}  // namespace abbias
