#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "abbias/error.hpp"
#include "abbias/panel.hpp"
#include "abbias/simulate.hpp"
#include "doctest.h"

using namespace abbias;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("abbias_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("csv round trip preserves rows, assignment and duration") {
  TempDir dir;
  BehaviorModel model = example1_model();
  auto population = sample_population(model, 30, 30, 3);
  PanelDataset panel = generate_panel(population, model, 6, 4);

  const std::string path = dir.file("panel.csv");
  write_panel_csv(panel, path);
  write_panel_sidecar(path, panel.k, 4, model);

  CHECK(read_sidecar_k(path) == 6);
  PanelDataset back = read_panel_csv(path, 6);
  CHECK(back.k == panel.k);
  REQUIRE(back.rows.size() == panel.rows.size());
  for (std::size_t i = 0; i < panel.rows.size(); ++i) {
    CHECK(back.rows[i].user_id == panel.rows[i].user_id);
    CHECK(back.rows[i].day == panel.rows[i].day);
    CHECK(back.rows[i].outcome == panel.rows[i].outcome);  // %.17g round trip
  }
  // Only appearing users survive a round trip; each must keep its arm.
  for (const auto& [user, arm] : back.assignment)
    CHECK(panel.assignment.at(user) == arm);
  CHECK(back.truth.empty());
}

TEST_CASE("duration falls back to the largest day") {
  TempDir dir;
  const std::string path = dir.file("nok.csv");
  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "2,9,1.0,0\n");
  PanelDataset panel = read_panel_csv(path);
  CHECK(panel.k == 9);
}

TEST_CASE("malformed csv reports the offending line") {
  TempDir dir;
  const std::string path = dir.file("bad.csv");

  write_text(path, "user,day\n1,1,1.0,1\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains(":1:"), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "2,0,1.0,0\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains(":3:"), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "1,2,x,1\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains(":3:"), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "1,2,1.0,2\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains("treated"), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "1,2,1.0,0\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains("both arms"), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,1,2.0,1\n"
             "1,1,1.0,1\n");
  CHECK_THROWS_AS(read_panel_csv(path), DataError);

  write_text(path,
             "user_id,day,outcome,treated\n"
             "1,5,2.0,1\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path, 3),
                       doctest::Contains("exceeds k"), DataError);

  write_text(path, "user_id,day,outcome,treated\n");
  CHECK_THROWS_WITH_AS(read_panel_csv(path),
                       doctest::Contains("no data rows"), DataError);
}

TEST_CASE("validate catches inconsistent hand-built panels") {
  PanelDataset panel;
  panel.k = 3;
  panel.rows = {{1, 1, 0.5}};
  CHECK_THROWS_AS(panel.validate(), DataError);  // no assignment

  panel.assignment[1] = Arm::treatment;
  panel.validate();

  panel.rows.push_back({1, 1, 0.7});
  CHECK_THROWS_AS(panel.validate(), DataError);  // duplicate day

  panel.rows = {{1, 4, 0.5}};
  CHECK_THROWS_AS(panel.validate(), DataError);  // day > k
}
