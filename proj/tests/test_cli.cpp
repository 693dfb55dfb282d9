#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "stereocal/io.hpp"

using namespace stereocal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stereocal_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(STEREOCAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("synth then calibrate-sequence recovers the reference", "[cli]") {
  TempDir tmp;
  const std::string dir = (tmp.path / "scenes").string();
  REQUIRE(run_cli("synth --output " + dir +
                  " --pairs 4 --seed 11 --viewpoint left --angle-deg 5") == 0);
  REQUIRE(fs::exists(tmp.path / "scenes/pair_003.txt"));
  REQUIRE(fs::exists(tmp.path / "scenes/intrinsics.json"));
  REQUIRE(fs::exists(tmp.path / "scenes/reference.json"));

  const std::string report = (tmp.path / "report.json").string();
  REQUIRE(run_cli("calibrate-sequence --input " + dir + " --intrinsics " + dir +
                  "/intrinsics.json --reference " + dir +
                  "/reference.json --output " + report) == 0);

  const io::json j = io::read_json(report);
  CHECK(j.at("tool") == "stereocal");
  CHECK(j.at("method") == "rectification");
  CHECK(j.at("pairs").size() == 4);
  CHECK(j.at("global").contains("rotation_row_major"));
  const MetricsReport m = io::metrics_from_json(j.at("metrics"));
  CHECK(m.e_theta < 1e-8);
  CHECK(m.e_t < 1e-8);
  CHECK(m.M == 4);

  // reports re-read to the exact serialized values
  const GlobalEstimate g = io::global_estimate_from_json(j.at("global"));
  CHECK(is_rotation(g.rotation));

  SECTION("evaluate reproduces the metrics from the report alone") {
    const std::string metrics = (tmp.path / "metrics.json").string();
    REQUIRE(run_cli("evaluate --input " + report + " --reference " + dir +
                    "/reference.json --output " + metrics) == 0);
    const io::json mj = io::read_json(metrics);
    const MetricsReport m2 = io::metrics_from_json(mj.at("metrics"));
    CHECK(m2.e_t == Catch::Approx(m.e_t).margin(1e-15));
    CHECK(m2.e_theta == Catch::Approx(m.e_theta).margin(1e-15));
    CHECK(m2.sigma_t == Catch::Approx(m.sigma_t).margin(1e-15));
    CHECK(m2.sigma_theta == Catch::Approx(m.sigma_theta).margin(1e-15));
  }

  SECTION("evaluate against the estimate itself zeroes the global errors") {
    // reference = the report's own aggregated estimate
    const io::json global = j.at("global");
    io::json ref_json{{"rotation_row_major", global.at("rotation_row_major")},
                      {"translation", global.at("translation")},
                      {"theta", global.at("theta")}};
    const fs::path self_ref = tmp.path / "self_reference.json";
    io::write_json(self_ref, ref_json);
    const std::string metrics = (tmp.path / "self_metrics.json").string();
    REQUIRE(run_cli("evaluate --input " + report + " --reference " +
                    self_ref.string() + " --output " + metrics) == 0);
    const MetricsReport m2 =
        io::metrics_from_json(io::read_json(metrics).at("metrics"));
    CHECK(m2.e_t == 0.0);
    CHECK(m2.e_theta == 0.0);
    CHECK(m2.sigma_t < 1e-9);      // per-pair scatter around the aggregate
    CHECK(m2.sigma_theta < 1e-9);  // (noise-free scenes)
  }

  SECTION("compare also runs on recorded files") {
    const std::string cmp = (tmp.path / "compare_files.json").string();
    REQUIRE(run_cli("compare --input " + dir + " --intrinsics " + dir +
                    "/intrinsics.json --reference " + dir +
                    "/reference.json --output " + cmp) == 0);
    const io::json c = io::read_json(cmp);
    CHECK(io::metrics_from_json(c.at("ours").at("metrics")).e_theta < 1e-8);
    CHECK(c.at("baseline").contains("metrics"));
  }
}

TEST_CASE("calibrate-pair on one file, both methods", "[cli]") {
  TempDir tmp;
  const std::string dir = (tmp.path / "scene").string();
  REQUIRE(run_cli("synth --output " + dir + " --seed 5 --viewpoint bottom") ==
          0);

  const std::string report = (tmp.path / "pair.json").string();
  REQUIRE(run_cli("calibrate-pair --input " + dir +
                  "/pair_000.txt --intrinsics " + dir +
                  "/intrinsics.json --output " + report) == 0);
  const io::json j = io::read_json(report);
  CHECK(j.at("pairs").size() == 1);
  CHECK(j.at("pairs")[0].contains("homography_left_row_major"));
  CHECK(j.at("pairs")[0].at("diagnostics").at("converged") == true);

  const std::string base_report = (tmp.path / "base.json").string();
  REQUIRE(run_cli("calibrate-pair --input " + dir +
                  "/pair_000.txt --intrinsics " + dir +
                  "/intrinsics.json --baseline --output " + base_report) == 0);
  const io::json b = io::read_json(base_report);
  CHECK(b.at("method") == "epipolar");
  CHECK_FALSE(b.at("pairs")[0].contains("homography_left_row_major"));
}

TEST_CASE("compare emits both methods' metrics", "[cli]") {
  TempDir tmp;
  const std::string report = (tmp.path / "compare.json").string();
  REQUIRE(run_cli("compare --pairs 3 --seed 17 --noise-sigma 0.5 --viewpoint "
                  "right --angle-deg 5 --output " +
                  report) == 0);
  const io::json j = io::read_json(report);
  for (const char* side : {"ours", "baseline"}) {
    CHECK(j.at(side).contains("global"));
    const MetricsReport m = io::metrics_from_json(j.at(side).at("metrics"));
    CHECK(m.M == 3);
    CHECK(m.e_t >= 0.0);
  }
}

TEST_CASE("evaluate sweeps emit CSV", "[cli]") {
  TempDir tmp;
  const std::string csv = (tmp.path / "sweep.csv").string();
  REQUIRE(run_cli("evaluate --sweep noise --sweep-values 0,0.5 --pairs 3 "
                  "--seed 23 --output " +
                  csv) == 0);
  std::ifstream in(csv);
  std::string header, row1, row2;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row1));
  REQUIRE(std::getline(in, row2));
  CHECK(header == "sweep,value,e_t,e_theta,sigma_t,sigma_theta,M");
  CHECK(row1.substr(0, 8) == "noise,0,");
  CHECK(row2.substr(0, 10) == "noise,0.5,");

  const std::string csv2 = (tmp.path / "sweep_pairs.csv").string();
  REQUIRE(run_cli("evaluate --sweep pairs --sweep-values 1,4 --seed 23 "
                  "--output " +
                  csv2) == 0);
  std::ifstream in2(csv2);
  REQUIRE(std::getline(in2, header));
  REQUIRE(std::getline(in2, row1));
  CHECK(row1.substr(0, 8) == "pairs,1,");
}

TEST_CASE("input errors exit with status 1", "[cli]") {
  TempDir tmp;
  const std::string out = (tmp.path / "out.json").string();

  // missing file
  CHECK(run_cli("calibrate-pair --input " + (tmp.path / "nope.txt").string() +
                " --intrinsics " + (tmp.path / "nope.json").string() +
                " --output " + out) == 1);

  // parse error with a line number
  const fs::path bad = tmp.path / "bad.txt";
  std::ofstream(bad) << "1 2 3 4\nx y z w\n";
  const fs::path intr = tmp.path / "intrinsics.json";
  io::write_intrinsics(intr, Intrinsics{1200, 1200, 960, 600, 0},
                       Intrinsics{1200, 1200, 960, 600, 0});
  CHECK(run_cli("calibrate-pair --input " + bad.string() + " --intrinsics " +
                intr.string() + " --output " + out) == 1);

  // unknown flag
  CHECK(run_cli("calibrate-pair --frobnicate") == 1);

  // help is not an error
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("unconverged solves exit with status 2", "[cli]") {
  TempDir tmp;
  const std::string dir = (tmp.path / "scene").string();
  REQUIRE(run_cli("synth --output " + dir + " --seed 29") == 0);

  // a single-iteration budget cannot converge on real data
  const fs::path cfg = tmp.path / "config.json";
  std::ofstream(cfg) << R"({"max_iterations": 1, "step_tol": 1e-300})";
  const std::string report = (tmp.path / "report.json").string();
  CHECK(run_cli("calibrate-pair --input " + dir +
                "/pair_000.txt --intrinsics " + dir +
                "/intrinsics.json --config " + cfg.string() + " --output " +
                report) == 2);
  // the report is still written with diagnostics
  const io::json j = io::read_json(report);
  CHECK(j.at("pairs")[0].at("diagnostics").at("converged") == false);
}
