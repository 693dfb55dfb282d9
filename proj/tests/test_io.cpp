#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "stereocal/io.hpp"
#include "stereocal/synthetic.hpp"

using namespace stereocal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stereocal_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("correspondence files parse in order", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "pairs.txt";
  std::ofstream(file) << "# header comment\n"
                         "10.5 20 30.25 40\n"
                         "\n"
                         "1 2 3 4   # trailing comment\n"
                         "-5 6e2 7 8\n";
  const std::vector<CorrespondencePair> pairs = io::read_pairs(file);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].left == PixelPoint(10.5, 20.0));
  CHECK(pairs[0].right == PixelPoint(30.25, 40.0));
  CHECK(pairs[1].left == PixelPoint(1, 2));
  CHECK(pairs[2].right == PixelPoint(7, 8));
}

TEST_CASE("malformed correspondence lines carry their line number", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "bad.txt";
  std::ofstream(file) << "1 2 3 4\n"
                         "a,b,c,d\n";
  try {
    io::read_pairs(file);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  std::ofstream(file) << "1 2 3\n";
  CHECK_THROWS_AS(io::read_pairs(file), ParseError);
  std::ofstream(file) << "1 2 3 4 5\n";
  CHECK_THROWS_AS(io::read_pairs(file), ParseError);
}

TEST_CASE("canonical pair files round trip byte-identically", "[io]") {
  TempDir tmp;
  SceneConfig config;
  config.seed = 7;
  config.pixel_noise_sigma = 0.37;
  const auto [gt, obs] = generate(config, identity_rig());

  const fs::path a = tmp.path / "a.txt";
  const fs::path b = tmp.path / "b.txt";
  io::write_pairs(a, obs.pairs);
  io::write_pairs(b, io::read_pairs(a));
  CHECK(slurp(a) == slurp(b));

  // and the parsed values are bit-identical to the originals
  const std::vector<CorrespondencePair> parsed = io::read_pairs(a);
  REQUIRE(parsed.size() == obs.pairs.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].left == obs.pairs[i].left);
    CHECK(parsed[i].right == obs.pairs[i].right);
  }
}

TEST_CASE("intrinsics sidecar", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "intrinsics.json";
  const Intrinsics left{1200.0, 1180.0, 960.0, 600.0, 0.5};
  const Intrinsics right{1210.0, 1190.0, 955.0, 605.0, -0.25};
  io::write_intrinsics(file, left, right);
  const auto [l, r] = io::read_intrinsics(file);
  CHECK(l.fx == left.fx);
  CHECK(l.skew == left.skew);
  CHECK(r.cy == right.cy);

  std::ofstream(file) << R"({"left": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "skew": 0}})";
  CHECK_THROWS_AS(io::read_intrinsics(file), MissingIntrinsics);
  std::ofstream(file) << R"({"left": {"fx": 1}, "right": {"fx": 1}})";
  CHECK_THROWS_AS(io::read_intrinsics(file), MissingIntrinsics);
  CHECK_THROWS_AS(io::read_intrinsics(tmp.path / "absent.json"),
                  MissingIntrinsics);
}

TEST_CASE("parse_correspondences combines pairs and sidecar", "[io]") {
  TempDir tmp;
  const fs::path pairs_file = tmp.path / "pairs.txt";
  const fs::path intr_file = tmp.path / "intrinsics.json";
  std::ofstream(pairs_file) << "1 2 3 4\n5 6 7 8\n9 10 11 12\n";
  io::write_intrinsics(intr_file, Intrinsics{1200, 1200, 960, 600, 0},
                       Intrinsics{1100, 1100, 950, 590, 0});
  const CorrespondenceSet set = parse_correspondences(pairs_file, intr_file);
  CHECK(set.pairs.size() == 3);
  CHECK(set.intrinsics_left.fx == 1200.0);
  CHECK(set.intrinsics_right.cx == 950.0);
}

TEST_CASE("reference files validate the rotation on read", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "reference.json";
  const Extrinsics truth =
      perturb_viewpoint(identity_rig(), Viewpoint::top, 0.12);
  io::write_reference(file, truth);
  const ReferenceExtrinsics ref = io::read_reference(file);
  CHECK((ref.rotation - truth.rotation).cwiseAbs().maxCoeff() == 0.0);
  CHECK(ref.translation == truth.translation);
  CHECK(ref.theta == log_so3(truth.rotation));

  // corrupt the rotation: must be rejected
  io::json j = io::read_json(file);
  j["rotation_row_major"][0] = 2.0;
  io::write_json(file, j);
  CHECK_THROWS_AS(io::read_reference(file), CalibrationError);
}

TEST_CASE("estimates survive a JSON round trip at full precision", "[io]") {
  SceneConfig config;
  config.seed = 21;
  config.pixel_noise_sigma = 0.4;
  const Extrinsics truth =
      perturb_viewpoint(identity_rig(), Viewpoint::left, 0.0873);
  const auto [gt, obs] = generate(config, truth);
  const PairEstimate est = solve_single_pair(obs);

  const PairEstimate back =
      io::pair_estimate_from_json(io::pair_estimate_to_json(est));
  CHECK(back.rotation == est.rotation);
  CHECK(back.translation == est.translation);
  CHECK(back.theta == est.theta);
  CHECK(back.axis == est.axis);
  CHECK(back.angle == est.angle);
  CHECK(back.diagnostics.converged == est.diagnostics.converged);
  CHECK(back.diagnostics.final_energy == est.diagnostics.final_energy);

  const GlobalEstimate g = aggregate({est});
  const GlobalEstimate gback =
      io::global_estimate_from_json(io::global_estimate_to_json(g));
  CHECK(gback.rotation == g.rotation);
  CHECK(gback.translation == g.translation);
  CHECK(gback.angle == g.angle);

  const ReferenceExtrinsics ref = make_reference(truth);
  const MetricsReport m = evaluate_metrics(ref, g, {est});
  const MetricsReport mback = io::metrics_from_json(io::metrics_to_json(m));
  CHECK(mback.e_t == m.e_t);
  CHECK(mback.e_theta == m.e_theta);
  CHECK(mback.sigma_t == m.sigma_t);
  CHECK(mback.sigma_theta == m.sigma_theta);
  CHECK(mback.M == m.M);
}

TEST_CASE("solver config round trips through JSON", "[io]") {
  SolverConfig c;
  c.huber_threshold = 0.025;
  c.lambda_init = 1e-4;
  c.max_iterations = 250;
  const SolverConfig back =
      io::solver_config_from_json(io::solver_config_to_json(c));
  CHECK(back.huber_threshold == c.huber_threshold);
  CHECK(back.lambda_init == c.lambda_init);
  CHECK(back.lambda_up == c.lambda_up);
  CHECK(back.lambda_down == c.lambda_down);
  CHECK(back.step_tol == c.step_tol);
  CHECK(back.max_iterations == c.max_iterations);
  CHECK(back.min_pairs == c.min_pairs);
}
