// stereocal: online stereo extrinsic self-calibration from pixel
// correspondences. Subcommands cover single-pair and sequence calibration,
// synthetic data generation, evaluation against a reference, and a
// head-to-head comparison with an epipolar-constraint reference method.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stereocal/stereocal.hpp"

namespace fs = std::filesystem;
using namespace stereocal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

const std::map<std::string, Viewpoint> kViewpointNames{
    {"middle", Viewpoint::middle},
    {"top", Viewpoint::top},
    {"bottom", Viewpoint::bottom},
    {"left", Viewpoint::left},
    {"right", Viewpoint::right}};

struct CommonOptions {
  std::vector<std::string> inputs;
  std::string intrinsics_path;
  std::string output_path;
  std::string config_path;
  std::string reference_path;
  bool use_baseline = false;

  // synthetic-scene knobs
  int pairs = 1;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double outlier_frac = 0.0;
  Viewpoint viewpoint = Viewpoint::middle;
  double angle_deg = 5.0;
};

SolverConfig load_config(const CommonOptions& opt) {
  if (opt.config_path.empty()) return SolverConfig{};
  return io::read_solver_config(opt.config_path);
}

SceneConfig scene_config(const CommonOptions& opt, int scene_index = 0) {
  SceneConfig config;
  config.seed = opt.seed + static_cast<std::uint64_t>(scene_index);
  config.pixel_noise_sigma = opt.noise_sigma;
  config.outlier_fraction = opt.outlier_frac;
  return config;
}

Extrinsics synthetic_truth(const CommonOptions& opt) {
  return perturb_viewpoint(identity_rig(), opt.viewpoint,
                           opt.angle_deg * kPi / 180.0);
}

// Directory inputs expand to their *.txt files in lexical order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const std::string& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw CalibrationError("no correspondence files found in the given inputs");
  }
  return files;
}

io::json base_report(const SolverConfig& config, const CommonOptions& opt) {
  return io::json{{"tool", "stereocal"},
                  {"version", kToolVersion},
                  {"method", opt.use_baseline ? "epipolar" : "rectification"},
                  {"config", io::solver_config_to_json(config)}};
}

io::json pair_report(const PairEstimate& est, const CorrespondenceSet& obs,
                     bool rectification_method) {
  io::json j = io::pair_estimate_to_json(est);
  if (rectification_method) {
    j["rectifying_left_row_major"] = io::mat3_to_json(est.rectifying.R_left);
    j["rectifying_right_row_major"] = io::mat3_to_json(est.rectifying.R_right);
    const auto [hl, hr] =
        rectifying_homographies(est.rectifying, obs.intrinsics_left,
                                obs.intrinsics_right, obs.intrinsics_left);
    j["homography_left_row_major"] = io::mat3_to_json(hl);
    j["homography_right_row_major"] = io::mat3_to_json(hr);
  }
  return j;
}

int run_calibrate(const CommonOptions& opt, bool sequence) {
  const SolverConfig config = load_config(opt);
  const Method method =
      opt.use_baseline ? Method::epipolar : Method::rectification;

  const std::vector<fs::path> files = expand_inputs(opt.inputs);
  if (!sequence && files.size() != 1) {
    throw CalibrationError("calibrate-pair expects exactly one input file");
  }

  std::vector<CorrespondenceSet> sets;
  sets.reserve(files.size());
  for (const fs::path& f : files) {
    sets.push_back(parse_correspondences(f, opt.intrinsics_path));
  }

  std::optional<ReferenceExtrinsics> reference;
  if (!opt.reference_path.empty()) {
    reference = io::read_reference(opt.reference_path);
  }

  const SequenceResult result = run_sequence(sets, config, method, reference);

  io::json report = base_report(config, opt);
  io::json pairs = io::json::array();
  for (std::size_t i = 0; i < result.estimates.size(); ++i) {
    io::json j = pair_report(result.estimates[i], sets[i],
                             method == Method::rectification);
    j["input"] = files[i].string();
    pairs.push_back(std::move(j));
  }
  report["pairs"] = std::move(pairs);
  if (result.global) {
    report["global"] = io::global_estimate_to_json(*result.global);
  }
  if (result.metrics) {
    report["metrics"] = io::metrics_to_json(*result.metrics);
  }
  io::write_json(opt.output_path, report);

  if (result.converged == 0) {
    std::cerr << "stereocal: no pair converged\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int run_synth(const CommonOptions& opt) {
  const fs::path dir(opt.output_path);
  fs::create_directories(dir);

  const Extrinsics truth = synthetic_truth(opt);
  const SceneConfig base = scene_config(opt);
  const auto [sets, gt] = run_protocol(base, truth, opt.pairs);

  char name[32];
  for (std::size_t k = 0; k < sets.size(); ++k) {
    std::snprintf(name, sizeof(name), "pair_%03zu.txt", k);
    io::write_pairs(dir / name, sets[k].pairs);
  }
  io::write_intrinsics(dir / "intrinsics.json", base.intrinsics_left,
                       base.intrinsics_right);
  io::write_reference(dir / "reference.json", truth);
  return kExitOk;
}

int run_evaluate(const CommonOptions& opt, const std::string& sweep,
                 const std::string& sweep_values) {
  const SolverConfig config = load_config(opt);

  if (sweep.empty()) {
    // score an existing report against a reference
    if (opt.inputs.size() != 1 || opt.reference_path.empty()) {
      throw CalibrationError(
          "evaluate needs --input <report.json> and --reference");
    }
    const io::json report = io::read_json(opt.inputs.front());
    if (!report.contains("global") || !report.contains("pairs")) {
      throw CalibrationError("report is missing \"global\" or \"pairs\"");
    }
    const ReferenceExtrinsics ref = io::read_reference(opt.reference_path);
    const GlobalEstimate global =
        io::global_estimate_from_json(report.at("global"));
    std::vector<PairEstimate> estimates;
    for (const io::json& p : report.at("pairs")) {
      estimates.push_back(io::pair_estimate_from_json(p));
    }
    const MetricsReport metrics = evaluate_metrics(
        ref, global, canonicalize_against(estimates, ref));
    io::json out = base_report(config, opt);
    out["metrics"] = io::metrics_to_json(metrics);
    io::write_json(opt.output_path, out);
    return kExitOk;
  }

  // synthetic sweep, CSV output for external plotting
  std::vector<double> values;
  std::stringstream ss(sweep_values);
  for (std::string item; std::getline(ss, item, ',');) {
    values.push_back(std::stod(item));
  }
  if (values.empty()) {
    throw CalibrationError("--sweep-values must list at least one value");
  }

  const Extrinsics truth = synthetic_truth(opt);
  const SceneConfig base = scene_config(opt);
  std::vector<SweepPoint> points;
  if (sweep == "noise") {
    points = run_noise_sweep(base, truth, opt.pairs, values, config);
  } else {
    std::vector<int> counts;
    counts.reserve(values.size());
    for (const double v : values) counts.push_back(static_cast<int>(v));
    points = run_pairs_sweep(base, truth, counts, config);
  }

  std::ofstream out(opt.output_path);
  if (!out) {
    throw CalibrationError("cannot write output file: " + opt.output_path);
  }
  out << "sweep,value,e_t,e_theta,sigma_t,sigma_theta,M\n";
  for (const SweepPoint& p : points) {
    out << sweep << ',' << io::format_double(p.value) << ','
        << io::format_double(p.metrics.e_t) << ','
        << io::format_double(p.metrics.e_theta) << ','
        << io::format_double(p.metrics.sigma_t) << ','
        << io::format_double(p.metrics.sigma_theta) << ',' << p.metrics.M
        << '\n';
  }
  return kExitOk;
}

io::json side_report(const SequenceResult& r) {
  io::json j;
  if (r.global) j["global"] = io::global_estimate_to_json(*r.global);
  if (r.metrics) j["metrics"] = io::metrics_to_json(*r.metrics);
  j["converged_pairs"] = r.converged;
  j["total_pairs"] = static_cast<int>(r.estimates.size());
  return j;
}

int run_compare(const CommonOptions& opt) {
  const SolverConfig config = load_config(opt);

  std::vector<CorrespondenceSet> sets;
  ReferenceExtrinsics reference;
  if (!opt.inputs.empty()) {
    if (opt.reference_path.empty()) {
      throw CalibrationError("compare on files needs --reference");
    }
    for (const fs::path& f : expand_inputs(opt.inputs)) {
      sets.push_back(parse_correspondences(f, opt.intrinsics_path));
    }
    reference = io::read_reference(opt.reference_path);
  } else {
    const Extrinsics truth = synthetic_truth(opt);
    sets = run_protocol(scene_config(opt), truth, opt.pairs).first;
    reference = make_reference(truth);
  }

  const CompareResult result = run_compare(sets, config, reference);

  io::json report = base_report(config, opt);
  report.erase("method");
  report["ours"] = side_report(result.ours);
  report["baseline"] = side_report(result.baseline);
  io::write_json(opt.output_path, report);

  std::printf("%-10s %14s %14s %14s %14s\n", "method", "e_t", "e_theta",
              "sigma_t", "sigma_theta");
  const auto print_row = [](const char* name, const SequenceResult& r) {
    if (r.metrics) {
      std::printf("%-10s %14.6e %14.6e %14.6e %14.6e\n", name, r.metrics->e_t,
                  r.metrics->e_theta, r.metrics->sigma_t,
                  r.metrics->sigma_theta);
    } else {
      std::printf("%-10s %14s %14s %14s %14s\n", name, "n/a", "n/a", "n/a",
                  "n/a");
    }
  };
  print_row("ours", result.ours);
  print_row("baseline", result.baseline);

  if (result.ours.converged == 0 && result.baseline.converged == 0) {
    return kExitNotConverged;
  }
  return kExitOk;
}

void add_scene_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--pairs", opt.pairs, "Number of synthetic stereo pairs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "Base RNG seed");
  cmd->add_option("--noise-sigma", opt.noise_sigma,
                  "Pixel noise standard deviation [px]")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--outlier-frac", opt.outlier_frac,
                  "Fraction of right-view points replaced by outliers")
      ->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--viewpoint", opt.viewpoint,
                  "Mounting viewpoint of the synthetic rig")
      ->transform(CLI::CheckedTransformer(kViewpointNames, CLI::ignore_case));
  cmd->add_option("--angle-deg", opt.angle_deg,
                  "Viewpoint perturbation angle [deg]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online stereo extrinsic self-calibration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("stereocal ") + kToolVersion);

  CommonOptions opt;
  std::string sweep;
  std::string sweep_values;

  CLI::App* pair = app.add_subcommand(
      "calibrate-pair", "Estimate extrinsics from one correspondence file");
  pair->add_option("--input", opt.inputs, "Correspondence file")->required();
  pair->add_option("--intrinsics", opt.intrinsics_path,
                   "Intrinsics sidecar JSON")
      ->required();
  pair->add_option("--output", opt.output_path, "Report JSON path")->required();
  pair->add_option("--config", opt.config_path, "Solver config JSON");
  pair->add_option("--reference", opt.reference_path,
                   "Reference extrinsics JSON for metrics");
  pair->add_flag("--baseline", opt.use_baseline,
                 "Use the epipolar reference method");

  CLI::App* seq = app.add_subcommand(
      "calibrate-sequence",
      "Estimate per-pair extrinsics over a sequence and aggregate them");
  seq->add_option("--input", opt.inputs,
                  "Correspondence files or a directory of *.txt")
      ->required();
  seq->add_option("--intrinsics", opt.intrinsics_path,
                  "Intrinsics sidecar JSON")
      ->required();
  seq->add_option("--output", opt.output_path, "Report JSON path")->required();
  seq->add_option("--config", opt.config_path, "Solver config JSON");
  seq->add_option("--reference", opt.reference_path,
                  "Reference extrinsics JSON for metrics");
  seq->add_flag("--baseline", opt.use_baseline,
                "Use the epipolar reference method");

  CLI::App* synth = app.add_subcommand(
      "synth", "Generate synthetic correspondence files with ground truth");
  synth->add_option("--output", opt.output_path, "Output directory")
      ->required();
  add_scene_flags(synth, opt);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate",
      "Score a report against a reference, or sweep synthetic conditions");
  evaluate->add_option("--input", opt.inputs, "Calibration report JSON");
  evaluate->add_option("--reference", opt.reference_path,
                       "Reference extrinsics JSON");
  evaluate->add_option("--output", opt.output_path,
                       "Metrics JSON (or CSV in sweep mode)")
      ->required();
  evaluate->add_option("--config", opt.config_path, "Solver config JSON");
  evaluate->add_option("--sweep", sweep, "Sweep mode")
      ->check(CLI::IsMember({"noise", "pairs"}));
  evaluate->add_option("--sweep-values", sweep_values,
                       "Comma-separated sweep values");
  add_scene_flags(evaluate, opt);

  CLI::App* compare = app.add_subcommand(
      "compare",
      "Run this solver and the epipolar reference method on the same data");
  compare->add_option("--input", opt.inputs,
                      "Correspondence files or a directory");
  compare->add_option("--intrinsics", opt.intrinsics_path,
                      "Intrinsics sidecar JSON");
  compare->add_option("--output", opt.output_path, "Report JSON path")
      ->required();
  compare->add_option("--config", opt.config_path, "Solver config JSON");
  compare->add_option("--reference", opt.reference_path,
                      "Reference extrinsics JSON");
  add_scene_flags(compare, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (pair->parsed()) return run_calibrate(opt, /*sequence=*/false);
    if (seq->parsed()) return run_calibrate(opt, /*sequence=*/true);
    if (synth->parsed()) return run_synth(opt);
    if (evaluate->parsed()) return run_evaluate(opt, sweep, sweep_values);
    if (compare->parsed()) return run_compare(opt);
  } catch (const std::exception& e) {
    std::cerr << "stereocal: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
