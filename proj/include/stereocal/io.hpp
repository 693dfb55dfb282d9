#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stereocal/metrics.hpp"
#include "stereocal/solver.hpp"

namespace stereocal {

inline constexpr const char* kToolVersion = "0.1.0";

namespace io {

using json = nlohmann::json;

// Shortest representation that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Correspondence text format: one pair per line, "u_l v_l u_r v_r",
// whitespace separated, '#' starts a comment.
inline std::vector<CorrespondencePair> read_pairs(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CalibrationError("cannot open correspondence file: " + path.string());
  }
  std::vector<CorrespondencePair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ss(line);
    double ul, vl, ur, vr;
    if (!(ss >> ul >> vl >> ur >> vr)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected four reals \"u_l v_l u_r v_r\"",
                       line_no);
    }
    std::string rest;
    if (ss >> rest) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": trailing content after four reals",
                       line_no);
    }
    pairs.push_back({PixelPoint(ul, vl), PixelPoint(ur, vr)});
  }
  return pairs;
}

inline void write_pairs(const std::filesystem::path& path,
                        const std::vector<CorrespondencePair>& pairs) {
  std::ofstream out(path);
  if (!out) {
    throw CalibrationError("cannot write correspondence file: " + path.string());
  }
  for (const CorrespondencePair& p : pairs) {
    out << format_double(p.left.x()) << ' ' << format_double(p.left.y()) << ' '
        << format_double(p.right.x()) << ' ' << format_double(p.right.y())
        << '\n';
  }
}

inline json intrinsics_to_json(const Intrinsics& k) {
  return json{{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
              {"skew", k.skew}};
}

inline Intrinsics intrinsics_from_json(const json& j) {
  Intrinsics k;
  for (const char* field : {"fx", "fy", "cx", "cy", "skew"}) {
    if (!j.contains(field)) {
      throw MissingIntrinsics(std::string("intrinsics field missing: ") + field);
    }
  }
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.skew = j.at("skew").get<double>();
  if (k.fx <= 0.0 || k.fy <= 0.0) {
    throw MissingIntrinsics("intrinsics focal lengths must be positive");
  }
  return k;
}

// Sidecar config with per-camera intrinsics under "left" / "right".
inline std::pair<Intrinsics, Intrinsics> read_intrinsics(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingIntrinsics("cannot open intrinsics file: " + path.string());
  }
  json j;
  in >> j;
  if (!j.contains("left") || !j.contains("right")) {
    throw MissingIntrinsics("intrinsics file needs \"left\" and \"right\": " +
                            path.string());
  }
  return {intrinsics_from_json(j.at("left")), intrinsics_from_json(j.at("right"))};
}

inline void write_intrinsics(const std::filesystem::path& path,
                             const Intrinsics& left, const Intrinsics& right) {
  std::ofstream out(path);
  if (!out) {
    throw CalibrationError("cannot write intrinsics file: " + path.string());
  }
  out << json{{"left", intrinsics_to_json(left)},
              {"right", intrinsics_to_json(right)}}
             .dump(2)
      << '\n';
}

}  // namespace io

inline CorrespondenceSet parse_correspondences(
    const std::filesystem::path& pairs_path,
    const std::filesystem::path& intrinsics_path) {
  CorrespondenceSet set;
  set.pairs = io::read_pairs(pairs_path);
  auto [left, right] = io::read_intrinsics(intrinsics_path);
  set.intrinsics_left = left;
  set.intrinsics_right = right;
  return set;
}

namespace io {

// Rotations are serialized row-major with an explicit field name so a
// transposed read-back cannot go unnoticed.
inline json mat3_to_json(const Mat3& m) {
  json arr = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) arr.push_back(m(r, c));
  }
  return arr;
}

inline Mat3 mat3_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() != 9) {
    throw CalibrationError("expected a 9-element row-major matrix array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m(r, c) = arr.at(static_cast<std::size_t>(3 * r + c)).get<double>();
    }
  }
  return m;
}

inline Mat3 rotation_from_json(const json& arr) {
  const Mat3 m = mat3_from_json(arr);
  if (!is_rotation(m)) {
    throw CalibrationError("matrix read back is not a rotation");
  }
  return m;
}

inline json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() != 3) {
    throw CalibrationError("expected a 3-element vector array");
  }
  return Vec3(arr.at(0).get<double>(), arr.at(1).get<double>(),
              arr.at(2).get<double>());
}

inline json solver_config_to_json(const SolverConfig& c) {
  return json{{"huber_threshold", c.huber_threshold},
              {"lambda_init", c.lambda_init},
              {"lambda_up", c.lambda_up},
              {"lambda_down", c.lambda_down},
              {"step_tol", c.step_tol},
              {"max_iterations", c.max_iterations},
              {"min_pairs", c.min_pairs}};
}

inline SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  if (j.contains("huber_threshold")) c.huber_threshold = j.at("huber_threshold").get<double>();
  if (j.contains("lambda_init")) c.lambda_init = j.at("lambda_init").get<double>();
  if (j.contains("lambda_up")) c.lambda_up = j.at("lambda_up").get<double>();
  if (j.contains("lambda_down")) c.lambda_down = j.at("lambda_down").get<double>();
  if (j.contains("step_tol")) c.step_tol = j.at("step_tol").get<double>();
  if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
  if (j.contains("min_pairs")) c.min_pairs = j.at("min_pairs").get<int>();
  return c;
}

inline SolverConfig read_solver_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CalibrationError("cannot open config file: " + path.string());
  }
  json j;
  in >> j;
  return solver_config_from_json(j);
}

inline json diagnostics_to_json(const SolveDiagnostics& d) {
  return json{{"iterations", d.iterations},
              {"final_energy", d.final_energy},
              {"final_step_norm", d.final_step_norm},
              {"converged", d.converged},
              {"dropped_pairs", d.dropped_pairs}};
}

inline json pair_estimate_to_json(const PairEstimate& e) {
  return json{{"rotation_row_major", mat3_to_json(e.rotation)},
              {"translation", vec3_to_json(e.translation)},
              {"theta", vec3_to_json(e.theta)},
              {"axis", vec3_to_json(e.axis)},
              {"angle", e.angle},
              {"axis_degenerate", e.axis_degenerate},
              {"diagnostics", diagnostics_to_json(e.diagnostics)}};
}

inline PairEstimate pair_estimate_from_json(const json& j) {
  PairEstimate e;
  e.rotation = rotation_from_json(j.at("rotation_row_major"));
  e.translation = vec3_from_json(j.at("translation"));
  e.theta = vec3_from_json(j.at("theta"));
  e.axis = vec3_from_json(j.at("axis"));
  e.angle = j.at("angle").get<double>();
  e.axis_degenerate = j.at("axis_degenerate").get<bool>();
  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    e.diagnostics.iterations = d.at("iterations").get<int>();
    e.diagnostics.final_energy = d.at("final_energy").get<double>();
    e.diagnostics.final_step_norm = d.at("final_step_norm").get<double>();
    e.diagnostics.converged = d.at("converged").get<bool>();
    e.diagnostics.dropped_pairs = d.at("dropped_pairs").get<int>();
  }
  return e;
}

inline json global_estimate_to_json(const GlobalEstimate& g) {
  return json{{"rotation_row_major", mat3_to_json(g.rotation)},
              {"translation", vec3_to_json(g.translation)},
              {"theta", vec3_to_json(g.theta)},
              {"axis", vec3_to_json(g.axis)},
              {"angle", g.angle},
              {"contributing_pairs", g.contributing_pairs},
              {"axes_degenerate", g.axes_degenerate}};
}

inline GlobalEstimate global_estimate_from_json(const json& j) {
  GlobalEstimate g;
  g.rotation = rotation_from_json(j.at("rotation_row_major"));
  g.translation = vec3_from_json(j.at("translation"));
  g.theta = vec3_from_json(j.at("theta"));
  g.axis = vec3_from_json(j.at("axis"));
  g.angle = j.at("angle").get<double>();
  g.contributing_pairs = j.at("contributing_pairs").get<int>();
  g.axes_degenerate = j.at("axes_degenerate").get<bool>();
  return g;
}

inline json metrics_to_json(const MetricsReport& m) {
  return json{{"e_t", m.e_t},
              {"e_theta", m.e_theta},
              {"sigma_t", m.sigma_t},
              {"sigma_theta", m.sigma_theta},
              {"M", m.M}};
}

inline MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  m.e_t = j.at("e_t").get<double>();
  m.e_theta = j.at("e_theta").get<double>();
  m.sigma_t = j.at("sigma_t").get<double>();
  m.sigma_theta = j.at("sigma_theta").get<double>();
  m.M = j.at("M").get<int>();
  return m;
}

inline ReferenceExtrinsics read_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CalibrationError("cannot open reference file: " + path.string());
  }
  json j;
  in >> j;
  ReferenceExtrinsics ref;
  ref.rotation = rotation_from_json(j.at("rotation_row_major"));
  ref.translation = vec3_from_json(j.at("translation")).normalized();
  ref.theta = j.contains("theta") ? Vec3(vec3_from_json(j.at("theta")))
                                  : log_so3(ref.rotation);
  return ref;
}

inline void write_reference(const std::filesystem::path& path,
                            const Extrinsics& ext) {
  std::ofstream out(path);
  if (!out) {
    throw CalibrationError("cannot write reference file: " + path.string());
  }
  out << json{{"rotation_row_major", mat3_to_json(ext.rotation)},
              {"translation", vec3_to_json(ext.translation)},
              {"theta", vec3_to_json(log_so3(ext.rotation))}}
             .dump(2)
      << '\n';
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw CalibrationError("cannot write output file: " + path.string());
  }
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CalibrationError("cannot open file: " + path.string());
  }
  json j;
  in >> j;
  return j;
}

}  // namespace io
}  // namespace stereocal
