#pragma once

#include <Eigen/Cholesky>

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stereocal/rectification.hpp"

namespace stereocal {

struct SolverConfig {
  // Huber threshold c_t on the vertical-disparity residual, in
  // normalized-ray units (roughly c_t * f pixels of disparity).
  double huber_threshold = 0.01;
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double step_tol = 1e-10;  // on |delta|_2
  int max_iterations = 100;
  int min_pairs = 6;
};

// Current iterate (theta_left, theta_right) with cached rotation matrices.
struct SolverState {
  RotationVector theta_left = RotationVector::Zero();
  RotationVector theta_right = RotationVector::Zero();
  Mat3 R_left = Mat3::Identity();
  Mat3 R_right = Mat3::Identity();

  static SolverState from_rectifying(const RectifyingPair& rect) {
    return {log_so3(rect.R_left), log_so3(rect.R_right), rect.R_left,
            rect.R_right};
  }

  RectifyingPair rectifying() const { return {R_left, R_right}; }
};

// Weighted energy before/after one accepted update, both evaluated with
// that iteration's frozen Huber weights.
struct EnergyStep {
  double before = 0.0;
  double after = 0.0;
};

struct SolveDiagnostics {
  int iterations = 0;
  double final_energy = 0.0;
  double final_step_norm = 0.0;
  bool converged = false;
  int dropped_pairs = 0;
  std::vector<EnergyStep> accepted_steps;
};

// Per-image-pair result: extrinsics plus their axis-angle decomposition.
struct PairEstimate {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3(-1.0, 0.0, 0.0);
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
  RotationVector theta = RotationVector::Zero();
  bool axis_degenerate = false;
  RectifyingPair rectifying;
  SolveDiagnostics diagnostics;
};

inline double huber_weight(double residual, double c_t) {
  const double a = std::abs(residual);
  return a <= c_t ? 1.0 : c_t / a;
}

namespace detail {

struct Rays {
  std::vector<Vec3> left;
  std::vector<Vec3> right;
};

inline Rays back_project_all(const CorrespondenceSet& obs) {
  Rays rays;
  rays.left.reserve(obs.pairs.size());
  rays.right.reserve(obs.pairs.size());
  for (const CorrespondencePair& p : obs.pairs) {
    rays.left.push_back(back_project(obs.intrinsics_left, p.left));
    rays.right.push_back(back_project(obs.intrinsics_right, p.right));
  }
  return rays;
}

// Residual vector of one iterate. Entry 0 is the gauge anchor
// R_right(1, 2); entries 1..N are vertical disparities in input order.
// Pairs whose rotated ray has a non-positive or near-zero z are dropped:
// they contribute a zero entry and are skipped in the normal equations.
struct Residuals {
  std::vector<double> values;  // size N + 1
  std::vector<char> usable;    // size N
  int dropped = 0;
};

inline Residuals compute_residuals(const SolverState& state, const Rays& rays,
                                   int min_pairs) {
  const std::size_t n = rays.left.size();
  Residuals out;
  out.values.assign(n + 1, 0.0);
  out.usable.assign(n, 1);
  out.values[0] = state.R_right(1, 2);
  int usable_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 al = state.R_left * rays.left[i];
    const Vec3 ar = state.R_right * rays.right[i];
    if (al.z() <= kHorizonTol || ar.z() <= kHorizonTol) {
      out.usable[i] = 0;
      ++out.dropped;
      continue;
    }
    out.values[i + 1] = al.y() / al.z() - ar.y() / ar.z();
    ++usable_count;
  }
  if (usable_count < min_pairs) {
    throw TooFewPairs("usable correspondences below the solver minimum");
  }
  return out;
}

// Gradient of (i2 . a(d)) / (i3 . a(d)) with a(d) = exp(hat(d)) * a at
// d = 0, using hat(d) * a = -hat(a) * d.
inline Eigen::RowVector3d ratio_gradient(const Vec3& a) {
  const Eigen::RowVector3d dy(a.z(), 0.0, -a.x());   // i2^T hat(a)
  const Eigen::RowVector3d dz(-a.y(), a.x(), 0.0);   // i3^T hat(a)
  return (-a.z() * dy + a.y() * dz) / (a.z() * a.z());
}

// Gradient of the gauge anchor i2^T R_right i3 under the left-multiplied
// perturbation R_right <- exp(hat(d)) R_right.
inline Eigen::RowVector3d gauge_gradient(const Mat3& r_right) {
  const Vec3 b = r_right.col(2);
  return Eigen::RowVector3d(-b.z(), 0.0, b.x());
}

inline Vec6 pair_jacobian(const SolverState& state, const Vec3& ray_left,
                          const Vec3& ray_right) {
  const Vec3 al = state.R_left * ray_left;
  const Vec3 ar = state.R_right * ray_right;
  // same drop rule as the residuals: non-positive z means the pair is out
  if (al.z() <= kHorizonTol || ar.z() <= kHorizonTol) {
    throw PointAtHorizon("ray lies on or behind the rotated principal plane");
  }
  Vec6 row;
  row.head<3>() = ratio_gradient(al).transpose();
  row.tail<3>() = -ratio_gradient(ar).transpose();
  return row;
}

inline std::vector<double> huber_weights(const Residuals& res, double c_t) {
  std::vector<double> w(res.values.size(), 1.0);  // w[0] stays 1: gauge anchor
  for (std::size_t i = 1; i < res.values.size(); ++i) {
    if (res.usable[i - 1]) w[i] = huber_weight(res.values[i], c_t);
  }
  return w;
}

inline double weighted_energy(const Residuals& res,
                              const std::vector<double>& w) {
  double e = 0.0;
  for (std::size_t i = 0; i < res.values.size(); ++i) {
    e += w[i] * res.values[i] * res.values[i];
  }
  return e;
}

inline SolverState advance(const SolverState& state, const Vec6& delta) {
  SolverState next;
  next.R_left = exp_so3(delta.head<3>()) * state.R_left;
  next.R_right = exp_so3(delta.tail<3>()) * state.R_right;
  next.theta_left = log_so3(next.R_left);
  next.theta_right = log_so3(next.R_right);
  return next;
}

inline PairEstimate make_estimate(const SolverState& state,
                                  SolveDiagnostics diagnostics) {
  const Extrinsics ext = extract_extrinsics(state.rectifying());
  PairEstimate est;
  est.rotation = ext.rotation;
  est.translation = ext.translation;
  est.theta = log_so3(ext.rotation);
  const AxisAngle aa = axis_angle(ext.rotation);
  est.axis = aa.axis;
  est.angle = aa.angle;
  est.axis_degenerate = aa.degenerate;
  est.rectifying = state.rectifying();
  est.diagnostics = std::move(diagnostics);
  return est;
}

}  // namespace detail

inline std::vector<double> residual_vector(const SolverState& state,
                                           const CorrespondenceSet& obs,
                                           const SolverConfig& config = {}) {
  const detail::Rays rays = detail::back_project_all(obs);
  return detail::compute_residuals(state, rays, config.min_pairs).values;
}

// Row `index` of the (N+1) x 6 Jacobian, layout [d/dtheta_left |
// d/dtheta_right], for the perturbation R <- exp_so3(delta) * R.
inline Vec6 jacobian_row(const SolverState& state, int index,
                         const CorrespondenceSet& obs) {
  if (index < 0 || index > static_cast<int>(obs.pairs.size())) {
    throw std::out_of_range("jacobian row index out of range");
  }
  if (index == 0) {
    Vec6 row = Vec6::Zero();
    row.tail<3>() = detail::gauge_gradient(state.R_right).transpose();
    return row;
  }
  const CorrespondencePair& p = obs.pairs[static_cast<std::size_t>(index - 1)];
  return detail::pair_jacobian(state,
                               back_project(obs.intrinsics_left, p.left),
                               back_project(obs.intrinsics_right, p.right));
}

// Solves (sum w_i J_i J_i^T + lambda I) delta = -sum w_i J_i e_i.
// The damped system is positive definite for lambda > 0, so a failed
// Cholesky factorization indicates NaN contamination upstream.
inline Vec6 lm_step(const std::vector<Vec6>& rows,
                    const std::vector<double>& residuals,
                    const std::vector<double>& weights, double lambda) {
  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  Vec6 g = Vec6::Zero();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    h.noalias() += weights[i] * rows[i] * rows[i].transpose();
    g.noalias() += weights[i] * residuals[i] * rows[i];
  }
  h.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(h);
  const Vec6 delta = llt.solve(Vec6(-g));
  if (llt.info() != Eigen::Success || !delta.allFinite()) {
    throw NumericalFailure("damped normal equations are not positive definite");
  }
  return delta;
}

// Minimizes the gauge-anchored vertical-disparity energy over
// (theta_left, theta_right) with Levenberg-Marquardt and iteratively
// reweighted Huber weights, then extracts the per-pair extrinsics.
//
// Without an initial guess the iteration starts at the identity rig
// (deployed stereo rigs are near-rectified). A solve that exhausts the
// iteration or damping budget is returned with converged = false rather
// than raised.
inline PairEstimate solve_single_pair(
    const CorrespondenceSet& obs, const SolverConfig& config = {},
    const std::optional<Extrinsics>& init = std::nullopt) {
  SolverState state;
  if (init) state = SolverState::from_rectifying(init_from_prior(*init));

  const detail::Rays rays = detail::back_project_all(obs);
  const std::size_t n = rays.left.size();

  detail::Residuals res = detail::compute_residuals(state, rays, config.min_pairs);
  std::vector<double> weights = detail::huber_weights(res, config.huber_threshold);
  double energy = detail::weighted_energy(res, weights);

  SolveDiagnostics diag;
  double lambda = config.lambda_init;
  double step_norm = 0.0;

  std::vector<Vec6> rows;
  std::vector<double> vals;
  std::vector<double> ws;
  rows.reserve(n + 1);
  vals.reserve(n + 1);
  ws.reserve(n + 1);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    diag.iterations = iter + 1;

    rows.clear();
    vals.clear();
    ws.clear();
    Vec6 row0 = Vec6::Zero();
    row0.tail<3>() = detail::gauge_gradient(state.R_right).transpose();
    rows.push_back(row0);
    vals.push_back(res.values[0]);
    ws.push_back(weights[0]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!res.usable[i]) continue;
      rows.push_back(detail::pair_jacobian(state, rays.left[i], rays.right[i]));
      vals.push_back(res.values[i + 1]);
      ws.push_back(weights[i + 1]);
    }

    const Vec6 delta = lm_step(rows, vals, ws, lambda);
    step_norm = delta.norm();
    if (step_norm < config.step_tol) {
      diag.converged = true;
      break;
    }

    const SolverState candidate = detail::advance(state, delta);
    detail::Residuals cand_res;
    double cand_energy = std::numeric_limits<double>::infinity();
    try {
      cand_res = detail::compute_residuals(candidate, rays, config.min_pairs);
      cand_energy = detail::weighted_energy(cand_res, weights);
    } catch (const TooFewPairs&) {
      // candidate rotated too many rays out of view: reject it
    }

    if (cand_energy < energy) {
      diag.accepted_steps.push_back({energy, cand_energy});
      state = candidate;
      res = cand_res;
      weights = detail::huber_weights(res, config.huber_threshold);
      energy = detail::weighted_energy(res, weights);
      lambda *= config.lambda_down;
    } else {
      lambda *= config.lambda_up;
      if (lambda > 1e10) break;
    }
  }

  diag.final_energy = energy;
  diag.final_step_norm = step_norm;
  diag.dropped_pairs = res.dropped;
  return detail::make_estimate(state, std::move(diag));
}

}  // namespace stereocal
