#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <optional>
#include <vector>

#include "stereocal/solver.hpp"

namespace stereocal {

inline Mat3 essential_matrix(const Mat3& rotation, const Vec3& translation) {
  return hat(translation) * rotation;
}

// Nearest matrix with the essential singular-value pattern (s, s, 0).
inline Mat3 project_essential(const Mat3& e) {
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  const double m = 0.5 * (s(0) + s(1));
  return svd.matrixU() * Vec3(m, m, 0.0).asDiagonal() *
         svd.matrixV().transpose();
}

// Epipolar residual of one correspondence against E = hat(t) * R. The
// form q_right . (E q_left) is the one that vanishes when
// q_right = R q_left + t holds (checked on noise-free synthetic data).
inline double epipolar_residual(const Mat3& e, const Vec3& q_left,
                                const Vec3& q_right) {
  return q_right.dot(e * q_left);
}

namespace detail {

using Vec5 = Eigen::Matrix<double, 5, 1>;

struct EpipolarState {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3(-1.0, 0.0, 0.0);
};

// Orthonormal basis of the plane perpendicular to t; the two columns chart
// the unit sphere locally around t.
inline Eigen::Matrix<double, 3, 2> tangent_basis(const Vec3& t) {
  const Vec3 ref = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Eigen::Matrix<double, 3, 2> b;
  b.col(0) = t.cross(ref).normalized();
  b.col(1) = t.cross(b.col(0));
  return b;
}

inline std::vector<double> epipolar_residuals(const EpipolarState& st,
                                              const Rays& rays) {
  const Mat3 e = essential_matrix(st.rotation, st.translation);
  std::vector<double> out(rays.left.size());
  for (std::size_t i = 0; i < rays.left.size(); ++i) {
    out[i] = epipolar_residual(e, rays.left[i], rays.right[i]);
  }
  return out;
}

inline double epipolar_energy(const std::vector<double>& res,
                              const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) acc += w[i] * res[i] * res[i];
  return acc;
}

}  // namespace detail

// Reference method: minimizes the weighted squared epipolar residuals over
// (R, t) with the same LM schedule and Huber weighting as the primary
// solver. R uses the left-multiplied rotation-vector update; unit t moves
// on a two-parameter tangent chart re-centered after every accepted step.
inline PairEstimate solve_epipolar(
    const CorrespondenceSet& obs, const SolverConfig& config = {},
    const std::optional<Extrinsics>& init = std::nullopt) {
  if (static_cast<int>(obs.pairs.size()) < config.min_pairs) {
    throw TooFewPairs("epipolar solver needs at least min_pairs correspondences");
  }

  detail::EpipolarState state;
  if (init) {
    state.rotation = init->rotation;
    state.translation = init->translation.normalized();
  }

  const detail::Rays rays = detail::back_project_all(obs);
  const std::size_t n = rays.left.size();

  std::vector<double> res = detail::epipolar_residuals(state, rays);
  auto reweight = [&](const std::vector<double>& r) {
    std::vector<double> w(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      w[i] = huber_weight(r[i], config.huber_threshold);
    }
    return w;
  };
  std::vector<double> weights = reweight(res);
  double energy = detail::epipolar_energy(res, weights);

  SolveDiagnostics diag;
  double lambda = config.lambda_init;
  double step_norm = 0.0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    diag.iterations = iter + 1;

    const Eigen::Matrix<double, 3, 2> basis = detail::tangent_basis(state.translation);
    const Mat3 t_hat = hat(state.translation);

    Eigen::Matrix<double, 5, 5> h = Eigen::Matrix<double, 5, 5>::Zero();
    detail::Vec5 g = detail::Vec5::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 a = state.rotation * rays.left[i];
      detail::Vec5 row;
      row.head<3>() =
          -(rays.right[i].transpose() * t_hat * hat(a)).transpose();
      row.tail<2>() = (basis.transpose() * a.cross(rays.right[i]));
      h.noalias() += weights[i] * row * row.transpose();
      g.noalias() += weights[i] * res[i] * row;
    }
    h.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(h);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("epipolar normal equations are not positive definite");
    }
    const detail::Vec5 delta = llt.solve(detail::Vec5(-g));

    step_norm = delta.norm();
    if (step_norm < config.step_tol) {
      diag.converged = true;
      break;
    }

    detail::EpipolarState candidate;
    candidate.rotation = exp_so3(delta.head<3>()) * state.rotation;
    candidate.translation =
        (state.translation + basis * delta.tail<2>()).normalized();
    const std::vector<double> cand_res = detail::epipolar_residuals(candidate, rays);
    const double cand_energy = detail::epipolar_energy(cand_res, weights);

    if (cand_energy < energy) {
      diag.accepted_steps.push_back({energy, cand_energy});
      state = candidate;
      res = cand_res;
      weights = reweight(res);
      energy = detail::epipolar_energy(res, weights);
      lambda *= config.lambda_down;
    } else {
      lambda *= config.lambda_up;
      if (lambda > 1e10) break;
    }
  }

  diag.final_energy = energy;
  diag.final_step_norm = step_norm;

  PairEstimate est;
  est.rotation = state.rotation;
  est.translation = state.translation;
  est.theta = log_so3(state.rotation);
  const AxisAngle aa = axis_angle(state.rotation);
  est.axis = aa.axis;
  est.angle = aa.angle;
  est.axis_degenerate = aa.degenerate;
  est.rectifying = RectifyingPair{};  // not produced by this method
  est.diagnostics = std::move(diag);
  return est;
}

}  // namespace stereocal
