#pragma once

#include <optional>
#include <vector>

#include "stereocal/aggregate.hpp"
#include "stereocal/epipolar.hpp"
#include "stereocal/metrics.hpp"
#include "stereocal/synthetic.hpp"

namespace stereocal {

enum class Method { rectification, epipolar };

inline PairEstimate solve_with(Method method, const CorrespondenceSet& obs,
                               const SolverConfig& config,
                               const std::optional<Extrinsics>& init = {}) {
  return method == Method::epipolar ? solve_epipolar(obs, config, init)
                                    : solve_single_pair(obs, config, init);
}

struct SequenceResult {
  std::vector<PairEstimate> estimates;  // one per input set, input order
  std::optional<GlobalEstimate> global;
  std::optional<MetricsReport> metrics;
  int converged = 0;
};

// Solves every correspondence set, aggregates the converged estimates, and
// scores against the reference when one is given.
inline SequenceResult run_sequence(
    const std::vector<CorrespondenceSet>& sets, const SolverConfig& config,
    Method method = Method::rectification,
    const std::optional<ReferenceExtrinsics>& reference = std::nullopt) {
  SequenceResult out;
  out.estimates.reserve(sets.size());
  for (const CorrespondenceSet& obs : sets) {
    out.estimates.push_back(solve_with(method, obs, config));
    if (out.estimates.back().diagnostics.converged) ++out.converged;
  }
  if (out.converged == 0) return out;

  std::vector<PairEstimate> good;
  good.reserve(static_cast<std::size_t>(out.converged));
  for (const PairEstimate& e : out.estimates) {
    if (e.diagnostics.converged) good.push_back(e);
  }
  out.global = aggregate(good);
  if (reference) {
    out.metrics = evaluate_metrics(*reference, *out.global,
                                   canonicalize_against(good, *reference));
  }
  return out;
}

struct CompareResult {
  SequenceResult ours;
  SequenceResult baseline;
};

// Runs both methods over the same correspondence sets against the same
// reference; the backbone of the comparison command.
inline CompareResult run_compare(const std::vector<CorrespondenceSet>& sets,
                                 const SolverConfig& config,
                                 const ReferenceExtrinsics& reference) {
  return {run_sequence(sets, config, Method::rectification, reference),
          run_sequence(sets, config, Method::epipolar, reference)};
}

struct SweepPoint {
  double value = 0.0;
  MetricsReport metrics;
};

// Error versus noise level, M scenes per level.
inline std::vector<SweepPoint> run_noise_sweep(const SceneConfig& base_config,
                                               const Extrinsics& truth, int M,
                                               const std::vector<double>& sigmas,
                                               const SolverConfig& solver) {
  const ReferenceExtrinsics ref = make_reference(truth);
  std::vector<SweepPoint> points;
  points.reserve(sigmas.size());
  for (const double sigma : sigmas) {
    SceneConfig config = base_config;
    config.pixel_noise_sigma = sigma;
    const auto [sets, gt] = run_protocol(config, truth, M);
    const SequenceResult r = run_sequence(sets, solver, Method::rectification, ref);
    points.push_back({sigma, r.metrics.value_or(MetricsReport{})});
  }
  return points;
}

// Error versus the number of aggregated pairs.
inline std::vector<SweepPoint> run_pairs_sweep(const SceneConfig& base_config,
                                               const Extrinsics& truth,
                                               const std::vector<int>& pair_counts,
                                               const SolverConfig& solver) {
  const ReferenceExtrinsics ref = make_reference(truth);
  std::vector<SweepPoint> points;
  points.reserve(pair_counts.size());
  for (const int m : pair_counts) {
    const auto [sets, gt] = run_protocol(base_config, truth, m);
    const SequenceResult r = run_sequence(sets, solver, Method::rectification, ref);
    points.push_back({static_cast<double>(m), r.metrics.value_or(MetricsReport{})});
  }
  return points;
}

}  // namespace stereocal
