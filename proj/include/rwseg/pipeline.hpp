#pragma once

// Algorithm dispatch shared by the command-line tool and the HTTP service.

#include <optional>
#include <string>
#include <string_view>

#include "rwseg/feedback.hpp"
#include "rwseg/walks.hpp"

namespace rwseg {

enum class Algorithm { rw, brw, irw, ibrw };

inline const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::rw: return "rw";
    case Algorithm::brw: return "brw";
    case Algorithm::irw: return "irw";
    case Algorithm::ibrw: return "ibrw";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "rw") return Algorithm::rw;
  if (s == "brw") return Algorithm::brw;
  if (s == "irw") return Algorithm::irw;
  if (s == "ibrw") return Algorithm::ibrw;
  throw Error(ErrorCode::invalid_input, "unknown algorithm '" + std::string(s) + "' (rw, brw, irw, ibrw)");
}

inline bool uses_boundary(Algorithm a) noexcept { return a == Algorithm::brw || a == Algorithm::ibrw; }

/// Runs one algorithm. rw and brw produce a single-pass trace: record 0 is
/// the basic RW map, and brw appends the boundary-penalized re-solve whose
/// S_E comes from that map.
inline FeedbackResult run_algorithm(Algorithm algo, const ImageGrid& img, const SeedState& user_seeds,
                                    const FeedbackParams& params, const SolveOptions& opts = {},
                                    const RunHooks& hooks = {}) {
  switch (algo) {
    case Algorithm::irw: return run_irw(img, user_seeds, params, opts, hooks);
    case Algorithm::ibrw: return run_ibrw(img, user_seeds, params, opts, hooks);
    case Algorithm::rw:
    case Algorithm::brw: break;
  }
  params.validate();
  opts.validate();
  const EdgeWeights weights = compute_weights(img, params.beta, params.weight_floor);
  if (algo == Algorithm::brw && !(params.lambda <= weights.min_weight()))
    throw ConvexityViolation(params.lambda, weights.min_weight());
  if (hooks.ground_truth &&
      (hooks.ground_truth->width != img.width() || hooks.ground_truth->height != img.height()))
    throw Error(ErrorCode::dimension_mismatch, "trimap does not match image");

  FeedbackResult result;
  result.seeds = user_seeds;
  result.seeds.boundary.clear();
  result.seeds.normalize();
  result.seeds.validate();
  result.map = random_walks(weights, result.seeds, opts);
  auto& trace = result.trace;
  trace.records.push_back(detail::make_record(0, result.map, result.seeds, params, hooks));
  if (hooks.on_iteration) hooks.on_iteration(trace.records.back(), result.map);
  trace.stop = StopReason::max_iterations;
  if (algo == Algorithm::rw) return result;

  SeedState with_boundary = result.seeds;
  with_boundary.set_boundary(boundary_set(result.map, result.seeds, params.delta));
  result.map = boundary_random_walks(weights, with_boundary, params.lambda, opts);
  trace.records.push_back(detail::make_record(1, result.map, result.seeds, params, hooks));
  if (hooks.on_iteration) hooks.on_iteration(trace.records.back(), result.map);
  return result;
}

/// S_E of a finished run, measured on its final map and seed sets.
inline std::vector<std::size_t> final_boundary(const FeedbackResult& r, double delta) {
  return boundary_set(r.map, r.seeds, delta);
}

}  // namespace rwseg
