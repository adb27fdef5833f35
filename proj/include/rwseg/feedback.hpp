#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rwseg/error.hpp"
#include "rwseg/graph.hpp"
#include "rwseg/image.hpp"
#include "rwseg/seeds.hpp"
#include "rwseg/solver.hpp"
#include "rwseg/walks.hpp"

namespace rwseg {

struct FeedbackParams {
  /// Semi-seed threshold: p < epsilon -> background, p > 1 - epsilon -> foreground.
  double epsilon_seed = 0.1;
  /// Boundary band half-width.
  double delta = 0.1;
  /// BRW trade-off factor, bounded by min(w_ij).
  double lambda = 0.005;
  /// Absolute stopping threshold on the decrease of s_p. When unset,
  /// xi_relative * |s_p at initialization| is used.
  std::optional<double> xi;
  double xi_relative = 0.05;
  int max_outer_iterations = 10;
  /// Fraction of eligible semi-seeds kept per class and iteration.
  double sample_fraction = 1.0;
  std::uint64_t rng_seed = 0;
  double beta = kDefaultBeta;
  double weight_floor = kDefaultWeightFloor;

  void validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_input, m); };
    if (!(epsilon_seed > 0.0 && epsilon_seed < 0.5)) fail("epsilon must lie in (0, 0.5)");
    if (!(delta > 0.0 && delta < 0.5)) fail("delta must lie in (0, 0.5)");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) fail("sample fraction must lie in (0, 1]");
    if (max_outer_iterations < 1) fail("max iterations must be >= 1");
    if (xi && !(*xi >= 0.0)) fail("xi must be >= 0");
    if (!(xi_relative >= 0.0)) fail("relative xi must be >= 0");
  }
};

// --- ground truth -----------------------------------------------------------

enum class TrimapCode : std::uint8_t { background = 0, unclassified = 128, foreground = 255 };

struct Trimap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<TrimapCode> codes;
};

struct ErrorMetrics {
  std::size_t misclassified = 0;
  std::size_t unclassified = 0;
  double rate = 0.0;
  /// Set when the trimap has no unclassified band and the rate falls back to
  /// misclassified / total pixels.
  bool whole_image_denominator = false;
};

/// Misclassified pixels are counted outside the unclassified band only; the
/// rate divides them by the size of that band.
inline ErrorMetrics error_metrics(std::span<const std::uint8_t> labels, const Trimap& truth) {
  if (labels.size() != truth.codes.size() || truth.codes.size() != truth.width * truth.height)
    throw Error(ErrorCode::dimension_mismatch, "label map and trimap differ in size");
  ErrorMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    switch (truth.codes[i]) {
      case TrimapCode::unclassified: ++m.unclassified; break;
      case TrimapCode::foreground: m.misclassified += labels[i] ? 0 : 1; break;
      case TrimapCode::background: m.misclassified += labels[i] ? 1 : 0; break;
    }
  }
  if (m.unclassified > 0) {
    m.rate = static_cast<double>(m.misclassified) / static_cast<double>(m.unclassified);
  } else {
    m.whole_image_denominator = true;
    m.rate = labels.empty() ? 0.0 : static_cast<double>(m.misclassified) / static_cast<double>(labels.size());
  }
  return m;
}

inline double error_rate(std::span<const std::uint8_t> labels, const Trimap& truth) {
  return error_metrics(labels, truth).rate;
}

// --- potential and semi-seeds ----------------------------------------------

/// s_p = -sum_i (p_i - 0.5)^2 over every pixel, seeds included.
inline double segmentation_potential(const ProbabilityMap& map) {
  double s = 0.0;
  for (double p : map.clamped) s += (p - 0.5) * (p - 0.5);
  return -s;
}

struct SemiSeeds {
  std::vector<std::size_t> foreground;
  std::vector<std::size_t> background;

  bool empty() const noexcept { return foreground.empty() && background.empty(); }
};

namespace detail {

inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  // rejection sampling keeps the draw unbiased and library-independent
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % n;
}

/// Keeps round(fraction * n) of `candidates`, chosen by partial Fisher-Yates;
/// the result stays sorted.
inline std::vector<std::size_t> sample_fraction(std::vector<std::size_t> candidates, double fraction,
                                                std::mt19937_64& rng) {
  if (fraction >= 1.0 || candidates.empty()) return candidates;
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(candidates.size()) + 0.5));
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(keep);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

inline std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

/// Unseeded pixels with p < epsilon become background candidates and those
/// with p > 1 - epsilon foreground candidates; a fraction of each class is
/// kept using a generator seeded from (rng_seed, iteration).
inline SemiSeeds select_semi_seeds(const ProbabilityMap& map, const SeedState& seeds, const FeedbackParams& params,
                                   std::uint64_t iteration = 0) {
  if (seeds.pixel_count != map.size())
    throw Error(ErrorCode::dimension_mismatch, "seed state does not match probability map");
  const auto labels = seeds.label_map();
  SemiSeeds out;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (labels[i] != SeedLabel::none) continue;
    const double p = map.clamped[i];
    if (p < params.epsilon_seed)
      out.background.push_back(i);
    else if (p > 1.0 - params.epsilon_seed)
      out.foreground.push_back(i);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(params.rng_seed), static_cast<std::uint32_t>(params.rng_seed >> 32),
                    static_cast<std::uint32_t>(iteration), static_cast<std::uint32_t>(iteration >> 32)};
  std::mt19937_64 rng(seq);
  out.foreground = detail::sample_fraction(std::move(out.foreground), params.sample_fraction, rng);
  out.background = detail::sample_fraction(std::move(out.background), params.sample_fraction, rng);
  return out;
}

// --- outer loops ------------------------------------------------------------

struct IterationRecord {
  /// 0 is the plain random-walks initialization.
  int iteration = 0;
  double potential = 0.0;
  /// |{unseeded i : |p_i - 0.5| < delta}| of this iteration's map.
  std::size_t boundary_count = 0;
  std::size_t added_foreground = 0;
  std::size_t added_background = 0;
  std::size_t foreground_seeds = 0;
  std::size_t background_seeds = 0;
  /// FNV-1a of the label map, hex.
  std::string labels_id;
  std::optional<std::size_t> error_count;
  std::optional<double> error_rate;
  /// Semi-seeds merged before this iteration's solve.
  std::vector<std::size_t> new_foreground;
  std::vector<std::size_t> new_background;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

enum class StopReason { max_iterations, potential_converged, fixed_point, solver_failure };

inline const char* to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::max_iterations: return "max-iterations";
    case StopReason::potential_converged: return "potential-converged";
    case StopReason::fixed_point: return "fixed-point";
    case StopReason::solver_failure: return "solver-failure";
  }
  return "unknown";
}

struct IterationTrace {
  std::vector<IterationRecord> records;
  StopReason stop = StopReason::max_iterations;
  /// Absolute xi actually used.
  double xi = 0.0;
  /// The last solve failed and `records.back()` is the last good state.
  bool degraded = false;
  std::vector<std::string> notes;

  /// Outer iterations executed after initialization.
  int outer_iterations() const noexcept { return static_cast<int>(records.size()) - 1; }

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

struct FeedbackResult {
  ProbabilityMap map;
  IterationTrace trace;
  /// User seeds plus every semi-seed merged during the run.
  SeedState seeds;
};

struct RunHooks {
  const Trimap* ground_truth = nullptr;
  /// Called with every accepted iteration, initialization included.
  std::function<void(const IterationRecord&, const ProbabilityMap&)> on_iteration;
};

namespace detail {

inline IterationRecord make_record(int iteration, const ProbabilityMap& map, const SeedState& seeds,
                                   const FeedbackParams& params, const RunHooks& hooks) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.potential = segmentation_potential(map);
  rec.boundary_count = boundary_set(map, seeds, params.delta).size();
  rec.foreground_seeds = seeds.foreground.size();
  rec.background_seeds = seeds.background.size();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(map.labels)));
  rec.labels_id = buf;
  if (hooks.ground_truth) {
    auto m = error_metrics(map.labels, *hooks.ground_truth);
    rec.error_count = m.misclassified;
    rec.error_rate = m.rate;
  }
  return rec;
}

inline FeedbackResult run_feedback(const ImageGrid& img, const SeedState& user_seeds, const FeedbackParams& params,
                                   const SolveOptions& opts, bool boundary_walks, const RunHooks& hooks) {
  params.validate();
  opts.validate();
  const EdgeWeights weights = compute_weights(img, params.beta, params.weight_floor);
  if (boundary_walks && !(params.lambda <= weights.min_weight()))
    throw ConvexityViolation(params.lambda, weights.min_weight());
  if (hooks.ground_truth &&
      (hooks.ground_truth->width != img.width() || hooks.ground_truth->height != img.height()))
    throw Error(ErrorCode::dimension_mismatch, "trimap does not match image");

  SeedState seeds = user_seeds;
  seeds.boundary.clear();
  seeds.normalize();
  seeds.validate();

  FeedbackResult result;
  result.map = solve_walks(assemble_laplacian(weights, seeds), opts);
  auto& trace = result.trace;
  trace.records.push_back(make_record(0, result.map, seeds, params, hooks));
  if (hooks.on_iteration) hooks.on_iteration(trace.records.back(), result.map);
  double potential = trace.records.back().potential;
  trace.xi = params.xi.value_or(params.xi_relative * std::abs(potential));

  const bool boundary_term = boundary_walks && params.lambda != 0.0;
  std::vector<std::size_t> last_boundary;
  trace.stop = StopReason::max_iterations;
  for (int k = 1; k <= params.max_outer_iterations; ++k) {
    SemiSeeds semi = select_semi_seeds(result.map, seeds, params, static_cast<std::uint64_t>(k));
    SeedState enlarged = seeds;
    for (auto i : semi.foreground) enlarged.foreground.push_back({i, Provenance::automatic});
    for (auto i : semi.background) enlarged.background.push_back({i, Provenance::automatic});
    enlarged.normalize();

    // Boundary seeds come from the previous map, after the seed sets grew.
    std::vector<std::size_t> boundary;
    if (boundary_walks) boundary = boundary_set(result.map, enlarged, params.delta);

    if (semi.empty() && (!boundary_term || boundary == last_boundary)) {
      trace.stop = StopReason::fixed_point;
      break;
    }

    ProbabilityMap next;
    try {
      auto lap = assemble_laplacian(weights, enlarged);
      if (boundary_walks) lap = apply_boundary_modification(lap, boundary, params.lambda);
      next = solve_walks(lap, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::solver_failure && e.code() != ErrorCode::not_positive_definite) throw;
      trace.degraded = true;
      trace.stop = StopReason::solver_failure;
      trace.notes.push_back("iteration " + std::to_string(k) + ": " + e.what());
      break;
    }

    seeds = std::move(enlarged);
    result.map = std::move(next);
    last_boundary = std::move(boundary);
    auto rec = make_record(k, result.map, seeds, params, hooks);
    rec.added_foreground = semi.foreground.size();
    rec.added_background = semi.background.size();
    rec.new_foreground = std::move(semi.foreground);
    rec.new_background = std::move(semi.background);
    trace.records.push_back(std::move(rec));
    if (hooks.on_iteration) hooks.on_iteration(trace.records.back(), result.map);

    const double decrease = potential - trace.records.back().potential;
    potential = trace.records.back().potential;
    if (k >= params.max_outer_iterations) {
      trace.stop = StopReason::max_iterations;
      break;
    }
    if (decrease <= trace.xi) {
      trace.stop = StopReason::potential_converged;
      break;
    }
  }
  if (trace.records.back().error_rate && hooks.ground_truth &&
      error_metrics(result.map.labels, *hooks.ground_truth).whole_image_denominator)
    trace.notes.push_back("trimap has no unclassified band; error rate uses the whole image");
  result.seeds = std::move(seeds);
  return result;
}

}  // namespace detail

/// Iterative random walks: grow the seed sets from confident pixels and
/// re-solve until s_p stops decreasing by more than xi or N iterations ran.
inline FeedbackResult run_irw(const ImageGrid& img, const SeedState& user_seeds, const FeedbackParams& params = {},
                              const SolveOptions& opts = {}, const RunHooks& hooks = {}) {
  return detail::run_feedback(img, user_seeds, params, opts, false, hooks);
}

/// Iterative boundary random walks: as run_irw, with each re-solve using the
/// boundary-penalized system over S_E = {|p - 0.5| < delta}.
inline FeedbackResult run_ibrw(const ImageGrid& img, const SeedState& user_seeds, const FeedbackParams& params = {},
                               const SolveOptions& opts = {}, const RunHooks& hooks = {}) {
  return detail::run_feedback(img, user_seeds, params, opts, true, hooks);
}

}  // namespace rwseg
