#pragma once

// Parameter sweeps over epsilon / lambda / delta and on-disk corpus layout.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rwseg/imageio.hpp"
#include "rwseg/pipeline.hpp"
#include "rwseg/synthetic.hpp"

namespace rwseg {

struct LabeledCase {
  std::string name;
  ImageGrid image;
  SeedState seeds;
  std::optional<Trimap> trimap;
};

/// Writes `<dir>/<name>/{image.pgm, seeds.png, trimap.png}` per case.
inline void save_corpus(const std::vector<synthetic::Case>& cases, const std::filesystem::path& dir) {
  for (const auto& c : cases) {
    const auto sub = dir / c.name;
    std::filesystem::create_directories(sub);
    io::write_file(sub / "image.pgm", io::encode_pnm(io::from_image(c.image)));
    io::save_seed_mask(c.seeds, c.image.width(), c.image.height(), sub / "seeds.png");
    io::save_trimap(c.trimap, sub / "trimap.png");
  }
}

inline LabeledCase load_case(const std::filesystem::path& image, const std::filesystem::path& seeds,
                             const std::optional<std::filesystem::path>& trimap, std::string name = {}) {
  LabeledCase c{std::move(name), io::load_image(image), {}, std::nullopt};
  c.seeds = io::load_seed_mask(seeds, c.image.width(), c.image.height());
  if (trimap) c.trimap = io::load_trimap(*trimap, c.image.width(), c.image.height());
  return c;
}

/// Every subdirectory holding image.pgm (or image.png) and seeds.png, sorted
/// by name; trimap.png is optional.
inline std::vector<LabeledCase> load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::invalid_input, "no corpus at " + dir.string());
  std::vector<std::filesystem::path> subs;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory()) subs.push_back(e.path());
  std::sort(subs.begin(), subs.end());
  std::vector<LabeledCase> out;
  for (const auto& sub : subs) {
    auto image = sub / "image.pgm";
    if (!std::filesystem::exists(image)) image = sub / "image.png";
    if (!std::filesystem::exists(image) || !std::filesystem::exists(sub / "seeds.png")) continue;
    std::optional<std::filesystem::path> trimap;
    if (std::filesystem::exists(sub / "trimap.png")) trimap = sub / "trimap.png";
    out.push_back(load_case(image, sub / "seeds.png", trimap, sub.filename().string()));
  }
  if (out.empty()) throw Error(ErrorCode::invalid_input, "corpus at " + dir.string() + " has no cases");
  return out;
}

// --- sweeps -----------------------------------------------------------------

enum class SweepParam { epsilon, lambda, delta };

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "epsilon") return SweepParam::epsilon;
  if (s == "lambda") return SweepParam::lambda;
  if (s == "delta") return SweepParam::delta;
  throw Error(ErrorCode::invalid_input, "cannot sweep '" + s + "' (epsilon, lambda, delta)");
}

struct SweepAxis {
  SweepParam param;
  std::vector<double> values;
};

/// "name=v1,v2,..."
inline SweepAxis parse_sweep_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::invalid_input, "sweep spec must look like name=v1,v2");
  SweepAxis axis{parse_sweep_param(spec.substr(0, eq)), {}};
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw Error(ErrorCode::invalid_input, "bad sweep value '" + item + "'");
    axis.values.push_back(v);
  }
  if (axis.values.empty()) throw Error(ErrorCode::invalid_input, "sweep axis has no values");
  return axis;
}

struct SweepRow {
  double epsilon = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  std::size_t cases = 0;
  /// Cases where lambda <= min(w_ij); the others are skipped.
  std::size_t feasible = 0;
  /// Cases whose feedback loop ended on a solver failure.
  std::size_t degraded = 0;
  /// Means over feasible cases; NaN when none was feasible or no trimap exists.
  double error_rate = std::numeric_limits<double>::quiet_NaN();
  double final_potential = std::numeric_limits<double>::quiet_NaN();
  /// Largest outer-iteration count among feasible cases.
  int iterations = 0;
};

inline void set_param(FeedbackParams& p, SweepParam which, double v) {
  switch (which) {
    case SweepParam::epsilon: p.epsilon_seed = v; break;
    case SweepParam::lambda: p.lambda = v; break;
    case SweepParam::delta: p.delta = v; break;
  }
}

/// Runs `algo` on every case for each point of the grid spanned by one or two
/// axes. Infeasible lambda values are flagged per row, never thrown.
inline std::vector<SweepRow> run_sweep(const std::vector<LabeledCase>& cases, const std::vector<SweepAxis>& axes,
                                       const FeedbackParams& base, Algorithm algo, const SolveOptions& opts = {}) {
  if (axes.empty() || axes.size() > 2) throw Error(ErrorCode::invalid_input, "sweep needs one or two axes");
  if (axes.size() == 2 && axes[0].param == axes[1].param)
    throw Error(ErrorCode::invalid_input, "sweep axes must differ");
  std::vector<FeedbackParams> grid;
  for (double a : axes[0].values) {
    FeedbackParams p = base;
    set_param(p, axes[0].param, a);
    if (axes.size() == 1) {
      grid.push_back(p);
      continue;
    }
    for (double b : axes[1].values) {
      FeedbackParams q = p;
      set_param(q, axes[1].param, b);
      grid.push_back(q);
    }
  }
  std::vector<EdgeWeights> weights;
  for (const auto& c : cases) weights.push_back(compute_weights(c.image, base.beta, base.weight_floor));

  std::vector<SweepRow> rows;
  for (const auto& p : grid) {
    p.validate();
    SweepRow row{p.epsilon_seed, p.lambda, p.delta, cases.size(), 0, 0};
    double err = 0.0, pot = 0.0;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < cases.size(); ++k) {
      if (uses_boundary(algo) && p.lambda > weights[k].min_weight()) continue;
      RunHooks hooks;
      if (cases[k].trimap) hooks.ground_truth = &*cases[k].trimap;
      auto r = run_algorithm(algo, cases[k].image, cases[k].seeds, p, opts, hooks);
      ++row.feasible;
      if (r.trace.degraded) ++row.degraded;
      pot += r.trace.records.back().potential;
      row.iterations = std::max(row.iterations, r.trace.outer_iterations());
      if (r.trace.records.back().error_rate) {
        err += *r.trace.records.back().error_rate;
        ++scored;
      }
    }
    if (row.feasible) row.final_potential = pot / static_cast<double>(row.feasible);
    if (scored) row.error_rate = err / static_cast<double>(scored);
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "epsilon,lambda,delta,cases,feasible,degraded,error_rate,final_potential,iterations\n";
  auto num = [](double v) {
    if (std::isnan(v)) return std::string();
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
  };
  for (const auto& r : rows)
    out << num(r.epsilon) << ',' << num(r.lambda) << ',' << num(r.delta) << ',' << r.cases << ',' << r.feasible << ','
        << r.degraded << ',' << num(r.error_rate) << ',' << num(r.final_potential) << ',' << r.iterations << '\n';
}

}  // namespace rwseg
