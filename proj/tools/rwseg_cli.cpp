#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rwseg/rwseg.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitConvexity = 4;

int exit_code_for(rwseg::ErrorCode code) {
  switch (code) {
    case rwseg::ErrorCode::convexity_violation: return kExitConvexity;
    case rwseg::ErrorCode::solver_failure:
    case rwseg::ErrorCode::not_positive_definite:
    case rwseg::ErrorCode::singular_system: return kExitSolver;
    default: return kExitBadInput;
  }
}

struct CommonOptions {
  std::string algorithm = "ibrw";
  rwseg::FeedbackParams params;
  std::optional<double> xi;
  double tolerance = rwseg::SolveOptions{}.tolerance;
  std::optional<std::string> solver;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--algorithm", o.algorithm, "rw, brw, irw or ibrw")
      ->check(CLI::IsMember({"rw", "brw", "irw", "ibrw"}))
      ->capture_default_str();
  cmd.add_option("--beta", o.params.beta, "edge weight contrast")->capture_default_str();
  cmd.add_option("--weight-floor", o.params.weight_floor, "constant added to every edge weight")->capture_default_str();
  cmd.add_option("--epsilon", o.params.epsilon_seed, "semi-seed threshold")->capture_default_str();
  cmd.add_option("--delta", o.params.delta, "boundary band half-width")->capture_default_str();
  cmd.add_option("--lambda", o.params.lambda, "boundary trade-off, at most min edge weight")->capture_default_str();
  cmd.add_option("--xi", o.xi, "absolute potential-decrease threshold (default: 0.05 * |s_p at init|)");
  cmd.add_option("--max-iter", o.params.max_outer_iterations, "outer iteration cap")->capture_default_str();
  cmd.add_option("--sample-fraction", o.params.sample_fraction, "fraction of semi-seeds kept")->capture_default_str();
  cmd.add_option("--rng-seed", o.params.rng_seed, "semi-seed sampling seed")->capture_default_str();
  cmd.add_option("--tolerance", o.tolerance, "linear solver tolerance")->capture_default_str();
  cmd.add_option("--solver", o.solver, "iterative (default) or dense")->check(CLI::IsMember({"iterative", "dense"}));
}

rwseg::SolveOptions solve_options(const CommonOptions& o) {
  rwseg::SolveOptions s;
  s.tolerance = o.tolerance;
  if (o.solver && *o.solver == "dense") s.method = rwseg::SolveMethod::dense_direct;
  return s;
}

rwseg::FeedbackParams feedback_params(const CommonOptions& o) {
  auto p = o.params;
  p.xi = o.xi;
  p.validate();
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw rwseg::Error(rwseg::ErrorCode::invalid_input, "cannot write " + path.string());
  out << text;
}

std::string iteration_stem(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%03d", k);
  return buf;
}

int cmd_segment(const CommonOptions& o, const std::string& image, const std::string& seeds,
                const std::optional<std::string>& trimap, const std::string& out, bool dump) {
  const auto algo = rwseg::parse_algorithm(o.algorithm);
  const auto params = feedback_params(o);
  const auto opts = solve_options(o);
  std::optional<fs::path> trimap_path;
  if (trimap) trimap_path = *trimap;
  const auto c = rwseg::load_case(image, seeds, trimap_path);
  const fs::path dir(out);
  fs::create_directories(dir);

  rwseg::RunHooks hooks;
  if (c.trimap) hooks.ground_truth = &*c.trimap;
  if (dump)
    hooks.on_iteration = [&](const rwseg::IterationRecord& r, const rwseg::ProbabilityMap& m) {
      const auto stem = iteration_stem(r.iteration);
      rwseg::io::save_probability_map(m, dir / (stem + "_probability.pmap"));
      rwseg::io::save_probability_png(m, dir / (stem + "_probability.png"));
    };
  const auto result = rwseg::run_algorithm(algo, c.image, c.seeds, params, opts, hooks);
  const auto w = c.image.width();
  const auto h = c.image.height();
  rwseg::io::save_labels(result.map.labels, w, h, dir / "labels.png");
  rwseg::io::save_probability_png(result.map, dir / "probability.png");
  rwseg::io::save_probability_map(result.map, dir / "probability.pmap");
  const auto boundary = rwseg::final_boundary(result, params.delta);
  rwseg::io::write_file(dir / "boundary.png", rwseg::io::encode_boundary_png(boundary, w, h));
  write_text(dir / "trace.jsonl", rwseg::to_json_lines(result.trace));

  auto summary = rwseg::to_json(result.trace);
  summary.erase("records");
  summary["algorithm"] = rwseg::to_string(algo);
  summary["params"] = rwseg::to_json(params);
  summary["iterations"] = result.trace.outer_iterations();
  summary["final_potential"] = result.trace.records.back().potential;
  summary["min_weight"] = rwseg::compute_weights(c.image, params.beta, params.weight_floor).min_weight();
  if (c.trimap) {
    const auto m = rwseg::error_metrics(result.map.labels, *c.trimap);
    summary["error_count"] = m.misclassified;
    summary["error_rate"] = m.rate;
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  const auto& last = result.trace.records.back();
  std::cout << rwseg::to_string(algo) << ": " << result.trace.outer_iterations() << " outer iterations, stop "
            << rwseg::to_string(result.trace.stop) << ", s_p " << last.potential << ", |S_E| " << boundary.size();
  if (last.error_count) std::cout << ", errors " << *last.error_count;
  std::cout << '\n';
  for (const auto& note : result.trace.notes) std::cerr << "warning: " << note << '\n';
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::optional<std::string>& image, const std::optional<std::string>& seeds,
              const std::optional<std::string>& trimap, const std::optional<std::string>& corpus,
              const std::vector<std::string>& axes_spec, const std::string& out) {
  const auto algo = rwseg::parse_algorithm(o.algorithm);
  const auto params = feedback_params(o);
  std::vector<rwseg::LabeledCase> cases;
  if (corpus) {
    if (image || seeds) throw rwseg::Error(rwseg::ErrorCode::invalid_input, "use either --corpus or --image/--seeds");
    cases = rwseg::load_corpus(*corpus);
  } else {
    if (!image || !seeds) throw rwseg::Error(rwseg::ErrorCode::invalid_input, "sweep needs --corpus or --image and --seeds");
    std::optional<fs::path> t;
    if (trimap) t = *trimap;
    cases.push_back(rwseg::load_case(*image, *seeds, t, fs::path(*image).stem().string()));
  }
  std::vector<rwseg::SweepAxis> axes;
  for (const auto& s : axes_spec) axes.push_back(rwseg::parse_sweep_axis(s));
  const auto rows = rwseg::run_sweep(cases, axes, params, algo, solve_options(o));
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream csv(path, std::ios::binary | std::ios::trunc);
  if (!csv) throw rwseg::Error(rwseg::ErrorCode::invalid_input, "cannot write " + out);
  rwseg::write_sweep_csv(csv, rows);
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += r.feasible < r.cases;
  std::cout << rows.size() << " sweep points over " << cases.size() << " case(s)";
  if (infeasible) std::cout << ", " << infeasible << " with infeasible lambda";
  std::cout << '\n';
  return kExitOk;
}

int cmd_corpus(const std::string& out) {
  const auto cases = rwseg::synthetic::corpus();
  rwseg::save_corpus(cases, out);
  std::cout << "wrote " << cases.size() << " cases to " << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded random-walk image segmentation"};
  app.require_subcommand(1);

  CommonOptions seg_opts;
  std::string seg_image, seg_seeds, seg_out;
  std::optional<std::string> seg_trimap;
  bool dump = false;
  auto* segment = app.add_subcommand("segment", "segment one image");
  add_common(*segment, seg_opts);
  segment->add_option("--image", seg_image, "PNG or binary PGM/PPM")->required()->check(CLI::ExistingFile);
  segment->add_option("--seeds", seg_seeds, "seed mask PNG (0 none, 1 background, 2 foreground)")
      ->required()
      ->check(CLI::ExistingFile);
  segment->add_option("--trimap", seg_trimap, "ground truth PNG (0, 128, 255)")->check(CLI::ExistingFile);
  segment->add_option("--out", seg_out, "output directory")->required();
  segment->add_flag("--dump-iterations", dump, "write probability rasters for every iteration");

  CommonOptions sweep_opts;
  std::optional<std::string> sw_image, sw_seeds, sw_trimap, sw_corpus;
  std::vector<std::string> sw_axes;
  std::string sw_out;
  auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over epsilon, lambda, delta");
  add_common(*sweep, sweep_opts);
  sweep->add_option("--image", sw_image)->check(CLI::ExistingFile);
  sweep->add_option("--seeds", sw_seeds)->check(CLI::ExistingFile);
  sweep->add_option("--trimap", sw_trimap)->check(CLI::ExistingFile);
  sweep->add_option("--corpus", sw_corpus, "directory of cases (image.pgm, seeds.png, trimap.png)")
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--sweep", sw_axes, "name=v1,v2,... for epsilon, lambda or delta; give once or twice")
      ->required();
  sweep->add_option("--out", sw_out, "CSV path")->required();

  std::string corpus_out;
  auto* corpus = app.add_subcommand("corpus", "write the synthetic corpus");
  corpus->add_option("--out", corpus_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (segment->parsed()) return cmd_segment(seg_opts, seg_image, seg_seeds, seg_trimap, seg_out, dump);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sw_image, sw_seeds, sw_trimap, sw_corpus, sw_axes, sw_out);
    if (corpus->parsed()) return cmd_corpus(corpus_out);
  } catch (const rwseg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}
