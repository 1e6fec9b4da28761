// synaptik: command-line front end over the pipeline stages.
//
// Every stage reads and writes files under --dir. A JSON manifest supplies
// any flag not given on the command line: either flat {"tau": 0.3, ...} or
// split into {"paths": {...}, "params": {...}}; keys are flag names with
// '-' replaced by '_'.

#include <cstdio>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "synaptik/candidates.hpp"
#include "synaptik/evaluation.hpp"
#include "synaptik/groundtruth.hpp"
#include "synaptik/io.hpp"
#include "synaptik/parallel.hpp"
#include "synaptik/pruning.hpp"
#include "synaptik/svol_io.hpp"
#include "synaptik/synth.hpp"
#include "synaptik/target.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace synaptik;

namespace {

std::vector<double> default_thetas() {
  std::vector<double> t;
  for (int i = 0; i <= 100; ++i) t.push_back(i / 100.0);
  return t;
}

struct Settings {
  // Paths, relative ones resolved against dir.
  std::string dir = ".";
  std::string image = "image.svol";
  std::string segmentation = "segmentation.svol";
  std::string gt_segmentation;  // empty: same as segmentation
  std::string annotation = "annotation.svol";
  std::string gt = "gt.jsonl";
  std::string target = "target.svol";
  std::string proximity = "proximity.svol";
  std::string candidates = "candidates.jsonl";
  std::string pre_components = "pre_components.svol";
  std::string post_components = "post_components.svol";
  std::string features = "features.csv";
  std::string scorer = "scorer.json";
  std::string external_scores;  // when set, score ingests these instead
  std::string scored = "scored.jsonl";
  std::string predictions = "predictions.jsonl";
  std::string report = "report.json";
  std::string pr_csv = "pr.csv";
  std::string pr_svg = "pr.svg";

  std::uint64_t seed = 7;
  std::vector<std::size_t> dims_zyx{32, 192, 192};
  std::vector<double> voxel_size_xyz{4.0, 4.0, 30.0};
  PhantomConfig phantom;
  unsigned membrane_gray = PhantomConfig{}.membrane_gray;
  unsigned cytoplasm_gray = PhantomConfig{}.cytoplasm_gray;
  TargetParams target_params;
  OracleParams oracle;
  CandidateParams cand;
  std::vector<std::size_t> window_zyx{16, 160, 160};
  TrainConfig train;
  std::string trained_on;
  double theta = 0.5;
  std::vector<double> thetas = default_thetas();

  fs::path path(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() ? q : fs::path(dir) / q;
  }
  fs::path gt_seg_path() const {
    return path(gt_segmentation.empty() ? segmentation : gt_segmentation);
  }

  PhantomConfig phantom_config() const {
    PhantomConfig c = phantom;
    c.dims = {dims_zyx[0], dims_zyx[1], dims_zyx[2]};
    c.voxel_size = {voxel_size_xyz[0], voxel_size_xyz[1], voxel_size_xyz[2]};
    c.seed = seed;
    c.membrane_gray = static_cast<std::uint8_t>(membrane_gray);
    c.cytoplasm_gray = static_cast<std::uint8_t>(cytoplasm_gray);
    c.target = target_params;
    return c;
  }
  OracleParams oracle_params() const {
    OracleParams o = oracle;
    o.seed = seed;
    return o;
  }
  WindowSpec window() const { return {window_zyx[0], window_zyx[1], window_zyx[2]}; }
  TrainConfig train_config() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
  }
};

// ---- option groups ---------------------------------------------------------

void path_opt(CLI::App* sub, const char* name, std::string& value, const char* what) {
  sub->add_option(std::string("--") + name, value, what)->capture_default_str();
}

void dir_opt(CLI::App* sub, Settings& s) {
  path_opt(sub, "dir", s.dir, "Working directory for relative paths");
}

void phantom_opts(CLI::App* sub, Settings& s) {
  sub->add_option("--dims-zyx", s.dims_zyx, "Phantom dims (z y x)")->expected(3)->capture_default_str();
  sub->add_option("--voxel-size-xyz", s.voxel_size_xyz, "Voxel size in nm (x y z)")
      ->expected(3)
      ->capture_default_str();
  sub->add_option("--n-cells", s.phantom.n_cells, "Voronoi cells")->capture_default_str();
  sub->add_option("--n-synapses", s.phantom.n_synapses, "Planted synapses")->capture_default_str();
  sub->add_option("--band-thickness-nm", s.phantom.band_thickness_nm, "Annotated band thickness")
      ->capture_default_str();
  sub->add_option("--membrane-gray", s.membrane_gray, "Membrane gray level")
      ->check(CLI::Range(0, 255))
      ->capture_default_str();
  sub->add_option("--cytoplasm-gray", s.cytoplasm_gray, "Cytoplasm gray level")
      ->check(CLI::Range(0, 255))
      ->capture_default_str();
  sub->add_option("--gray-noise-std", s.phantom.gray_noise_std, "Image noise std")
      ->capture_default_str();
}

void target_opts(CLI::App* sub, Settings& s) {
  sub->add_option("--alpha", s.target_params.alpha, "Proximity steepness per nm")
      ->capture_default_str();
  sub->add_option("--sigma-nm", s.target_params.sigma_nm, "Proximity width in nm")
      ->capture_default_str();
  sub->add_option("--cutoff-nm", s.target_params.cutoff_nm, "Proximity is zero beyond this")
      ->capture_default_str();
}

void oracle_opts(CLI::App* sub, Settings& s) {
  sub->add_option("--noise-std", s.oracle.noise_std, "Gaussian noise added to the target")
      ->capture_default_str();
  sub->add_option("--n-distractors", s.oracle.n_distractors, "Spurious signed blobs")
      ->capture_default_str();
  sub->add_option("--blob-sigma-nm", s.oracle.blob_sigma_nm, "Blob width")->capture_default_str();
  sub->add_option("--blob-amplitude", s.oracle.blob_amplitude, "Blob peak")->capture_default_str();
  sub->add_option("--exclusion-nm", s.oracle.exclusion_nm, "Blob distance from synapses")
      ->capture_default_str();
}

void candidate_opts(CLI::App* sub, Settings& s) {
  sub->add_option("--tau", s.cand.tau, "|proximity| threshold")->capture_default_str();
  sub->add_option("--omega", s.cand.omega, "Minimum component/segment overlap (voxels)")
      ->capture_default_str();
  sub->add_option("--min-contact-area", s.cand.min_contact_area, "Segment adjacency threshold")
      ->capture_default_str();
  sub->add_option("--max-anchor-nm", s.cand.max_anchor_nm, "Largest pre/post gap")
      ->capture_default_str();
}

void train_opts(CLI::App* sub, Settings& s) {
  sub->add_option("--learning-rate", s.train.learning_rate, "Gradient step")->capture_default_str();
  sub->add_option("--epochs", s.train.epochs, "Full-batch epochs")->capture_default_str();
  sub->add_option("--l2", s.train.l2, "Weight penalty")->capture_default_str();
  sub->add_option("--trained-on", s.trained_on, "Label stored in the scorer");
}

void seed_opt(CLI::App* sub, Settings& s) {
  sub->add_option("--seed", s.seed, "Random seed")->capture_default_str();
}

void window_opt(CLI::App* sub, Settings& s) {
  sub->add_option("--window-zyx", s.window_zyx, "Feature window (z y x)")
      ->expected(3)
      ->capture_default_str();
}

void component_paths(CLI::App* sub, Settings& s) {
  path_opt(sub, "pre-components", s.pre_components, "Pre component labels");
  path_opt(sub, "post-components", s.post_components, "Post component labels");
}

void gt_paths(CLI::App* sub, Settings& s) {
  path_opt(sub, "gt-segmentation", s.gt_segmentation, "Ground-truth cells (default: segmentation)");
  path_opt(sub, "annotation", s.annotation, "Annotation volume");
  path_opt(sub, "gt", s.gt, "Ground-truth connections");
}

// ---- stages ----------------------------------------------------------------

void print_json(const json& j) { std::cout << j.dump() << std::endl; }

struct Loaded {
  ComponentSet pre, post;
  std::vector<Candidate> cands;
};

Loaded load_candidates(const Settings& s, const std::string& file) {
  Loaded l{io::read_component_labels(s.path(s.pre_components), Polarity::pre),
           io::read_component_labels(s.path(s.post_components), Polarity::post), {}};
  l.cands = io::read_candidates(s.path(file), l.pre, l.post);
  return l;
}

std::vector<GroundTruthConnection> load_gt(const Settings& s) {
  return io::read_connections(s.path(s.gt), svol::read<std::uint32_t>(s.path(s.annotation)));
}

void run_synth(const Settings& s) {
  const auto b = generate_phantom(s.phantom_config());
  svol::write(s.path(s.image), b.image);
  svol::write(s.path(s.segmentation), b.gt_seg);
  svol::write(s.path(s.annotation), b.annotation);
  svol::write(s.path(s.target), b.target);
  io::write_connections(s.path(s.gt), b.connections);
}

void run_target(const Settings& s) {
  const auto ann = svol::read<std::uint32_t>(s.path(s.annotation));
  svol::write(s.path(s.target), make_target(ann, s.target_params));
}

void run_oracle(const Settings& s) {
  const auto target = svol::read<float>(s.path(s.target));
  svol::write(s.path(s.proximity), oracle_predict(target, s.oracle_params()));
}

void run_candidates(const Settings& s) {
  const auto prox = svol::read<float>(s.path(s.proximity));
  const auto seg = svol::read<std::uint32_t>(s.path(s.segmentation));
  const auto cs = generate_candidates(prox, seg, s.cand);
  io::write_candidates(s.path(s.candidates), cs.candidates);
  io::write_component_labels(s.path(s.pre_components), cs.components.pre);
  io::write_component_labels(s.path(s.post_components), cs.components.post);
}

void run_features(const Settings& s) {
  const auto l = load_candidates(s, s.candidates);
  const auto image = svol::read<std::uint8_t>(s.path(s.image));
  const auto prox = svol::read<float>(s.path(s.proximity));
  const auto seg = svol::read<std::uint32_t>(s.path(s.segmentation));
  io::write_features(s.path(s.features), l.cands,
                     extract_all_features(l.cands, image, prox, seg, s.window()));
}

void run_train(const Settings& s) {
  const auto l = load_candidates(s, s.candidates);
  const auto feats = io::read_features(s.path(s.features), l.cands);
  const auto seg = svol::read<std::uint32_t>(s.path(s.segmentation));
  const auto g = svol::read<std::uint32_t>(s.gt_seg_path());
  const auto labels = label_candidates(l.cands, seg, g, load_gt(s));
  const std::string name =
      s.trained_on.empty() ? fs::path(s.features).filename().string() : s.trained_on;
  const auto r = train_scorer(feats, labels, s.train_config(), name);
  io::write_scorer(s.path(s.scorer), r.scorer);
}

void run_score(const Settings& s) {
  auto l = load_candidates(s, s.candidates);
  if (!s.external_scores.empty()) {
    apply_external_scores(l.cands, io::read_scores(s.path(s.external_scores)));
  } else {
    const auto feats = io::read_features(s.path(s.features), l.cands);
    score_candidates(l.cands, feats, io::read_scorer(s.path(s.scorer)));
  }
  io::write_candidates(s.path(s.scored), l.cands);
}

void run_prune(const Settings& s) {
  const auto l = load_candidates(s, s.scored);
  io::write_candidates(s.path(s.predictions), prune(l.cands, s.theta));
}

json summary(const MatchReport& r) {
  const auto p = pr_point(r);
  return {{"tp", r.tp}, {"fp", r.fp}, {"fn", r.fn},
          {"precision", p.precision}, {"recall", p.recall}, {"f", p.f_score}};
}

void run_eval(const Settings& s) {
  const auto l = load_candidates(s, s.predictions);
  const auto seg = svol::read<std::uint32_t>(s.path(s.segmentation));
  const auto g = svol::read<std::uint32_t>(s.gt_seg_path());
  const auto r = match_predictions(l.cands, load_gt(s), map_segments(seg, g));
  io::write_text(s.path(s.report), io::report_json(r));
  print_json(summary(r));
}

void run_pr_curve(const Settings& s) {
  const auto l = load_candidates(s, s.scored);
  const auto seg = svol::read<std::uint32_t>(s.path(s.segmentation));
  const auto g = svol::read<std::uint32_t>(s.gt_seg_path());
  const auto curve = pr_sweep(l.cands, load_gt(s), map_segments(seg, g), s.thetas);
  io::write_text(s.path(s.pr_csv), io::pr_csv(curve));
  io::write_text(s.path(s.pr_svg), io::pr_svg(curve));
  const auto best = best_f(curve);
  print_json({{"best_theta", best.theta}, {"best_f", best.f_score}, {"f_at_0", curve[0].f_score}});
}

void run_pipeline(const Settings& s) {
  run_synth(s);
  run_target(s);
  run_oracle(s);
  run_candidates(s);
  run_features(s);
  run_train(s);
  run_score(s);
  run_prune(s);
  run_eval(s);
}

// ---- manifest ----------------------------------------------------------------

std::vector<std::string> manifest_values(const json& v) {
  auto one = [](const json& x) { return x.is_string() ? x.get<std::string>() : x.dump(); };
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(one(x));
  } else if (!v.is_null()) {
    out.push_back(one(v));
  }
  return out;
}

void apply_manifest(CLI::App& app, CLI::App* active, const std::string& file) {
  json m;
  try {
    m = json::parse(io::read_text(file));
  } catch (const json::exception& e) {
    throw FormatError(file + ": " + e.what());
  }
  if (!m.is_object()) throw FormatError(file + ": manifest must be a JSON object");
  json flat = json::object();
  for (const auto& [key, value] : m.items()) {
    if ((key == "paths" || key == "params") && value.is_object()) {
      for (const auto& [k, v] : value.items()) flat[k] = v;
    } else {
      flat[key] = value;
    }
  }
  for (const auto& [key, value] : flat.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = active->get_option_no_throw(flag);
    if (!opt) opt = app.get_option_no_throw(flag);
    if (!opt) {
      bool known = false;
      for (const auto* sub : app.get_subcommands({})) known |= sub->get_option_no_throw(flag) != nullptr;
      if (!known) throw FormatError(file + ": unknown manifest key \"" + key + "\"");
      continue;
    }
    if (opt->count() > 0) continue;  // the command line wins
    const auto values = manifest_values(value);
    if (values.empty()) continue;
    try {
      opt->add_result(values);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw FormatError(file + ": bad value for \"" + key + "\": " + e.what());
    }
  }
}

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  std::size_t threads = 0;
  std::string manifest;

  CLI::App app{"Synapse detection pipeline on proximity predictions and segmentations", "synaptik"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");
  app.fallthrough();
  app.add_option("--threads", threads, "Worker threads (0: all cores)")
      ->envname("SYNAPTIK_THREADS")
      ->capture_default_str();
  app.add_option("--manifest", manifest, "JSON manifest of paths and parameters");

  using Stage = void (*)(const Settings&);
  std::vector<std::pair<CLI::App*, Stage>> stages;
  auto stage = [&](const char* name, const char* about, Stage fn) {
    CLI::App* sub = app.add_subcommand(name, about);
    dir_opt(sub, s);
    stages.emplace_back(sub, fn);
    return sub;
  };

  auto* synth = stage("synth", "Generate a phantom bundle", run_synth);
  phantom_opts(synth, s);
  target_opts(synth, s);
  seed_opt(synth, s);
  for (auto [name, ref] : {std::pair{"image", &s.image}, {"segmentation", &s.segmentation},
                           {"annotation", &s.annotation}, {"target", &s.target}, {"gt", &s.gt}}) {
    path_opt(synth, name, *ref, "Output");
  }

  auto* target = stage("target", "Signed proximity target from an annotation", run_target);
  target_opts(target, s);
  path_opt(target, "annotation", s.annotation, "Input annotation");
  path_opt(target, "target", s.target, "Output target");

  auto* oracle = stage("predict-oracle", "Noisy stand-in prediction from a target", run_oracle);
  oracle_opts(oracle, s);
  seed_opt(oracle, s);
  path_opt(oracle, "target", s.target, "Input target");
  path_opt(oracle, "proximity", s.proximity, "Output proximity");

  auto* cands = stage("candidates", "Candidate pre/post pairs", run_candidates);
  candidate_opts(cands, s);
  path_opt(cands, "proximity", s.proximity, "Input proximity");
  path_opt(cands, "segmentation", s.segmentation, "Input segmentation");
  path_opt(cands, "candidates", s.candidates, "Output candidates");
  component_paths(cands, s);

  auto* feats = stage("features", "Window features per candidate", run_features);
  window_opt(feats, s);
  path_opt(feats, "candidates", s.candidates, "Input candidates");
  component_paths(feats, s);
  path_opt(feats, "image", s.image, "Input image");
  path_opt(feats, "proximity", s.proximity, "Input proximity");
  path_opt(feats, "segmentation", s.segmentation, "Input segmentation");
  path_opt(feats, "features", s.features, "Output features");

  auto* train = stage("train-scorer", "Fit the logistic scorer", run_train);
  train_opts(train, s);
  seed_opt(train, s);
  path_opt(train, "candidates", s.candidates, "Input candidates");
  component_paths(train, s);
  path_opt(train, "features", s.features, "Input features");
  path_opt(train, "segmentation", s.segmentation, "Input segmentation");
  gt_paths(train, s);
  path_opt(train, "scorer", s.scorer, "Output scorer");

  auto* score = stage("score", "Score candidates", run_score);
  path_opt(score, "candidates", s.candidates, "Input candidates");
  component_paths(score, s);
  path_opt(score, "features", s.features, "Input features");
  path_opt(score, "scorer", s.scorer, "Input scorer");
  path_opt(score, "external-scores", s.external_scores, "Externally computed scores (JSON lines)");
  path_opt(score, "scored", s.scored, "Output scored candidates");

  auto* prune_cmd = stage("prune", "Keep candidates scoring at least theta", run_prune);
  prune_cmd->add_option("--theta", s.theta, "Score threshold")->capture_default_str();
  path_opt(prune_cmd, "scored", s.scored, "Input scored candidates");
  component_paths(prune_cmd, s);
  path_opt(prune_cmd, "predictions", s.predictions, "Output predictions");

  auto* eval = stage("eval", "Match predictions against ground truth", run_eval);
  path_opt(eval, "predictions", s.predictions, "Input predictions");
  component_paths(eval, s);
  path_opt(eval, "segmentation", s.segmentation, "Input segmentation");
  gt_paths(eval, s);
  path_opt(eval, "report", s.report, "Output report");

  auto* pr = stage("pr-curve", "Precision/recall over a theta sweep", run_pr_curve);
  pr->add_option("--thetas", s.thetas, "Strictly increasing thresholds")->capture_default_str();
  path_opt(pr, "scored", s.scored, "Input scored candidates");
  component_paths(pr, s);
  path_opt(pr, "segmentation", s.segmentation, "Input segmentation");
  gt_paths(pr, s);
  path_opt(pr, "pr-csv", s.pr_csv, "Output CSV");
  path_opt(pr, "pr-svg", s.pr_svg, "Output SVG");

  auto* pipe = stage("pipeline", "synth through eval in one run", run_pipeline);
  phantom_opts(pipe, s);
  target_opts(pipe, s);
  oracle_opts(pipe, s);
  candidate_opts(pipe, s);
  window_opt(pipe, s);
  train_opts(pipe, s);
  seed_opt(pipe, s);
  pipe->add_option("--theta", s.theta, "Score threshold")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage_error", e.what());
    return 2;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!manifest.empty()) apply_manifest(app, active, manifest);
    set_thread_count(threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads);
    for (const auto& [sub, fn] : stages) {
      if (sub == active) fn(s);
    }
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
