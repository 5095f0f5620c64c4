#pragma once

#include "amlkit/ensemble.hpp"
#include "amlkit/io.hpp"
#include "amlkit/metrics.hpp"
#include "amlkit/nn/model.hpp"
#include "amlkit/synth.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace amlkit::pipeline {

using io::json;
namespace fs = std::filesystem;

constexpr std::array<nn::Backbone, 3> kBackbones{
    nn::Backbone::Gcn, nn::Backbone::Gat, nn::Backbone::Gin};

constexpr std::array<const char*, 5> kSystems{
    "gcn", "gat", "gin", "soft_vote_tuned", "stacking"};

struct RunConfig {
  // data source (exactly one)
  bool use_synthetic = true;
  std::string features_path, edges_path, classes_path;
  Index feature_dim = 0;  // 0 = infer from file
  double sample_fraction = 1.0;
  LabelMapping label_map;
  SyntheticSpec synth;

  // split
  SplitMode split_mode = SplitMode::Stratified;
  bool split_both = false;
  SplitRatios ratios;
  double alpha = 0.8, beta = 0.9;

  // models
  std::array<nn::ModelConfig, 3> model_cfgs;
  std::array<bool, 3> seed_overridden{false, false, false};
  bool zscore_features = true;

  // ensemble
  double fpr_cap = 0.01;
  double grid_step = 0.05;
  bool stacker_enabled = true;

  // rng
  bool entropy_mode = false;
  std::uint64_t seed = 42;
  std::string entropy_path;

  std::string out_dir = "runs/default";

  json resolved;  // fully-defaulted document, persisted with every run

  std::vector<SplitMode> active_modes() const {
    if (split_both) return {SplitMode::Stratified, SplitMode::Chronological};
    return {split_mode};
  }
};

inline json default_config_json() {
  json models_common{{"hidden_dims", json::array({64})},
                     {"activation", "relu"},
                     {"attention_heads", 1},
                     {"gin_epsilon", 0.0},
                     {"learning_rate", 0.01},
                     {"max_epochs", 200},
                     {"patience", 20}};
  return json{
      {"synthetic",
       {{"node_count", 2000},
        {"time_steps", 49},
        {"illicit_fraction", 0.03},
        {"community_density", 0.5},
        {"community_window", 3},
        {"background_out_degree", 2.0},
        {"feature_noise", 1.0},
        {"feature_shift", 2.4},
        {"feature_dim", 16},
        {"label_rate", 0.9}}},
      {"split",
       {{"mode", "stratified"},
        {"ratios", json::array({0.8, 0.1, 0.1})},
        {"alpha", 0.8},
        {"beta", 0.9}}},
      {"models",
       {{"common", models_common},
        {"zscore_features", true},
        {"gcn", json::object()},
        {"gat", json::object()},
        {"gin", json::object()}}},
      {"ensemble",
       {{"fpr_cap", 0.01}, {"grid_step", 0.05}, {"stacker", true}}},
      {"rng", {{"kind", "seeded"}, {"seed", 42}, {"entropy_file", ""}}},
      {"out", "runs/default"}};
}

namespace detail {

/// Overlays user-provided keys on the defaults, recursing into objects.
inline void merge_into(json& base, const json& overlay) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge_into(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

inline nn::ModelConfig parse_model_config(const json& common, const json& override_j,
                                          nn::Backbone backbone, bool* seed_set) {
  json merged = common;
  merge_into(merged, override_j);
  nn::ModelConfig c;
  c.backbone = backbone;
  c.activation = io::activation_from_string(merged.at("activation"));
  c.attention_heads = merged.at("attention_heads");
  c.gin_epsilon = merged.at("gin_epsilon");
  c.learning_rate = merged.at("learning_rate");
  c.max_epochs = merged.at("max_epochs");
  c.patience = merged.at("patience");
  // layer_dims becomes [feature_dim, hidden..., 2] once the data width is known
  for (const auto& h : merged.at("hidden_dims"))
    c.layer_dims.push_back(h.get<Index>());
  *seed_set = merged.contains("seed");
  if (*seed_set) c.seed = merged.at("seed");
  return c;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& user) {
  json j = default_config_json();
  detail::merge_into(j, user);

  RunConfig cfg;
  cfg.resolved = j;

  if (j.contains("data") && !j.at("data").is_null()) {
    if (user.contains("synthetic"))
      throw FormatError("config must name exactly one of data/synthetic");
    cfg.use_synthetic = false;
    const auto& d = j.at("data");
    cfg.features_path = d.at("features");
    cfg.edges_path = d.at("edges");
    cfg.classes_path = d.at("classes");
    cfg.feature_dim = d.value("feature_dim", Index{0});
    cfg.sample_fraction = d.value("sample_fraction", 1.0);
    if (d.contains("label_map")) {
      cfg.label_map.table.clear();
      for (auto it = d.at("label_map").begin(); it != d.at("label_map").end(); ++it) {
        const std::string v = it.value();
        Label l = Label::Unknown;
        if (v == "illicit") l = Label::Illicit;
        else if (v == "licit") l = Label::Licit;
        else if (v != "unknown") throw FormatError("label_map values must be licit/illicit/unknown");
        cfg.label_map.table[it.key()] = l;
      }
    }
  } else {
    const auto& s = j.at("synthetic");
    cfg.synth.node_count = s.at("node_count");
    cfg.synth.time_steps = s.at("time_steps");
    cfg.synth.illicit_fraction = s.at("illicit_fraction");
    cfg.synth.community_density = s.at("community_density");
    cfg.synth.community_window = s.at("community_window");
    cfg.synth.background_out_degree = s.at("background_out_degree");
    cfg.synth.feature_noise = s.at("feature_noise");
    cfg.synth.feature_shift = s.at("feature_shift");
    cfg.synth.feature_dim = s.at("feature_dim");
    cfg.synth.label_rate = s.at("label_rate");
  }

  const auto& sp = j.at("split");
  const std::string mode = sp.at("mode");
  if (mode == "stratified") cfg.split_mode = SplitMode::Stratified;
  else if (mode == "chronological") cfg.split_mode = SplitMode::Chronological;
  else if (mode == "both") cfg.split_both = true;
  else throw FormatError("split mode must be stratified/chronological/both");
  const auto& ratios = sp.at("ratios");
  if (ratios.size() != 3) throw FormatError("split ratios must have 3 entries");
  cfg.ratios = {ratios.at(0), ratios.at(1), ratios.at(2)};
  cfg.alpha = sp.at("alpha");
  cfg.beta = sp.at("beta");

  const auto& models = j.at("models");
  cfg.zscore_features = models.at("zscore_features");
  for (std::size_t b = 0; b < kBackbones.size(); ++b) {
    bool seed_set = false;
    cfg.model_cfgs[b] =
        detail::parse_model_config(models.at("common"),
                                   models.at(nn::backbone_name(kBackbones[b])),
                                   kBackbones[b], &seed_set);
    cfg.seed_overridden[b] = seed_set;
  }

  const auto& ens = j.at("ensemble");
  cfg.fpr_cap = ens.at("fpr_cap");
  cfg.grid_step = ens.at("grid_step");
  cfg.stacker_enabled = ens.at("stacker");

  const auto& rng = j.at("rng");
  const std::string kind = rng.at("kind");
  if (kind == "seeded") {
    cfg.entropy_mode = false;
  } else if (kind == "entropy_file") {
    cfg.entropy_mode = true;
    cfg.entropy_path = rng.at("entropy_file");
    if (cfg.entropy_path.empty()) throw FormatError("entropy_file path missing");
  } else {
    throw FormatError("rng kind must be seeded or entropy_file");
  }
  cfg.seed = rng.at("seed");

  cfg.out_dir = j.at("out");
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(io::read_json(path));
}

// ---------------------------------------------------------------------------
// Artifact paths
// ---------------------------------------------------------------------------

struct Paths {
  fs::path out;
  explicit Paths(const RunConfig& cfg) : out(cfg.out_dir) {}

  fs::path graph_bundle() const { return out / "graph.bin"; }
  fs::path integrity_report() const { return out / "integrity_report.json"; }
  fs::path graph_stats_json() const { return out / "graph_stats.json"; }
  fs::path resolved_config() const { return out / "resolved_config.json"; }
  fs::path mode_dir(SplitMode m) const { return out / split_mode_name(m); }
  fs::path split_csv(SplitMode m) const { return mode_dir(m) / "split.csv"; }
  fs::path model_json(SplitMode m, nn::Backbone b) const {
    return mode_dir(m) / (std::string("model_") + nn::backbone_name(b) + ".json");
  }
  fs::path ensemble_weights(SplitMode m) const {
    return mode_dir(m) / "ensemble_weights.json";
  }
  fs::path stacker(SplitMode m) const { return mode_dir(m) / "stacker.json"; }
  fs::path curves_dir(SplitMode m) const { return mode_dir(m) / "curves"; }
  fs::path report() const { return out / "report.json"; }
  fs::path report_txt() const { return out / "report.txt"; }
};

namespace detail {

inline RandomSource stage_source(const RunConfig& cfg, std::string_view tag) {
  if (cfg.entropy_mode) return RandomSource::from_entropy_file(cfg.entropy_path);
  return RandomSource::seeded(derive_seed(cfg.seed, tag));
}

inline void persist_run_metadata(const RunConfig& cfg, const Paths& p) {
  fs::create_directories(p.out);
  io::write_json(cfg.resolved, p.resolved_config().string());
}

inline TransactionGraph load_graph(const Paths& p) {
  return io::read_graph_bundle(p.graph_bundle().string());
}

/// Stratified subsample -> induced subgraph, rebuilt through the same
/// integrity pipeline.
inline std::pair<TransactionGraph, IntegrityReport> subsample_graph(
    const TransactionGraph& g, double fraction, RandomSource& rng) {
  const auto keep = stratified_sample(g, fraction, rng);
  std::unordered_set<Index> keep_set(keep.begin(), keep.end());
  std::vector<TransactionRecord> records;
  std::vector<RawEdge> edges;
  std::unordered_map<std::string, Label> labels;
  for (Index i : keep) {
    records.push_back({g.external_id(i), g.time_steps()[i], g.features().row(i)});
    labels[g.external_id(i)] = g.labels()[i];
  }
  for (Index i : keep)
    for (Index j : g.out_neighbors(i))
      if (keep_set.contains(j)) edges.push_back({g.external_id(i), g.external_id(j)});
  return build_graph(records, edges, labels);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline void cmd_ingest(const RunConfig& cfg) {
  if (cfg.use_synthetic)
    throw FormatError("ingest requires a data section; use synth for synthetic runs");
  const Paths p(cfg);
  detail::persist_run_metadata(cfg, p);

  auto file = io::read_features_csv(cfg.features_path, cfg.feature_dim);
  auto raw_edges = io::read_edges_csv(cfg.edges_path);
  auto raw_labels = io::read_classes_csv(cfg.classes_path);

  auto [records, duplicates] = dedupe_nodes(file.records);
  std::unordered_set<std::string> ids;
  ids.reserve(records.size() * 2);
  for (const auto& r : records) ids.insert(r.external_id);
  auto [edges, dangling] = validate_edges(raw_edges, ids);
  auto labels = normalize_labels(raw_labels, cfg.label_map);
  auto [graph, report] = build_graph(records, edges, labels);
  report.duplicates_removed = duplicates;
  report.dangling_edges_removed = dangling;

  if (cfg.sample_fraction < 1.0) {
    auto rng = detail::stage_source(cfg, "sample");
    auto [sub, sub_report] = detail::subsample_graph(graph, cfg.sample_fraction, rng);
    graph = std::move(sub);
    report.label_histogram = sub_report.label_histogram;
    report.causality_edges_removed += sub_report.causality_edges_removed;
  }

  io::write_graph_bundle(graph, p.graph_bundle().string());
  io::write_json(io::to_json(report), p.integrity_report().string());
  try {
    io::write_json(io::to_json(graph_stats(graph)), p.graph_stats_json().string());
  } catch (const DegenerateDegrees&) {
    // stats document omitted when the exponent is undefined
  }
}

inline void cmd_synth(const RunConfig& cfg) {
  if (!cfg.use_synthetic) throw InvalidSpec("config has no synthetic section");
  const Paths p(cfg);
  detail::persist_run_metadata(cfg, p);
  SyntheticSpec spec = cfg.synth;
  spec.seed = derive_seed(cfg.seed, "synth");
  auto [graph, report] = synthesize_graph(spec);
  io::write_graph_bundle(graph, p.graph_bundle().string());
  io::write_json(io::to_json(report), p.integrity_report().string());
  try {
    io::write_json(io::to_json(graph_stats(graph)), p.graph_stats_json().string());
  } catch (const DegenerateDegrees&) {
  }
}

inline void cmd_split(const RunConfig& cfg) {
  const Paths p(cfg);
  const TransactionGraph g = detail::load_graph(p);
  for (SplitMode mode : cfg.active_modes()) {
    fs::create_directories(p.mode_dir(mode));
    SplitAssignment s;
    if (mode == SplitMode::Stratified) {
      auto rng = detail::stage_source(cfg, "split");
      s = stratified_split(g, cfg.ratios, rng);
    } else {
      s = chronological_split(g, cfg.alpha, cfg.beta);
    }
    io::write_split_csv(s, p.split_csv(mode).string());
  }
}

inline void cmd_train(const RunConfig& cfg) {
  const Paths p(cfg);
  const TransactionGraph g = detail::load_graph(p);

  for (SplitMode mode : cfg.active_modes()) {
    if (!fs::exists(p.split_csv(mode)))
      throw MissingArtifact("missing split: " + p.split_csv(mode).string());
    const SplitAssignment split = io::read_split_csv(p.split_csv(mode).string(), mode);

    std::optional<nn::FeatureTransform> transform;
    Mat X = g.features();
    if (cfg.zscore_features) {
      const auto train_rows = split.part_indices(Part::Train);
      FeatureMatrix fm = FeatureMatrix::raw(g.features());
      const FeatureMatrix scored = zscore_normalize(fm, train_rows);
      nn::FeatureTransform ft;
      ft.mean.resize(scored.column_stats.size());
      ft.std.resize(scored.column_stats.size());
      for (std::size_t jb = 0; jb < scored.column_stats.size(); ++jb) {
        ft.mean[static_cast<Index>(jb)] = scored.column_stats[jb].first;
        ft.std[static_cast<Index>(jb)] = scored.column_stats[jb].second;
      }
      X = scored.values;
      transform = std::move(ft);
    }

    for (std::size_t b = 0; b < kBackbones.size(); ++b) {
      nn::ModelConfig mc = cfg.model_cfgs[b];
      // materialize layer dims around the data width
      std::vector<Index> dims;
      dims.push_back(g.features().cols());
      for (Index h : mc.layer_dims) dims.push_back(h);
      dims.push_back(kNumLossClasses);
      mc.layer_dims = std::move(dims);
      if (!cfg.seed_overridden[b]) {
        mc.seed = derive_seed(cfg.seed, std::string("train/") +
                                            nn::backbone_name(kBackbones[b]) + "/" +
                                            split_mode_name(mode));
      }
      std::optional<RandomSource> src;
      if (cfg.entropy_mode) src = detail::stage_source(cfg, "train");
      nn::TrainedModel model =
          nn::train(g, X, split, mc, src ? &*src : nullptr);
      model.feature_transform = transform;
      io::write_json(io::to_json(model), p.model_json(mode, kBackbones[b]).string());
    }
  }
}

namespace detail {

struct LoadedMode {
  SplitAssignment split;
  std::vector<nn::TrainedModel> models;
  std::vector<Mat> probas;  // full-graph, one per backbone
};

inline LoadedMode load_mode(const Paths& p, const TransactionGraph& g,
                            const nn::Topology& topo, SplitMode mode) {
  LoadedMode lm;
  if (!fs::exists(p.split_csv(mode)))
    throw MissingArtifact("missing split: " + p.split_csv(mode).string());
  lm.split = io::read_split_csv(p.split_csv(mode).string(), mode);
  for (nn::Backbone b : kBackbones) {
    const fs::path mp = p.model_json(mode, b);
    if (!fs::exists(mp)) throw MissingArtifact("missing model: " + mp.string());
    lm.models.push_back(io::model_from_json(io::read_json(mp.string())));
    lm.probas.push_back(nn::predict_proba(lm.models.back(), topo, g.features()));
  }
  return lm;
}

inline std::vector<Index> labeled_part(const TransactionGraph& g,
                                       const SplitAssignment& s, Part part) {
  std::vector<Index> idx;
  for (Index i = 0; i < g.node_count(); ++i)
    if (s.assignment[i] == part && g.labels()[i] != Label::Unknown)
      idx.push_back(i);
  return idx;
}

inline std::vector<Mat> slice_rows(const std::vector<Mat>& mats,
                                   const std::vector<Index>& rows) {
  std::vector<Mat> out;
  for (const Mat& m : mats) {
    Mat s(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) s.row(static_cast<Index>(r)) = m.row(rows[r]);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<int> binary_labels(const TransactionGraph& g,
                                      const std::vector<Index>& rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (Index i : rows) y.push_back(g.labels()[i] == Label::Illicit ? 1 : 0);
  return y;
}

}  // namespace detail

inline void cmd_ensemble(const RunConfig& cfg) {
  const Paths p(cfg);
  const TransactionGraph g = detail::load_graph(p);
  const nn::Topology topo = nn::Topology::from_graph(g);
  for (SplitMode mode : cfg.active_modes()) {
    const auto lm = detail::load_mode(p, g, topo, mode);
    const auto val_rows = detail::labeled_part(g, lm.split, Part::Val);
    const auto val_probas = detail::slice_rows(lm.probas, val_rows);
    const auto val_labels = detail::binary_labels(g, val_rows);

    const auto weights =
        ensemble::tune_weights(val_probas, val_labels, cfg.fpr_cap, cfg.grid_step);
    io::write_json(io::to_json(weights), p.ensemble_weights(mode).string());
    if (cfg.stacker_enabled) {
      const auto stacker = ensemble::fit_stacker(val_probas, val_labels);
      io::write_json(io::to_json(stacker), p.stacker(mode).string());
    }
  }
}

namespace detail {

inline json curve_to_json(const std::vector<metrics::CurvePoint>& curve) {
  json arr = json::array();
  for (const auto& pt : curve) arr.push_back(json::array({pt.threshold, pt.x, pt.y}));
  return arr;
}

inline json evaluate_system(const std::vector<Scalar>& scores,
                            const std::vector<int>& labels, const fs::path& curve_dir,
                            const std::string& system) {
  const auto conf = metrics::confusion(scores, labels, 0.5);
  const auto m = metrics::prf_fpr(conf);
  const auto pr = metrics::pr_curve(scores, labels);
  const auto roc = metrics::roc_curve(scores, labels);
  const auto review = metrics::recall_vs_reviewed(scores, labels);
  io::write_curve_csv(pr, (curve_dir / (system + "_pr.csv")).string());
  io::write_curve_csv(roc, (curve_dir / (system + "_roc.csv")).string());
  io::write_curve_csv(review, (curve_dir / (system + "_recall_vs_reviewed.csv")).string());
  return json{{"precision", m.precision},
              {"recall", m.recall},
              {"f1", m.f1},
              {"fpr", m.fpr},
              {"pr_auc", metrics::pr_auc(scores, labels)},
              {"roc_auc", metrics::roc_auc(scores, labels)},
              {"confusion",
               {{"tp", conf.tp}, {"fp", conf.fp}, {"tn", conf.tn}, {"fn", conf.fn}}},
              {"curves",
               {{"pr", curve_to_json(pr)},
                {"roc", curve_to_json(roc)},
                {"recall_vs_reviewed", curve_to_json(review)}}}};
}

}  // namespace detail

/// Evaluates the three backbones plus the tuned soft vote and the stacker on
/// the test rows of every requested split mode and writes report.json and
/// plot-ready curve CSVs.
inline json cmd_evaluate(const RunConfig& cfg) {
  const Paths p(cfg);
  const TransactionGraph g = detail::load_graph(p);
  const nn::Topology topo = nn::Topology::from_graph(g);

  json modes = json::object();
  for (SplitMode mode : cfg.active_modes()) {
    const auto lm = detail::load_mode(p, g, topo, mode);
    if (!fs::exists(p.ensemble_weights(mode)))
      throw MissingArtifact("missing ensemble weights: " +
                            p.ensemble_weights(mode).string());
    const auto weights =
        io::ensemble_weights_from_json(io::read_json(p.ensemble_weights(mode).string()));
    std::optional<ensemble::StackingModel> stacker;
    if (cfg.stacker_enabled) {
      if (!fs::exists(p.stacker(mode)))
        throw MissingArtifact("missing stacker: " + p.stacker(mode).string());
      stacker = io::stacker_from_json(io::read_json(p.stacker(mode).string()));
    }

    const auto test_rows = detail::labeled_part(g, lm.split, Part::Test);
    const auto test_probas = detail::slice_rows(lm.probas, test_rows);
    const auto test_labels = detail::binary_labels(g, test_rows);

    const fs::path curves = p.curves_dir(mode);
    fs::create_directories(curves);

    json systems = json::object();
    auto illicit_scores = [&](const Mat& proba) {
      std::vector<Scalar> s(proba.rows());
      for (Index i = 0; i < proba.rows(); ++i) s[i] = proba(i, 1);
      return s;
    };
    for (std::size_t b = 0; b < kBackbones.size(); ++b) {
      systems[nn::backbone_name(kBackbones[b])] = detail::evaluate_system(
          illicit_scores(test_probas[b]), test_labels, curves,
          nn::backbone_name(kBackbones[b]));
    }
    const Mat voted = ensemble::soft_vote(test_probas, weights.w);
    systems["soft_vote_tuned"] = detail::evaluate_system(
        illicit_scores(voted), test_labels, curves, "soft_vote_tuned");
    if (stacker) {
      const Mat stacked = ensemble::stack_predict(*stacker, test_probas);
      systems["stacking"] = detail::evaluate_system(illicit_scores(stacked),
                                                    test_labels, curves, "stacking");
    }

    std::int64_t illicit_count = 0;
    for (int y : test_labels) illicit_count += y;
    modes[split_mode_name(mode)] = {{"systems", std::move(systems)},
                                    {"ensemble_weights", weights.w},
                                    {"test_nodes", test_labels.size()},
                                    {"test_illicit", illicit_count}};
  }

  // hash over the semantic config: the output location does not change the run
  json hashed = cfg.resolved;
  hashed.erase("out");
  char hash_buf[19];
  std::snprintf(hash_buf, sizeof hash_buf, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(hashed.dump())));
  json report{{"format", "amlkit-report"},
              {"version", 1},
              {"seed", cfg.seed},
              {"config_hash", std::string(hash_buf)},
              {"split_modes", std::move(modes)}};
  io::write_json(report, p.report().string());
  return report;
}

/// Renders a plain-text summary table from report.json.
inline std::string cmd_report(const RunConfig& cfg) {
  const Paths p(cfg);
  if (!fs::exists(p.report()))
    throw MissingArtifact("missing report: " + p.report().string());
  const json report = io::read_json(p.report().string());

  std::ostringstream out;
  out << "run " << report.at("config_hash").get<std::string>() << " (seed "
      << report.at("seed") << ")\n";
  for (const auto& [mode, body] : report.at("split_modes").items()) {
    out << "\n[" << mode << "] test nodes: " << body.at("test_nodes")
        << " (illicit: " << body.at("test_illicit") << ")\n";
    out << "  system            precision   recall       f1      fpr   pr_auc  roc_auc\n";
    for (const char* system : kSystems) {
      if (!body.at("systems").contains(system)) continue;
      const auto& s = body.at("systems").at(system);
      char line[160];
      std::snprintf(line, sizeof line,
                    "  %-16s %9.4f %8.4f %8.4f %8.4f %8.4f %8.4f\n", system,
                    s.at("precision").get<double>(), s.at("recall").get<double>(),
                    s.at("f1").get<double>(), s.at("fpr").get<double>(),
                    s.at("pr_auc").get<double>(), s.at("roc_auc").get<double>());
      out << line;
    }
  }
  const std::string text = out.str();
  std::ofstream txt(p.report_txt());
  txt << text;
  return text;
}

}  // namespace amlkit::pipeline
