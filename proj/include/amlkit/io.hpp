#pragma once

#include "amlkit/ensemble.hpp"
#include "amlkit/features.hpp"
#include "amlkit/graph.hpp"
#include "amlkit/graph_stats.hpp"
#include "amlkit/nn/model.hpp"
#include "amlkit/quantum/statevector.hpp"
#include "amlkit/split.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace amlkit::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw FormatError("trailing characters");
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (...) {
    throw FormatError("not a number: '" + s + "' in " + where);
  }
}

inline long parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw FormatError("trailing characters");
    return v;
  } catch (const FormatError&) {
    throw;
  } catch (...) {
    throw FormatError("not an integer: '" + s + "' in " + where);
  }
}

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  return in;
}

}  // namespace detail

struct FeaturesFile {
  std::vector<TransactionRecord> records;
  Index feature_dim = 0;
  bool dim_inferred = false;  // configured_dim was 0 and the width came from the file
};

/// Features CSV, no header: external_id, time_step, f_1..f_d. With
/// configured_dim = 0 the width is inferred from the first row (and flagged);
/// otherwise a differing column count is a format error. Rows must agree on
/// the column count either way.
inline FeaturesFile read_features_csv(const std::string& path, Index configured_dim = 0) {
  auto in = detail::open_or_throw(path);
  FeaturesFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() < 3) throw FormatError("too few columns in " + where);
    const Index d = static_cast<Index>(fields.size()) - 2;
    if (out.records.empty()) {
      if (configured_dim == 0) {
        out.feature_dim = d;
        out.dim_inferred = true;
      } else {
        out.feature_dim = configured_dim;
        if (d != configured_dim)
          throw FormatError("expected " + std::to_string(configured_dim) +
                            " feature columns, found " + std::to_string(d) +
                            " in " + where);
      }
    } else if (d != out.feature_dim) {
      throw FormatError("inconsistent column count in " + where);
    }
    TransactionRecord r;
    r.external_id = fields[0];
    if (r.external_id.empty()) throw FormatError("empty id in " + where);
    r.time_step = static_cast<int>(detail::parse_int(fields[1], where));
    if (r.time_step < 1) throw FormatError("time step < 1 in " + where);
    r.raw_features.resize(d);
    for (Index j = 0; j < d; ++j)
      r.raw_features[j] = detail::parse_double(fields[j + 2], where);
    out.records.push_back(std::move(r));
  }
  return out;
}

/// Edges CSV, no header: src_id, dst_id.
inline std::vector<RawEdge> read_edges_csv(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::vector<RawEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line);
    if (fields.size() != 2)
      throw FormatError("expected 2 columns in " + path + ":" + std::to_string(lineno));
    if (fields[0].empty() || fields[1].empty())
      throw FormatError("empty id in " + path + ":" + std::to_string(lineno));
    edges.push_back({fields[0], fields[1]});
  }
  return edges;
}

/// Classes CSV with a header row: external_id, raw_label.
inline std::vector<std::pair<std::string, std::string>> read_classes_csv(
    const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line);
    if (fields.size() != 2)
      throw FormatError("expected 2 columns in " + path + ":" + std::to_string(lineno));
    if (lineno == 1) continue;  // header
    rows.emplace_back(fields[0], fields[1]);
  }
  return rows;
}

/// Optional attributes CSV, no header:
/// external_id, v_in, v_out, fee, size, o_1..o_k (k = v_out).
inline std::vector<std::pair<std::string, TxAttributes>> read_attributes_csv(
    const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::vector<std::pair<std::string, TxAttributes>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() < 5) throw FormatError("too few columns in " + where);
    TxAttributes a;
    a.v_in = detail::parse_int(fields[1], where);
    a.v_out = detail::parse_int(fields[2], where);
    a.fee = detail::parse_double(fields[3], where);
    a.size = detail::parse_double(fields[4], where);
    if (static_cast<long>(fields.size()) - 5 != a.v_out)
      throw FormatError("output count does not match v_out in " + where);
    for (std::size_t j = 5; j < fields.size(); ++j)
      a.outputs.push_back(detail::parse_double(fields[j], where));
    rows.emplace_back(fields[0], std::move(a));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Graph bundle (binary, little-endian, bit-exact round trip)
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kBundleMagic[8] = {'A', 'M', 'L', 'K', 'I', 'T', 'G', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated graph bundle");
  return v;
}

}  // namespace detail

inline void write_graph_bundle(const TransactionGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write graph bundle: " + path);
  out.write(detail::kBundleMagic, sizeof(detail::kBundleMagic));
  detail::write_pod<std::uint32_t>(out, 1);  // version
  const auto n = static_cast<std::uint64_t>(g.node_count());
  const auto m = static_cast<std::uint64_t>(g.edge_count());
  const auto d = static_cast<std::uint64_t>(g.features().cols());
  detail::write_pod(out, n);
  detail::write_pod(out, m);
  detail::write_pod(out, d);
  for (Index i = 0; i < g.node_count(); ++i) {
    detail::write_pod<std::int32_t>(out, g.time_steps()[i]);
    detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(g.labels()[i]));
  }
  for (Index i = 0; i < g.node_count(); ++i)
    for (Index j = 0; j < g.features().cols(); ++j)
      detail::write_pod<double>(out, g.features()(i, j));
  for (Index i = 0; i <= g.node_count(); ++i)
    detail::write_pod<std::uint64_t>(out, g.out_offsets()[i]);
  for (Index e = 0; e < g.edge_count(); ++e)
    detail::write_pod<std::uint64_t>(out, g.out_targets()[e]);
  for (Index i = 0; i < g.node_count(); ++i) {
    const std::string& id = g.external_id(i);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  if (!out) throw Error("short write on graph bundle: " + path);
}

inline TransactionGraph read_graph_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open graph bundle: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, detail::kBundleMagic, 8) != 0)
    throw FormatError("not a graph bundle: " + path);
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != 1) throw FormatError("unsupported bundle version");
  const auto n = static_cast<Index>(detail::read_pod<std::uint64_t>(in));
  const auto m = static_cast<Index>(detail::read_pod<std::uint64_t>(in));
  const auto d = static_cast<Index>(detail::read_pod<std::uint64_t>(in));

  std::vector<int> time_steps(n);
  std::vector<Label> labels(n);
  for (Index i = 0; i < n; ++i) {
    time_steps[i] = detail::read_pod<std::int32_t>(in);
    labels[i] = static_cast<Label>(detail::read_pod<std::uint8_t>(in));
  }
  Mat features(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) features(i, j) = detail::read_pod<double>(in);
  std::vector<Index> offsets(n + 1), targets(m);
  for (Index i = 0; i <= n; ++i)
    offsets[i] = static_cast<Index>(detail::read_pod<std::uint64_t>(in));
  for (Index e = 0; e < m; ++e)
    targets[e] = static_cast<Index>(detail::read_pod<std::uint64_t>(in));
  std::vector<std::string> ids(n);
  for (Index i = 0; i < n; ++i) {
    const auto len = detail::read_pod<std::uint32_t>(in);
    ids[i].resize(len);
    in.read(ids[i].data(), len);
    if (!in) throw FormatError("truncated graph bundle");
  }
  return TransactionGraph::assemble(std::move(features), std::move(labels),
                                    std::move(time_steps), std::move(offsets),
                                    std::move(targets), std::move(ids));
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

inline json to_json(const IntegrityReport& r) {
  return json{{"duplicates_removed", r.duplicates_removed},
              {"dangling_edges_removed", r.dangling_edges_removed},
              {"causality_edges_removed", r.causality_edges_removed},
              {"label_histogram",
               {{"licit", r.label_histogram[0]},
                {"illicit", r.label_histogram[1]},
                {"unknown", r.label_histogram[2]}}}};
}

inline json to_json(const GraphStats& s) {
  json hist = json::object();
  for (const auto& [deg, cnt] : s.degree_histogram)
    hist[std::to_string(deg)] = cnt;
  return json{{"degree_histogram", hist},
              {"component_count", s.component_count},
              {"gamma_estimate", s.gamma_estimate},
              {"gamma_sample_size", s.gamma_sample_size}};
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write: " + path);
  out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid json in ") + path + ": " + e.what());
  }
}

// --- split assignment ---

inline void write_split_csv(const SplitAssignment& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write: " + path);
  out << "node_index,part\n";
  for (std::size_t i = 0; i < s.assignment.size(); ++i)
    out << i << "," << part_name(s.assignment[i]) << "\n";
}

inline SplitAssignment read_split_csv(const std::string& path, SplitMode mode) {
  auto in = detail::open_or_throw(path);
  SplitAssignment s;
  s.mode = mode;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || lineno == 1) continue;
    const auto fields = detail::split_line(line);
    if (fields.size() != 2)
      throw FormatError("expected 2 columns in " + path + ":" + std::to_string(lineno));
    Part p;
    if (fields[1] == "train") p = Part::Train;
    else if (fields[1] == "val") p = Part::Val;
    else if (fields[1] == "test") p = Part::Test;
    else if (fields[1] == "excluded") p = Part::Excluded;
    else throw FormatError("unknown part '" + fields[1] + "' in " + path);
    const auto idx = static_cast<std::size_t>(detail::parse_int(fields[0], path));
    if (idx != s.assignment.size()) throw FormatError("non-contiguous node_index in " + path);
    s.assignment.push_back(p);
  }
  return s;
}

// --- model persistence ---

inline json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Mat mat_from_json(const json& j) {
  const Index rows = j.at("rows"), cols = j.at("cols");
  Mat m(rows, cols);
  const auto& data = j.at("data");
  for (Index i = 0; i < rows; ++i)
    for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data.at(i).at(jj).get<double>();
  return m;
}

inline std::string backbone_to_string(nn::Backbone b) { return nn::backbone_name(b); }

inline nn::Backbone backbone_from_string(const std::string& s) {
  if (s == "gcn") return nn::Backbone::Gcn;
  if (s == "gat") return nn::Backbone::Gat;
  if (s == "gin") return nn::Backbone::Gin;
  throw FormatError("unknown backbone: " + s);
}

inline std::string activation_to_string(nn::ActKind a) {
  switch (a) {
    case nn::ActKind::None:
      return "none";
    case nn::ActKind::Relu:
      return "relu";
    default:
      return "leaky_relu";
  }
}

inline nn::ActKind activation_from_string(const std::string& s) {
  if (s == "none") return nn::ActKind::None;
  if (s == "relu") return nn::ActKind::Relu;
  if (s == "leaky_relu") return nn::ActKind::LeakyRelu;
  throw FormatError("unknown activation: " + s);
}

inline json to_json(const nn::ModelConfig& c) {
  return json{{"backbone", backbone_to_string(c.backbone)},
              {"layer_dims", c.layer_dims},
              {"activation", activation_to_string(c.activation)},
              {"attention_heads", c.attention_heads},
              {"gin_epsilon", c.gin_epsilon},
              {"learning_rate", c.learning_rate},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"seed", c.seed}};
}

inline nn::ModelConfig model_config_from_json(const json& j) {
  nn::ModelConfig c;
  c.backbone = backbone_from_string(j.at("backbone"));
  c.layer_dims = j.at("layer_dims").get<std::vector<Index>>();
  c.activation = activation_from_string(j.at("activation"));
  c.attention_heads = j.at("attention_heads");
  c.gin_epsilon = j.at("gin_epsilon");
  c.learning_rate = j.at("learning_rate");
  c.max_epochs = j.at("max_epochs");
  c.patience = j.at("patience");
  c.seed = j.at("seed");
  return c;
}

inline json to_json(const nn::TrainedModel& m) {
  json params = json::array();
  for (const auto& layer : m.params) {
    json l = json::array();
    for (const Mat& t : layer) l.push_back(mat_to_json(t));
    params.push_back(std::move(l));
  }
  json trace = json::array();
  for (const auto& e : m.train_trace)
    trace.push_back({{"loss", e.loss}, {"val_illicit_f1", e.val_illicit_f1}});
  json jm{{"format", "amlkit-model"},
          {"version", 1},
          {"config", to_json(m.config)},
          {"params", std::move(params)},
          {"train_trace", std::move(trace)},
          {"best_epoch", m.best_epoch}};
  if (m.feature_transform) {
    json mean = json::array(), std = json::array();
    for (Index i = 0; i < m.feature_transform->mean.size(); ++i) {
      mean.push_back(m.feature_transform->mean[i]);
      std.push_back(m.feature_transform->std[i]);
    }
    jm["feature_transform"] = {{"mean", std::move(mean)}, {"std", std::move(std)}};
  } else {
    jm["feature_transform"] = nullptr;
  }
  return jm;
}

inline nn::TrainedModel model_from_json(const json& j) {
  if (j.value("format", "") != "amlkit-model")
    throw FormatError("not an amlkit model document");
  nn::TrainedModel m;
  m.config = model_config_from_json(j.at("config"));
  for (const auto& layer : j.at("params")) {
    nn::LayerParams p;
    for (const auto& t : layer) p.push_back(mat_from_json(t));
    m.params.push_back(std::move(p));
  }
  for (const auto& e : j.at("train_trace"))
    m.train_trace.push_back({e.at("loss"), e.at("val_illicit_f1")});
  m.best_epoch = j.at("best_epoch");
  if (!j.at("feature_transform").is_null()) {
    nn::FeatureTransform ft;
    const auto& mean = j.at("feature_transform").at("mean");
    const auto& std = j.at("feature_transform").at("std");
    ft.mean.resize(static_cast<Index>(mean.size()));
    ft.std.resize(static_cast<Index>(std.size()));
    for (Index i = 0; i < ft.mean.size(); ++i) {
      ft.mean[i] = mean.at(i).get<double>();
      ft.std[i] = std.at(i).get<double>();
    }
    m.feature_transform = std::move(ft);
  }
  return m;
}

// --- ensemble persistence ---

inline json to_json(const ensemble::EnsembleWeights& w) {
  json grid = json::array();
  for (const auto& g : w.tuning.grid)
    grid.push_back({{"w", g.w},
                    {"recall", g.recall},
                    {"fpr", g.fpr},
                    {"f1", g.f1},
                    {"feasible", g.feasible}});
  return json{{"format", "amlkit-ensemble-weights"},
              {"version", 1},
              {"w", w.w},
              {"tuning_record",
               {{"grid_step", w.tuning.grid_step},
                {"objective", w.tuning.objective},
                {"fallback_f1", w.tuning.fallback_f1},
                {"constraint_status", w.tuning.constraint_status},
                {"grid", std::move(grid)}}}};
}

inline ensemble::EnsembleWeights ensemble_weights_from_json(const json& j) {
  if (j.value("format", "") != "amlkit-ensemble-weights")
    throw FormatError("not an ensemble weights document");
  ensemble::EnsembleWeights w;
  w.w = j.at("w").get<std::vector<Scalar>>();
  const auto& t = j.at("tuning_record");
  w.tuning.grid_step = t.at("grid_step");
  w.tuning.objective = t.at("objective");
  w.tuning.fallback_f1 = t.at("fallback_f1");
  w.tuning.constraint_status = t.at("constraint_status");
  for (const auto& g : t.at("grid"))
    w.tuning.grid.push_back({g.at("w").get<std::vector<Scalar>>(), g.at("recall"),
                             g.at("fpr"), g.at("f1"), g.at("feasible")});
  return w;
}

inline json to_json(const ensemble::StackingModel& m) {
  json coeffs = json::array();
  for (Index i = 0; i < m.coefficients.size(); ++i) coeffs.push_back(m.coefficients[i]);
  json trace = json::array();
  for (const auto& [it, loss] : m.training_trace)
    trace.push_back({{"iteration", it}, {"loss", loss}});
  return json{{"format", "amlkit-stacker"},
              {"version", 1},
              {"coefficients", std::move(coeffs)},
              {"training_trace", std::move(trace)},
              {"iterations", m.iterations},
              {"final_grad_norm", m.final_grad_norm}};
}

inline ensemble::StackingModel stacker_from_json(const json& j) {
  if (j.value("format", "") != "amlkit-stacker")
    throw FormatError("not a stacker document");
  ensemble::StackingModel m;
  const auto& coeffs = j.at("coefficients");
  m.coefficients.resize(static_cast<Index>(coeffs.size()));
  for (Index i = 0; i < m.coefficients.size(); ++i)
    m.coefficients[i] = coeffs.at(i).get<double>();
  for (const auto& e : j.at("training_trace"))
    m.training_trace.emplace_back(e.at("iteration"), e.at("loss"));
  m.iterations = j.at("iterations");
  m.final_grad_norm = j.at("final_grad_norm");
  return m;
}

// --- circuit spec ---

inline json to_json(const quantum::CircuitSpec& c) {
  json gates = json::array();
  for (const auto& g : c.gates) {
    switch (g.kind) {
      case quantum::Gate::Kind::Rx:
        gates.push_back({{"gate", "rx"}, {"qubit", g.qubit}, {"theta", g.theta}});
        break;
      case quantum::Gate::Kind::Ry:
        gates.push_back({{"gate", "ry"}, {"qubit", g.qubit}, {"theta", g.theta}});
        break;
      case quantum::Gate::Kind::Rz:
        gates.push_back({{"gate", "rz"}, {"qubit", g.qubit}, {"theta", g.theta}});
        break;
      case quantum::Gate::Kind::Cnot:
        gates.push_back({{"gate", "cx"}, {"control", g.control}, {"target", g.target}});
        break;
    }
  }
  return json{{"gates", std::move(gates)}};
}

inline quantum::CircuitSpec circuit_from_json(const json& j) {
  quantum::CircuitSpec c;
  for (const auto& g : j.at("gates")) {
    const std::string kind = g.at("gate");
    if (kind == "rx") c.gates.push_back(quantum::Gate::rx(g.at("qubit"), g.at("theta")));
    else if (kind == "ry") c.gates.push_back(quantum::Gate::ry(g.at("qubit"), g.at("theta")));
    else if (kind == "rz") c.gates.push_back(quantum::Gate::rz(g.at("qubit"), g.at("theta")));
    else if (kind == "cx") c.gates.push_back(quantum::Gate::cnot(g.at("control"), g.at("target")));
    else throw FormatError("unknown gate kind: " + kind);
  }
  return c;
}

// --- curve CSVs ---

inline void write_curve_csv(const std::vector<metrics::CurvePoint>& curve,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write: " + path);
  out << "threshold,x,y\n";
  out.precision(17);
  for (const auto& p : curve) out << p.threshold << "," << p.x << "," << p.y << "\n";
}

}  // namespace amlkit::io
