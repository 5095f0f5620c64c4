#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amlkit/io.hpp"
#include "amlkit/synth.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace amlkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("amlkit_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("features csv parses ids, steps and feature columns") {
  TempDir tmp;
  const auto p = tmp.file("f.csv", "a,1,0.5,1.5\nb,2,-1,2.25\n");
  const auto f = io::read_features_csv(p);
  REQUIRE(f.records.size() == 2);
  CHECK(f.feature_dim == 2);
  CHECK(f.dim_inferred);
  CHECK(f.records[0].external_id == "a");
  CHECK(f.records[1].time_step == 2);
  CHECK(f.records[1].raw_features[1] == 2.25);
}

TEST_CASE("features csv honors a configured dimension") {
  TempDir tmp;
  const auto p = tmp.file("f.csv", "a,1,0.5,1.5\n");
  const auto f = io::read_features_csv(p, 2);
  CHECK_FALSE(f.dim_inferred);
  CHECK_THROWS_AS(io::read_features_csv(p, 166), FormatError);
}

TEST_CASE("ragged feature rows are a format error") {
  TempDir tmp;
  const auto p = tmp.file("f.csv", "a,1,0.5,1.5\nb,2,-1\n");
  CHECK_THROWS_AS(io::read_features_csv(p), FormatError);
}

TEST_CASE("malformed numbers and bad steps are format errors") {
  TempDir tmp;
  CHECK_THROWS_AS(io::read_features_csv(tmp.file("a.csv", "a,one,0.5\n")),
                  FormatError);
  CHECK_THROWS_AS(io::read_features_csv(tmp.file("b.csv", "a,0,0.5\n")),
                  FormatError);
  CHECK_THROWS_AS(io::read_features_csv(tmp.file("c.csv", "a,1,zzz\n")),
                  FormatError);
  CHECK_THROWS_AS(io::read_features_csv(tmp.file("d.csv", ",1,0.5\n")), FormatError);
  CHECK_THROWS_AS(io::read_features_csv((tmp.path / "missing.csv").string()),
                  FormatError);
}

TEST_CASE("edges csv parses and validates") {
  TempDir tmp;
  const auto edges = io::read_edges_csv(tmp.file("e.csv", "a,b\nb,c\n"));
  REQUIRE(edges.size() == 2);
  CHECK(edges[1].src == "b");
  CHECK_THROWS_AS(io::read_edges_csv(tmp.file("bad.csv", "a,b,c\n")), FormatError);
}

TEST_CASE("classes csv skips its header row") {
  TempDir tmp;
  const auto rows =
      io::read_classes_csv(tmp.file("c.csv", "txId,class\na,1\nb,unknown\n"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::pair<std::string, std::string>{"a", "1"});
}

TEST_CASE("attributes csv enforces the variadic output count") {
  TempDir tmp;
  const auto rows = io::read_attributes_csv(
      tmp.file("a.csv", "a,2,3,0.1,250,1.0,2.0,3.0\n"));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].second.v_out == 3);
  CHECK(rows[0].second.outputs.size() == 3);
  CHECK_THROWS_AS(
      io::read_attributes_csv(tmp.file("b.csv", "a,2,3,0.1,250,1.0\n")),
      FormatError);
}

TEST_CASE("graph bundles round-trip bit-exactly") {
  TempDir tmp;
  SyntheticSpec spec;
  spec.node_count = 150;
  spec.time_steps = 8;
  spec.illicit_fraction = 0.1;
  spec.seed = 3;
  auto [g, rep] = synthesize_graph(spec);
  const auto p = (tmp.path / "graph.bin").string();
  io::write_graph_bundle(g, p);
  const auto h = io::read_graph_bundle(p);

  REQUIRE(h.node_count() == g.node_count());
  REQUIRE(h.edge_count() == g.edge_count());
  CHECK(std::memcmp(h.features().data(), g.features().data(),
                    sizeof(double) * g.features().size()) == 0);
  CHECK(h.labels() == g.labels());
  CHECK(h.time_steps() == g.time_steps());
  CHECK(h.out_offsets() == g.out_offsets());
  CHECK(h.out_targets() == g.out_targets());
  for (Index i = 0; i < g.node_count(); ++i) {
    CHECK(h.external_id(i) == g.external_id(i));
    CHECK(std::equal(h.neighbors(i).begin(), h.neighbors(i).end(),
                     g.neighbors(i).begin(), g.neighbors(i).end()));
  }
}

TEST_CASE("corrupt bundles are rejected") {
  TempDir tmp;
  const auto p = tmp.file("junk.bin", "definitely not a bundle");
  CHECK_THROWS_AS(io::read_graph_bundle(p), FormatError);
  CHECK_THROWS_AS(io::read_graph_bundle((tmp.path / "nope.bin").string()),
                  MissingArtifact);
}

TEST_CASE("split assignments round-trip through csv") {
  TempDir tmp;
  SplitAssignment s;
  s.mode = SplitMode::Chronological;
  s.assignment = {Part::Train, Part::Val, Part::Test, Part::Excluded, Part::Train};
  const auto p = (tmp.path / "split.csv").string();
  io::write_split_csv(s, p);
  const auto t = io::read_split_csv(p, SplitMode::Chronological);
  CHECK(t.assignment == s.assignment);
}

TEST_CASE("integrity reports carry exactly the four fields") {
  IntegrityReport r;
  r.duplicates_removed = 3;
  r.dangling_edges_removed = 5;
  r.causality_edges_removed = 7;
  r.label_histogram = {10, 2, 88};
  const auto j = io::to_json(r);
  CHECK(j.size() == 4);
  CHECK(j.at("duplicates_removed") == 3);
  CHECK(j.at("label_histogram").at("illicit") == 2);
}

TEST_CASE("trained models round-trip with bit-exact parameters") {
  TempDir tmp;
  nn::TrainedModel m;
  m.config.backbone = nn::Backbone::Gat;
  m.config.layer_dims = {3, 4, 2};
  m.config.activation = nn::ActKind::LeakyRelu;
  m.config.seed = 987654321;
  auto rng = RandomSource::seeded(42);
  m.params = nn::init_params(m.config, rng);
  // awkward values that expose sloppy serialization
  m.params[0][0](0, 0) = 1.0 / 3.0;
  m.params[0][0](0, 1) = 1e-300;
  m.params[0][0](0, 2) = -9.87654321984e18;
  m.params[0][0](1, 0) = 0.1;
  m.train_trace = {{12.5, 0.25}, {3.25, 0.5}};
  m.best_epoch = 2;
  nn::FeatureTransform ft;
  ft.mean = Vec::Constant(3, 0.123456789123456789);
  ft.std = Vec::Constant(3, 1.0 / 7.0);
  m.feature_transform = ft;

  const auto p = (tmp.path / "model.json").string();
  io::write_json(io::to_json(m), p);
  const auto h = io::model_from_json(io::read_json(p));

  CHECK(h.config.backbone == m.config.backbone);
  CHECK(h.config.layer_dims == m.config.layer_dims);
  CHECK(h.config.seed == m.config.seed);
  CHECK(h.best_epoch == 2);
  REQUIRE(h.params.size() == m.params.size());
  for (std::size_t l = 0; l < m.params.size(); ++l)
    for (std::size_t k = 0; k < m.params[l].size(); ++k) {
      REQUIRE(h.params[l][k].rows() == m.params[l][k].rows());
      CHECK(std::memcmp(h.params[l][k].data(), m.params[l][k].data(),
                        sizeof(double) * m.params[l][k].size()) == 0);
    }
  REQUIRE(h.feature_transform.has_value());
  CHECK(std::memcmp(h.feature_transform->mean.data(), ft.mean.data(),
                    sizeof(double) * 3) == 0);
  REQUIRE(h.train_trace.size() == 2);
  CHECK(h.train_trace[1].loss == 3.25);
}

TEST_CASE("ensemble weights round-trip with the full tuning record") {
  TempDir tmp;
  ensemble::EnsembleWeights w;
  w.w = {0.25, 0.5, 0.25};
  w.tuning.grid_step = 0.05;
  w.tuning.objective = 0.875;
  w.tuning.fallback_f1 = false;
  w.tuning.constraint_status = "feasible";
  w.tuning.grid = {{{1, 0, 0}, 0.5, 0.01, 0.6, true},
                   {{0.25, 0.5, 0.25}, 0.875, 0.0, 0.9, true}};
  const auto p = (tmp.path / "w.json").string();
  io::write_json(io::to_json(w), p);
  const auto h = io::ensemble_weights_from_json(io::read_json(p));
  CHECK(h.w == w.w);
  CHECK(h.tuning.objective == w.tuning.objective);
  REQUIRE(h.tuning.grid.size() == 2);
  CHECK(h.tuning.grid[1].recall == 0.875);
}

TEST_CASE("stackers round-trip") {
  TempDir tmp;
  ensemble::StackingModel m;
  m.coefficients = Vec::Zero(5);
  m.coefficients << 0.1, -0.2, 1.0 / 3.0, 4.0, -5.5;
  m.training_trace = {{1, 0.69}, {100, 0.01}};
  m.iterations = 123;
  m.final_grad_norm = 5e-7;
  const auto p = (tmp.path / "s.json").string();
  io::write_json(io::to_json(m), p);
  const auto h = io::stacker_from_json(io::read_json(p));
  CHECK(std::memcmp(h.coefficients.data(), m.coefficients.data(),
                    sizeof(double) * 5) == 0);
  CHECK(h.iterations == 123);
}

TEST_CASE("circuit specs round-trip through json") {
  quantum::CircuitSpec c;
  c.gates = {quantum::Gate::ry(0, 0.25), quantum::Gate::rx(1, -1.5),
             quantum::Gate::cnot(0, 1), quantum::Gate::rz(2, 3.14159)};
  const auto j = io::to_json(c);
  const auto h = io::circuit_from_json(j);
  REQUIRE(h.gates.size() == 4);
  CHECK(h.gates[0].kind == quantum::Gate::Kind::Ry);
  CHECK(h.gates[0].theta == 0.25);
  CHECK(h.gates[2].kind == quantum::Gate::Kind::Cnot);
  CHECK(h.gates[2].target == 1);
  CHECK(h.gates[3].theta == 3.14159);
}

TEST_CASE("unknown documents are rejected by format tag") {
  CHECK_THROWS_AS(io::model_from_json(io::json{{"format", "other"}}), FormatError);
  CHECK_THROWS_AS(io::ensemble_weights_from_json(io::json::object()), FormatError);
  CHECK_THROWS_AS(io::stacker_from_json(io::json{{"x", 1}}), FormatError);
}
