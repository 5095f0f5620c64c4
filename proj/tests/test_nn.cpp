#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amlkit/nn/model.hpp"
#include "amlkit/synth.hpp"

#include <cmath>

using namespace amlkit;
using namespace amlkit::nn;

namespace {

Topology chain(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Topology::from_undirected_edges(n, edges);
}

Topology random_topology(Index n, double p, RandomSource& rng) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j});
  return Topology::from_undirected_edges(n, edges);
}

Mat random_mat(Index r, Index c, RandomSource& rng, double scale = 1.0) {
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

// --- GCN --------------------------------------------------------------------

TEST_CASE("gcn on an isolated node with identity weights is the identity") {
  const auto topo = Topology::from_undirected_edges(1, {});
  Mat H(1, 2);
  H << 1, 0;
  const Mat W = Mat::Identity(2, 2);
  const RowVec b = RowVec::Zero(2);
  const Mat out = gcn_forward(topo, H, W, b, ActKind::Relu);
  CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gcn gives identical rows for disconnected identical nodes") {
  const auto topo = Topology::from_undirected_edges(2, {});
  auto rng = RandomSource::seeded(1);
  Mat H(2, 3);
  H.row(0) = random_mat(1, 3, rng);
  H.row(1) = H.row(0);
  const Mat W = random_mat(3, 4, rng);
  const RowVec b = random_mat(1, 4, rng).row(0);
  const Mat out = gcn_forward(topo, H, W, b, ActKind::Relu);
  CHECK((out.row(0) - out.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gcn matches a dense normalized-adjacency reference") {
  auto rng = RandomSource::seeded(2);
  const Index n = 10;
  const auto topo = random_topology(n, 0.4, rng);
  const Mat H = random_mat(n, 5, rng);
  const Mat W = random_mat(5, 3, rng);
  const RowVec b = random_mat(1, 3, rng).row(0);

  // dense oracle: A_hat = D^-1/2 (A_sym + I) D^-1/2 assembled explicitly
  Mat A = Mat::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j : topo.neighbors(i)) A(i, j) = 1.0;
  Vec dinv = A.rowwise().sum().array().sqrt().inverse();
  Mat Ahat = dinv.asDiagonal() * A * dinv.asDiagonal();
  Mat pre = Ahat * H * W;
  pre.rowwise() += b;
  const Mat expect = pre.cwiseMax(0.0);

  const Mat got = gcn_forward(topo, H, W, b, ActKind::Relu);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gcn shape mismatches are rejected") {
  const auto topo = chain(3);
  CHECK_THROWS_AS(
      gcn_forward(topo, Mat::Zero(2, 3), Mat::Identity(3, 3), RowVec::Zero(3),
                  ActKind::Relu),
      ShapeMismatch);
  CHECK_THROWS_AS(
      gcn_forward(topo, Mat::Zero(3, 3), Mat::Identity(4, 4), RowVec::Zero(4),
                  ActKind::Relu),
      ShapeMismatch);
}

// --- GAT --------------------------------------------------------------------

TEST_CASE("gat attention is uniform over identical self and neighbor") {
  const auto topo = Topology::from_undirected_edges(2, {{0, 1}});
  Mat H(2, 2);
  H << 0.3, -0.4, 0.3, -0.4;
  auto rng = RandomSource::seeded(3);
  const Mat W = random_mat(2, 3, rng);
  const Vec a = random_mat(6, 1, rng).col(0);
  GatCache cache;
  gat_forward(topo, H, W, a, RowVec::Zero(3), ActKind::Relu, &cache);
  const auto rows = gat_attention_rows(topo, cache);
  CHECK(rows[0][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rows[0][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gat on an isolated node reduces to act(W h + b)") {
  const auto topo = Topology::from_undirected_edges(1, {});
  auto rng = RandomSource::seeded(4);
  const Mat H = random_mat(1, 3, rng);
  const Mat W = random_mat(3, 2, rng);
  const Vec a = random_mat(4, 1, rng).col(0);
  const RowVec b = random_mat(1, 2, rng).row(0);
  GatCache cache;
  const Mat out = gat_forward(topo, H, W, a, b, ActKind::LeakyRelu, &cache);
  const auto rows = gat_attention_rows(topo, cache);
  CHECK(rows[0].size() == 1);
  CHECK(rows[0][0] == doctest::Approx(1.0).epsilon(1e-12));
  Mat pre = H * W;
  pre.rowwise() += b;
  const Mat expect = activate(pre, ActKind::LeakyRelu);
  CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gat attention rows are probability distributions") {
  auto rng = RandomSource::seeded(5);
  const auto topo = random_topology(12, 0.3, rng);
  const Mat H = random_mat(12, 4, rng);
  const Mat W = random_mat(4, 3, rng);
  const Vec a = random_mat(6, 1, rng).col(0);
  GatCache cache;
  gat_forward(topo, H, W, a, RowVec::Zero(3), ActKind::Relu, &cache);
  for (const auto& row : gat_attention_rows(topo, cache)) {
    Scalar sum = 0;
    for (Scalar v : row) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

// --- GIN --------------------------------------------------------------------

TEST_CASE("gin with identity mlp sums self and neighbors") {
  const auto topo = Topology::from_undirected_edges(2, {{0, 1}});
  Mat H(2, 1);
  H << 1, 2;
  GinParams p{Mat::Identity(1, 1), RowVec::Zero(1), Mat::Identity(1, 1),
              RowVec::Zero(1)};
  const Mat out = gin_forward(topo, H, p, 0.0, ActKind::Relu);
  CHECK(out(0, 0) == doctest::Approx(3.0));
  CHECK(out(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("gin leaves an isolated node unchanged under the identity mlp") {
  const auto topo = Topology::from_undirected_edges(1, {});
  Mat H(1, 1);
  H << 0.7;
  GinParams p{Mat::Identity(1, 1), RowVec::Zero(1), Mat::Identity(1, 1),
              RowVec::Zero(1)};
  CHECK(gin_forward(topo, H, p, 0.0, ActKind::Relu)(0, 0) == doctest::Approx(0.7));
}

TEST_CASE("gin matches a naive per-node loop") {
  auto rng = RandomSource::seeded(6);
  const Index n = 15;
  const auto topo = random_topology(n, 0.3, rng);
  const Mat H = random_mat(n, 4, rng);
  const Scalar eps = 0.3;
  GinParams p{random_mat(4, 5, rng), random_mat(1, 5, rng).row(0),
              random_mat(5, 3, rng), random_mat(1, 3, rng).row(0)};

  Mat expect(n, 3);
  for (Index v = 0; v < n; ++v) {
    RowVec agg = (1.0 + eps) * H.row(v);
    for (Index u : topo.neighbors(v)) agg += H.row(u);
    RowVec hid = agg * p.W1 + p.b1;
    for (Index j = 0; j < hid.size(); ++j) hid[j] = std::max(0.0, hid[j]);
    expect.row(v) = hid * p.W2 + p.b2;
  }
  const Mat got = gin_forward(topo, H, p, eps, ActKind::Relu);
  CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
}

// --- loss -------------------------------------------------------------------

TEST_CASE("class weights follow inverse frequency") {
  std::vector<Label> labels;
  std::vector<Part> parts;
  for (int i = 0; i < 90; ++i) {
    labels.push_back(Label::Licit);
    parts.push_back(Part::Train);
  }
  for (int i = 0; i < 10; ++i) {
    labels.push_back(Label::Illicit);
    parts.push_back(Part::Train);
  }
  const auto cw = class_weights(labels, parts);
  CHECK(cw.w[0] == doctest::Approx(100.0 / 180.0).epsilon(1e-12));
  CHECK(cw.w[1] == doctest::Approx(5.0).epsilon(1e-12));
  // algebraic identity: sum_c w_c N_c = N
  CHECK(std::abs(cw.w[0] * 90 + cw.w[1] * 10 - 100.0) < 1e-9);
}

TEST_CASE("balanced classes give unit weights") {
  std::vector<Label> labels(10, Label::Licit);
  std::vector<Part> parts(20, Part::Train);
  labels.insert(labels.end(), 10, Label::Illicit);
  const auto cw = class_weights(labels, parts);
  CHECK(cw.w[0] == doctest::Approx(1.0));
  CHECK(cw.w[1] == doctest::Approx(1.0));
}

TEST_CASE("class weights only read train-masked labels and require both classes") {
  std::vector<Label> labels{Label::Licit, Label::Licit, Label::Illicit};
  std::vector<Part> parts{Part::Train, Part::Train, Part::Val};
  CHECK_THROWS_AS(class_weights(labels, parts), MissingClass);
}

TEST_CASE("perfect confident prediction has ~zero loss") {
  Mat logits(1, 2);
  logits << 50, -50;
  const auto r = weighted_cross_entropy(logits, {Label::Licit}, {}, {1});
  CHECK(r.loss < 1e-12);
}

TEST_CASE("weight-2 coin-flip prediction costs 2 ln 2") {
  Mat logits(1, 2);
  logits << 0.0, 0.0;
  ClassWeights cw;
  cw.w = {1.0, 2.0};
  const auto r = weighted_cross_entropy(logits, {Label::Illicit}, cw, {1});
  CHECK(r.loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("uniform weights reduce to unweighted cross-entropy") {
  auto rng = RandomSource::seeded(7);
  const Index n = 40;
  Mat logits = random_mat(n, 2, rng, 2.0);
  std::vector<Label> labels;
  std::vector<std::uint8_t> mask;
  for (Index i = 0; i < n; ++i) {
    labels.push_back(rng.uniform() < 0.3 ? Label::Illicit : Label::Licit);
    mask.push_back(rng.uniform() < 0.7 ? 1 : 0);
  }
  mask[0] = 1;
  const auto r = weighted_cross_entropy(logits, labels, {}, mask);

  double expect = 0;  // unweighted oracle
  for (Index i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const double denom = std::exp(logits(i, 0)) + std::exp(logits(i, 1));
    expect -= std::log(std::exp(logits(i, static_cast<int>(labels[i]))) / denom);
  }
  CHECK(std::abs(r.loss - expect) < 1e-9);
}

TEST_CASE("an empty mask is rejected") {
  Mat logits = Mat::Zero(3, 2);
  CHECK_THROWS_AS(
      weighted_cross_entropy(logits, {Label::Licit, Label::Licit, Label::Licit},
                             {}, {0, 0, 0}),
      EmptyMask);
}

TEST_CASE("relu gradient vanishes at strictly negative pre-activations") {
  Mat pre(1, 3);
  pre << -2.0, -0.1, 3.0;
  const Mat g = activate_grad(pre, ActKind::Relu);
  CHECK(g(0, 0) == 0.0);
  CHECK(g(0, 1) == 0.0);
  CHECK(g(0, 2) == 1.0);
}

// --- full-model gradients ----------------------------------------------------

namespace {

struct Trial {
  Topology topo;
  Mat X;
  std::vector<Label> labels;
  std::vector<std::uint8_t> mask;
  ClassWeights cw;
  std::vector<LayerParams> params;
};

Trial make_trial(Backbone backbone, const ModelConfig& cfg, std::uint64_t seed) {
  auto rng = RandomSource::seeded(seed);
  Trial t;
  const Index n = 6 + static_cast<Index>(rng.uniform_index(15));
  t.topo = random_topology(n, 0.35, rng);
  t.X = random_mat(n, cfg.layer_dims.front(), rng);
  int illicit = 0, licit = 0;
  for (Index i = 0; i < n; ++i) {
    const bool ill = rng.uniform() < 0.4;
    t.labels.push_back(ill ? Label::Illicit : Label::Licit);
    t.mask.push_back(1);
    (ill ? illicit : licit) += 1;
  }
  if (illicit == 0) t.labels[0] = Label::Illicit;
  if (licit == 0) t.labels[0] = Label::Licit;
  auto prng = RandomSource::seeded(seed ^ 0xabcdef);
  t.params = init_params(cfg, prng);
  t.cw.w = {0.7, 2.5};
  return t;
}

double trial_loss(const Trial& t, const ModelConfig& cfg,
                  const std::vector<LayerParams>& params) {
  const Mat logits = model_forward(t.topo, t.X, cfg, params);
  return weighted_cross_entropy(logits, t.labels, t.cw, t.mask).loss;
}

// Central differences break down within h of a piecewise-linear kink, so
// trials whose pre-activations sit that close are redrawn.
double kink_margin(const ModelConfig& cfg, const std::vector<LayerCache>& caches,
                   std::size_t layer_count) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < layer_count; ++l) {
    const bool hidden = l + 1 < layer_count;
    switch (cfg.backbone) {
      case Backbone::Gcn:
        if (hidden) margin = std::min(margin, caches[l].gcn.pre.cwiseAbs().minCoeff());
        break;
      case Backbone::Gat:
        if (hidden) margin = std::min(margin, caches[l].gat.pre.cwiseAbs().minCoeff());
        for (Scalar s : caches[l].gat.score_pre)
          margin = std::min(margin, std::abs(s));
        break;
      case Backbone::Gin:
        margin = std::min(margin, caches[l].gin.hid_pre.cwiseAbs().minCoeff());
        break;
    }
  }
  return margin;
}

void check_backbone_gradients(Backbone backbone, ActKind act, int trials) {
  ModelConfig cfg;
  cfg.backbone = backbone;
  cfg.activation = act;
  cfg.layer_dims = {3, 5, 2};
  int done = 0;
  std::uint64_t seed = 1000 + static_cast<int>(backbone) * 100;
  while (done < trials) {
    Trial t = make_trial(backbone, cfg, seed++);
    std::vector<LayerCache> caches;
    const Mat logits = model_forward(t.topo, t.X, cfg, t.params, &caches);
    if (kink_margin(cfg, caches, t.params.size()) < 1e-3) continue;
    const auto lr = weighted_cross_entropy(logits, t.labels, t.cw, t.mask);
    const auto grads = model_backward(t.topo, cfg, t.params, caches, lr.dlogits);

    double max_rel = 0;
    for (std::size_t l = 0; l < t.params.size(); ++l)
      for (std::size_t k = 0; k < t.params[l].size(); ++k)
        for (Index i = 0; i < t.params[l][k].rows(); ++i)
          for (Index j = 0; j < t.params[l][k].cols(); ++j) {
            const double theta = t.params[l][k](i, j);
            const double h = 1e-5 * std::max(1.0, std::abs(theta));
            auto plus = t.params, minus = t.params;
            plus[l][k](i, j) += h;
            minus[l][k](i, j) -= h;
            const double fd =
                (trial_loss(t, cfg, plus) - trial_loss(t, cfg, minus)) / (2 * h);
            const double ga = grads[l][k](i, j);
            const double rel =
                std::abs(ga - fd) / std::max({std::abs(ga), std::abs(fd), 1e-3});
            max_rel = std::max(max_rel, rel);
          }
    CHECK(max_rel < 1e-4);
    ++done;
  }
}

}  // namespace

TEST_CASE("gcn gradients match finite differences") {
  check_backbone_gradients(Backbone::Gcn, ActKind::Relu, 3);
}

TEST_CASE("gat gradients match finite differences") {
  check_backbone_gradients(Backbone::Gat, ActKind::LeakyRelu, 3);
}

TEST_CASE("gin gradients match finite differences") {
  check_backbone_gradients(Backbone::Gin, ActKind::Relu, 3);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  ModelConfig cfg;
  cfg.backbone = Backbone::Gat;
  cfg.layer_dims = {3, 4, 2};
  Trial t = make_trial(Backbone::Gat, cfg, 55);
  std::vector<LayerCache> caches;
  model_forward(t.topo, t.X, cfg, t.params, &caches);
  const auto grads = model_backward(t.topo, cfg, t.params, caches,
                                    Mat::Zero(t.topo.n, 2));
  for (const auto& layer : grads)
    for (const Mat& g : layer) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layer outputs are permutation equivariant") {
  for (Backbone backbone : {Backbone::Gcn, Backbone::Gat, Backbone::Gin}) {
    ModelConfig cfg;
    cfg.backbone = backbone;
    cfg.layer_dims = {3, 5, 2};
    Trial t = make_trial(backbone, cfg, 77 + static_cast<int>(backbone));
    const Mat out = model_forward(t.topo, t.X, cfg, t.params);

    auto rng = RandomSource::seeded(123);
    std::vector<Index> perm(t.topo.n);
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(perm.begin(), perm.end());

    std::vector<std::pair<Index, Index>> edges;
    for (Index i = 0; i < t.topo.n; ++i)
      for (Index j : t.topo.neighbors(i))
        if (i < j) edges.push_back({perm[i], perm[j]});
    const auto ptopo = Topology::from_undirected_edges(t.topo.n, edges);
    Mat pX(t.X.rows(), t.X.cols());
    for (Index i = 0; i < t.X.rows(); ++i) pX.row(perm[i]) = t.X.row(i);
    const Mat pout = model_forward(ptopo, pX, cfg, t.params);
    for (Index i = 0; i < out.rows(); ++i)
      CHECK((pout.row(perm[i]) - out.row(i)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

// --- training ----------------------------------------------------------------

namespace {

std::pair<TransactionGraph, SplitAssignment> planted_graph(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.node_count = 200;
  spec.time_steps = 10;
  spec.illicit_fraction = 0.15;
  spec.label_rate = 1.0;
  spec.seed = seed;
  auto [g, rep] = synthesize_graph(spec);
  auto rng = RandomSource::seeded(seed + 1);
  auto split = stratified_split(g, {0.6, 0.2, 0.2}, rng);
  return {std::move(g), std::move(split)};
}

}  // namespace

TEST_CASE("max_epochs 0 returns the initialized parameters") {
  auto [g, split] = planted_graph(10);
  ModelConfig cfg;
  cfg.layer_dims = {g.features().cols(), 8, 2};
  cfg.max_epochs = 0;
  cfg.seed = 9;
  const auto model = train(g, g.features(), split, cfg);
  CHECK(model.train_trace.empty());
  CHECK(model.best_epoch == 0);
  auto rng = RandomSource::seeded(9);
  const auto expect = init_params(cfg, rng);
  for (std::size_t l = 0; l < expect.size(); ++l)
    for (std::size_t k = 0; k < expect[l].size(); ++k)
      CHECK((model.params[l][k] - expect[l][k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  auto [g, split] = planted_graph(11);
  ModelConfig cfg;
  cfg.layer_dims = {g.features().cols(), 8, 2};
  cfg.max_epochs = 5;
  cfg.learning_rate = 0.0;
  cfg.seed = 3;
  const auto model = train(g, g.features(), split, cfg);
  auto rng = RandomSource::seeded(3);
  const auto expect = init_params(cfg, rng);
  for (std::size_t l = 0; l < expect.size(); ++l)
    for (std::size_t k = 0; k < expect[l].size(); ++k)
      CHECK((model.params[l][k] - expect[l][k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train loss decreases over the first ten epochs on planted fraud") {
  auto [g, split] = planted_graph(12);
  ModelConfig cfg;  // default backbone and optimizer settings
  cfg.layer_dims = {g.features().cols(), 64, 2};
  cfg.max_epochs = 12;
  cfg.seed = 21;
  const auto model = train(g, g.features(), split, cfg);
  REQUIRE(model.train_trace.size() >= 11);
  for (int e = 0; e < 10; ++e)
    CHECK(model.train_trace[e + 1].loss < model.train_trace[e].loss);

  // the other backbones must still show a net decrease over the window
  for (Backbone b : {Backbone::Gat, Backbone::Gin}) {
    ModelConfig c2 = cfg;
    c2.backbone = b;
    const auto m2 = train(g, g.features(), split, c2);
    REQUIRE(m2.train_trace.size() >= 11);
    CHECK(m2.train_trace[10].loss < m2.train_trace[0].loss);
  }
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  auto [g, split] = planted_graph(13);
  ModelConfig cfg;
  cfg.backbone = Backbone::Gin;
  cfg.layer_dims = {g.features().cols(), 16, 2};
  cfg.max_epochs = 8;
  cfg.seed = 5;
  const auto m1 = train(g, g.features(), split, cfg);
  const auto m2 = train(g, g.features(), split, cfg);
  REQUIRE(m1.train_trace.size() == m2.train_trace.size());
  for (std::size_t e = 0; e < m1.train_trace.size(); ++e) {
    CHECK(m1.train_trace[e].loss == m2.train_trace[e].loss);
    CHECK(m1.train_trace[e].val_illicit_f1 == m2.train_trace[e].val_illicit_f1);
  }
  for (std::size_t l = 0; l < m1.params.size(); ++l)
    for (std::size_t k = 0; k < m1.params[l].size(); ++k)
      CHECK((m1.params[l][k] - m2.params[l][k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("predicted probability rows sum to one") {
  auto [g, split] = planted_graph(14);
  ModelConfig cfg;
  cfg.layer_dims = {g.features().cols(), 8, 2};
  cfg.max_epochs = 3;
  const auto model = train(g, g.features(), split, cfg);
  const Mat proba = predict_proba(model, g);
  CHECK(proba.rows() == g.node_count());
  for (Index i = 0; i < proba.rows(); ++i)
    CHECK(std::abs(proba.row(i).sum() - 1.0) < 1e-12);
}

TEST_CASE("softmax of equal logits is uniform and is logit-monotone") {
  Mat logits(2, 2);
  logits << 0, 0, 1.0, 2.0;
  const Mat p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  Mat raised = logits;
  raised(1, 0) += 0.5;
  const Mat p2 = softmax_rows(raised);
  CHECK(p2(1, 0) > p(1, 0));
}

TEST_CASE("config validation rejects malformed settings") {
  ModelConfig cfg;
  cfg.layer_dims = {4};
  CHECK_THROWS(cfg.validate());
  cfg.layer_dims = {4, 3};
  CHECK_THROWS(cfg.validate());  // last dim must be 2
  cfg.layer_dims = {4, 2};
  CHECK_NOTHROW(cfg.validate());
  cfg.backbone = Backbone::Gat;
  cfg.attention_heads = 2;
  CHECK_THROWS(cfg.validate());
}
