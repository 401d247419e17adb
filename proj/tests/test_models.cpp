#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hyla/errors.hpp"
#include "hyla/models.hpp"
#include "oracles.hpp"

using namespace hyla;
using namespace hyla::model;

namespace {

ModelConfig small_config(Level level, Head head, FeatureMap map = FeatureMap::kHyla) {
  ModelConfig cfg;
  cfg.level = level;
  cfg.head = head;
  cfg.feature_map = map;
  cfg.K = 2;
  cfg.d0 = 3;
  cfg.d1 = 5;
  cfg.s = 1.0;
  return cfg;
}

// Moves embeddings away from the origin so every gradient term is exercised.
void spread_embeddings(ModelState& st, std::uint64_t seed, double radius) {
  RandomStream rng(seed);
  for (std::size_t i = 0; i < st.Z.rows(); ++i) {
    const auto p = oracle::random_ball_point(st.Z.cols(), radius, rng);
    std::copy(p.begin(), p.end(), st.Z.row(i).begin());
  }
}

double loss_of(const ModelState& st, const PreparedInputs& in, const ModelConfig& cfg,
               const data::Dataset& ds) {
  return softmax_cross_entropy(forward(st, in, cfg).logits, ds.labels, ds.splits.train).loss;
}

void check_end_to_end_gradient(const ModelConfig& cfg, const data::Dataset& ds) {
  ModelState st = init_state(ds, cfg, 7);
  spread_embeddings(st, 8, cfg.feature_map == FeatureMap::kHyla ? 0.6 : 1.5);
  const auto in = prepare_inputs(ds, cfg);
  const auto cache = forward(st, in, cfg);
  const auto loss = softmax_cross_entropy(cache.logits, ds.labels, ds.splits.train);
  const auto grads = backward(st, in, cfg, cache, loss.dlogits);

  const auto fd_z = oracle::fd_gradient(
      [&](const Matrix& z) {
        ModelState probe = st;
        probe.Z = z;
        return loss_of(probe, in, cfg, ds);
      },
      st.Z);
  const auto fd_w = oracle::fd_gradient(
      [&](const Matrix& w) {
        ModelState probe = st;
        probe.W = w;
        return loss_of(probe, in, cfg, ds);
      },
      st.W);
  CHECK(oracle::relative_error(grads.dZ, fd_z) <= 1e-4);
  CHECK(oracle::relative_error(grads.dW, fd_w) <= 1e-4);
}

}  // namespace

TEST_CASE("build_features") {
  auto ds = fixture::random_dataset(8, 3, 8, 1);
  ds.features = sparse::CsrMatrix::identity(8);
  auto cfg = small_config(Level::kFeature, Head::kLr);
  ModelState st = init_state(ds, cfg, 3);
  spread_embeddings(st, 4, 0.5);
  const Matrix h = embedding_features(st, cfg);
  CHECK(build_features(st, &*ds.features, cfg) == h);
  const auto twice = sparse::CsrMatrix::identity(8, 2.0);
  CHECK(build_features(st, &twice, cfg) == scaled(h, 2.0));
  CHECK_THROWS_AS(build_features(st, nullptr, cfg), ConfigError);

  auto node_cfg = small_config(Level::kNode, Head::kSgc);
  ModelState origin = init_state(ds, node_cfg, 3);
  origin.Z.fill(0.0);
  const Matrix xbar = build_features(origin, nullptr, node_cfg);
  for (std::size_t i = 0; i < xbar.rows(); ++i)
    for (std::size_t j = 0; j < xbar.cols(); ++j)
      CHECK(xbar(i, j) == std::cos(origin.constants.biases()[j]));

  node_cfg.concat_original = true;
  ModelState cat = init_state(ds, node_cfg, 3);
  const Matrix xcat = build_features(cat, &*ds.features, node_cfg);
  CHECK(xcat.cols() == node_cfg.d1 + 8);
  CHECK(xcat(2, node_cfg.d1 + 2) == 1.0);
}

TEST_CASE("forward special cases") {
  const auto ds = fixture::random_dataset(10, 7, 6, 2);
  auto cfg = small_config(Level::kNode, Head::kSgc);
  ModelState st = init_state(ds, cfg, 1);
  st.W.fill(0.0);
  const auto in = prepare_inputs(ds, cfg);
  const auto out = forward(st, in, cfg);
  for (double v : out.logits.values()) CHECK(v == 0.0);
  CHECK(softmax_cross_entropy(out.logits, ds.labels, ds.splits.train).loss ==
        doctest::Approx(std::log(7.0)).epsilon(1e-14));

  // K = 0 SGC and LR produce bitwise-identical logits.
  auto sgc0 = small_config(Level::kNode, Head::kSgc);
  sgc0.K = 0;
  const auto lr = small_config(Level::kNode, Head::kLr);
  ModelState s2 = init_state(ds, sgc0, 5);
  spread_embeddings(s2, 6, 0.5);
  CHECK(forward(s2, prepare_inputs(ds, sgc0), sgc0).logits ==
        forward(s2, prepare_inputs(ds, lr), lr).logits);

  // One node, one class: probability 1 whatever W is.
  data::Dataset one;
  one.name = "one";
  one.num_nodes = 1;
  one.num_classes = 1;
  one.graph = sparse::csr_from_edges(1, {}, true);
  one.labels = {0};
  one.splits.train = {0};
  ModelState so = init_state(one, cfg, 2);
  const auto lo = forward(so, prepare_inputs(one, cfg), cfg).logits;
  CHECK(softmax_cross_entropy(lo, one.labels, one.splits.train).loss == 0.0);
}

TEST_CASE("softmax_cross_entropy") {
  const std::vector<std::int64_t> labels{0, 3, 6};
  const std::vector<std::size_t> mask{0, 1, 2};
  CHECK(softmax_cross_entropy(Matrix(3, 7, 0.5), labels, mask).loss ==
        doctest::Approx(1.9459101490553132).epsilon(1e-14));

  Matrix sat(1, 3);
  sat(0, 1) = 1e6;
  const std::vector<std::int64_t> y1{1};
  const std::vector<std::size_t> m1{0};
  CHECK(softmax_cross_entropy(sat, y1, m1).loss == doctest::Approx(0.0));

  RandomStream rng(31);
  const Matrix logits = oracle::random_matrix(4, 3, rng, -2.0, 2.0);
  const std::vector<std::int64_t> y{2, 0, 1, 1};
  const std::vector<std::size_t> m{0, 2, 3};
  const auto res = softmax_cross_entropy(logits, y, m);
  const auto fd = oracle::fd_gradient(
      [&](const Matrix& l) { return softmax_cross_entropy(l, y, m).loss; }, logits);
  CHECK(oracle::relative_error(res.dlogits, fd) <= 1e-6);
  for (std::size_t c = 0; c < 3; ++c) CHECK(res.dlogits(1, c) == 0.0);

  CHECK_THROWS_AS(softmax_cross_entropy(logits, y, std::vector<std::size_t>{}), ConfigError);
}

TEST_CASE("backward with zero upstream gradient is zero") {
  const auto ds = fixture::random_dataset(12, 3, 6, 3);
  const auto cfg = small_config(Level::kNode, Head::kSgc);
  const ModelState st = init_state(ds, cfg, 1);
  const auto in = prepare_inputs(ds, cfg);
  const auto cache = forward(st, in, cfg);
  const auto g = backward(st, in, cfg, cache, Matrix(12, 3));
  CHECK(g.dW == Matrix(cfg.d1, 3));
  CHECK(g.dZ == Matrix(12, 3));
}

TEST_CASE("end-to-end gradient: node-level SGC (n=12, d0=3, d1=5, K=2, C=3)") {
  check_end_to_end_gradient(small_config(Level::kNode, Head::kSgc), fixture::random_dataset(12, 3, 6, 4));
}

TEST_CASE("end-to-end gradient: other model variants") {
  const auto ds = fixture::random_dataset(12, 3, 6, 5);
  check_end_to_end_gradient(small_config(Level::kNode, Head::kLr), ds);
  check_end_to_end_gradient(small_config(Level::kFeature, Head::kSgc), ds);
  check_end_to_end_gradient(small_config(Level::kFeature, Head::kLr), ds);
  check_end_to_end_gradient(small_config(Level::kNode, Head::kSgc, FeatureMap::kRff), ds);
  check_end_to_end_gradient(small_config(Level::kFeature, Head::kSgc, FeatureMap::kRff), ds);
  auto cat = small_config(Level::kNode, Head::kSgc);
  cat.concat_original = true;
  check_end_to_end_gradient(cat, ds);
}

TEST_CASE("evaluate") {
  const std::vector<std::int64_t> y{0, 1, 2, 1};
  const std::vector<std::size_t> m{0, 1, 2, 3};
  Matrix perfect(4, 3);
  for (std::size_t i = 0; i < 4; ++i) perfect(i, static_cast<std::size_t>(y[i])) = 1.0;
  const auto good = evaluate(perfect, y, m);
  CHECK(good.accuracy == 1.0);
  CHECK(good.micro_f1 == 1.0);

  Matrix wrong(4, 3);
  for (std::size_t i = 0; i < 4; ++i) wrong(i, static_cast<std::size_t>((y[i] + 1) % 3)) = 1.0;
  CHECK(evaluate(wrong, y, m).accuracy == 0.0);

  // Micro-F1 from a brute-force confusion matrix equals accuracy.
  RandomStream rng(12);
  const std::size_t n = 50;
  const std::size_t c = 5;
  const Matrix logits = oracle::random_matrix(n, c, rng);
  std::vector<std::int64_t> labels(n);
  for (auto& l : labels) l = static_cast<std::int64_t>(rng.below(c));
  std::vector<std::size_t> mask;
  for (std::size_t i = 0; i < n; i += 2) mask.push_back(i);
  std::vector<std::vector<double>> confusion(c, std::vector<double>(c, 0.0));
  for (auto i : mask) {
    std::size_t pred = 0;
    for (std::size_t k = 1; k < c; ++k)
      if (logits(i, k) > logits(i, pred)) pred = k;
    confusion[static_cast<std::size_t>(labels[i])][pred] += 1.0;
  }
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < c; ++k) {
    tp += confusion[k][k];
    for (std::size_t o = 0; o < c; ++o) {
      if (o == k) continue;
      fp += confusion[o][k];
      fn += confusion[k][o];
    }
  }
  const auto metrics = evaluate(logits, labels, mask);
  CHECK(metrics.micro_f1 == doctest::Approx(2 * tp / (2 * tp + fp + fn)).epsilon(1e-15));
  CHECK(metrics.micro_f1 == doctest::Approx(metrics.accuracy).epsilon(1e-15));
  CHECK(metrics.accuracy == doctest::Approx(tp / double(mask.size())).epsilon(1e-15));

  // Argmax invariance under per-row shifts.
  Matrix shifted = logits;
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : shifted.row(i)) v += 3.0 * double(i % 7) - 10.0;
  CHECK(predict(shifted) == predict(logits));
  CHECK(evaluate(shifted, labels, mask).accuracy == metrics.accuracy);

  CHECK_THROWS_AS(evaluate(logits, labels, std::vector<std::size_t>{}), ConfigError);
}

TEST_CASE("configuration validation") {
  auto ds = fixture::random_dataset(10, 2, 4, 9, data::Task::kInductive);
  CHECK_THROWS_AS(small_config(Level::kNode, Head::kLr).validate_against(ds), ConfigError);
  CHECK_NOTHROW(small_config(Level::kFeature, Head::kLr).validate_against(ds));

  auto no_feat = fixture::random_dataset(10, 2, 4, 9);
  no_feat.features = sparse::CsrMatrix::from_triplets(10, 4, {});
  CHECK_THROWS_AS(small_config(Level::kFeature, Head::kSgc).validate_against(no_feat), ConfigError);

  auto no_graph = ds;
  no_graph.graph.reset();
  CHECK_THROWS_AS(small_config(Level::kFeature, Head::kSgc).validate_against(no_graph), ConfigError);
  CHECK_NOTHROW(small_config(Level::kFeature, Head::kLr).validate_against(no_graph));

  auto bad = small_config(Level::kFeature, Head::kSgc);
  bad.concat_original = true;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small_config(Level::kNode, Head::kSgc);
  bad.d0 = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
