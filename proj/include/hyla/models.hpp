#pragma once

// Linear graph models on top of HyLa (or RFF) features:
//   SGC head: logits = S^K X̄ W        LR head: logits = X̄ W
// with X̄ = H(Z) at node level or X̄ = X·H(Z) at feature level.

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "hyla/data.hpp"
#include "hyla/dense.hpp"
#include "hyla/geometry.hpp"
#include "hyla/hyla_features.hpp"
#include "hyla/sparse.hpp"

namespace hyla::model {

enum class Level { kNode, kFeature };
enum class Head { kSgc, kLr };
enum class FeatureMap { kHyla, kRff };

std::string to_string(Level v);
std::string to_string(Head v);
std::string to_string(FeatureMap v);
Level parse_level(const std::string& s);
Head parse_head(const std::string& s);
FeatureMap parse_feature_map(const std::string& s);

struct ModelConfig {
  Level level = Level::kNode;
  Head head = Head::kSgc;
  std::size_t K = 2;
  std::size_t d0 = 50;
  std::size_t d1 = 250;
  double s = 0.5;
  bool concat_original = false;
  FeatureMap feature_map = FeatureMap::kHyla;
  double ball_eps = geometry::kDefaultBallEps;
  double init_range = geometry::kDefaultInitRange;
  double clamp_min = features::kDefaultClampMin;

  void validate() const;
  // Level/head/task compatibility and presence of graph/features.
  void validate_against(const data::Dataset& ds) const;

  // Number of embedding rows: nodes (node level) or feature columns.
  std::size_t embedding_count(const data::Dataset& ds) const;
  // Width of the classifier input.
  std::size_t input_dim(const data::Dataset& ds) const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Learned parameters plus the frozen feature-map constants.
struct ModelState {
  Matrix W;                          // d_in × C
  geometry::EmbeddingMatrix Z;       // n_emb × d0; ball points unless feature_map = rff
  features::HyLaConstants constants;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

// Embeddings, constants and W drawn from independent streams of master_seed.
ModelState init_state(const data::Dataset& ds, const ModelConfig& cfg, std::uint64_t master_seed);

/// Parameter-independent inputs derived once from a dataset's graph and
/// features: S, X, Xᵀ and, for feature-level SGC, the precomputed S^K X.
struct PreparedInputs {
  std::size_t num_nodes = 0;
  std::optional<sparse::CsrMatrix> propagation;
  std::optional<sparse::CsrMatrix> features;
  std::optional<sparse::CsrMatrix> features_t;
  std::optional<sparse::CsrMatrix> precomputed;    // S^K X
  std::optional<sparse::CsrMatrix> precomputed_t;  // (S^K X)ᵀ
  std::optional<Matrix> concat_block;              // S^K X (sgc) or X (lr), densified
};

PreparedInputs prepare_inputs(const data::Dataset& ds, const ModelConfig& cfg);

// H(Z) under the configured feature map.
Matrix embedding_features(const ModelState& state, const ModelConfig& cfg);

/// X̄: H(Z) (node level, optionally followed by the raw X columns) or X·H(Z)
/// (feature level). Throws ConfigError when feature level lacks X.
Matrix build_features(const ModelState& state, const sparse::CsrMatrix* x, const ModelConfig& cfg);

struct ForwardCache {
  Matrix h;            // n_emb × d1
  Matrix classifier_in;  // n × d_in, what W multiplies
  Matrix logits;       // n × C
};

ForwardCache forward(const ModelState& state, const PreparedInputs& in, const ModelConfig& cfg);

struct LossResult {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean cross-entropy over `mask` rows with max-subtraction. dlogits is
/// (softmax − onehot)/|mask| on masked rows and 0 elsewhere.
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::int64_t> labels,
                                 std::span<const std::size_t> mask);

struct Gradients {
  Matrix dW;
  Matrix dZ;  // Euclidean gradient
};

Gradients backward(const ModelState& state, const PreparedInputs& in, const ModelConfig& cfg,
                   const ForwardCache& cache, const Matrix& dlogits);

struct Metrics {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
};

// Argmax predictions (lowest index wins ties); micro-F1 from pooled TP/FP/FN.
Metrics evaluate(const Matrix& logits, std::span<const std::int64_t> labels,
                 std::span<const std::size_t> mask);

std::vector<std::size_t> predict(const Matrix& logits);

}  // namespace hyla::model
