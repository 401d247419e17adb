#include "hyla/models.hpp"

#include <algorithm>
#include <cmath>

#include "hyla/errors.hpp"
#include "hyla/random.hpp"

namespace hyla::model {

using sparse::CsrMatrix;

std::string to_string(Level v) { return v == Level::kNode ? "node" : "feature"; }
std::string to_string(Head v) { return v == Head::kSgc ? "sgc" : "lr"; }
std::string to_string(FeatureMap v) { return v == FeatureMap::kHyla ? "hyla" : "rff"; }

Level parse_level(const std::string& s) {
  if (s == "node") return Level::kNode;
  if (s == "feature") return Level::kFeature;
  throw ValidationError("unknown level '" + s + "' (expected node or feature)");
}

Head parse_head(const std::string& s) {
  if (s == "sgc") return Head::kSgc;
  if (s == "lr") return Head::kLr;
  throw ValidationError("unknown head '" + s + "' (expected sgc or lr)");
}

FeatureMap parse_feature_map(const std::string& s) {
  if (s == "hyla") return FeatureMap::kHyla;
  if (s == "rff") return FeatureMap::kRff;
  throw ValidationError("unknown feature map '" + s + "' (expected hyla or rff)");
}

void ModelConfig::validate() const {
  if (d0 < 2) throw ConfigError("d0 must be at least 2");
  if (d1 < 1) throw ConfigError("d1 must be at least 1");
  if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("s must be a finite value >= 0");
  if (!(ball_eps > 0.0 && ball_eps < 0.1)) throw ConfigError("ball_eps must lie in (0, 0.1)");
  if (!(init_range > 0.0)) throw ConfigError("init_range must be positive");
  if (!(clamp_min > 0.0)) throw ConfigError("clamp_min must be positive");
  if (concat_original && level != Level::kNode) {
    throw ConfigError("concat_original is only defined at node level");
  }
}

void ModelConfig::validate_against(const data::Dataset& ds) const {
  validate();
  if (level == Level::kNode && ds.task != data::Task::kTransductive) {
    throw ConfigError("node-level features need a transductive dataset");
  }
  const bool has_features = ds.features && ds.features->nnz() > 0;
  if ((level == Level::kFeature || concat_original) && !has_features) {
    throw ConfigError("dataset '" + ds.name + "' has no feature matrix");
  }
  if (head == Head::kSgc && !ds.graph) {
    throw ConfigError("the sgc head needs a graph; dataset '" + ds.name + "' has none");
  }
}

std::size_t ModelConfig::embedding_count(const data::Dataset& ds) const {
  return level == Level::kNode ? ds.num_nodes : ds.num_features();
}

std::size_t ModelConfig::input_dim(const data::Dataset& ds) const {
  return d1 + (concat_original ? ds.num_features() : 0);
}

ModelState init_state(const data::Dataset& ds, const ModelConfig& cfg, std::uint64_t master_seed) {
  cfg.validate_against(ds);
  ModelState st;
  st.Z = geometry::init_embeddings(cfg.embedding_count(ds), cfg.d0,
                                   derive_seed(master_seed, seed_tag::kEmbeddings), cfg.init_range);
  st.constants =
      features::sample_constants(cfg.d0, cfg.d1, cfg.s, derive_seed(master_seed, seed_tag::kConstants));
  const std::size_t d_in = cfg.input_dim(ds);
  const std::size_t c = ds.num_classes;
  const double bound = std::sqrt(6.0 / static_cast<double>(d_in + c));
  RandomStream rng(derive_seed(master_seed, seed_tag::kWeights));
  st.W = Matrix(d_in, c);
  for (double& v : st.W.values()) v = rng.uniform(-bound, bound);
  return st;
}

PreparedInputs prepare_inputs(const data::Dataset& ds, const ModelConfig& cfg) {
  cfg.validate_against(ds);
  PreparedInputs in;
  in.num_nodes = ds.num_nodes;
  if (cfg.head == Head::kSgc) in.propagation = sparse::normalize_adjacency(*ds.graph);
  if (cfg.level == Level::kFeature) {
    in.features = *ds.features;
    if (cfg.head == Head::kSgc) {
      // Stored sparse with zeros dropped.
      in.precomputed =
          CsrMatrix::from_dense(sparse::propagate_k(*in.propagation, ds.features->to_dense(), cfg.K));
      in.precomputed_t = in.precomputed->transpose();
    } else {
      in.features_t = in.features->transpose();
    }
  }
  if (cfg.concat_original) {
    Matrix dense = ds.features->to_dense();
    in.concat_block = cfg.head == Head::kSgc ? sparse::propagate_k(*in.propagation, dense, cfg.K)
                                             : std::move(dense);
  }
  return in;
}

Matrix embedding_features(const ModelState& state, const ModelConfig& cfg) {
  return cfg.feature_map == FeatureMap::kHyla
             ? features::hyla_forward(state.Z, state.constants, cfg.clamp_min)
             : features::rff_forward(state.Z, state.constants);
}

Matrix build_features(const ModelState& state, const CsrMatrix* x, const ModelConfig& cfg) {
  Matrix h = embedding_features(state, cfg);
  if (cfg.level == Level::kFeature) {
    if (x == nullptr) throw ConfigError("feature-level features need the input feature matrix");
    return sparse::spmm(*x, h);
  }
  if (cfg.concat_original) {
    if (x == nullptr) throw ConfigError("concat_original needs the input feature matrix");
    return hconcat(h, x->to_dense());
  }
  return h;
}

ForwardCache forward(const ModelState& state, const PreparedInputs& in, const ModelConfig& cfg) {
  ForwardCache cache;
  cache.h = embedding_features(state, cfg);
  if (cfg.level == Level::kNode) {
    if (cache.h.rows() != in.num_nodes) throw ConfigError("forward: embedding count != num_nodes");
    cache.classifier_in = cfg.head == Head::kSgc ? sparse::propagate_k(*in.propagation, cache.h, cfg.K)
                                                 : cache.h;
    if (cfg.concat_original) cache.classifier_in = hconcat(cache.classifier_in, *in.concat_block);
  } else if (cfg.head == Head::kSgc) {
    if (!in.precomputed) throw std::logic_error("forward: missing precomputed S^K X");
    cache.classifier_in = sparse::spmm(*in.precomputed, cache.h);
  } else {
    if (!in.features) throw std::logic_error("forward: missing feature matrix");
    cache.classifier_in = sparse::spmm(*in.features, cache.h);
  }
  cache.logits = matmul(cache.classifier_in, state.W);
  return cache;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const std::int64_t> labels,
                                 std::span<const std::size_t> mask) {
  if (mask.empty()) throw ConfigError("softmax_cross_entropy: empty mask");
  if (labels.size() != logits.rows()) throw ConfigError("softmax_cross_entropy: label count != rows");
  LossResult out;
  out.dlogits = Matrix(logits.rows(), logits.cols());
  const double inv_count = 1.0 / static_cast<double>(mask.size());
  double total = 0.0;
  for (const auto i : mask) {
    const auto y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw ConfigError("softmax_cross_entropy: invalid label on row " + std::to_string(i));
    }
    const auto row = logits.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - mx);
    const double log_sum = std::log(sum);
    total += log_sum - (row[static_cast<std::size_t>(y)] - mx);
    auto d = out.dlogits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) d[c] = std::exp(row[c] - mx - log_sum) * inv_count;
    d[static_cast<std::size_t>(y)] -= inv_count;
  }
  out.loss = total * inv_count;
  return out;
}

Gradients backward(const ModelState& state, const PreparedInputs& in, const ModelConfig& cfg,
                   const ForwardCache& cache, const Matrix& dlogits) {
  if (dlogits.rows() != cache.logits.rows() || dlogits.cols() != cache.logits.cols()) {
    throw std::logic_error("backward: dlogits shape differs from logits");
  }
  Gradients g;
  g.dW = matmul_tn(cache.classifier_in, dlogits);
  Matrix d_in = matmul_nt(dlogits, state.W);
  if (cfg.concat_original) d_in = left_columns(d_in, cfg.d1);

  Matrix d_h;
  if (cfg.level == Level::kNode) {
    // S is symmetric, so the adjoint of K propagations is K propagations.
    d_h = cfg.head == Head::kSgc ? sparse::propagate_k(*in.propagation, d_in, cfg.K) : std::move(d_in);
  } else if (cfg.head == Head::kSgc) {
    d_h = sparse::spmm(*in.precomputed_t, d_in);
  } else {
    d_h = sparse::spmm(*in.features_t, d_in);
  }
  g.dZ = cfg.feature_map == FeatureMap::kHyla
             ? features::hyla_backward(state.Z, state.constants, d_h, cfg.clamp_min)
             : features::rff_backward(state.Z, state.constants, d_h);
  return g;
}

std::vector<std::size_t> predict(const Matrix& logits) {
  std::vector<std::size_t> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Metrics evaluate(const Matrix& logits, std::span<const std::int64_t> labels,
                 std::span<const std::size_t> mask) {
  if (mask.empty()) throw ConfigError("evaluate: empty mask");
  if (labels.size() != logits.rows()) throw ConfigError("evaluate: label count != rows");
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const auto i : mask) {
    const auto row = logits.row(i);
    const auto pred = static_cast<std::int64_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (pred == labels[i]) {
      ++tp;
    } else {
      ++fp;  // counted against the predicted class
      ++fn;  // and missed for the true class
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(tp) / static_cast<double>(mask.size());
  const double denom = static_cast<double>(2 * tp + fp + fn);
  m.micro_f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  return m;
}

}  // namespace hyla::model
