#include "hyla/optim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "hyla/errors.hpp"
#include "hyla/geometry.hpp"
#include "hyla/io_util.hpp"

namespace hyla::optim {

void adam_step(AdamState& st, Matrix& w, const Matrix& dw) {
  if (dw.rows() != w.rows() || dw.cols() != w.cols() || st.m.rows() != w.rows() ||
      st.m.cols() != w.cols()) {
    throw ConfigError("adam_step: shape mismatch");
  }
  if (!all_finite(dw.values())) throw NumericError("adam_step: non-finite gradient for W");
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  auto m = st.m.values();
  auto v = st.v.values();
  auto g = dw.values();
  auto x = w.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g[i];
    v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    x[i] -= st.lr * m_hat / (std::sqrt(v_hat) + st.eps);
  }
}

namespace {

void update_embeddings(model::ModelState& st, const Matrix& dz, const model::ModelConfig& cfg,
                       double lr1) {
  if (lr1 == 0.0) return;
  if (cfg.feature_map == model::FeatureMap::kHyla) {
    geometry::rsgd_update(st.Z, dz, lr1, cfg.ball_eps);
    return;
  }
  for (std::size_t i = 0; i < st.Z.rows(); ++i) {
    const auto g = dz.row(i);
    if (!all_finite(g)) {
      throw NumericError("non-finite gradient for embedding row " + std::to_string(i));
    }
    auto z = st.Z.row(i);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] -= lr1 * g[k];
  }
}

}  // namespace

TrainResult train(const data::Dataset& ds, const model::ModelConfig& cfg,
                  const TrainSchedule& schedule, const TrainHyper& hyper) {
  return train_from(model::init_state(ds, cfg, schedule.seed), ds, cfg, schedule, hyper);
}

TrainResult train_from(model::ModelState initial, const data::Dataset& ds,
                       const model::ModelConfig& cfg, const TrainSchedule& schedule,
                       const TrainHyper& hyper, const EpochObserver& observer) {
  cfg.validate_against(ds);
  if (!(hyper.lr1 >= 0.0) || !(hyper.lr2 >= 0.0)) {
    throw ConfigError("learning rates must be non-negative");
  }
  if (schedule.early_stopping && schedule.patience < 1) {
    throw ConfigError("patience must be at least 1 with early stopping");
  }
  if (schedule.eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (ds.splits.train.empty()) throw ConfigError("training split is empty");
  if (schedule.early_stopping && ds.splits.val.empty()) {
    throw ConfigError("early stopping needs a non-empty validation split");
  }

  const bool inductive = ds.task == data::Task::kInductive && ds.graph.has_value();
  const model::PreparedInputs train_in =
      model::prepare_inputs(inductive ? data::inductive_subgraph(ds) : ds, cfg);
  std::optional<model::PreparedInputs> eval_storage;
  if (inductive) eval_storage = model::prepare_inputs(ds, cfg);
  const model::PreparedInputs& eval_in = inductive ? *eval_storage : train_in;

  TrainResult result;
  result.state = std::move(initial);
  AdamState adam(result.state.W.rows(), result.state.W.cols(), hyper.lr2);

  double best_val = -std::numeric_limits<double>::infinity();
  model::ModelState best_state;
  std::size_t since_best = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    const model::ForwardCache cache = model::forward(result.state, train_in, cfg);
    const auto loss = model::softmax_cross_entropy(cache.logits, ds.labels, ds.splits.train);
    if (!std::isfinite(loss.loss)) {
      throw NumericError("training diverged: loss is not finite at epoch " + std::to_string(epoch));
    }

    HistoryRow row;
    row.epoch = epoch;
    row.train_loss = loss.loss;
    row.train_acc = model::evaluate(cache.logits, ds.labels, ds.splits.train).accuracy;
    row.val_acc = std::numeric_limits<double>::quiet_NaN();
    const bool eval_now = (epoch - 1) % schedule.eval_every == 0 && !ds.splits.val.empty();
    if (eval_now) {
      const Matrix& logits =
          inductive ? model::forward(result.state, eval_in, cfg).logits : cache.logits;
      row.val_acc = model::evaluate(logits, ds.labels, ds.splits.val).accuracy;
      if (schedule.early_stopping) {
        if (row.val_acc > best_val) {
          best_val = row.val_acc;
          best_state = result.state;
          result.best_epoch = epoch;
          since_best = 0;
        } else {
          ++since_best;
        }
      }
    }

    const model::Gradients grads = model::backward(result.state, train_in, cfg, cache, loss.dlogits);
    adam_step(adam, result.state.W, grads.dW);
    try {
      update_embeddings(result.state, grads.dZ, cfg, hyper.lr1);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch));
    }

    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(row);
    result.epochs_run = epoch;
    if (observer) observer(epoch, result.state);
    if (schedule.early_stopping && since_best >= schedule.patience) break;
  }

  if (schedule.early_stopping && result.best_epoch > 0) {
    result.state = std::move(best_state);
  } else {
    result.best_epoch = result.epochs_run;
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history,
                       bool include_timing) {
  out << "epoch,train_loss,train_acc,val_acc,wall_ms\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.train_acc) << ','
        << (std::isnan(r.val_acc) ? std::string() : format_double(r.val_acc)) << ','
        << (include_timing ? format_double(r.wall_ms) : std::string("0")) << '\n';
  }
}

}  // namespace hyla::optim
