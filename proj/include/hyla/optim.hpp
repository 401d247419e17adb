#pragma once

// Joint training: Riemannian SGD on the embeddings Z (lr1) and Adam on the
// classifier weight W (lr2), full batch, with optional early stopping.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hyla/data.hpp"
#include "hyla/dense.hpp"
#include "hyla/models.hpp"

namespace hyla::optim {

struct AdamState {
  Matrix m;
  Matrix v;
  std::size_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols, double lr2)
      : m(rows, cols), v(rows, cols), lr(lr2) {}
};

// Bias-corrected Adam step on W. Throws NumericError on a non-finite gradient.
void adam_step(AdamState& st, Matrix& w, const Matrix& dw);

struct TrainSchedule {
  std::size_t max_epochs = 100;
  bool early_stopping = false;
  std::size_t patience = 10;  // evaluations without improvement
  std::size_t eval_every = 1;
  std::uint64_t seed = 0;
};

struct TrainHyper {
  double lr1 = 0.01;  // RSGD on Z
  double lr2 = 0.01;  // Adam on W
};

struct HistoryRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;  // NaN when the epoch was not evaluated or val is empty
  double wall_ms = 0.0;
};

struct TrainResult {
  model::ModelState state;
  std::vector<HistoryRow> history;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;  // 0 = initial state
};

/// Epoch e (1-based): forward with the current parameters, record loss and
/// train/val accuracy for those parameters, backward, Adam on W, RSGD on Z
/// (plain SGD for RFF embeddings). Inductive datasets train on the
/// training-node subgraph and are evaluated on the full graph. With early
/// stopping, the returned state is the evaluated state with the best
/// validation accuracy (earliest on ties).
TrainResult train(const data::Dataset& ds, const model::ModelConfig& cfg,
                  const TrainSchedule& schedule, const TrainHyper& hyper);

// Called after each epoch's parameter update.
using EpochObserver = std::function<void(std::size_t epoch, const model::ModelState&)>;

// Same, starting from a given state (used by tests and ablations).
TrainResult train_from(model::ModelState initial, const data::Dataset& ds,
                       const model::ModelConfig& cfg, const TrainSchedule& schedule,
                       const TrainHyper& hyper, const EpochObserver& observer = {});

/// Header "epoch,train_loss,train_acc,val_acc,wall_ms"; floats in shortest
/// round-trip form. `include_timing = false` writes 0 for wall_ms so that
/// reproducible runs produce byte-identical files.
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history,
                       bool include_timing = true);

}  // namespace hyla::optim
