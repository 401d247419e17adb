#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "hyla/data.hpp"
#include "hyla/models.hpp"
#include "hyla/optim.hpp"

namespace hyla::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;

inline constexpr int kMetricsSchemaVersion = 1;

struct RunConfig {
  std::filesystem::path dataset_dir;
  model::ModelConfig model;
  optim::TrainHyper hyper;
  optim::TrainSchedule schedule;
  std::filesystem::path output_dir = "runs/latest";
  std::size_t threads = 1;
  bool deterministic = false;
};

// Resolves "--dataset cora": an existing path as-is, otherwise data/<name>.
std::filesystem::path resolve_dataset_dir(const std::filesystem::path& name);

/// Writes history.csv, checkpoint.bin and metrics.json into output_dir and
/// prints a one-line summary to `out`. Returns an exit code; errors are
/// reported on `err`.
int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Prints the metrics JSON of a checkpoint on a dataset (full graph).
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& dataset_dir,
             std::ostream& out, std::ostream& err);

// Writes the node-level X̄ of a checkpoint as TSV.
int cmd_export_features(const std::filesystem::path& checkpoint,
                        const std::filesystem::path& dataset_dir,
                        const std::filesystem::path& out_path, std::ostream& out, std::ostream& err);

int cmd_gen_synth(const data::SynthTreeParams& params, const std::filesystem::path& out_dir,
                  std::ostream& out, std::ostream& err);

// Full argument parsing and dispatch (the `hyla` executable).
int run(int argc, const char* const* argv);

}  // namespace hyla::cli
