#include "hyla/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyla/checkpoint.hpp"
#include "hyla/errors.hpp"
#include "hyla/io_util.hpp"
#include "hyla/parallel.hpp"

namespace hyla::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

fs::path resolve_dataset_dir(const fs::path& name) {
  if (fs::is_directory(name)) return name;
  const fs::path fallback = fs::path("data") / name;
  if (fs::is_directory(fallback)) return fallback;
  throw ValidationError("dataset '" + name.string() + "' not found (tried " + name.string() +
                        " and " + fallback.string() + ")");
}

namespace {

struct SplitMetrics {
  std::optional<model::Metrics> train, val, test;
};

std::optional<model::Metrics> metrics_on(const Matrix& logits, const data::Dataset& ds,
                                         const std::vector<std::size_t>& mask) {
  if (mask.empty()) return std::nullopt;
  return model::evaluate(logits, ds.labels, mask);
}

// Always on the full graph: the evaluation side of the inductive protocol.
SplitMetrics evaluate_state(const model::ModelState& st, const data::Dataset& ds,
                            const model::ModelConfig& cfg) {
  const auto inputs = model::prepare_inputs(ds, cfg);
  const auto logits = model::forward(st, inputs, cfg).logits;
  return {metrics_on(logits, ds, ds.splits.train), metrics_on(logits, ds, ds.splits.val),
          metrics_on(logits, ds, ds.splits.test)};
}

ordered_json acc_json(const std::optional<model::Metrics>& m) {
  return m ? ordered_json(m->accuracy) : ordered_json(nullptr);
}

ordered_json metrics_json(const SplitMetrics& m, const std::string& dataset) {
  ordered_json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["dataset"] = dataset;
  j["train_acc"] = acc_json(m.train);
  j["val_acc"] = acc_json(m.val);
  j["test_acc"] = acc_json(m.test);
  j["test_micro_f1"] = m.test ? ordered_json(m.test->micro_f1) : ordered_json(nullptr);
  return j;
}

std::string pct(const std::optional<model::Metrics>& m) {
  if (!m) return "n/a";
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << 100.0 * m->accuracy << '%';
  return ss.str();
}

void check_compatible(const Checkpoint& ckpt, const data::Dataset& ds) {
  if (ckpt.num_classes != ds.num_classes) {
    throw ValidationError("checkpoint has " + std::to_string(ckpt.num_classes) +
                          " classes, dataset has " + std::to_string(ds.num_classes));
  }
  ckpt.config.validate_against(ds);
  if (ckpt.state.Z.rows() != ckpt.config.embedding_count(ds)) {
    throw ValidationError("checkpoint has " + std::to_string(ckpt.state.Z.rows()) +
                          " embeddings, dataset needs " +
                          std::to_string(ckpt.config.embedding_count(ds)));
  }
  if (ckpt.state.W.rows() != ckpt.config.input_dim(ds)) {
    throw ValidationError("checkpoint weight rows do not match the dataset feature width");
  }
}

// Lets the command report the missing directory itself.
fs::path resolve_or_self(const std::string& name) {
  try {
    return resolve_dataset_dir(name);
  } catch (const ValidationError&) {
    return name;
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    set_num_threads(cfg.threads);
    const auto t0 = std::chrono::steady_clock::now();
    const data::Dataset ds = data::load_dataset(cfg.dataset_dir);
    const auto result = optim::train(ds, cfg.model, cfg.schedule, cfg.hyper);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    const SplitMetrics m = evaluate_state(result.state, ds, cfg.model);

    fs::create_directories(cfg.output_dir);
    {
      std::ostringstream csv;
      optim::write_history_csv(csv, result.history, !cfg.deterministic);
      write_file(cfg.output_dir / "history.csv", csv.str());
    }
    save_checkpoint({cfg.model, result.state, ds.name, ds.num_classes, cfg.schedule.seed},
                    cfg.output_dir / "checkpoint.bin");
    ordered_json j = metrics_json(m, ds.name);
    j["epochs_run"] = result.epochs_run;
    j["best_epoch"] = result.best_epoch;
    j["wall_ms"] = wall_ms;
    j["seed"] = cfg.schedule.seed;
    write_file(cfg.output_dir / "metrics.json", j.dump(2) + "\n");

    out << ds.name << ": epochs=" << result.epochs_run << " train=" << pct(m.train)
        << " val=" << pct(m.val) << " test=" << pct(m.test) << " wall=" << wall_ms / 1000.0
        << "s -> " << cfg.output_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& dataset_dir, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const data::Dataset ds = data::load_dataset(dataset_dir);
    check_compatible(ckpt, ds);
    out << metrics_json(evaluate_state(ckpt.state, ds, ckpt.config), ds.name).dump(2) << '\n';
    return kExitOk;
  });
}

int cmd_export_features(const fs::path& checkpoint, const fs::path& dataset_dir,
                        const fs::path& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    const data::Dataset ds = data::load_dataset(dataset_dir);
    check_compatible(ckpt, ds);
    const auto* x = ds.features ? &*ds.features : nullptr;
    const Matrix xbar = model::build_features(ckpt.state, x, ckpt.config);
    std::ostringstream tsv;
    features::write_feature_tsv(tsv, xbar);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_file(out_path, tsv.str());
    out << "wrote " << xbar.rows() << "x" << xbar.cols() << " features to " << out_path.string()
        << '\n';
    return kExitOk;
  });
}

int cmd_gen_synth(const data::SynthTreeParams& params, const fs::path& out_dir, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    const data::Dataset ds = data::generate_synthetic_tree(params);
    data::save_dataset(ds, out_dir);
    std::size_t infected = 0;
    for (auto y : ds.labels) infected += y == 1 ? 1 : 0;
    out << "synthetic tree: " << ds.num_nodes << " nodes, " << ds.edges.size() << " edges, "
        << infected << " infected -> " << out_dir.string() << '\n';
    return kExitOk;
  });
}

int run(int argc, const char* const* argv) {
  CLI::App app{"HyLa: hyperbolic Laplacian features for graph learning"};
  app.require_subcommand(1);

  RunConfig rc;
  std::string dataset = "cora";
  std::string level = "node";
  std::string head = "sgc";
  std::string feature_map = "hyla";
  std::string output_dir = "runs/latest";
  auto* train = app.add_subcommand("train", "Train a HyLa-SGC / HyLa-LR model");
  train->add_option("--dataset", dataset, "Dataset directory (or name under data/)")
      ->capture_default_str();
  train->add_option("--out", output_dir, "Output directory")->capture_default_str();
  train->add_option("--level", level, "node | feature")->capture_default_str();
  train->add_option("--head", head, "sgc | lr")->capture_default_str();
  train->add_option("--feature-map", feature_map, "hyla | rff")->capture_default_str();
  train->add_option("--K", rc.model.K, "Propagation steps")->capture_default_str();
  train->add_option("--d0", rc.model.d0, "Hyperbolic embedding dimension")->capture_default_str();
  train->add_option("--d1", rc.model.d1, "Number of HyLa features")->capture_default_str();
  train->add_option("--s", rc.model.s, "Std-dev of the eigenvalue constants")
      ->capture_default_str();
  train->add_flag("--concat-original", rc.model.concat_original,
                  "Append raw node features to HyLa features (node level)");
  train->add_option("--ball-eps", rc.model.ball_eps, "Ball clipping margin")->capture_default_str();
  train->add_option("--init-range", rc.model.init_range, "Embedding init half-width")
      ->capture_default_str();
  train->add_option("--lr1", rc.hyper.lr1, "RSGD learning rate (embeddings)")
      ->capture_default_str();
  train->add_option("--lr2", rc.hyper.lr2, "Adam learning rate (weights)")->capture_default_str();
  train->add_option("--epochs", rc.schedule.max_epochs, "Maximum epochs")->capture_default_str();
  train->add_flag("--early-stopping", rc.schedule.early_stopping, "Stop on validation plateau");
  train->add_option("--patience", rc.schedule.patience, "Evaluations without improvement")
      ->capture_default_str();
  train->add_option("--eval-every", rc.schedule.eval_every, "Epochs between evaluations")
      ->capture_default_str();
  train->add_option("--seed", rc.schedule.seed, "Master seed")->capture_default_str();
  train->add_option("--threads", rc.threads, "Worker threads for row-parallel kernels")
      ->capture_default_str();
  train->add_flag("--deterministic", rc.deterministic,
                  "Byte-reproducible outputs (history wall_ms written as 0)");

  std::string ckpt_path = "runs/latest/checkpoint.bin";
  std::string eval_dataset = "cora";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->capture_default_str();
  eval->add_option("--dataset", eval_dataset, "Dataset directory")->capture_default_str();

  std::string export_out = "features.tsv";
  auto* exp = app.add_subcommand("export-features", "Write node features X̄ as TSV");
  exp->add_option("--checkpoint", ckpt_path, "Checkpoint file")->capture_default_str();
  exp->add_option("--dataset", eval_dataset, "Dataset directory")->capture_default_str();
  exp->add_option("--out", export_out, "Output TSV path")->capture_default_str();

  data::SynthTreeParams synth;
  std::string synth_out = "data/synthetic_tree";
  auto* gen = app.add_subcommand("gen-synth", "Generate the synthetic disease-spread tree");
  gen->add_option("--out", synth_out, "Output dataset directory")->capture_default_str();
  gen->add_option("--depth", synth.depth, "Tree depth (>= 2)")->capture_default_str();
  gen->add_option("--branching", synth.branching, "Children per node (>= 2)")
      ->capture_default_str();
  gen->add_option("--infect-prob", synth.infect_prob, "Infection probability per child")
      ->capture_default_str();
  gen->add_option("--feature-dim", synth.feature_dim, "Feature columns")->capture_default_str();
  gen->add_option("--seed", synth.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  if (train->parsed()) {
    const int code = guarded(std::cerr, [&] {
      rc.model.level = model::parse_level(level);
      rc.model.head = model::parse_head(head);
      rc.model.feature_map = model::parse_feature_map(feature_map);
      rc.dataset_dir = resolve_dataset_dir(dataset);
      rc.output_dir = output_dir;
      return kExitOk;
    });
    if (code != kExitOk) return code;
    return cmd_train(rc, std::cout, std::cerr);
  }
  if (eval->parsed()) {
    return cmd_eval(ckpt_path, resolve_or_self(eval_dataset), std::cout, std::cerr);
  }
  if (exp->parsed()) {
    return cmd_export_features(ckpt_path, resolve_or_self(eval_dataset), export_out, std::cout,
                               std::cerr);
  }
  return cmd_gen_synth(synth, synth_out, std::cout, std::cerr);
}

}  // namespace hyla::cli
