// numta: command-line driver for the digit-recognition benchmark.
//
//   numta synth    --out DIR [--per-class N] [--sources ab] [--seed S]
//   numta ingest   --config run.json
//   numta split    --config run.json
//   numta train    --config run.json [--model K] [--epochs N] [--lr X] [--batch N] [--mode M] [--pretrained F]
//   numta evaluate --config run.json
//   numta compare  RUN_DIR... [--out DIR]
//   numta params   --model K
//
// Exit codes: 0 ok, 1 configuration error, 2 data or I/O error, 3 training failure.

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "numta/core/errors.hpp"
#include "numta/datasetio/manifest_json.hpp"
#include "numta/metrics/report_io.hpp"
#include "numta/models/archive.hpp"
#include "numta/reporting/compare.hpp"
#include "numta/reporting/history.hpp"
#include "numta/reporting/plots.hpp"
#include "numta/reporting/run_config.hpp"
#include "numta/reporting/synthetic.hpp"

namespace fs = std::filesystem;
using namespace numta;

namespace {

enum Exit { kOk = 0, kConfig = 1, kData = 2, kTraining = 3 };

// Held for the lifetime of a command that writes into a run directory.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw ConfigError("run directory " + dir.string() + " is locked by another invocation (remove " +
                        path_.string() + " if that run is gone)");
    const auto pid = std::to_string(::getpid()) + "\n";
    if (::write(fd, pid.data(), pid.size()) < 0) { /* the lock itself is what matters */ }
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

struct Overrides {
  std::string config;
  std::optional<std::string> model, out, mode, pretrained;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch;
  std::optional<double> lr;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "run config (JSON)")->required();
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", o.seed, "seed override");
}

void add_training(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--model", o.model, "resnet50 | inceptionv3 | efficientnetb0 | desk_*");
  cmd->add_option("--epochs", o.epochs);
  cmd->add_option("--lr", o.lr);
  cmd->add_option("--batch", o.batch);
  cmd->add_option("--mode", o.mode, "caffe | tf | torch");
  cmd->add_option("--pretrained", o.pretrained, "backbone weight archive");
}

// `seed_target` picks what --seed overrides: the split for ingest/split, training otherwise.
RunConfig resolve(const Overrides& o, bool seed_is_split) {
  auto c = load_run_config(o.config);
  if (o.out) c.output_dir = *o.out;
  if (o.model) {
    const auto kind = parse_backbone_kind(*o.model);
    if (kind != c.model && c.train.batch_size == default_batch_size(c.model))
      c.train.batch_size = default_batch_size(kind);
    c.model = kind;
  }
  if (o.seed) {
    if (seed_is_split) {
      c.split.seed = *o.seed;
    } else {
      c.train.seed = *o.seed;
      c.init_seed = *o.seed;
    }
  }
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch) c.train.batch_size = *o.batch;
  if (o.lr) c.train.learning_rate = *o.lr;
  if (o.mode) c.preprocess = PreprocessMode::defaults(parse_preprocess_kind(*o.mode));
  if (o.pretrained) c.pretrained = fs::path(*o.pretrained);
  c.validate();
  return c;
}

int cmd_synth(const fs::path& out, const SyntheticSpec& spec) {
  const auto m = write_synthetic_dataset(out, spec);
  std::cout << "wrote " << m.size() << " images under " << out.string() << "\n";
  return kOk;
}

int cmd_ingest(const RunConfig& c) {
  RunLock lock(c.run_dir());
  const auto scanned = scan_sources(c.dataset_root, c.sources, c.csv);
  auto cleaned = validate_and_clean(scanned);
  auto manifest = c.subsample > 0 ? subsample(cleaned.manifest, c.subsample, c.split.seed) : cleaned.manifest;
  write_json_file(c.run_dir() / "manifest.json", to_json(manifest));
  auto log = to_json(cleaned.log);
  log["row_errors"] = scanned.row_errors().size();
  log["subsampled_to"] = manifest.size();
  write_json_file(c.run_dir() / "clean_log.json", log);
  std::cout << "scanned " << scanned.size() << " rows (" << scanned.row_errors().size() << " malformed), kept "
            << cleaned.log.kept << ", dropped " << cleaned.log.dropped_missing_label << " unlabelled / "
            << cleaned.log.dropped_missing_file << " missing / " << cleaned.log.dropped_unreadable
            << " unreadable; manifest holds " << manifest.size() << "\n";
  return kOk;
}

int cmd_split(const RunConfig& c) {
  RunLock lock(c.run_dir());
  const auto path = c.run_dir() / "manifest.json";
  if (!fs::exists(path)) throw DataError("no manifest at " + path.string() + "; run `numta ingest` first");
  const auto split = stratified_split(manifest_from_json(read_json_file(path)), c.split);
  auto j = to_json(split);
  j["spec"] = to_json(c.split);
  write_json_file(c.run_dir() / "split.json", j);
  std::cout << "train " << split.train.size() << ", test " << split.test.size() << ", new data "
            << split.new_data.size() << "\n";
  return kOk;
}

SplitResult load_split(const RunConfig& c) {
  const auto path = c.run_dir() / "split.json";
  if (!fs::exists(path)) throw DataError("no split at " + path.string() + "; run `numta split` first");
  return split_from_json(read_json_file(path));
}

int cmd_train(const RunConfig& c) {
  RunLock lock(c.run_dir());
  const auto split = load_split(c);
  auto snapshot = to_json(c);
  snapshot["model_config"] = to_json(c.model_config());
  write_json_file(c.run_dir() / "config.json", snapshot);

  auto model = build_model(c.model, c.model_config());
  const auto params = parameter_count(model);
  std::cout << to_string(c.model) << ": " << params.total << " parameters; " << split.train.size() << " train / "
            << split.test.size() << " test samples; lr " << c.train.learning_rate << ", batch "
            << c.train.batch_size << ", " << c.train.epochs << " epochs\n";
  auto result = train(std::move(model), split.train, split.test, c.train, c.preprocess,
                            c.augment ? &*c.augment : nullptr, [](std::size_t epoch, const EpochHistory& h) {
                              std::printf("epoch %3zu  loss %.4f  acc %.4f  test_loss %.4f  test_acc %.4f\n", epoch,
                                          h.train_loss.back(), h.train_accuracy.back(), h.test_loss.back(),
                                          h.test_accuracy.back());
                              std::fflush(stdout);
                            });
  if (!result.history.empty()) {
    render_plots(result.history, c.run_dir());
  } else {
    write_history_csv(c.run_dir() / "history.csv", result.history);
  }
  if (result.failed()) {
    std::cerr << "numta: training aborted: " << *result.error << "\n";
    return kTraining;
  }
  save_checkpoint(result.model, c.run_dir() / "checkpoint.ntc");
  std::printf("done in %.1f s\n", result.wall_time);
  return kOk;
}

int cmd_evaluate(RunConfig c) {
  RunLock lock(c.run_dir());
  // Evaluate with the settings the checkpoint was trained under.
  if (const auto snap = c.run_dir() / "config.json"; fs::exists(snap)) {
    const auto trained = run_config_from_json(read_json_file(snap), c.dataset_root.string());
    c.model = trained.model;
    c.preprocess = trained.preprocess;
  }
  const auto ckpt = c.run_dir() / "checkpoint.ntc";
  if (!fs::exists(ckpt)) throw DataError("no checkpoint at " + ckpt.string() + "; run `numta train` first");
  auto model = load_checkpoint(c.model, ckpt);
  const auto split = load_split(c);

  auto report_on = [&](const DatasetManifest& set, const std::string& stem, const std::string& title) {
    const auto p = predict_labels(model, set, c.preprocess, c.train.batch_size);
    const auto report = build_report(p.y_true, p.y_pred);
    write_report_json(c.run_dir() / (stem + ".json"), report);
    write_report_csv(c.run_dir() / (stem + ".csv"), report);
    std::cout << title << " (" << set.size() << " samples)\n" << render_report_text(report) << "\n";
    if (report.zero_division) std::cout << "note: some classes had no predictions or no samples; their scores are 0\n\n";
  };
  report_on(split.test, "report", "test set");
  if (!split.new_data.empty()) report_on(split.new_data, "report_new_data", "new data");
  return kOk;
}

int cmd_compare(const std::vector<std::string>& dirs, const fs::path& out) {
  std::vector<RunResult> runs;
  std::vector<std::pair<std::string, EpochHistory>> curves;
  for (const auto& d : dirs) {
    const fs::path dir(d);
    const auto name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
    RunResult r{name, read_report_json(dir / "report.json"), read_history_csv(dir / "history.csv")};
    curves.emplace_back(name, r.history);
    runs.push_back(std::move(r));
  }
  const auto table = compare(runs);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
  write_json_file(out / "comparison.json", to_json(table));
  render_comparison_chart(table, out / "comparison.png");
  render_curve_comparison(curves, out);

  std::printf("%-20s %9s %9s %12s %11s %10s\n", "model", "accuracy", "macro f1", "weighted f1", "final loss",
              "final acc");
  for (const auto& r : table.rows)
    std::printf("%-20s %9s %9s %12s %11.4f %10s%s\n", r.name.c_str(), format_half_up(r.accuracy).c_str(),
                format_half_up(r.macro_f1).c_str(), format_half_up(r.weighted_f1).c_str(), r.final_test_loss,
                format_half_up(r.final_test_accuracy).c_str(), r.best ? "  <- best" : "");
  std::printf("\n%-20s %12s %12s %11s\n", "model", "acc epoch 1", "acc last", "difference");
  for (const auto& d : table.deltas)
    std::printf("%-20s %12s %12s %11s\n", d.name.c_str(), format_half_up(d.accuracy_at_1).c_str(),
                format_half_up(d.accuracy_at_last).c_str(), format_half_up(d.difference).c_str());
  return kOk;
}

int cmd_params(const std::string& kind) {
  auto model = build_model(parse_backbone_kind(kind));
  const auto s = parameter_count(model);
  std::cout << kind << ": total " << s.total << ", trainable " << s.trainable << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Handwritten digit recognition benchmark"};
  app.require_subcommand(1);

  fs::path synth_out;
  SyntheticSpec synth;
  std::string synth_sources = "ab";
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset in the source layout");
  synth_cmd->add_option("--out", synth_out)->required();
  synth_cmd->add_option("--per-class", synth.per_class, "images per class and source");
  synth_cmd->add_option("--sources", synth_sources, "source tags, e.g. abc");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--size", synth.image_size, "image side in pixels");

  Overrides ingest_o, split_o, train_o, eval_o;
  auto* ingest_cmd = app.add_subcommand("ingest", "scan, clean and subsample the sources");
  add_common(ingest_cmd, ingest_o);
  auto* split_cmd = app.add_subcommand("split", "split the manifest into train / test / new data");
  add_common(split_cmd, split_o);
  auto* train_cmd = app.add_subcommand("train", "fine-tune a model on the split");
  add_common(train_cmd, train_o);
  add_training(train_cmd, train_o);
  auto* eval_cmd = app.add_subcommand("evaluate", "classification reports for the test and new-data sets");
  add_common(eval_cmd, eval_o);
  eval_cmd->add_option("--model", eval_o.model);
  eval_cmd->add_option("--mode", eval_o.mode);

  std::vector<std::string> compare_dirs;
  fs::path compare_out = ".";
  auto* compare_cmd = app.add_subcommand("compare", "compare finished runs");
  compare_cmd->add_option("runs", compare_dirs, "run directories")->required();
  compare_cmd->add_option("--out", compare_out);

  std::string params_kind;
  auto* params_cmd = app.add_subcommand("params", "print a model's parameter count");
  params_cmd->add_option("--model", params_kind)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*synth_cmd) {
      synth.sources.clear();
      for (char t : synth_sources) synth.sources.insert(t);
      return cmd_synth(synth_out, synth);
    }
    if (*ingest_cmd) return cmd_ingest(resolve(ingest_o, true));
    if (*split_cmd) return cmd_split(resolve(split_o, true));
    if (*train_cmd) return cmd_train(resolve(train_o, false));
    if (*eval_cmd) return cmd_evaluate(resolve(eval_o, false));
    if (*compare_cmd) return cmd_compare(compare_dirs, compare_out);
    if (*params_cmd) return cmd_params(params_kind);
  } catch (const ConfigError& e) {
    std::cerr << "numta: config error: " << e.what() << "\n";
    return kConfig;
  } catch (const TrainingError& e) {
    std::cerr << "numta: training failed: " << e.what() << "\n";
    return kTraining;
  } catch (const std::exception& e) {
    std::cerr << "numta: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
