#include "lwt/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "lwt/config_json.hpp"
#include "lwt/errors.hpp"
#include "lwt/training.hpp"

namespace lwt::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct SynthFlags {
  SynthSpec spec;
  std::string out;
};

struct CvFlags {
  std::string data;
  std::size_t folds = 5;
  TrainConfig train;
  std::string model = "both";
  std::size_t jobs = 1;
  std::string out;
};

struct PredictFlags {
  std::string checkpoint;
  std::string data;
  std::size_t stride = 32;
  std::string out;
};

struct ReportFlags {
  std::string in;
  std::string out;
};

ordered_json train_config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"crop_samples", c.crop_samples},
          {"crop_stride", c.crop_stride},
          {"optimizer", c.optimizer}};
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

/// Run manifest, written before any long computation starts.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& args,
                    std::uint64_t master_seed, ordered_json config,
                    const std::vector<std::string>& artifacts) {
  ordered_json m;
  m["version"] = std::string(kVersion);
  m["command"] = command;
  m["args"] = args;
  m["master_seed"] = master_seed;
  m["config"] = std::move(config);
  m["artifacts"] = artifacts;
  write_text(dir / "manifest.txt", m.dump(2) + "\n");
}

int cmd_synth(const SynthFlags& f, const std::vector<std::string>& args,
              std::ostream& out) {
  if (f.spec.noise_sigma < 0.0) throw UsageError("--noise must be >= 0");
  if (f.spec.n_per_class == 0 || f.spec.channels == 0 || f.spec.samples == 0) {
    throw UsageError("--per-class, --channels and --samples must be >= 1");
  }
  if (!(f.spec.sample_rate_hz > 0.0)) throw UsageError("--rate must be > 0");

  TrialSet set;
  try {
    set = synthesize_dataset(f.spec);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const fs::path dir = f.out;
  ensure_directory(dir);
  write_manifest(dir, "synth", args, f.spec.seed,
                 {{"synth", f.spec}},
                 {"manifest.txt", std::string(kManifestFile)});
  save_dataset(set, dir);
  out << "wrote " << set.trials.size() << " trials to " << dir.string() << "\n";
  return kOk;
}

ordered_json folds_json(const std::vector<std::pair<Variant, std::vector<FoldResult>>>& runs) {
  ordered_json models = ordered_json::array();
  for (const auto& [variant, folds] : runs) {
    ordered_json entries = ordered_json::array();
    for (const FoldResult& r : folds) {
      entries.push_back({{"fold", r.fold_index},
                         {"accuracy", r.accuracy},
                         {"confusion", r.confusion.counts}});
    }
    models.push_back({{"name", to_string(variant)}, {"folds", entries}});
  }
  return {{"models", models}};
}

std::vector<ReportEntry> report_entries(const ordered_json& folds) {
  std::vector<ReportEntry> entries;
  for (const auto& model : folds.at("models")) {
    ReportEntry e;
    e.model_name = model.at("name").get<std::string>();
    std::vector<double> accuracies;
    for (const auto& fold : model.at("folds")) {
      accuracies.push_back(fold.at("accuracy").get<double>());
      ConfusionMatrix m;
      fold.at("confusion").get_to(m.counts);
      e.confusion += m;
    }
    e.stats = summarize_folds(accuracies);
    entries.push_back(std::move(e));
  }
  return entries;
}

int cmd_cv(const CvFlags& f, const std::vector<std::string>& args,
           std::ostream& out) {
  if (f.folds < 2) throw UsageError("--folds must be >= 2");
  if (f.train.epochs == 0 || f.train.batch_size == 0) {
    throw UsageError("--epochs and --batch must be >= 1");
  }
  if (!(f.train.optimizer.lr > 0.0)) throw UsageError("--lr must be > 0");
  if (f.train.optimizer.weight_decay < 0.0) {
    throw UsageError("--weight-decay must be >= 0");
  }
  std::vector<Variant> variants;
  if (f.model == "both") {
    variants = {Variant::hierarchical, Variant::flat};
  } else {
    try {
      variants = {parse_variant(f.model)};
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
  }

  const TrialSet set = load_dataset(f.data);
  ModelConfig model_config;
  if (!set.trials.empty()) model_config.channels = set.trials.front().channels;
  model_config = resolve_model_config(model_config, set, f.train);

  const fs::path dir = f.out;
  ensure_directory(dir);
  std::vector<std::string> artifacts{"manifest.txt", "metrics.log",
                                     "folds.json", "summary.csv"};
  for (Variant v : variants) {
    const std::string name(to_string(v));
    artifacts.push_back("confusion_" + name + ".csv");
    for (std::size_t k = 0; k < f.folds; ++k) {
      artifacts.push_back(name + "/fold" + std::to_string(k) + ".ckpt");
    }
  }
  write_manifest(dir, "cv", args, f.train.seed,
                 {{"data", f.data},
                  {"folds", f.folds},
                  {"models", f.model},
                  {"jobs", f.jobs},
                  {"model", model_config},
                  {"train", train_config_json(f.train)}},
                 artifacts);

  std::ofstream metrics(dir / "metrics.log", std::ios::binary | std::ios::trunc);
  if (!metrics) throw IoError("cannot write " + (dir / "metrics.log").string());
  CvOptions options;
  options.jobs = f.jobs;
  options.on_epoch = [&](const EpochRecord& r) {
    metrics << format_epoch_record(r) << "\n";
    metrics.flush();
  };

  std::vector<std::pair<Variant, std::vector<FoldResult>>> runs;
  for (Variant v : variants) {
    auto results =
        run_cross_validation(set, model_config, f.train, f.folds, v, options);
    const fs::path ckpt_dir = dir / std::string(to_string(v));
    ensure_directory(ckpt_dir);
    for (const FoldResult& r : results) {
      save_checkpoint(r.model, std::string(to_string(v)),
                      (ckpt_dir / ("fold" + std::to_string(r.fold_index) + ".ckpt"))
                          .string());
      out << to_string(v) << " fold " << r.fold_index
          << " accuracy " << format_number(r.accuracy) << "\n";
    }
    runs.emplace_back(v, std::move(results));
  }

  const ordered_json folds = folds_json(runs);
  write_text(dir / "folds.json", folds.dump(2) + "\n");
  const auto entries = report_entries(folds);
  emit_report(entries, dir);
  out << format_summary_csv(entries);
  return kOk;
}

int cmd_predict(const PredictFlags& f, std::ostream& out) {
  if (f.stride == 0) throw UsageError("--stride must be >= 1");
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Variant variant = [&] {
    try {
      return parse_variant(ckpt.variant);
    } catch (const ArgumentError& e) {
      throw FormatError(f.checkpoint + ": " + e.what());
    }
  }();
  const TrialSet set = load_dataset(f.data);
  const ModelConfig& config = ckpt.model.config;

  std::string records;
  std::size_t correct = 0;
  for (const EEGTrial& trial : set.trials) {
    if (trial.channels != config.channels || trial.samples < config.samples) {
      throw FormatError("checkpoint " + f.checkpoint + " expects " +
                        std::to_string(config.channels) + " channels and >= " +
                        std::to_string(config.samples) + " samples; trial '" +
                        trial.id + "' is " + std::to_string(trial.channels) +
                        "x" + std::to_string(trial.samples));
    }
    const auto windows = crop_trial(trial, config.samples, f.stride);
    ordered_json rec{{"id", trial.id}, {"true", to_string(trial.label)}};
    WordLabel predicted;
    if (variant == Variant::hierarchical) {
      const Prediction p = predict(ckpt.model, windows);
      predicted = p.label;
      rec["predicted"] = to_string(p.label);
      rec["branch"] = to_string(p.branch);
      rec["p_short"] = p.length.p_short;
      rec["p_long"] = p.length.p_long;
      ordered_json words;
      const auto names = branch_words(p.branch);
      for (std::size_t i = 0; i < names.size(); ++i) {
        words[std::string(to_string(names[i]))] = p.word_probs[i];
      }
      rec["word_probs"] = words;
    } else {
      const FlatPrediction p = predict_flat(ckpt.model, windows);
      predicted = p.label;
      rec["predicted"] = to_string(p.label);
      ordered_json words;
      for (std::size_t i = 0; i < kWordCount; ++i) {
        words[std::string(to_string(kAllWords[i]))] = p.probs[i];
      }
      rec["word_probs"] = words;
    }
    correct += predicted == trial.label ? 1 : 0;
    records += rec.dump() + "\n";
  }
  write_text(f.out, records);
  const double accuracy =
      set.trials.empty() ? 0.0
                         : static_cast<double>(correct) /
                               static_cast<double>(set.trials.size());
  out << "predicted " << set.trials.size() << " trials, accuracy "
      << format_number(100.0 * accuracy) << "%\n";
  return kOk;
}

int cmd_report(const ReportFlags& f, std::ostream& out) {
  const fs::path in = fs::path(f.in) / "folds.json";
  std::ifstream file(in);
  if (!file) throw IoError("cannot open " + in.string());
  ordered_json folds;
  std::vector<ReportEntry> entries;
  try {
    folds = ordered_json::parse(file);
    entries = report_entries(folds);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(in.string() + ": " + e.what());
  }
  emit_report(entries, f.out.empty() ? fs::path(f.in) : fs::path(f.out));
  out << format_summary_csv(entries);
  return kOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return kUsage;
    case ErrorKind::configuration: return kConfiguration;
    case ErrorKind::format: return kFormat;
    case ErrorKind::io: return kIo;
    default: return kFailure;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Length-wise hierarchical EEG word classifier"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset");
  synth_cmd->add_option("--per-class", synth.spec.n_per_class, "Trials per word");
  synth_cmd->add_option("--channels", synth.spec.channels, "Channel count");
  synth_cmd->add_option("--samples", synth.spec.samples, "Samples per trial");
  synth_cmd->add_option("--rate", synth.spec.sample_rate_hz, "Sample rate in Hz");
  synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Noise sigma");
  synth_cmd->add_option("--amplitude", synth.spec.amplitude, "Oscillation amplitude");
  synth_cmd->add_option("--seed", synth.spec.seed, "Master seed");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  CvFlags cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation");
  cv_cmd->add_option("--data", cv.data, "Dataset directory")->required();
  cv_cmd->add_option("--folds", cv.folds, "Number of folds");
  cv_cmd->add_option("--epochs", cv.train.epochs, "Training epochs per fold");
  cv_cmd->add_option("--batch", cv.train.batch_size, "Mini-batch size");
  cv_cmd->add_option("--lr", cv.train.optimizer.lr, "AdamW learning rate");
  cv_cmd->add_option("--weight-decay", cv.train.optimizer.weight_decay,
                     "AdamW decoupled weight decay");
  cv_cmd->add_option("--crop", cv.train.crop_samples,
                     "Crop width in samples (0: whole trial)");
  cv_cmd->add_option("--stride", cv.train.crop_stride, "Crop stride in samples");
  cv_cmd->add_option("--seed", cv.train.seed, "Master seed");
  cv_cmd->add_option("--model", cv.model, "hier, flat or both");
  cv_cmd->add_option("--jobs", cv.jobs, "Folds trained concurrently");
  cv_cmd->add_option("--out", cv.out, "Output directory")->required();

  PredictFlags pred;
  auto* pred_cmd = app.add_subcommand("predict", "Classify trials with a checkpoint");
  pred_cmd->add_option("--checkpoint", pred.checkpoint, "Checkpoint file")->required();
  pred_cmd->add_option("--data", pred.data, "Dataset directory")->required();
  pred_cmd->add_option("--stride", pred.stride, "Crop stride in samples");
  pred_cmd->add_option("--out", pred.out, "Predictions file (JSON lines)")->required();

  ReportFlags report;
  auto* report_cmd = app.add_subcommand("report", "Rebuild reports from folds.json");
  report_cmd->add_option("--in", report.in, "cv output directory")->required();
  report_cmd->add_option("--out", report.out, "Report directory (default: --in)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error (usage): " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, args, out);
    if (*cv_cmd) return cmd_cv(cv, args, out);
    if (*pred_cmd) return cmd_predict(pred, out);
    if (*report_cmd) return cmd_report(report, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace lwt::cli
