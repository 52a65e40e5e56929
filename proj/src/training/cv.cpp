#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "lwt/errors.hpp"
#include "lwt/random.hpp"
#include "lwt/training.hpp"

namespace lwt {

std::vector<FoldSpec> kfold_split(const TrialSet& set, std::size_t k,
                                  std::uint64_t seed) {
  if (k < 2) {
    throw ArgumentError("k-fold split needs k >= 2, got " + std::to_string(k));
  }
  std::array<std::vector<std::size_t>, kWordCount> by_class;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    if (!ids.insert(set.trials[i].id).second) {
      throw ArgumentError("duplicate trial id '" + set.trials[i].id + "'");
    }
    by_class[ordinal(set.trials[i].label)].push_back(i);
  }
  for (WordLabel w : kAllWords) {
    if (by_class[ordinal(w)].size() < k) {
      throw ArgumentError("class '" + std::string(to_string(w)) + "' has " +
                          std::to_string(by_class[ordinal(w)].size()) +
                          " trials, fewer than k = " + std::to_string(k));
    }
  }

  // bucket[i] = validation fold of trial i
  std::vector<std::size_t> bucket(set.trials.size());
  auto rng = make_rng(seed, "split");
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t j = 0; j < members.size(); ++j) bucket[members[j]] = j % k;
  }

  std::vector<FoldSpec> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    folds[f].fold_index = f;
    for (std::size_t i = 0; i < set.trials.size(); ++i) {
      (bucket[i] == f ? folds[f].val_ids : folds[f].train_ids)
          .push_back(set.trials[i].id);
    }
  }
  return folds;
}

std::vector<LabelPair> evaluate(const HierarchicalModel& model,
                                Variant variant,
                                std::span<const EEGTrial> trials,
                                std::size_t crop_samples, std::size_t stride) {
  std::vector<LabelPair> out;
  out.reserve(trials.size());
  for (const EEGTrial& trial : trials) {
    const auto windows = crop_trial(trial, crop_samples, stride);
    const WordLabel predicted = variant == Variant::hierarchical
                                    ? predict(model, windows).label
                                    : predict_flat(model, windows).label;
    out.emplace_back(trial.label, predicted);
  }
  return out;
}

ModelConfig resolve_model_config(const ModelConfig& model_config,
                                 const TrialSet& set,
                                 const TrainConfig& train_config) {
  if (set.trials.empty()) throw ArgumentError("trial set is empty");
  const std::size_t channels = set.trials.front().channels;
  const std::size_t samples = set.trials.front().samples;
  for (const EEGTrial& t : set.trials) {
    if (t.channels != channels || t.samples != samples) {
      throw ArgumentError("trial '" + t.id + "' is " +
                          std::to_string(t.channels) + "x" +
                          std::to_string(t.samples) + ", expected " +
                          std::to_string(channels) + "x" +
                          std::to_string(samples));
    }
  }
  if (model_config.channels != channels) {
    throw ConfigError("model expects " + std::to_string(model_config.channels) +
                      " channels, data has " + std::to_string(channels));
  }
  if (train_config.crop_stride == 0) {
    throw ConfigError("crop stride must be at least 1");
  }
  ModelConfig out = model_config;
  out.samples =
      train_config.crop_samples == 0 ? samples : train_config.crop_samples;
  if (out.samples > samples) {
    throw ConfigError("crop of " + std::to_string(out.samples) +
                      " samples exceeds the trial length " +
                      std::to_string(samples));
  }
  plan_shapes(out);
  return out;
}

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold) {
  return derive_seed(master, "fold", fold);
}

namespace {

std::vector<EEGTrial> select(const TrialSet& set,
                             const std::vector<std::string>& ids) {
  std::map<std::string, const EEGTrial*> index;
  for (const EEGTrial& t : set.trials) index[t.id] = &t;
  std::vector<EEGTrial> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(*index.at(id));
  return out;
}

FoldResult run_fold(const TrialSet& set, const FoldSpec& spec,
                    const ModelConfig& model_config,
                    const TrainConfig& train_config, Variant variant,
                    const std::function<void(const EpochRecord&)>& on_epoch) {
  TrainConfig config = train_config;
  config.seed = fold_seed(train_config.seed, spec.fold_index);
  const std::size_t crop = model_config.samples;

  FoldResult result;
  result.fold_index = spec.fold_index;
  result.model = build_model(model_config, config.seed);

  {
    const std::vector<EEGTrial> train = select(set, spec.train_ids);
    const std::vector<CropSample> samples =
        make_crops(train, crop, config.crop_stride);
    OptimizerStates optimizer(result.model, variant, config.optimizer);
    for (std::size_t e = 0; e < config.epochs; ++e) {
      EpochStats stats =
          train_epoch(result.model, samples, config, variant, optimizer, e);
      if (on_epoch) on_epoch({variant, spec.fold_index, stats});
      result.history.push_back(stats);
    }
  }

  const std::vector<EEGTrial> val = select(set, spec.val_ids);
  result.predictions =
      evaluate(result.model, variant, val, crop, config.crop_stride);
  result.confusion = confusion_matrix(result.predictions);
  std::size_t correct = 0;
  for (const auto& [truth, predicted] : result.predictions) {
    correct += truth == predicted ? 1 : 0;
  }
  result.accuracy = 100.0 * static_cast<double>(correct) /
                    static_cast<double>(result.predictions.size());
  return result;
}

}  // namespace

std::vector<FoldResult> run_cross_validation(const TrialSet& set,
                                             const ModelConfig& model_config,
                                             const TrainConfig& train_config,
                                             std::size_t k, Variant variant,
                                             const CvOptions& options) {
  const ModelConfig resolved =
      resolve_model_config(model_config, set, train_config);
  const std::vector<FoldSpec> folds = kfold_split(set, k, train_config.seed);

  std::mutex callback_mutex;
  std::function<void(const EpochRecord&)> on_epoch;
  if (options.on_epoch) {
    on_epoch = [&](const EpochRecord& r) {
      std::lock_guard lock(callback_mutex);
      options.on_epoch(r);
    };
  }

  std::vector<FoldResult> results(folds.size());
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, folds.size());
  if (jobs == 1) {
    for (std::size_t f = 0; f < folds.size(); ++f) {
      results[f] =
          run_fold(set, folds[f], resolved, train_config, variant, on_epoch);
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(folds.size());
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t f = next++; f < folds.size(); f = next++) {
        try {
          results[f] =
              run_fold(set, folds[f], resolved, train_config, variant, on_epoch);
        } catch (...) {
          errors[f] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace lwt
