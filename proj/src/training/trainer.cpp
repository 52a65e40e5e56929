#include <algorithm>
#include <cstdio>
#include <numeric>

#include "lwt/errors.hpp"
#include "lwt/random.hpp"
#include "lwt/training.hpp"

namespace lwt {

std::string_view to_string(Variant variant) {
  return variant == Variant::hierarchical ? "hier" : "flat";
}

Variant parse_variant(std::string_view name) {
  if (name == "hier") return Variant::hierarchical;
  if (name == "flat") return Variant::flat;
  throw ArgumentError("unknown model variant '" + std::string(name) +
                      "' (expected hier or flat)");
}

std::vector<Tensor> crop_trial(const EEGTrial& trial, std::size_t crop_samples,
                               std::size_t stride) {
  if (stride == 0) throw ArgumentError("crop stride must be at least 1");
  if (crop_samples == 0 || crop_samples > trial.samples) {
    throw ArgumentError("crop of " + std::to_string(crop_samples) +
                        " samples does not fit trial '" + trial.id + "' of " +
                        std::to_string(trial.samples) + " samples");
  }
  const std::size_t count = (trial.samples - crop_samples) / stride + 1;
  std::vector<Tensor> windows;
  windows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Tensor w(Shape{1, trial.channels, crop_samples});
    for (std::size_t ch = 0; ch < trial.channels; ++ch) {
      const float* src = trial.data.data() + ch * trial.samples + k * stride;
      std::copy(src, src + crop_samples, w.data() + ch * crop_samples);
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<CropSample> make_crops(std::span<const EEGTrial> trials,
                                   std::size_t crop_samples,
                                   std::size_t stride) {
  std::vector<CropSample> out;
  for (const EEGTrial& trial : trials) {
    for (Tensor& w : crop_trial(trial, crop_samples, stride)) {
      out.push_back({std::move(w), trial.label});
    }
  }
  return out;
}

bool trains_parameter(Variant variant, std::string_view name) {
  const bool shared = name.starts_with("trunk.") || name.starts_with("length.conv.");
  if (variant == Variant::flat) return shared || name.starts_with("flat.");
  return !name.starts_with("flat.");
}

OptimizerStates::OptimizerStates(const HierarchicalModel& model,
                                 Variant variant, const AdamWConfig& config) {
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trains_parameter(variant, params[i].name)) continue;
    trained_.push_back(i);
    states_.emplace_back(*params[i].value, config);
  }
}

void OptimizerStates::step(HierarchicalModel& model,
                           const HierarchicalModel& grads) {
  auto params = model.parameters();
  const auto gparams = grads.parameters();
  for (std::size_t s = 0; s < trained_.size(); ++s) {
    const std::size_t i = trained_[s];
    adamw_step(*params[i].value, *gparams[i].value, states_[s]);
  }
}

EpochStats train_epoch(HierarchicalModel& model,
                       std::span<const CropSample> samples,
                       const TrainConfig& config, Variant variant,
                       OptimizerStates& optimizer, std::size_t epoch) {
  if (samples.empty()) throw ArgumentError("training set is empty");
  if (config.batch_size == 0) throw ArgumentError("batch size must be >= 1");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(config.seed, "shuffle", epoch);
  std::shuffle(order.begin(), order.end(), rng);

  EpochStats stats;
  stats.epoch = epoch;
  std::size_t correct = 0;
  HierarchicalModel grads = zeros_like(model);
  for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
    const std::size_t stop = std::min(order.size(), start + config.batch_size);
    const double scale = 1.0 / static_cast<double>(stop - start);
    for (auto& p : grads.parameters()) p.value->fill(0.0);
    for (std::size_t i = start; i < stop; ++i) {
      const CropSample& s = samples[order[i]];
      const SampleOutcome outcome =
          variant == Variant::hierarchical
              ? accumulate_lengthwise_gradients(model, s.window, s.label, scale,
                                                grads)
              : accumulate_flat_gradients(model, s.window, s.label, scale,
                                          grads);
      stats.l_length += outcome.loss.l_length;
      stats.l_short += outcome.loss.l_short;
      stats.l_long += outcome.loss.l_long;
      stats.total += outcome.loss.total;
      correct += outcome.correct ? 1 : 0;
    }
    optimizer.step(model, grads);
  }
  const double n = static_cast<double>(samples.size());
  stats.l_length /= n;
  stats.l_short /= n;
  stats.l_long /= n;
  stats.total /= n;
  stats.train_acc = static_cast<double>(correct) / n;
  return stats;
}

std::string format_epoch_record(const EpochRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "model=%s fold=%zu epoch=%zu l_length=%.9g l_short=%.9g "
                "l_long=%.9g total=%.9g train_acc=%.6f",
                std::string(to_string(r.variant)).c_str(), r.fold,
                r.stats.epoch, r.stats.l_length, r.stats.l_short,
                r.stats.l_long, r.stats.total, r.stats.train_acc);
  return buf;
}

}  // namespace lwt
