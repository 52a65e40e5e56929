#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lwt/adamw.hpp"
#include "lwt/data.hpp"
#include "lwt/eval.hpp"
#include "lwt/model.hpp"

namespace lwt {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t crop_samples = 0;  // 0 means the whole trial
  std::size_t crop_stride = 32;
  AdamWConfig optimizer;
};

/// hierarchical: length head plus both branches, trained length-wise.
/// flat: trunk, length conv stack and a single five-way head (control).
enum class Variant { hierarchical, flat };

std::string_view to_string(Variant variant);
/// Accepts "hier" and "flat".
Variant parse_variant(std::string_view name);

struct LengthwiseLoss {
  double l_length = 0.0;  // L_w, unweighted length cross-entropy
  double l_short = 0.0;   // L_s = p_short * CE(short branch)
  double l_long = 0.0;    // L_l = p_long * CE(long branch)
  double total = 0.0;     // L_w + L_s + L_l
};

/// `weight` times the cross-entropy of `probs` at `true_index`.
double weighted_branch_loss(double weight, std::span<const double> probs,
                            std::size_t true_index);

/// Loss terms for one sample given the length distribution and the
/// distribution of the branch matching the sample's true length group.
LengthwiseLoss lengthwise_loss(const LengthProbs& length,
                               std::span<const double> branch_probs,
                               WordLabel label);

/// Windows start at 0, stride, 2*stride, ...; each is [1, channels, crop].
std::vector<Tensor> crop_trial(const EEGTrial& trial, std::size_t crop_samples,
                               std::size_t stride);

struct CropSample {
  Tensor window;
  WordLabel label;
};

std::vector<CropSample> make_crops(std::span<const EEGTrial> trials,
                                   std::size_t crop_samples,
                                   std::size_t stride);

struct SampleOutcome {
  LengthwiseLoss loss;
  bool correct = false;  // routed prediction equals the label
};

/// Forward and backward pass of the length-wise loss for one window. The
/// branch weight p is held constant in the backward pass, and only the
/// branch of the true length group is evaluated. Gradients, multiplied by
/// `scale`, are added into `grads`.
SampleOutcome accumulate_lengthwise_gradients(const HierarchicalModel& model,
                                              const Tensor& window,
                                              WordLabel label, double scale,
                                              HierarchicalModel& grads);

/// Cross-entropy of the flat five-way head; loss is reported in `total`.
SampleOutcome accumulate_flat_gradients(const HierarchicalModel& model,
                                        const Tensor& window, WordLabel label,
                                        double scale, HierarchicalModel& grads);

struct LossAndGradients {
  LengthwiseLoss loss;
  HierarchicalModel gradients;
};

LossAndGradients compute_loss(const HierarchicalModel& model,
                              const Tensor& window, WordLabel label);

/// Whether `variant` updates the parameter called `name`.
bool trains_parameter(Variant variant, std::string_view name);

/// AdamW state for the parameters a variant trains.
class OptimizerStates {
 public:
  OptimizerStates(const HierarchicalModel& model, Variant variant,
                  const AdamWConfig& config);

  void step(HierarchicalModel& model, const HierarchicalModel& grads);
  const std::vector<std::size_t>& trained_indices() const { return trained_; }

 private:
  std::vector<std::size_t> trained_;
  std::vector<AdamWState> states_;
};

struct EpochStats {
  std::size_t epoch = 0;
  double l_length = 0.0;
  double l_short = 0.0;
  double l_long = 0.0;
  double total = 0.0;
  double train_acc = 0.0;  // fraction of crops predicted correctly in-pass
};

/// One pass over seeded-shuffled mini-batches; one optimizer step per batch
/// on the mean of the per-sample losses.
EpochStats train_epoch(HierarchicalModel& model,
                       std::span<const CropSample> samples,
                       const TrainConfig& config, Variant variant,
                       OptimizerStates& optimizer, std::size_t epoch);

struct FoldSpec {
  std::size_t fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
};

/// Stratified split: per class, trials are shuffled and dealt round-robin
/// into k validation buckets.
std::vector<FoldSpec> kfold_split(const TrialSet& set, std::size_t k,
                                  std::uint64_t seed);

/// (true, predicted) for every trial using cropped decoding.
std::vector<LabelPair> evaluate(const HierarchicalModel& model,
                                Variant variant,
                                std::span<const EEGTrial> trials,
                                std::size_t crop_samples, std::size_t stride);

/// Model config for training on `set`: channel count must match, and the
/// window width becomes the crop width. Throws ConfigError for a crop longer
/// than the trials or shorter than the architecture allows.
ModelConfig resolve_model_config(const ModelConfig& model_config,
                                 const TrialSet& set,
                                 const TrainConfig& train_config);

struct EpochRecord {
  Variant variant;
  std::size_t fold;
  EpochStats stats;
};

/// key=value line for the metrics log.
std::string format_epoch_record(const EpochRecord& record);

struct CvOptions {
  std::size_t jobs = 1;
  /// Called after each epoch; calls are serialized.
  std::function<void(const EpochRecord&)> on_epoch;
};

struct FoldResult {
  std::size_t fold_index = 0;
  double accuracy = 0.0;  // percent
  std::vector<LabelPair> predictions;
  ConfusionMatrix confusion;
  std::vector<EpochStats> history;
  HierarchicalModel model;
};

std::uint64_t fold_seed(std::uint64_t master, std::size_t fold);

std::vector<FoldResult> run_cross_validation(const TrialSet& set,
                                             const ModelConfig& model_config,
                                             const TrainConfig& train_config,
                                             std::size_t k, Variant variant,
                                             const CvOptions& options = {});

}  // namespace lwt
