#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "lwt/data.hpp"
#include "lwt/errors.hpp"
#include "lwt/random.hpp"

namespace lwt {

namespace {

void validate_spec(const SynthSpec& spec) {
  if (spec.n_per_class == 0 || spec.channels == 0 || spec.samples == 0) {
    throw ArgumentError(
        "synthesis needs at least one trial, channel and sample");
  }
  if (!(spec.sample_rate_hz > 0.0)) {
    throw ArgumentError("sample rate must be positive");
  }
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.amplitude)) {
    throw ArgumentError("noise sigma must be >= 0 and amplitude finite");
  }
  const double nyquist = spec.sample_rate_hz / 2.0;
  auto check = [&](double f, const std::string& what) {
    if (!(f > 0.0) || !(f < nyquist)) {
      throw ArgumentError(what + " frequency " + std::to_string(f) +
                          " Hz is not in (0, " + std::to_string(nyquist) +
                          ") Hz");
    }
  };
  check(spec.short_group_hz, "short group");
  check(spec.long_group_hz, "long group");
  for (WordLabel w : kAllWords) {
    check(spec.class_hz[ordinal(w)], std::string(to_string(w)) + " class");
  }
}

std::vector<double> mixing_vector(std::size_t channels, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> m(channels);
  for (double& v : m) v = dist(rng);
  return m;
}

}  // namespace

TrialSet synthesize_dataset(const SynthSpec& spec) {
  validate_spec(spec);

  auto mixing_rng = make_rng(spec.seed, "synth.mixing");
  std::array<std::vector<double>, 2> group_mix;
  for (auto& m : group_mix) m = mixing_vector(spec.channels, mixing_rng);
  std::array<std::vector<double>, kWordCount> class_mix;
  for (auto& m : class_mix) m = mixing_vector(spec.channels, mixing_rng);

  TrialSet set;
  set.name = "synthetic";
  set.sample_rate_hz = spec.sample_rate_hz;
  set.trials.reserve(kWordCount * spec.n_per_class);

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::uint64_t trial_index = 0;
  for (WordLabel word : kAllWords) {
    const HyperLabel group = hyper_label(word);
    const double f_group = group == HyperLabel::short_word
                               ? spec.short_group_hz
                               : spec.long_group_hz;
    const double f_class = spec.class_hz[ordinal(word)];
    const auto& mg = group_mix[static_cast<std::size_t>(group)];
    const auto& mc = class_mix[ordinal(word)];

    for (std::size_t i = 0; i < spec.n_per_class; ++i, ++trial_index) {
      auto rng = make_rng(spec.seed, "synth.trial", trial_index);
      std::uniform_real_distribution<double> phase(0.0, kTwoPi);
      std::normal_distribution<double> noise(0.0, 1.0);
      const double phi_group = phase(rng);
      const double phi_class = phase(rng);

      EEGTrial trial;
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%03zu", to_string(word).data(), i);
      trial.id = id;
      trial.channels = spec.channels;
      trial.samples = spec.samples;
      trial.label = word;
      trial.sample_rate_hz = spec.sample_rate_hz;
      trial.data.resize(spec.channels * spec.samples);

      for (std::size_t ch = 0; ch < spec.channels; ++ch) {
        for (std::size_t t = 0; t < spec.samples; ++t) {
          const double time = static_cast<double>(t) / spec.sample_rate_hz;
          double x = spec.amplitude * mg[ch] *
                         std::sin(kTwoPi * f_group * time + phi_group) +
                     spec.amplitude * mc[ch] *
                         std::sin(kTwoPi * f_class * time + phi_class);
          // Noise is drawn unconditionally so the stream does not depend on
          // sigma.
          x += spec.noise_sigma * noise(rng);
          trial.data[ch * spec.samples + t] = static_cast<float>(x);
        }
      }
      set.trials.push_back(std::move(trial));
    }
  }
  return set;
}

}  // namespace lwt
