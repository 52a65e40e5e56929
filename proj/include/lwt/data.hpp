#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lwt {

enum class WordLabel : std::uint8_t { hello, help_me, thank_you, stop, yes };

inline constexpr std::size_t kWordCount = 5;
inline constexpr std::array<WordLabel, kWordCount> kAllWords{
    WordLabel::hello, WordLabel::help_me, WordLabel::thank_you,
    WordLabel::stop, WordLabel::yes};

/// Word length group. Index order (short first) is also the order of the
/// length classifier's outputs.
enum class HyperLabel : std::uint8_t { short_word = 0, long_word = 1 };

/// hello, help me, thank you are long; stop, yes are short.
HyperLabel hyper_label(WordLabel label);

/// Words handled by one branch classifier, in branch output order.
std::span<const WordLabel> branch_words(HyperLabel group);
/// Position of `label` within its own branch's outputs.
std::size_t branch_index(WordLabel label);

std::string_view to_string(WordLabel label);
std::string_view to_string(HyperLabel group);
/// Throws ArgumentError for names outside the vocabulary.
WordLabel parse_word_label(std::string_view name);

inline std::size_t ordinal(WordLabel label) {
  return static_cast<std::size_t>(label);
}

/// One recording, channel-major. Samples are stored in single precision.
struct EEGTrial {
  std::string id;
  std::size_t channels = 0;
  std::size_t samples = 0;
  std::vector<float> data;
  WordLabel label = WordLabel::hello;
  double sample_rate_hz = 256.0;

  float at(std::size_t channel, std::size_t t) const {
    return data[channel * samples + t];
  }
  /// Throws FormatError if dimensions or values are inconsistent.
  void validate() const;
};

struct TrialSet {
  std::string name;
  double sample_rate_hz = 256.0;
  std::vector<EEGTrial> trials;
};

struct SynthSpec {
  std::size_t n_per_class = 60;
  std::size_t channels = 64;
  std::size_t samples = 512;
  double sample_rate_hz = 256.0;
  double short_group_hz = 10.0;
  double long_group_hz = 20.0;
  // Indexed by ordinal(WordLabel).
  std::array<double, kWordCount> class_hz{6.0, 8.0, 12.0, 14.0, 16.0};
  double amplitude = 1.0;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;
};

/// Each trial of class c (group g) on channel ch at sample t:
///   a*mg[ch]*sin(2pi*f_g*t/fs + phi1) + a*mc[ch]*sin(2pi*f_c*t/fs + phi2)
///     + sigma*n
/// with per-group and per-class spatial mixing vectors drawn once, per-trial
/// random phases and unit Gaussian noise. Trials are ordered class-major.
TrialSet synthesize_dataset(const SynthSpec& spec);

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kTrialExtension = ".eegt";

/// Binary trial file: "EEGT", u32 channels, u32 samples, then
/// channels*samples float32, all little-endian, channel-major.
std::vector<std::uint8_t> encode_trial(const EEGTrial& trial);
/// `source` names the file in error messages.
EEGTrial decode_trial(std::span<const std::uint8_t> bytes,
                      const std::string& source);

void save_dataset(const TrialSet& set, const std::filesystem::path& directory);
/// Loads every trial or throws; never returns a partial set.
TrialSet load_dataset(const std::filesystem::path& directory);

}  // namespace lwt
