#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "lwt/data.hpp"
#include "lwt/errors.hpp"
#include "support.hpp"

namespace lwt {
namespace {

TEST(Labels, HyperLabels) {
  EXPECT_EQ(hyper_label(WordLabel::hello), HyperLabel::long_word);
  EXPECT_EQ(hyper_label(WordLabel::help_me), HyperLabel::long_word);
  EXPECT_EQ(hyper_label(WordLabel::thank_you), HyperLabel::long_word);
  EXPECT_EQ(hyper_label(WordLabel::stop), HyperLabel::short_word);
  EXPECT_EQ(hyper_label(WordLabel::yes), HyperLabel::short_word);
  EXPECT_EQ(branch_index(WordLabel::yes), 1u);
  EXPECT_EQ(branch_index(WordLabel::thank_you), 2u);
  for (WordLabel w : kAllWords) {
    EXPECT_EQ(branch_words(hyper_label(w))[branch_index(w)], w);
    EXPECT_EQ(parse_word_label(to_string(w)), w);
  }
  EXPECT_THROW(parse_word_label("goodbye"), ArgumentError);
}

SynthSpec small_spec() {
  SynthSpec s;
  s.n_per_class = 3;
  s.channels = 4;
  s.samples = 512;
  return s;
}

TEST(Synth, ShapeOrderAndIds) {
  const TrialSet set = synthesize_dataset(small_spec());
  ASSERT_EQ(set.trials.size(), 15u);
  EXPECT_EQ(set.trials[0].id, "hello_000");
  EXPECT_EQ(set.trials[14].id, "yes_002");
  EXPECT_EQ(set.trials[14].label, WordLabel::yes);
  for (const EEGTrial& t : set.trials) {
    EXPECT_EQ(t.channels, 4u);
    EXPECT_EQ(t.data.size(), 4u * 512u);
  }
}

TEST(Synth, SeededAndDeterministic) {
  SynthSpec s = small_spec();
  const TrialSet a = synthesize_dataset(s), b = synthesize_dataset(s);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].data, b.trials[i].data);
  }
  s.seed = 1;
  EXPECT_NE(synthesize_dataset(s).trials[0].data, a.trials[0].data);
}

TEST(Synth, SilentWhenAmplitudeAndNoiseZero) {
  SynthSpec s = small_spec();
  s.amplitude = 0.0;
  s.noise_sigma = 0.0;
  for (const EEGTrial& t : synthesize_dataset(s).trials) {
    for (float v : t.data) EXPECT_EQ(v, 0.0f);
  }
}

std::vector<double> magnitude_spectrum(const EEGTrial& t, std::size_t ch) {
  const std::size_t n = t.samples;
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc;
    for (std::size_t i = 0; i < n; ++i) {
      acc += static_cast<double>(t.at(ch, i)) *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / double(n));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

TEST(Synth, NoiselessSpectrumPeaksAtGroupAndClass) {
  SynthSpec s = small_spec();
  s.noise_sigma = 0.0;
  const TrialSet set = synthesize_dataset(s);
  const double bin_hz = s.sample_rate_hz / double(s.samples);
  for (const EEGTrial& t : {set.trials[0], set.trials[10]}) {
    const double group_hz = hyper_label(t.label) == HyperLabel::short_word
                                ? s.short_group_hz
                                : s.long_group_hz;
    const std::size_t g = std::size_t(group_hz / bin_hz + 0.5);
    const std::size_t c = std::size_t(s.class_hz[ordinal(t.label)] / bin_hz + 0.5);
    for (std::size_t ch = 0; ch < t.channels; ++ch) {
      const auto mag = magnitude_spectrum(t, ch);
      for (std::size_t k = 0; k < mag.size(); ++k) {
        if (k == g || k == c) continue;
        EXPECT_LT(mag[k], 1e-3 * std::max(mag[g], mag[c])) << "bin " << k;
      }
    }
  }
}

TEST(Synth, RejectsInvalidSpec) {
  SynthSpec s = small_spec();
  s.sample_rate_hz = 30.0;
  EXPECT_THROW(synthesize_dataset(s), ArgumentError);
  s = small_spec();
  s.noise_sigma = -1.0;
  EXPECT_THROW(synthesize_dataset(s), ArgumentError);
}

TEST(Io, TrialRoundTrip) {
  const EEGTrial t = synthesize_dataset(small_spec()).trials[4];
  const auto bytes = encode_trial(t);
  EXPECT_EQ(bytes.size(), 12u + 4u * t.data.size());
  const EEGTrial back = decode_trial(bytes, "mem");
  EXPECT_EQ(back.data, t.data);
  EXPECT_EQ(back.channels, t.channels);
  EXPECT_EQ(back.samples, t.samples);
}

TEST(Io, TrialCorruptionIsFormatError) {
  const auto good = encode_trial(synthesize_dataset(small_spec()).trials[0]);
  auto bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_trial(bad, "m"), FormatError);
  EXPECT_THROW(decode_trial(std::span(good).first(good.size() - 3), "m"), FormatError);
  EXPECT_THROW(decode_trial(std::span(good).first(6), "m"), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_trial(bad, "m"), FormatError);
}

TEST(Io, DatasetRoundTripIsExactAndStable) {
  const TrialSet set = synthesize_dataset(small_spec());
  test::TempDir dir("data");
  save_dataset(set, dir / "a");
  const TrialSet back = load_dataset(dir / "a");
  ASSERT_EQ(back.trials.size(), set.trials.size());
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    EXPECT_EQ(back.trials[i].id, set.trials[i].id);
    EXPECT_EQ(back.trials[i].label, set.trials[i].label);
    EXPECT_EQ(back.trials[i].data, set.trials[i].data);
  }
  save_dataset(back, dir / "b");
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    EXPECT_EQ(test::read_bytes(entry.path()), test::read_bytes(dir / "b" / name))
        << name;
  }
}

TEST(Io, DatasetErrorsAreCategorized) {
  const TrialSet set = synthesize_dataset(small_spec());
  test::TempDir dir("data_err");
  EXPECT_THROW(load_dataset(dir / "missing"), IoError);
  save_dataset(set, dir.path());
  std::filesystem::remove(dir / "stop_001.eegt");
  try {
    load_dataset(dir.path());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("stop_001"), std::string::npos);
  }
  test::write_bytes(dir / std::string(kManifestFile), {'{', 'x'});
  EXPECT_THROW(load_dataset(dir.path()), FormatError);
}

}  // namespace
}  // namespace lwt
