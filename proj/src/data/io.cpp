#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>
#include <set>

#include "lwt/data.hpp"
#include "lwt/errors.hpp"

namespace lwt {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::uint8_t, 4> kTrialMagic{0x45, 0x45, 0x47, 0x54};
constexpr std::size_t kHeaderBytes = 12;
constexpr int kManifestVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void EEGTrial::validate() const {
  if (channels == 0 || samples == 0) {
    throw FormatError("trial '" + id + "' has an empty dimension");
  }
  if (data.size() != channels * samples) {
    throw FormatError("trial '" + id + "' holds " +
                      std::to_string(data.size()) + " samples, header says " +
                      std::to_string(channels) + "x" + std::to_string(samples));
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw FormatError("trial '" + id + "' contains a non-finite sample");
    }
  }
  if (!(sample_rate_hz > 0.0)) {
    throw FormatError("trial '" + id + "' has a non-positive sample rate");
  }
}

std::vector<std::uint8_t> encode_trial(const EEGTrial& trial) {
  trial.validate();
  std::vector<std::uint8_t> out(kTrialMagic.begin(), kTrialMagic.end());
  out.reserve(kHeaderBytes + 4 * trial.data.size());
  put_u32(out, static_cast<std::uint32_t>(trial.channels));
  put_u32(out, static_cast<std::uint32_t>(trial.samples));
  for (float v : trial.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

EEGTrial decode_trial(std::span<const std::uint8_t> bytes,
                      const std::string& source) {
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(source + ": truncated header (" +
                      std::to_string(bytes.size()) + " bytes)");
  }
  if (!std::equal(kTrialMagic.begin(), kTrialMagic.end(), bytes.begin())) {
    throw FormatError(source + ": bad magic, expected \"EEGT\"");
  }
  EEGTrial trial;
  trial.channels = get_u32(bytes.data() + 4);
  trial.samples = get_u32(bytes.data() + 8);
  const std::size_t count = trial.channels * trial.samples;
  const std::size_t expected = kHeaderBytes + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError(source + ": truncated, " + std::to_string(bytes.size()) +
                      " bytes for a " + std::to_string(expected) +
                      "-byte trial");
  }
  if (bytes.size() > expected) {
    throw FormatError(source + ": " + std::to_string(bytes.size() - expected) +
                      " trailing bytes");
  }
  trial.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    trial.data[i] =
        std::bit_cast<float>(get_u32(bytes.data() + kHeaderBytes + 4 * i));
  }
  return trial;
}

void save_dataset(const TrialSet& set, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) {
    throw IoError("cannot create " + directory.string() + ": " + ec.message());
  }

  ordered_json manifest;
  manifest["format"] = "EEGT-set";
  manifest["version"] = kManifestVersion;
  manifest["name"] = set.name;
  manifest["sample_rate_hz"] = set.sample_rate_hz;
  manifest["labels"] = ordered_json::array();
  for (WordLabel w : kAllWords) manifest["labels"].push_back(to_string(w));
  manifest["trials"] = ordered_json::array();

  std::set<std::string> ids;
  for (const EEGTrial& trial : set.trials) {
    if (!ids.insert(trial.id).second) {
      throw ArgumentError("duplicate trial id '" + trial.id + "'");
    }
    const std::string file = trial.id + std::string(kTrialExtension);
    write_file(directory / file, encode_trial(trial));
    manifest["trials"].push_back(
        {{"id", trial.id}, {"file", file}, {"label", to_string(trial.label)}});
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file(directory / kManifestFile,
             {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

TrialSet load_dataset(const fs::path& directory) {
  const fs::path manifest_path = directory / kManifestFile;
  if (!fs::exists(manifest_path)) {
    throw IoError("no dataset manifest at " + manifest_path.string());
  }
  const auto raw = read_file(manifest_path);
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  TrialSet set;
  try {
    if (manifest.at("format") != "EEGT-set") {
      throw FormatError(manifest_path.string() + ": not an EEGT-set manifest");
    }
    if (manifest.at("version") != kManifestVersion) {
      throw FormatError(manifest_path.string() + ": unsupported version");
    }
    set.name = manifest.at("name").get<std::string>();
    set.sample_rate_hz = manifest.at("sample_rate_hz").get<double>();
    const auto& labels = manifest.at("labels");
    if (labels.size() != kWordCount) {
      throw FormatError(manifest_path.string() + ": label vocabulary size " +
                        std::to_string(labels.size()) + ", expected 5");
    }
    for (std::size_t i = 0; i < kWordCount; ++i) {
      if (labels[i] != to_string(kAllWords[i])) {
        throw FormatError(manifest_path.string() +
                          ": label vocabulary differs at position " +
                          std::to_string(i));
      }
    }
    for (const auto& entry : manifest.at("trials")) {
      const auto id = entry.at("id").get<std::string>();
      const auto file = entry.at("file").get<std::string>();
      const fs::path path = directory / file;
      if (!fs::exists(path)) {
        throw FormatError(manifest_path.string() +
                          ": missing trial file for id '" + id + "' (" +
                          file + ")");
      }
      EEGTrial trial = decode_trial(read_file(path), path.string());
      trial.id = id;
      try {
        trial.label = parse_word_label(entry.at("label").get<std::string>());
      } catch (const ArgumentError& e) {
        throw FormatError(manifest_path.string() + ": trial '" + id +
                          "': " + e.what());
      }
      trial.sample_rate_hz = set.sample_rate_hz;
      trial.validate();
      set.trials.push_back(std::move(trial));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return set;
}

}  // namespace lwt
