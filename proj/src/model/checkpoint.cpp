#include <bit>
#include <fstream>
#include <iterator>

#include "lwt/config_json.hpp"
#include "lwt/errors.hpp"
#include "lwt/model.hpp"

namespace lwt {

using nlohmann::ordered_json;

namespace {

constexpr std::array<std::uint8_t, 4> kCheckpointMagic{'L', 'W', 'M', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const HierarchicalModel& model,
                                            const std::string& variant) {
  ordered_json manifest;
  manifest["config"] = model.config;
  manifest["variant"] = variant;
  manifest["params"] = ordered_json::array();
  for (const auto& p : model.parameters()) {
    manifest["params"].push_back({{"name", p.name}, {"shape", p.value->shape()}});
  }
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : model.parameters()) {
    for (double v : p.value->values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             const std::string& source) {
  if (bytes.size() < 8) {
    throw FormatError(source + ": truncated checkpoint header");
  }
  if (!std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(),
                  bytes.begin())) {
    throw FormatError(source + ": bad magic, expected \"LWM1\"");
  }
  const std::size_t manifest_len = get_le(bytes.data() + 4, 4);
  if (bytes.size() < 8 + manifest_len) {
    throw FormatError(source + ": truncated checkpoint manifest");
  }

  Checkpoint ckpt;
  std::vector<std::pair<std::string, Shape>> entries;
  try {
    const auto manifest =
        ordered_json::parse(bytes.begin() + 8, bytes.begin() + 8 + manifest_len);
    ckpt.model = allocate_model(manifest.at("config").get<ModelConfig>());
    ckpt.variant = manifest.at("variant").get<std::string>();
    for (const auto& p : manifest.at("params")) {
      entries.emplace_back(p.at("name").get<std::string>(),
                           p.at("shape").get<Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source + ": bad checkpoint manifest: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(source + ": checkpoint config rejected: " + e.what());
  }

  auto params = ckpt.model.parameters();
  if (entries.size() != params.size()) {
    throw FormatError(source + ": checkpoint lists " +
                      std::to_string(entries.size()) + " parameters, model has " +
                      std::to_string(params.size()));
  }
  std::size_t offset = 8 + manifest_len;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (entries[i].first != params[i].name ||
        entries[i].second != params[i].value->shape()) {
      throw FormatError(source + ": parameter " + std::to_string(i) + " is " +
                        entries[i].first + shape_to_string(entries[i].second) +
                        ", config implies " + params[i].name +
                        shape_to_string(params[i].value->shape()));
    }
    const std::size_t need = 8 * params[i].value->size();
    if (bytes.size() < offset + need) {
      throw FormatError(source + ": truncated parameter data at " +
                        params[i].name);
    }
    for (double& v : params[i].value->values()) {
      v = std::bit_cast<double>(get_le(bytes.data() + offset, 8));
      offset += 8;
    }
    if (!params[i].value->all_finite()) {
      throw FormatError(source + ": non-finite values in " + params[i].name);
    }
  }
  if (offset != bytes.size()) {
    throw FormatError(source + ": " + std::to_string(bytes.size() - offset) +
                      " trailing bytes");
  }
  return ckpt;
}

void save_checkpoint(const HierarchicalModel& model, const std::string& variant,
                     const std::string& path) {
  const auto bytes = encode_checkpoint(model, variant);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes, path);
}

}  // namespace lwt
