#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lwt {

/// Seed for one purpose of a run, derived from the master seed so that each
/// consumer (initialization, shuffling, synthesis, ...) can be reseeded
/// independently. Purposes in use: "init", "shuffle", "split",
/// "synth.mixing", "synth.trial".
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t index = 0);

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view purpose,
                                std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, purpose, index));
}

}  // namespace lwt
