#include "mcml/rng.hpp"

namespace mcml {

namespace {

// Finalizer of SplitMix64 (also MurmurHash3's fmix64).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream derive_stream(std::uint64_t seed, std::uint64_t replication, StreamRole role,
                        std::uint64_t substream) {
  std::uint64_t key = mix64(seed + 0x9e3779b97f4a7c15ULL);
  key = mix64(key ^ (replication + 0xbf58476d1ce4e5b9ULL));
  key = mix64(key ^ (static_cast<std::uint64_t>(role) + 0x94d049bb133111ebULL));
  key = mix64(key ^ (substream + 0xd6e8feb86659fd93ULL));
  return RngStream(key);
}

std::string stream_tag(std::uint64_t seed, std::uint64_t replication, StreamRole role,
                       std::uint64_t substream) {
  const char* role_name = role == StreamRole::data_generation ? "data"
                          : role == StreamRole::mc_sampling   ? "mc"
                                                              : "aux";
  return "seed=" + std::to_string(seed) + "/rep=" + std::to_string(replication) + "/role=" +
         role_name + "/sub=" + std::to_string(substream);
}

}  // namespace mcml
