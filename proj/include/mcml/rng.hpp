#pragma once

#include <cstdint>
#include <string>

namespace mcml {

// SplitMix64 stream: output k is mix(key + k * gamma), a pure function of the
// key and the counter, so streams with distinct keys never share state and a
// stream's draws do not depend on how many other streams exist.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform index in {0, ..., n-1} via 128-bit multiply-shift.
  std::size_t uniform_index(std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((static_cast<u128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Disjoint purposes a replication draws randomness for.
enum class StreamRole : std::uint64_t {
  data_generation = 1,
  mc_sampling = 2,
  auxiliary = 3,
};

// Derives the stream dedicated to (seed, replication, role, substream). The key
// is a hash of the full tuple, so adding replications or substreams never
// perturbs the streams of existing ones.
RngStream derive_stream(std::uint64_t seed, std::uint64_t replication, StreamRole role,
                        std::uint64_t substream = 0);

// Human-readable identifier of a derived stream, recorded next to samples.
std::string stream_tag(std::uint64_t seed, std::uint64_t replication, StreamRole role,
                       std::uint64_t substream = 0);

}  // namespace mcml
