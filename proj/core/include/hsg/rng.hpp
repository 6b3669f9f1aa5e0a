#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hsg {

// Stateless stream derivation: every sampling site derives its own generator
// from (run seed, structured key parts). Reruns and crash-resumed runs hit the
// same streams because no global RNG state is carried between calls.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_part(std::uint64_t state, std::uint64_t part) {
  return splitmix64(state ^ splitmix64(part));
}

inline std::uint64_t mix_part(std::uint64_t state, std::string_view part) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the bytes
  for (unsigned char c : part) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_part(state, h);
}

inline std::uint64_t stream_key(std::uint64_t seed) { return splitmix64(seed); }

template <typename Part, typename... Rest>
std::uint64_t stream_key(std::uint64_t seed, Part part, Rest... rest) {
  return stream_key(mix_part(seed, part), rest...);
}

/// mt19937_64 seeded from a derived stream key.
template <typename... Parts>
std::mt19937_64 make_stream(std::uint64_t seed, Parts... parts) {
  return std::mt19937_64(stream_key(seed, parts...));
}

}  // namespace hsg
