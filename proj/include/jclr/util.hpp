#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace jclr {

/// Streams all arguments into one string; used for error messages.
template <class... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries the line number where known.
struct ParseError : Error {
  using Error::Error;
};

/// Structurally invalid data (dangling ids, shape mismatches, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Missing or unreadable file.
struct IoError : Error {
  using Error::Error;
};

/// Bad configuration document or override.
struct ConfigError : Error {
  using Error::Error;
};

/// Non-finite loss or other numerical failure.
struct NumericError : Error {
  using Error::Error;
};

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits; implementation-pinned so
/// seeded streams replay identically across platforms.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform index in [0, n); n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
  for (;;) {
    const std::uint64_t x = rng();
    if (x < bound) return static_cast<std::size_t>(x % n);
  }
}

/// CRC-32 (IEEE 802.3 polynomial, reflected) over a byte range.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

/// FNV-1a 64-bit hash, used for config fingerprints.
std::uint64_t fnv1a(const std::string& s);

/// Derives an independent substream seed from a base seed and stream tags.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  h = (h ^ a) * 0xbf58476d1ce4e5b9ull;
  h = (h ^ (h >> 31) ^ b) * 0x94d049bb133111ebull;
  return h ^ (h >> 29);
}

}  // namespace jclr
