#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace amix {

/// Reproducible random stream keyed by (seed, stream id). Draw helpers avoid
/// the implementation-defined std:: distributions so sequences match across
/// standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1).
  double uniform();
  /// Uniform on [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0,n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller).
  double normal();

  /// Independent stream derived from this stream's key and `id`; does not
  /// consume draws from this stream.
  RngStream substream(std::uint64_t id) const;

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::iter_swap(first + static_cast<std::ptrdiff_t>(i - 1), first + static_cast<std::ptrdiff_t>(j));
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash, used to key streams by method name.
std::uint64_t stable_hash(std::string_view s);

}  // namespace amix
