#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace manet {

enum class StreamLabel : std::uint8_t { Mobility, Traffic, MacJitter, Protocol };

std::string_view to_string(StreamLabel label);

/// Seeded pseudo-random stream, one per concern.
///
/// Generator: std::mt19937_64 (fully specified by the standard, so the raw
/// 64-bit sequence is identical on every platform), seeded with
/// splitmix64(seed ^ fnv1a64(label name)). Real draws use the top 53 bits
/// of each output; integer draws use rejection sampling. No standard
/// library distribution is involved, since their algorithms are
/// implementation-defined. Golden traces depend on this exact recipe.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamLabel label);

  std::uint64_t seed() const { return seed_; }
  StreamLabel label() const { return label_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double next_unit();
  /// Uniform in [lo, hi). Throws std::invalid_argument unless lo < hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). Throws std::invalid_argument if n == 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_;
  StreamLabel label_;
  std::mt19937_64 engine_;
};

inline double draw_uniform(RandomStream& stream, double lo, double hi) { return stream.uniform(lo, hi); }

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace manet
