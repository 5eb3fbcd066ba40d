#include "manet/random.hpp"

#include <cmath>
#include <stdexcept>

namespace manet {

std::string_view to_string(StreamLabel label) {
  switch (label) {
    case StreamLabel::Mobility: return "mobility";
    case StreamLabel::Traffic: return "traffic";
    case StreamLabel::MacJitter: return "mac-jitter";
    case StreamLabel::Protocol: return "protocol";
  }
  return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, StreamLabel label)
    : seed_(seed), label_(label), engine_(splitmix64(seed ^ fnv1a64(to_string(label)))) {}

double RandomStream::next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform draw requires lo < hi");
  double v = lo + (hi - lo) * next_unit();
  // lo + (hi - lo) * u can round up to hi when the range is tiny.
  if (v >= hi) v = std::nextafter(hi, lo);
  if (v < lo) v = lo;
  return v;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("integer draw requires n > 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace manet
