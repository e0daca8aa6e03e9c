#include "dcpp/rng.hpp"

#include <stdexcept>

namespace dcpp {

namespace {

// splitmix64 step; used to spread (seed, stream_id) into engine seed material.
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s ^= stream_id * 0xda942042e4dd58b5ULL;
  std::uint64_t b = splitmix64(s);
  return a ^ b;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix(seed, stream_id)) {}

RngStream RngStream::derive(std::uint64_t index) const {
  // Children live in a disjoint id space obtained by folding the parent id
  // through splitmix64 before adding the index.
  std::uint64_t s = stream_id_ ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t folded = splitmix64(s);
  return RngStream(seed_, folded + index);
}

double RngStream::uniform01() {
  // 53-bit mantissa draw centered away from 0 and 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw std::invalid_argument("RngStream::uniform: need lo < hi");
  }
  return lo + (hi - lo) * uniform01();
}

}  // namespace dcpp
