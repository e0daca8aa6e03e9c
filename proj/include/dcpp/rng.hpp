#pragma once

#include <cstdint>
#include <random>

namespace dcpp {

// Reproducible random stream addressed by (seed, stream_id).  Child streams
// derived by index are statistically independent of the parent and of each
// other, which lets Monte Carlo drivers hand one stream to every trial and
// stay deterministic for any worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  RngStream derive(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform01();
  double uniform(double lo, double hi);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace dcpp
