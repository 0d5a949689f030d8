#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace resample_lab {

// A reproducible source of randomness identified by (seed, stream id).
//
// Two streams constructed from the same pair produce the same sequence of
// draws. Streams with different ids are seeded through std::seed_seq so their
// sequences are statistically independent. A stream is cheap to construct, so
// parallel code creates one per replicate instead of sharing one.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Uniform on (0, 1]. Built from a 53-bit draw on [0, 1) mapped by u -> 1 - u,
  // so exactly 0 can never be returned.
  double uniform();

  // Standard normal draw.
  double normal();

  // Fresh stream with id `stream_id() + offset`; the rule used for
  // replicate r of a Monte Carlo experiment.
  RandomStream offset(std::uint64_t offset) const;

  // Fresh stream whose id is a hash of (stream_id(), key). Used to carve
  // disjoint families of streams, e.g. propagation vs. resampling at step k.
  RandomStream derive(std::uint64_t key) const;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// `count` i.i.d. uniforms on (0, 1], consumed from `stream`.
std::vector<double> uniform_draws(RandomStream& stream, std::size_t count);

}  // namespace resample_lab
