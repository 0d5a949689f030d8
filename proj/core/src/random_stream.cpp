#include "resample_lab/random_stream.hpp"

namespace resample_lab {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RandomStream::uniform() {
  constexpr double kScale = 0x1.0p-53;
  const double u = static_cast<double>(engine_() >> 11) * kScale;  // [0, 1)
  return 1.0 - u;
}

double RandomStream::normal() { return normal_(engine_); }

RandomStream RandomStream::offset(std::uint64_t offset) const {
  return RandomStream(seed_, stream_id_ + offset);
}

RandomStream RandomStream::derive(std::uint64_t key) const {
  return RandomStream(seed_, mix(stream_id_ ^ mix(key)));
}

std::vector<double> uniform_draws(RandomStream& stream, std::size_t count) {
  std::vector<double> out(count);
  for (auto& u : out) u = stream.uniform();
  return out;
}

}  // namespace resample_lab
