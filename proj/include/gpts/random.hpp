#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string_view>

namespace gpts {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Stable 64-bit FNV-1a hash of a stream tag.
std::uint64_t hash_tag(std::string_view tag);

/// A seeded pseudo-random stream. Streams are derived from a root seed and a
/// tag so that the environment draw, the noise sequence, and every agent in a
/// roster consume disjoint randomness.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Child stream keyed by `tag`; deterministic in (seed, tag).
  static RandomStream derive(std::uint64_t root, std::string_view tag);
  static std::uint64_t derive_seed(std::uint64_t root, std::string_view tag);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Eigen::VectorXd normals(Eigen::Index n);

  /// Index drawn with probability proportional to `weights` (inverse CDF).
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gpts
