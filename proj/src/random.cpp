#include "gpts/random.hpp"

#include <stdexcept>

namespace gpts {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t RandomStream::derive_seed(std::uint64_t root, std::string_view tag) {
  return mix64(mix64(root) ^ hash_tag(tag));
}

RandomStream RandomStream::derive(std::uint64_t root, std::string_view tag) {
  return RandomStream(derive_seed(root, tag));
}

Eigen::VectorXd RandomStream::normals(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal_(engine_);
  return z;
}

int RandomStream::categorical(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() == 0) throw std::invalid_argument("categorical: no weights");
  const double total = weights.sum();
  const double u = uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Round-off can leave u == total; return the last index with positive mass.
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
    if (weights[i] > 0.0) return static_cast<int>(i);
  return static_cast<int>(weights.size() - 1);
}

}  // namespace gpts
