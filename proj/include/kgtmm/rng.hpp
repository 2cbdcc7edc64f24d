#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace kgtmm {

// Role of a random stream. Streams are addressed by
// (master_seed, purpose, client, round, step), so draws are independent of
// the order in which clients execute.
enum class StreamPurpose : std::uint64_t {
  kProblemGen = 1,
  kInitPoint = 2,
  kInitCorrection = 3,
  kLocalStep = 4,
  kOutputSelection = 5,
  kCentralStep = 6,
  kTest = 7,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Counter-addressed stream built on xoshiro256++, seeded by hashing the
// stream address through splitmix64. Self-contained so trajectories are
// bit-reproducible across platforms and standard library versions.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamPurpose purpose,
            std::uint64_t client = 0, std::uint64_t round = 0,
            std::uint64_t step = 0) {
    std::uint64_t h = master_seed;
    detail::splitmix64(h);
    h ^= 0x6a09e667f3bcc909ULL * static_cast<std::uint64_t>(purpose);
    detail::splitmix64(h);
    h ^= 0xbb67ae8584caa73bULL * (client + 1);
    detail::splitmix64(h);
    h ^= 0x3c6ef372fe94f82bULL * (round + 1);
    detail::splitmix64(h);
    h ^= 0xa54ff53a5f1d36f1ULL * (step + 1);
    for (auto& si : s_) si = detail::splitmix64(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Multiply-high mapping; the modulo bias is
  // below 2^-64 per draw, irrelevant at the counts used here.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal via Box-Muller, caching the second value.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

 private:
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kgtmm
