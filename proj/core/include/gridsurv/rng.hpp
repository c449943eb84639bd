#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace gridsurv {

// A seeded random stream. Streams derived from the same seed with different
// stream ids are independent; the same (seed, stream) always replays the
// same sequence on a given standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    double u = 0.0;
    do {
      u = uniform_(engine_);
    } while (u <= 0.0);
    return u;
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace gridsurv
