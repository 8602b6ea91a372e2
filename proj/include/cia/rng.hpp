/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_RNG_HPP
#define CIA_RNG_HPP

#include <cstdint>
#include <random>

namespace cia {

/// Seeded generator with hand-rolled distributions. std::mt19937_64 output
/// is pinned by the standard, but the standard distributions are not; owning
/// the sampling algorithms keeps generated logs identical for one seed no
/// matter which standard library the build uses.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; boosted for shape < 1.
  double gamma(double shape);

  double beta(double a, double b);

  /// Beta parameterized by mean in (0,1) and concentration > 0.
  double beta_mean_conc(double mean, double concentration) {
    return beta(mean * concentration, (1.0 - mean) * concentration);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace cia

#endif  // CIA_RNG_HPP
