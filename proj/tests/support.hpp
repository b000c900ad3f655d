#pragma once

#include <cstdint>
#include <random>

#include <doctest.h>

#include "mocalc/matcore.hpp"

namespace testing {

using mocalc::cplx;
using mocalc::ComplexMatrix;

// Seeded draws for property tests. Every suite names its seed so failures
// reproduce exactly.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  cplx complex(double re_lo, double re_hi, double im_half) {
    return {uniform(re_lo, re_hi), uniform(-im_half, im_half)};
  }

  /// V diag(values) V^{-1} with V a well-conditioned perturbation of I.
  ComplexMatrix with_spectrum(const mocalc::ComplexVector& values, double mix = 0.3) {
    const auto n = values.size();
    ComplexMatrix v = ComplexMatrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) v(i, j) = complex(-mix, mix, mix);
    return v * values.asDiagonal() * v.inverse();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline ComplexMatrix mat(std::initializer_list<std::initializer_list<cplx>> rows) {
  ComplexMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (const cplx& v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return mocalc::max_norm(a - b) / std::max(1.0, mocalc::max_norm(b));
}

}  // namespace testing
