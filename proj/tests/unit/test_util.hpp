// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/symplectic.hpp"

#include <random>

namespace hamdlr::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return dist_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Mat matrix(Index r, Index c)
  {
    Mat m(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }
  Vec vector(Index n) { return matrix(n, 1).col(0); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

inline OrthosymplecticBasis random_basis(Rng &rng, Index N, Index n)
{
  return symplectic_gram_schmidt(rng.matrix(2 * N, 2 * n));
}

inline double rel(const Mat &a, const Mat &b)
{
  const double s = std::max(a.norm(), b.norm());
  return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double> &h, const std::vector<double> &err)
{
  const Index n = static_cast<Index>(h.size());
  Vec x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    x(i) = std::log(h[i]);
    y(i) = std::log(err[i]);
  }
  const double xm = x.mean(), ym = y.mean();
  return ((x.array() - xm) * (y.array() - ym)).sum() / ((x.array() - xm).square().sum());
}

}  // namespace hamdlr::testing
