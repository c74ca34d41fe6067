// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/models.hpp"
#include "hamdlr/symplectic.hpp"

namespace hamdlr {

// Reduced right-hand side z -> J_2n U^T grad H(U z) of a polynomial model, with all
// N-sized work done once per basis. Terms of degree >= 2 are stored as dense
// 2n x (2n)^q tensors when 2n <= 8 and in factored form otherwise.
class TensorialOperator {
 public:
  static constexpr Index kDenseRankLimit = 8;

  TensorialOperator() = default;
  static TensorialOperator precompute(const HamiltonianModel &model, const OrthosymplecticBasis &U);

  Index rank() const { return r_; }
  Index degree() const { return q_; }
  Index term_count() const { return static_cast<Index>(terms_.size()); }
  std::uint64_t basis_id() const { return id_; }
  bool built_for(const OrthosymplecticBasis &U) const { return id_ != 0 && id_ == U.id(); }

  // weights: terms x p matrix from PolynomialStructure::weights.
  Mat eval_rhs(std::uint64_t basis_id, const Mat &Z, const Mat &weights) const;
  Mat eval_jacobian(std::uint64_t basis_id, const Vec &z, const Vec &w) const;

  // Unchecked column kernels used inside Newton loops.
  Vec eval_column(const Vec &z, const Vec &w) const;
  Mat jacobian_column(const Vec &z, const Vec &w) const;

 private:
  struct Term {
    Index q = 0;
    std::vector<Mat> factors;  // A_i U, m x 2n
    Mat out;                   // J_2n U^T B, 2n x m
    Mat dense;                 // 2n x (2n)^q, empty when factored
  };
  void check(std::uint64_t basis_id) const;

  std::vector<Term> terms_;
  Index r_ = 0, q_ = 0;
  std::uint64_t id_ = 0;
};

// Direct-path reference quantities.
Mat direct_reduced_rhs(const HamiltonianModel &model, const OrthosymplecticBasis &U, const Mat &Z,
                       const ParameterSet &params);
Mat direct_reduced_jacobian(const HamiltonianModel &model, const OrthosymplecticBasis &U, const Vec &z,
                            const Vec &eta);

}  // namespace hamdlr
