// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/common.hpp"

namespace hamdlr {

// Canonical Poisson tensor J = [[0, I], [-I, 0]] acting on split-layout vectors [q; p].
// Never materialized.
class PoissonTensor {
 public:
  explicit PoissonTensor(Index half_dim);
  Index half_dim() const { return n_; }
  Mat apply(const Mat &x, bool transpose = false) const;
  // x * J (or x * J^T): acts on the columns of x.
  Mat apply_right(const Mat &x, bool transpose = false) const;
  Mat dense() const;

 private:
  Index n_;
};

// J x (J^T x when transpose) for any x with an even number of rows.
Mat poisson_apply(const Mat &x, bool transpose = false);
// x J (x J^T when transpose) for any x with an even number of columns.
Mat poisson_apply_right(const Mat &x, bool transpose = false);
Mat poisson_matrix(Index half_dim);
SpMat poisson_sparse(Index half_dim);

// 2N x 2n matrix with orthonormal columns spanning a symplectic subspace; pair j sits in
// columns j and n + j. Every distinct basis value carries a fresh id, which operators
// built for it record.
class OrthosymplecticBasis {
 public:
  OrthosymplecticBasis() = default;
  explicit OrthosymplecticBasis(Mat cols);

  const Mat &cols() const { return cols_; }
  Index full_dim() const { return cols_.rows(); }
  Index half_rank() const { return cols_.cols() / 2; }
  Index rank() const { return cols_.cols(); }
  std::uint64_t id() const { return id_; }

  double orthogonality_defect() const;   // ||U^T U - I||_F
  double symplecticity_defect() const;   // ||U^T J U - J||_F
  // Throws StructureViolation if either defect exceeds tol.
  void check(double tol = 1e-12) const;

  static OrthosymplecticBasis identity(Index half_dim);

 private:
  Mat cols_;
  std::uint64_t id_ = 0;
};

// A holds k pairs (a_i, b_i) in split layout: columns [a_1..a_k | b_1..b_k].
OrthosymplecticBasis symplectic_gram_schmidt(const Mat &A, bool reorthogonalize = true);

struct ComplexSvdBasis {
  OrthosymplecticBasis basis;
  Vec singular_values;
};

ComplexSvdBasis complex_svd_basis(const Mat &S, Index half_rank);

// S(Z) = Z Z^T + J^T Z Z^T J.
Mat gram_operator(const Mat &Z);

struct PVLFactorization {
  Mat q_factor;  // 2n x 2n, orthogonal and symplectic
  Vec diag;      // D_n, nonincreasing
  Mat reconstruct() const;
  Mat inverse() const;
  Index half_dim() const { return diag.size(); }
};

PVLFactorization pvl_factorize(const Mat &S);

struct EpsilonRegularization {
  Mat s_eps;
  Mat s_eps_inv;
  Vec diag_eps;
  Index m_eps = 0;
};

EpsilonRegularization epsilon_regularize(const PVLFactorization &f, double eps);

// Default threshold: 1e-8 * ||S||_2 (the largest PVL entry).
double default_epsilon(const PVLFactorization &f, double relative = 1e-8);

}  // namespace hamdlr
