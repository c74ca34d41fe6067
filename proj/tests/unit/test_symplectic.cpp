// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/symplectic.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace hamdlr;
using hamdlr::testing::Rng;

namespace {

Vec unit(Index n, Index i)
{
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

Vec sorted_eigenvalues(const Mat &S)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("poisson_apply on canonical vectors")
{
  Mat x(2, 1);
  x << 1, 0;
  CHECK(poisson_apply(x)(0, 0) == 0.0);
  CHECK(poisson_apply(x)(1, 0) == -1.0);
  Mat y(2, 1);
  y << 0, 1;
  const Mat jt = poisson_apply(y, true);
  CHECK(jt(0, 0) == -1.0);
  CHECK(jt(1, 0) == 0.0);
}

TEST_CASE("poisson_apply squares to minus identity and is an isometry")
{
  Rng rng(1);
  const Mat x = rng.matrix(14, 5);
  CHECK((poisson_apply(poisson_apply(x)) + x).norm() == 0.0);
  CHECK(poisson_apply(x).norm() == doctest::Approx(x.norm()).epsilon(1e-15));
  CHECK((poisson_apply(x) - poisson_matrix(7) * x).norm() == 0.0);
  CHECK((poisson_apply(x, true) - poisson_matrix(7).transpose() * x).norm() == 0.0);
  const Mat w = rng.matrix(3, 8);
  CHECK((poisson_apply_right(w) - w * poisson_matrix(4)).norm() == 0.0);
  CHECK((poisson_apply_right(w, true) - w * poisson_matrix(4).transpose()).norm() == 0.0);
  CHECK((Mat(poisson_sparse(7)) - poisson_matrix(7)).norm() == 0.0);
}

TEST_CASE("poisson_apply rejects odd row counts")
{
  Mat x(3, 1);
  x.setOnes();
  try {
    poisson_apply(x);
    FAIL("expected a dimension error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDimension);
  }
  CHECK_THROWS_AS(PoissonTensor(3).apply(Mat::Ones(4, 1)), Error);
}

TEST_CASE("symplectic Gram-Schmidt on canonical and scaled columns")
{
  const Index N = 5;
  Mat A(2 * N, 2);
  A.col(0) = unit(2 * N, 0);
  A.col(1) = unit(2 * N, N);
  const auto U = symplectic_gram_schmidt(A);
  CHECK((U.cols() - A).norm() == 0.0);

  Mat B = A;
  B.col(0) *= 2.0;
  B.col(1) *= 3.0;
  CHECK((symplectic_gram_schmidt(B).cols() - A).norm() <= 1e-15);
}

TEST_CASE("symplectic Gram-Schmidt on random input is orthosymplectic and idempotent")
{
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat A = rng.matrix(20, 4);
    const auto U = symplectic_gram_schmidt(A);
    CHECK(U.orthogonality_defect() <= 1e-12);
    CHECK(U.symplecticity_defect() <= 1e-12);
    // span(U) holds the leading columns, and all of A when span(A) is J-invariant
    const Mat lead = A.leftCols(2);
    CHECK((lead - U.cols() * (U.cols().transpose() * lead)).norm() <= 1e-12 * A.norm());
    Mat B(20, 4);
    B << lead, poisson_apply(lead, true);
    Mat C(20, 4);
    C << B.col(0) + B.col(1), B.col(1), B.col(2) - 0.5 * B.col(3), B.col(3);
    const auto V = symplectic_gram_schmidt(C);
    CHECK((C - V.cols() * (V.cols().transpose() * C)).norm() <= 1e-12 * C.norm());
    const auto U2 = symplectic_gram_schmidt(U.cols());
    CHECK((U2.cols() - U.cols()).norm() <= 1e-13);
  }
}

TEST_CASE("symplectic Gram-Schmidt reports degenerate directions")
{
  Rng rng(3);
  const Index N = 6;
  Mat A = rng.matrix(2 * N, 4);
  // Second pair lies in the span of the first pair.
  A.col(1) = 2.0 * A.col(0);
  A.col(3) = -A.col(0);
  try {
    symplectic_gram_schmidt(A);
    FAIL("expected a degenerate direction");
  } catch (const DegenerateDirection &e) {
    CHECK(e.code() == ErrorCode::kDegenerateDirection);
    CHECK(e.pair() == 1);
  }
}

TEST_CASE("symplectic Gram-Schmidt falls back to the partner column")
{
  Rng rng(4);
  const Index N = 6;
  Mat A = rng.matrix(2 * N, 4);
  A.col(1) = A.col(0);  // leading column of pair 1 collapses, partner is generic
  const auto U = symplectic_gram_schmidt(A);
  CHECK(U.orthogonality_defect() <= 1e-12);
  CHECK(U.symplecticity_defect() <= 1e-12);
}

TEST_CASE("complex SVD basis")
{
  Rng rng(5);
  SUBCASE("rank-one ensemble")
  {
    const Index N = 8, p = 5;
    const Vec c = rng.vector(2 * N);
    const Mat S = c * Eigen::RowVectorXd::Ones(p);
    const auto b = complex_svd_basis(S, 1);
    CHECK((S - b.basis.cols() * (b.basis.cols().transpose() * S)).norm() <= 1e-12 * S.norm());
  }
  SUBCASE("unit direction")
  {
    const Index N = 4, p = 3;
    Mat S = Mat::Zero(2 * N, p);
    S.row(0).setOnes();
    const auto b = complex_svd_basis(S, 1);
    const Mat &U = b.basis.cols();
    CHECK(std::abs(U(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(U(N, 1)) == doctest::Approx(1.0));
    CHECK(U.col(0).norm() == doctest::Approx(1.0));
  }
  SUBCASE("projection error equals the discarded complex spectrum")
  {
    const Index N = 10, p = 8;
    const Mat S = rng.matrix(2 * N, p);
    const auto b = complex_svd_basis(S, 3);
    Eigen::MatrixXcd C(N, p);
    C.real() = S.topRows(N);
    C.imag() = S.bottomRows(N);
    Eigen::JacobiSVD<Eigen::MatrixXcd> oracle(C);
    const Vec sv = oracle.singularValues();
    const double tail = std::sqrt(sv.tail(sv.size() - 3).squaredNorm());
    const double proj = (S - b.basis.cols() * (b.basis.cols().transpose() * S)).norm();
    CHECK(std::abs(proj - tail) <= 1e-10);
    CHECK((b.singular_values - sv).norm() <= 1e-10);
    CHECK(b.basis.orthogonality_defect() <= 1e-12);
    CHECK(b.basis.symplecticity_defect() <= 1e-12);
    for (Index i = 1; i < b.singular_values.size(); ++i) CHECK(b.singular_values(i) <= b.singular_values(i - 1));
  }
  SUBCASE("full rank reconstructs")
  {
    const Index N = 6, p = 4;
    const Mat S = rng.matrix(2 * N, p);
    const auto b = complex_svd_basis(S, 4);
    CHECK((S - b.basis.cols() * (b.basis.cols().transpose() * S)).norm() <= 1e-10 * S.norm());
  }
  SUBCASE("range checks")
  {
    CHECK_THROWS_AS(complex_svd_basis(rng.matrix(8, 3), 0), Error);
    CHECK_THROWS_AS(complex_svd_basis(rng.matrix(8, 3), 4), Error);
  }
}

TEST_CASE("Gram operator invariants and null space")
{
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = rng.integer(1, 6), p = rng.integer(1, 12);
    const Mat Z = rng.matrix(2 * n, p);
    const Mat S = gram_operator(Z);
    const double ns = S.norm();
    const Mat J = poisson_matrix(n);
    CHECK((S - S.transpose()).norm() <= 1e-12 * ns);
    CHECK((S * J - J * S.transpose()).norm() <= 1e-12 * ns);
    CHECK(sorted_eigenvalues(S)(0) >= -1e-10 * sorted_eigenvalues(S).maxCoeff());
  }
  // Pair v, J^T v in ker(Z^T).
  const Index n = 4;
  Mat Z = rng.matrix(2 * n, 9);
  const Vec v = rng.vector(2 * n).normalized();
  Mat P(2 * n, 2);
  P.col(0) = v;
  P.col(1) = poisson_apply(Mat(v), true);
  const Mat Qp = P.householderQr().householderQ() * Mat::Identity(2 * n, 2);
  Z -= Qp * (Qp.transpose() * Z);
  const Mat S = gram_operator(Z);
  const double s2 = sorted_eigenvalues(S).maxCoeff();
  CHECK((S * P.col(0)).norm() <= 1e-10 * s2);
  CHECK((S * P.col(1)).norm() <= 1e-10 * s2);
}

TEST_CASE("PVL of the identity and of a block diagonal")
{
  const auto f = pvl_factorize(Mat::Identity(6, 6));
  CHECK((f.q_factor - Mat::Identity(6, 6)).norm() <= 1e-15);
  CHECK((f.diag - Vec::Ones(3)).norm() <= 1e-15);

  Mat S = Mat::Zero(4, 4);
  S(0, 0) = S(2, 2) = 3.0;
  S(1, 1) = S(3, 3) = 1.0;
  const auto g = pvl_factorize(S);
  CHECK(g.diag(0) == doctest::Approx(3.0));
  CHECK(g.diag(1) == doctest::Approx(1.0));
  CHECK((g.reconstruct() - S).norm() <= 1e-12);
}

TEST_CASE("PVL of random Gram operators")
{
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = rng.integer(1, 7);
    const Index p = rng.integer(1, 3 * n);
    const Mat S = gram_operator(rng.matrix(2 * n, p));
    const auto f = pvl_factorize(S);
    const OrthosymplecticBasis Q(f.q_factor);
    CHECK(Q.orthogonality_defect() <= 1e-12);
    CHECK(Q.symplecticity_defect() <= 1e-12);
    CHECK((f.reconstruct() - S).norm() <= 1e-10 * S.norm());
    for (Index i = 1; i < n; ++i) CHECK(f.diag(i) <= f.diag(i - 1));
    // Eigenvalues of S appear twice and match D_n.
    const Vec ev = sorted_eigenvalues(S).reverse();
    for (Index i = 0; i < n; ++i) {
      CHECK(std::abs(ev(2 * i) - f.diag(i)) <= 1e-10 * ev(0));
      CHECK(std::abs(ev(2 * i + 1) - f.diag(i)) <= 1e-10 * ev(0));
    }
  }
}

TEST_CASE("PVL rejects structure violations")
{
  Rng rng(8);
  const Mat A = rng.matrix(4, 4);
  CHECK_THROWS_AS(pvl_factorize(A), Error);
  Mat S = Mat::Identity(4, 4);
  S(0, 0) = 2.0;  // symmetric but not skew-Hamiltonian
  try {
    pvl_factorize(S);
    FAIL("expected a structure violation");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kStructureViolation);
  }
}

TEST_CASE("epsilon regularization")
{
  SUBCASE("nothing below threshold")
  {
    PVLFactorization f{Mat::Identity(4, 4), Vec::Ones(2)};
    const auto r = epsilon_regularize(f, 1e-8);
    CHECK(r.m_eps == 0);
    CHECK((r.s_eps - f.reconstruct()).norm() == 0.0);
  }
  SUBCASE("one tiny entry")
  {
    Vec d(2);
    d << 1.0, 1e-20;
    PVLFactorization f{Mat::Identity(4, 4), d};
    const auto r = epsilon_regularize(f, 1e-8);
    CHECK(r.m_eps == 1);
    CHECK(r.diag_eps(1) == 1e-8);
    CHECK((f.reconstruct() - r.s_eps).norm() == doctest::Approx(std::sqrt(2.0) * 1e-8).epsilon(1e-6));
  }
  SUBCASE("rank-deficient random Z")
  {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      const Index n = rng.integer(2, 6);
      const Index p = rng.integer(1, 2 * n - 1);
      const Mat S = gram_operator(rng.matrix(2 * n, p));
      const auto f = pvl_factorize(S);
      const double eps = default_epsilon(f);
      const auto r = epsilon_regularize(f, eps);
      CHECK(sorted_eigenvalues(r.s_eps)(0) >= eps * (1 - 1e-10) - 1e-15 * S.norm());
      CHECK((S - r.s_eps).norm() <= std::sqrt(2.0 * r.m_eps) * eps + 1e-14 * S.norm());
      const Mat J = poisson_matrix(n);
      CHECK((r.s_eps_inv * J - J * r.s_eps_inv.transpose()).norm() <= 1e-10 * r.s_eps_inv.norm());
      CHECK((r.s_eps * r.s_eps_inv - Mat::Identity(2 * n, 2 * n)).norm() <= 1e-6);
    }
  }
  SUBCASE("nonpositive eps")
  {
    PVLFactorization f{Mat::Identity(2, 2), Vec::Ones(1)};
    CHECK_THROWS_AS(epsilon_regularize(f, 0.0), Error);
  }
}
