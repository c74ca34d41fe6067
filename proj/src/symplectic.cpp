// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/symplectic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace hamdlr {

namespace {

std::atomic<std::uint64_t> g_basis_ids{1};

void require_even(Index n, const char *what)
{
  if (n % 2 != 0) fail(ErrorCode::kDimension, what);
}

}  // namespace

PoissonTensor::PoissonTensor(Index half_dim) : n_(half_dim)
{
  require(half_dim > 0, ErrorCode::kDimension, "Poisson tensor needs a positive half dimension");
}

Mat PoissonTensor::apply(const Mat &x, bool transpose) const
{
  require(x.rows() == 2 * n_, ErrorCode::kDimension, "Poisson tensor row mismatch");
  return poisson_apply(x, transpose);
}

Mat PoissonTensor::apply_right(const Mat &x, bool transpose) const
{
  require(x.cols() == 2 * n_, ErrorCode::kDimension, "Poisson tensor column mismatch");
  return poisson_apply_right(x, transpose);
}

Mat PoissonTensor::dense() const { return poisson_matrix(n_); }

Mat poisson_apply(const Mat &x, bool transpose)
{
  require_even(x.rows(), "poisson_apply: odd row count");
  const Index n = x.rows() / 2;
  Mat y(x.rows(), x.cols());
  if (!transpose) {
    y.topRows(n) = x.bottomRows(n);
    y.bottomRows(n) = -x.topRows(n);
  } else {
    y.topRows(n) = -x.bottomRows(n);
    y.bottomRows(n) = x.topRows(n);
  }
  return y;
}

Mat poisson_apply_right(const Mat &x, bool transpose)
{
  require_even(x.cols(), "poisson_apply_right: odd column count");
  const Index n = x.cols() / 2;
  Mat y(x.rows(), x.cols());
  if (!transpose) {
    y.leftCols(n) = -x.rightCols(n);
    y.rightCols(n) = x.leftCols(n);
  } else {
    y.leftCols(n) = x.rightCols(n);
    y.rightCols(n) = -x.leftCols(n);
  }
  return y;
}

Mat poisson_matrix(Index half_dim)
{
  Mat J = Mat::Zero(2 * half_dim, 2 * half_dim);
  J.topRightCorner(half_dim, half_dim).setIdentity();
  J.bottomLeftCorner(half_dim, half_dim) = -Mat::Identity(half_dim, half_dim);
  return J;
}

SpMat poisson_sparse(Index half_dim)
{
  std::vector<Triplet> t;
  t.reserve(2 * half_dim);
  for (Index i = 0; i < half_dim; ++i) {
    t.emplace_back(i, half_dim + i, 1.0);
    t.emplace_back(half_dim + i, i, -1.0);
  }
  SpMat J(2 * half_dim, 2 * half_dim);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

// -- OrthosymplecticBasis ------------------------------------------------------------------

OrthosymplecticBasis::OrthosymplecticBasis(Mat cols) : cols_(std::move(cols)), id_(g_basis_ids++)
{
  require_even(cols_.rows(), "basis: odd row count");
  require_even(cols_.cols(), "basis: odd column count");
  require(cols_.cols() <= cols_.rows(), ErrorCode::kDimension, "basis: more columns than rows");
}

double OrthosymplecticBasis::orthogonality_defect() const
{
  const Mat G = cols_.transpose() * cols_;
  return (G - Mat::Identity(rank(), rank())).norm();
}

double OrthosymplecticBasis::symplecticity_defect() const
{
  const Mat G = cols_.transpose() * poisson_apply(cols_);
  return (G - poisson_matrix(half_rank())).norm();
}

void OrthosymplecticBasis::check(double tol) const
{
  const double o = orthogonality_defect(), s = symplecticity_defect();
  if (o > tol || s > tol)
    fail(ErrorCode::kStructureViolation,
         "basis not orthosymplectic (orthogonality " + std::to_string(o) + ", symplecticity " +
             std::to_string(s) + ")");
}

OrthosymplecticBasis OrthosymplecticBasis::identity(Index half_dim)
{
  return OrthosymplecticBasis(Mat::Identity(2 * half_dim, 2 * half_dim));
}

// -- Gram-Schmidt --------------------------------------------------------------------------

OrthosymplecticBasis symplectic_gram_schmidt(const Mat &A, bool reorthogonalize)
{
  require_even(A.rows(), "symplectic_gram_schmidt: odd row count");
  require_even(A.cols(), "symplectic_gram_schmidt: odd column count");
  const Index N = A.rows() / 2, k = A.cols() / 2;
  require(k <= N, ErrorCode::kDimension, "symplectic_gram_schmidt: 2k > 2N");

  const double tol = 1e-10 * A.norm();
  Mat E(2 * N, k), F(2 * N, k);  // F = J^T E
  const int passes = reorthogonalize ? 2 : 1;

  auto project = [&](Vec &v, Index i) {
    for (int pass = 0; pass < passes; ++pass) {
      for (Index j = 0; j < i; ++j) {
        v -= E.col(j) * E.col(j).dot(v);
        v -= F.col(j) * F.col(j).dot(v);
      }
    }
  };

  for (Index i = 0; i < k; ++i) {
    Vec v = A.col(i);
    project(v, i);
    double nv = v.norm();
    if (!(nv >= tol) || nv == 0.0) {
      // Leading column collapsed; try the partner mapped back through J.
      v = poisson_apply(Mat(A.col(k + i)));
      project(v, i);
      nv = v.norm();
      if (!(nv >= tol) || nv == 0.0)
        throw DegenerateDirection(i, nv, "symplectic_gram_schmidt: degenerate direction in pair " +
                                             std::to_string(i));
    }
    E.col(i) = v / nv;
    F.col(i) = poisson_apply(Mat(E.col(i)), true);
  }
  Mat U(2 * N, 2 * k);
  U << E, F;
  return OrthosymplecticBasis(std::move(U));
}

// -- complex SVD basis ---------------------------------------------------------------------

ComplexSvdBasis complex_svd_basis(const Mat &S, Index half_rank)
{
  require_even(S.rows(), "complex_svd_basis: odd row count");
  const Index N = S.rows() / 2, p = S.cols();
  if (half_rank < 1 || half_rank > std::min(N, p))
    fail(ErrorCode::kDimension, "complex_svd_basis: half_rank out of range");

  Eigen::MatrixXcd C(N, p);
  C.real() = S.topRows(N);
  C.imag() = S.bottomRows(N);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeThinU);
  const Eigen::MatrixXcd Y = svd.matrixU().leftCols(half_rank);

  Mat U(2 * N, 2 * half_rank);
  U.topLeftCorner(N, half_rank) = Y.real();
  U.bottomLeftCorner(N, half_rank) = Y.imag();
  U.topRightCorner(N, half_rank) = -Y.imag();
  U.bottomRightCorner(N, half_rank) = Y.real();
  return {OrthosymplecticBasis(std::move(U)), svd.singularValues()};
}

// -- Gram operator and PVL -----------------------------------------------------------------

Mat gram_operator(const Mat &Z)
{
  require_even(Z.rows(), "gram_operator: odd row count");
  Mat C = Z * Z.transpose();
  C = 0.5 * (C + C.transpose());
  return C + poisson_apply(poisson_apply_right(C), true);
}

namespace {

struct Householder {
  Vec v;
  double beta = 0.0;
  bool active = false;
};

// H = I - beta v v^T maps x onto a multiple of e_1.
Householder make_householder(const Vec &x)
{
  Householder h;
  if (x.size() < 2) return h;
  const double tail = x.tail(x.size() - 1).squaredNorm();
  if (tail == 0.0) return h;
  const double nx = std::sqrt(x(0) * x(0) + tail);
  const double alpha = x(0) >= 0.0 ? -nx : nx;
  h.v = x;
  h.v(0) -= alpha;
  h.beta = 2.0 / h.v.squaredNorm();
  h.active = true;
  return h;
}

// W <- T W T and Q <- Q T for T = H (+) H acting on [first, first + len) of both halves.
void apply_symplectic_householder(Mat &W, Mat &Q, Index n, Index first, const Householder &h)
{
  if (!h.active) return;
  const Index len = h.v.size();
  for (Index off : {first, n + first}) {
    auto rows = W.middleRows(off, len);
    const Eigen::RowVectorXd w = h.v.transpose() * rows;
    rows.noalias() -= (h.beta * h.v) * w;
  }
  for (Index off : {first, n + first}) {
    auto cols = W.middleCols(off, len);
    const Vec w = cols * h.v;
    cols.noalias() -= w * (h.beta * h.v.transpose());
    auto qc = Q.middleCols(off, len);
    const Vec wq = qc * h.v;
    qc.noalias() -= wq * (h.beta * h.v.transpose());
  }
}

// Rotation in the (k, n + k) plane chosen to annihilate b against a.
void apply_symplectic_givens(Mat &W, Mat &Q, Index n, Index k, double a, double b)
{
  const double r = std::hypot(a, b);
  if (r == 0.0 || b == 0.0) return;
  const double c = a / r, s = b / r;
  const Index k2 = n + k;
  {
    const Eigen::RowVectorXd r1 = W.row(k), r2 = W.row(k2);
    W.row(k) = c * r1 + s * r2;
    W.row(k2) = -s * r1 + c * r2;
  }
  for (Mat *M : {&W, &Q}) {
    const Vec c1 = M->col(k), c2 = M->col(k2);
    M->col(k) = c * c1 + s * c2;
    M->col(k2) = -s * c1 + c * c2;
  }
}

}  // namespace

PVLFactorization pvl_factorize(const Mat &S_in)
{
  require(S_in.rows() == S_in.cols(), ErrorCode::kDimension, "pvl_factorize: S not square");
  require_even(S_in.rows(), "pvl_factorize: odd dimension");
  const Index n = S_in.rows() / 2;
  const double nrm = S_in.norm();

  PVLFactorization f;
  if (nrm == 0.0) {
    f.q_factor = Mat::Identity(2 * n, 2 * n);
    f.diag = Vec::Zero(n);
    return f;
  }
  const double asym = (S_in - S_in.transpose()).norm();
  const Mat SJ = poisson_apply_right(S_in);
  const Mat JSt = poisson_apply(Mat(S_in.transpose()));
  const double skew = (SJ - JSt).norm();
  if (asym > 1e-10 * nrm || skew > 1e-10 * nrm)
    fail(ErrorCode::kStructureViolation,
         "pvl_factorize: input not symmetric skew-Hamiltonian (asymmetry " + std::to_string(asym / nrm) +
             ", skew " + std::to_string(skew / nrm) + ")");

  // Project onto the exact structure before reducing.
  Mat W = 0.5 * (S_in + S_in.transpose());
  W = 0.5 * (W + poisson_apply(poisson_apply_right(W), true));
  Mat Q = Mat::Identity(2 * n, 2 * n);

  for (Index j = 0; j + 1 < n; ++j) {
    const Index len = n - j - 1;
    apply_symplectic_householder(W, Q, n, j + 1, make_householder(W.col(j).segment(n + j + 1, len)));
    apply_symplectic_givens(W, Q, n, j + 1, W(j + 1, j), W(n + j + 1, j));
    apply_symplectic_householder(W, Q, n, j + 1, make_householder(W.col(j).segment(j + 1, len)));
  }

  Vec d = W.diagonal().head(n);
  Vec e(std::max<Index>(n - 1, 0));
  for (Index i = 0; i + 1 < n; ++i) e(i) = 0.5 * (W(i + 1, i) + W(i, i + 1));

  Mat V;
  Vec lam;
  if (n == 1) {
    lam = d;
    V = Mat::Identity(1, 1);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) fail(ErrorCode::kStructureViolation, "pvl_factorize: tridiagonal eigensolver failed");
    // Descending order; ties keep the solver's order so that S = I gives Q = I.
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });
    lam.resize(n);
    V.resize(n, n);
    for (Index i = 0; i < n; ++i) {
      lam(i) = es.eigenvalues()(order[i]);
      V.col(i) = es.eigenvectors().col(order[i]);
    }
  }

  f.q_factor.resize(2 * n, 2 * n);
  f.q_factor.leftCols(n) = Q.leftCols(n) * V;
  f.q_factor.rightCols(n) = Q.rightCols(n) * V;
  f.diag = lam;
  return f;
}

namespace {
Mat blk_scale(const Mat &Q, const Vec &d)
{
  const Index n = d.size();
  Mat QD = Q;
  QD.leftCols(n) *= d.asDiagonal();
  QD.rightCols(n) *= d.asDiagonal();
  return QD;
}
}  // namespace

Mat PVLFactorization::reconstruct() const { return blk_scale(q_factor, diag) * q_factor.transpose(); }

Mat PVLFactorization::inverse() const
{
  for (Index i = 0; i < diag.size(); ++i)
    if (diag(i) == 0.0) fail(ErrorCode::kParameter, "PVL inverse: singular factorization");
  return blk_scale(q_factor, diag.cwiseInverse()) * q_factor.transpose();
}

EpsilonRegularization epsilon_regularize(const PVLFactorization &f, double eps)
{
  if (!(eps > 0.0)) fail(ErrorCode::kParameter, "epsilon_regularize: eps must be positive");
  EpsilonRegularization r;
  r.diag_eps = f.diag;
  for (Index i = 0; i < r.diag_eps.size(); ++i) {
    if (r.diag_eps(i) <= eps) {
      r.diag_eps(i) = eps;
      ++r.m_eps;
    }
  }
  r.s_eps = blk_scale(f.q_factor, r.diag_eps) * f.q_factor.transpose();
  r.s_eps_inv = blk_scale(f.q_factor, r.diag_eps.cwiseInverse()) * f.q_factor.transpose();
  return r;
}

double default_epsilon(const PVLFactorization &f, double relative)
{
  const double top = f.diag.size() ? f.diag.cwiseAbs().maxCoeff() : 0.0;
  return top > 0.0 ? relative * top : relative;
}

}  // namespace hamdlr
