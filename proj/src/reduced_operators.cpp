// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/reduced_operators.hpp"

namespace hamdlr {

namespace {

Index ipow(Index b, Index e)
{
  Index r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

TensorialOperator TensorialOperator::precompute(const HamiltonianModel &model, const OrthosymplecticBasis &U)
{
  const PolynomialStructure *poly = model.polynomial();
  if (!poly) fail(ErrorCode::kUnsupportedModel, model.name() + ": no polynomial structure for tensorial operators");
  require(U.full_dim() == model.full_dim(), ErrorCode::kDimension, "precompute: basis/model dimension mismatch");

  TensorialOperator op;
  op.r_ = U.rank();
  op.q_ = poly->degree();
  op.id_ = U.id();
  const Mat &Uc = U.cols();
  const Index r = op.r_;

  for (const auto &pt : poly->terms()) {
    Term t;
    t.q = pt.degree();
    for (const auto &A : pt.factors) t.factors.push_back(A * Uc);
    const Mat BtU = SpMat(pt.output.transpose()) * Uc;  // m x 2n
    t.out = poisson_apply(Mat(BtU.transpose()));
    if (t.q == 1) {
      t.dense = t.out * t.factors[0];
    } else if (r <= kDenseRankLimit) {
      // Khatri-Rao product of the projected factors, first factor fastest.
      const Index m = t.factors[0].rows(), cols = ipow(r, t.q);
      Mat kr(m, cols);
      for (Index idx = 0; idx < cols; ++idx) {
        Index rem = idx;
        Vec col = Vec::Ones(m);
        for (Index i = 0; i < t.q; ++i) {
          col.array() *= t.factors[i].col(rem % r).array();
          rem /= r;
        }
        kr.col(idx) = col;
      }
      t.dense = t.out * kr;
    }
    op.terms_.push_back(std::move(t));
  }
  return op;
}

void TensorialOperator::check(std::uint64_t basis_id) const
{
  if (id_ == 0 || basis_id != id_)
    fail(ErrorCode::kStaleOperator, "tensorial operator was built for a different basis");
}

Vec TensorialOperator::eval_column(const Vec &z, const Vec &w) const
{
  Vec g = Vec::Zero(r_);
  std::vector<double> kz;
  for (size_t ti = 0; ti < terms_.size(); ++ti) {
    const double wt = w(static_cast<Index>(ti));
    if (wt == 0.0) continue;
    const Term &t = terms_[ti];
    if (t.dense.size()) {
      if (t.q == 1) {
        g.noalias() += wt * (t.dense * z);
        continue;
      }
      kz.assign(z.data(), z.data() + r_);
      for (Index i = 1; i < t.q; ++i) {
        const size_t len = kz.size();
        std::vector<double> next(len * static_cast<size_t>(r_));
        for (Index l = 0; l < r_; ++l)
          for (size_t a = 0; a < len; ++a) next[a + len * static_cast<size_t>(l)] = kz[a] * z(l);
        kz.swap(next);
      }
      g.noalias() += wt * (t.dense * Eigen::Map<const Vec>(kz.data(), static_cast<Index>(kz.size())));
    } else {
      Vec prod = t.factors[0] * z;
      for (Index i = 1; i < t.q; ++i) prod.array() *= (t.factors[i] * z).array();
      g.noalias() += wt * (t.out * prod);
    }
  }
  return g;
}

Mat TensorialOperator::jacobian_column(const Vec &z, const Vec &w) const
{
  Mat Jac = Mat::Zero(r_, r_);
  for (size_t ti = 0; ti < terms_.size(); ++ti) {
    const double wt = w(static_cast<Index>(ti));
    if (wt == 0.0) continue;
    const Term &t = terms_[ti];
    if (t.q == 1) {
      Jac.noalias() += wt * t.dense;
    } else if (t.dense.size()) {
      const Index cols = t.dense.cols();
      std::vector<Index> l(static_cast<size_t>(t.q));
      for (Index idx = 0; idx < cols; ++idx) {
        Index rem = idx;
        for (Index i = 0; i < t.q; ++i) {
          l[i] = rem % r_;
          rem /= r_;
        }
        for (Index i = 0; i < t.q; ++i) {
          double c = wt;
          for (Index k = 0; k < t.q; ++k)
            if (k != i) c *= z(l[k]);
          if (c != 0.0) Jac.col(l[i]).noalias() += c * t.dense.col(idx);
        }
      }
    } else {
      std::vector<Vec> ys;
      for (const auto &P : t.factors) ys.push_back(P * z);
      Mat inner = Mat::Zero(t.factors[0].rows(), r_);
      for (Index i = 0; i < t.q; ++i) {
        Vec d = Vec::Ones(inner.rows());
        for (Index k = 0; k < t.q; ++k)
          if (k != i) d.array() *= ys[k].array();
        inner.noalias() += d.asDiagonal() * t.factors[i];
      }
      Jac.noalias() += wt * (t.out * inner);
    }
  }
  return Jac;
}

Mat TensorialOperator::eval_rhs(std::uint64_t basis_id, const Mat &Z, const Mat &weights) const
{
  check(basis_id);
  require(Z.rows() == r_, ErrorCode::kDimension, "eval_reduced_rhs: coefficient rows");
  require(weights.rows() == term_count() && weights.cols() == Z.cols(), ErrorCode::kDimension,
          "eval_reduced_rhs: weight shape");
  Mat G(r_, Z.cols());
  parallel_for(Z.cols(), [&](Index j) { G.col(j) = eval_column(Z.col(j), weights.col(j)); });
  return G;
}

Mat TensorialOperator::eval_jacobian(std::uint64_t basis_id, const Vec &z, const Vec &w) const
{
  check(basis_id);
  require(z.size() == r_ && w.size() == term_count(), ErrorCode::kDimension, "eval_reduced_jacobian: shapes");
  return jacobian_column(z, w);
}

Mat direct_reduced_rhs(const HamiltonianModel &model, const OrthosymplecticBasis &U, const Mat &Z,
                       const ParameterSet &params)
{
  const Mat Y = model.gradient(Mat(U.cols() * Z), params);
  return poisson_apply(Mat(U.cols().transpose() * Y));
}

Mat direct_reduced_jacobian(const HamiltonianModel &model, const OrthosymplecticBasis &U, const Vec &z,
                            const Vec &eta)
{
  const Vec u = U.cols() * z;
  const SpMat H = model.hessian(u, eta);
  const Mat HU = H * U.cols();
  return poisson_apply(Mat(U.cols().transpose() * HU));
}

}  // namespace hamdlr
