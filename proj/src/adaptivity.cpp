// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/adaptivity.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <cmath>

namespace hamdlr {

ErrorIndicator error_indicator(const HamiltonianModel &model, const Mat &R_now, const Mat &R_prev,
                               const ParameterSet &subset_params, double dt, double time, const Mat *prev_error)
{
  const Index n = model.full_dim(), pt = subset_params.size();
  require(R_now.rows() == n && R_prev.rows() == n && R_now.cols() == pt && R_prev.cols() == pt,
          ErrorCode::kDimension, "error_indicator: state shapes");
  if (prev_error)
    require(prev_error->rows() == n && prev_error->cols() == pt, ErrorCode::kDimension,
            "error_indicator: previous error shape");
  const SpMat J = poisson_sparse(n / 2);
  SpMat I(n, n);
  I.setIdentity();

  ErrorIndicator out;
  out.time = time;
  out.E.resize(n, pt);
  parallel_for(pt, [&](Index j) {
    const Vec up = R_prev.col(j), un = R_now.col(j), eta = subset_params[j];
    const Vec rho = midpoint_residual(model, un, up, eta, dt);
    const SpMat JH = (0.5 * dt) * (J * model.hessian(Vec(0.5 * (un + up)), eta));
    SpMat dnow = I - JH;
    dnow.makeCompressed();
    Vec rhs = rho;
    if (prev_error) rhs += -Vec(prev_error->col(j)) - JH * prev_error->col(j);
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(dnow);
    if (lu.info() != Eigen::Success)
      fail(ErrorCode::kIndicatorFailure, "error_indicator: singular Jacobian for column " + std::to_string(j));
    out.E.col(j) = -lu.solve(rhs);
  });
  if (!out.E.allFinite()) fail(ErrorCode::kIndicatorFailure, "error_indicator: non-finite estimate");
  out.norm = out.E.norm();
  return out;
}

ErrorIndicator error_indicator(const HamiltonianModel &model, const ReducedState &now, const ReducedState &prev,
                               const ParameterSet &params, const std::vector<Index> &subset, double dt, double time,
                               const Mat *prev_error)
{
  require(now.coeffs.cols() == prev.coeffs.cols(), ErrorCode::kDimension, "error_indicator: parameter counts differ");
  Mat Zn(now.coeffs.rows(), static_cast<Index>(subset.size())), Zp(prev.coeffs.rows(), Zn.cols());
  for (size_t k = 0; k < subset.size(); ++k) {
    require(subset[k] >= 0 && subset[k] < now.coeffs.cols(), ErrorCode::kParameter, "error_indicator: subset index");
    Zn.col(k) = now.coeffs.col(subset[k]);
    Zp.col(k) = prev.coeffs.col(subset[k]);
  }
  return error_indicator(model, Mat(now.basis.cols() * Zn), Mat(prev.basis.cols() * Zp), params.subset(subset), dt,
                         time, prev_error);
}

void AdaptiveController::validate() const
{
  if (!(r > 1.0)) fail(ErrorCode::kConfig, "adaptivity: r must be > 1");
  if (!(c >= 1.0)) fail(ErrorCode::kConfig, "adaptivity: c must be >= 1");
  if (lambda < 0) fail(ErrorCode::kConfig, "adaptivity: lambda must be >= 0");
  if (stride < 1) fail(ErrorCode::kConfig, "adaptivity: stride must be >= 1");
  if (subset.empty()) fail(ErrorCode::kConfig, "adaptivity: indicator subset is empty");
}

double AdaptiveController::threshold() const { return r * std::pow(c, lambda); }

bool AdaptiveController::should_update(const ErrorIndicator &e)
{
  if (!seeded) {
    e_star_norm = e.norm;
    t_star = e.time;
    seeded = e.norm > 0.0;
    return false;
  }
  return e.norm / e_star_norm > threshold();
}

void AdaptiveController::record_update(const ErrorIndicator &e)
{
  e_star_norm = e.norm;
  t_star = e.time;
  ++lambda;
}

RankUpdateResult rank_update(const ReducedState &state, const ErrorIndicator &e, Index max_rank)
{
  const Mat &U = state.basis.cols();
  const Index N = state.basis.full_dim() / 2, n = state.half_rank();
  require(e.E.rows() == U.rows(), ErrorCode::kDimension, "rank_update: indicator has the wrong row count");
  RankUpdateResult out{state, false, ""};
  const Index cap = max_rank > 0 ? std::min(2 * N, max_rank) : 2 * N;
  if (2 * n + 2 > cap) {
    out.reason = "rank cap reached";
    return out;
  }
  if (e.E.size() == 0 || e.norm == 0.0) {
    out.reason = "zero indicator";
    return out;
  }
  Eigen::BDCSVD<Mat> svd(e.E, Eigen::ComputeThinU);
  Vec e1 = svd.matrixU().col(0);
  e1.normalize();

  Mat A(U.rows(), 2 * n + 2);
  A.leftCols(n) = U.leftCols(n);
  A.col(n) = e1;
  A.middleCols(n + 1, n) = U.rightCols(n);
  A.col(2 * n + 1) = poisson_apply(Mat(e1), true);
  try {
    OrthosymplecticBasis Unew = symplectic_gram_schmidt(A, true);
    Mat Znew = (Unew.cols().transpose() * U) * state.coeffs;
    out.state = {std::move(Unew), std::move(Znew)};
    out.applied = true;
  } catch (const DegenerateDirection &) {
    out.reason = "indicator direction lies in the current span";
  }
  return out;
}

RankDecreaseResult rank_decrease(const ReducedState &state, double threshold)
{
  require(threshold > 0.0, ErrorCode::kParameter, "rank_decrease: threshold must be positive");
  const Index n = state.half_rank();
  const PVLFactorization f = pvl_factorize(gram_operator(state.coeffs));
  RankDecreaseResult out;
  const double top = f.diag.maxCoeff();
  out.ratio = top > 0.0 ? f.diag(n - 1) / top : 0.0;
  const Mat Ur = state.basis.cols() * f.q_factor;
  const Mat Zr = f.q_factor.transpose() * state.coeffs;
  if (n > 1 && out.ratio < threshold) {
    Mat U2(Ur.rows(), 2 * n - 2), Z2(2 * n - 2, Zr.cols());
    U2 << Ur.leftCols(n - 1), Ur.middleCols(n, n - 1);
    Z2 << Zr.topRows(n - 1), Zr.middleRows(n, n - 1);
    out.state = {OrthosymplecticBasis(std::move(U2)), std::move(Z2)};
    out.dropped = true;
  } else {
    out.state = {OrthosymplecticBasis(Ur), Zr};
  }
  return out;
}

}  // namespace hamdlr
