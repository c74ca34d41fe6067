// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/dlr.hpp"

#include <Eigen/LU>

namespace hamdlr {

namespace {

// Nearest V' with V'J = JV', i.e. V' = [W | J^T W].
Mat commute_with_J(const Mat &V)
{
  const Index n = V.cols() / 2;
  const Mat W = 0.5 * (V.leftCols(n) + poisson_apply(Mat(V.rightCols(n))));
  Mat out(V.rows(), V.cols());
  out << W, poisson_apply(W, true);
  return out;
}

Mat project_out(const Mat &U, const Mat &X) { return X - U * (U.transpose() * X); }

Mat checked_inverse(const Mat &M, const char *what)
{
  Eigen::PartialPivLU<Mat> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) fail(ErrorCode::kRetractionBreakdown, what);
  return lu.inverse();
}

}  // namespace

bool ReducedState::full_rank(double rank_tol) const
{
  const PVLFactorization f = pvl_factorize(gram_operator(coeffs));
  const double top = f.diag.maxCoeff();
  return top > 0.0 && f.diag.minCoeff() > rank_tol * top;
}

ReducedState initial_reduced_state(const Mat &R0, Index half_rank)
{
  ComplexSvdBasis c = complex_svd_basis(R0, half_rank);
  Mat Z = c.basis.cols().transpose() * R0;
  return {std::move(c.basis), std::move(Z)};
}

Mat coefficient_velocity(const HamiltonianModel &model, const ReducedState &state, const ParameterSet &params,
                         const TensorialOperator *op)
{
  require(state.coeffs.cols() == params.size(), ErrorCode::kDimension, "coefficient_velocity: parameter count");
  if (op) return op->eval_rhs(state.basis.id(), state.coeffs, model.polynomial()->weights(params));
  return direct_reduced_rhs(model, state.basis, state.coeffs, params);
}

VelocityFieldEval basis_velocity(const ReducedState &state, const Mat &Y, const BasisVelocityOptions &opt)
{
  const Mat &U = state.basis.cols();
  const Mat &Z = state.coeffs;
  require(Y.rows() == U.rows() && Y.cols() == Z.cols(), ErrorCode::kDimension, "basis_velocity: gradient shape");
  const Index n = state.half_rank();

  const Mat YZ = Y * Z.transpose();
  const Mat L = project_out(U, Mat(poisson_apply(YZ) - poisson_apply_right(YZ, true)));

  const PVLFactorization f = pvl_factorize(gram_operator(Z));
  const double top = f.diag.size() ? f.diag.maxCoeff() : 0.0;
  VelocityFieldEval out;
  Mat F;
  if (top > 0.0 && f.diag.minCoeff() > opt.rank_tol * top) {
    F = L * f.inverse();
  } else {
    const EpsilonRegularization reg = epsilon_regularize(f, default_epsilon(f, opt.eps_rel));
    F = L * reg.s_eps_inv;
    out.regularized = true;
    out.m_eps = reg.m_eps;
  }
  // Horizontal form [W | J^T W] with W = (F_1 + J F_2) / 2.
  Mat W = 0.5 * (F.leftCols(n) + poisson_apply(Mat(F.rightCols(n))));
  W = project_out(U, W);
  out.f.resize(U.rows(), 2 * n);
  out.f << W, poisson_apply(W, true);
  return out;
}

double horizontality_defect(const OrthosymplecticBasis &U, const Mat &F)
{
  const double nf = F.norm();
  if (nf == 0.0) return 0.0;
  const double a = (F.transpose() * U.cols()).norm();
  const double b = (poisson_apply_right(F) - poisson_apply(F)).norm();
  return std::max(a, b) / nf;
}

double tangent_defect(const OrthosymplecticBasis &Q, const Mat &V)
{
  const double nv = V.norm();
  if (nv == 0.0) return 0.0;
  const Mat QV = Q.cols().transpose() * V;
  const double a = (QV + QV.transpose()).norm();
  const double b = (poisson_apply_right(V) - poisson_apply(V)).norm();
  return std::max(a, b) / nv;
}

OrthosymplecticBasis retraction(const OrthosymplecticBasis &Q, const Mat &V)
{
  const Mat &Qc = Q.cols();
  require(V.rows() == Qc.rows() && V.cols() == Qc.cols(), ErrorCode::kDimension, "retraction: V shape");
  if (V.isZero(0.0)) return Q;
  const Index r = Qc.cols();
  const Mat Vj = commute_with_J(V);
  const Mat Theta = Vj - 0.5 * Qc * (Qc.transpose() * Vj);

  // cay(B C^T) Q = Q + B (I - C^T B / 2)^{-1} C^T Q with B = [Theta | -Q], C = [Q | Theta].
  const Mat QtT = Qc.transpose() * Theta, TtT = Theta.transpose() * Theta, QtQ = Qc.transpose() * Qc;
  Mat CtB(2 * r, 2 * r);
  CtB << QtT, -QtQ, TtT, -QtT.transpose();
  const Mat M = checked_inverse(Mat::Identity(2 * r, 2 * r) - 0.5 * CtB, "retraction: Cayley system is singular");
  Mat CtQ(2 * r, r);
  CtQ << QtQ, QtT.transpose();
  const Mat coef = M * CtQ;
  Mat R = Qc + Theta * coef.topRows(r) - Qc * coef.bottomRows(r);
  return OrthosymplecticBasis(std::move(R));
}

Mat inverse_tangent_map(const OrthosymplecticBasis &Q, const Mat &V, const Mat &F)
{
  return inverse_tangent_map(Q, V, F, retraction(Q, V).cols());
}

Mat inverse_tangent_map(const OrthosymplecticBasis &Q, const Mat &V, const Mat &F, const Mat &RQV)
{
  const Mat &Qc = Q.cols();
  require(V.rows() == Qc.rows() && V.cols() == Qc.cols() && F.rows() == Qc.rows() && F.cols() == Qc.cols(),
          ErrorCode::kDimension, "inverse_tangent_map: shapes");
  if (V.isZero(0.0)) return F;
  const Index r = Qc.cols();
  const Mat Vj = commute_with_J(V);
  const Mat Theta = Vj - 0.5 * Qc * (Qc.transpose() * Vj);
  const Mat I = Mat::Identity(r, r);

  const Mat QtR = Qc.transpose() * RQV;
  const Mat inv_a = checked_inverse(QtR + I, "inverse_tangent_map: Q^T R + I is singular");
  const Mat inv_b = checked_inverse(Mat(QtR.transpose()) + I, "inverse_tangent_map: R^T Q + I is singular");
  const Mat Phi = (2.0 * F - Theta * (Qc.transpose() * F) + Qc * (Theta.transpose() * F)) * inv_a;
  const Mat RpQtPhi = RQV.transpose() * Phi + Qc.transpose() * Phi;
  return Phi - Qc * (inv_b * RpQtPhi) - Qc * (Phi.transpose() * Qc);
}

}  // namespace hamdlr
