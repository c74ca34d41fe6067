// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/dlr.hpp"

#include <Eigen/LU>

#include <atomic>
#include <cmath>
#include <optional>

namespace hamdlr {

namespace {

bool same(const Mat &a, const Mat &b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

struct PrkIntegrator::Stage {
  OrthosymplecticBasis U;
  Mat V;  // tangent vector at U0; empty while zero
  Mat Z;
  std::optional<TensorialOperator> op;
  Mat khat, khat_Z;
  bool khat_valid = false;
};

PrkIntegrator::PrkIntegrator(const HamiltonianModel &model, ParameterSet params, ButcherPair tableau, PrkOptions opt)
    : model_(model), params_(std::move(params)), tab_(std::move(tableau)), opt_(opt)
{
  opt_.newton.validate();
  require(opt_.max_coupling_iter >= 1, ErrorCode::kConfig, "max_coupling_iter must be >= 1");
  tensorial_ = opt_.use_tensorial && model.polynomial() != nullptr;
  if (model.polynomial()) weights_ = model.polynomial()->weights(params_);
}

Mat PrkIntegrator::reduced_rhs(const Stage &st, const Mat &Z) const
{
  if (tensorial_) return st.op->eval_rhs(st.U.id(), Z, weights_);
  return direct_reduced_rhs(model_, st.U, Z, params_);
}

ReducedState PrkIntegrator::step(const ReducedState &state, double dt, PrkStats *stats) const
{
  const OrthosymplecticBasis &U0 = state.basis;
  const Mat &Z0 = state.coeffs;
  require(U0.full_dim() == model_.full_dim(), ErrorCode::kDimension, "prk_step: basis/model mismatch");
  require(Z0.rows() == U0.rank() && Z0.cols() == params_.size(), ErrorCode::kDimension,
          "prk_step: coefficient shape");
  require(std::isfinite(dt) && dt != 0.0, ErrorCode::kParameter, "prk_step: dt must be nonzero");

  const Index s = tab_.stages, r = U0.rank(), p = Z0.cols();
  const Mat &A = tab_.A, &Ah = tab_.Ahat;
  const bool freeze = opt_.freeze_basis;

  std::vector<char> k_used(s), row_implicit(s), khat_used(s), khat_feeds(s);
  for (Index i = 0; i < s; ++i) {
    k_used[i] = tab_.b(i) != 0.0 || !A.col(i).isZero(0.0);
    row_implicit[i] = !A.row(i).isZero(0.0);
    khat_used[i] = !freeze && (tab_.bhat(i) != 0.0 || !Ah.col(i).isZero(0.0));
    khat_feeds[i] = !freeze && !Ah.col(i).isZero(0.0);
  }
  std::vector<Index> unknowns;
  for (Index i = 0; i < s; ++i)
    if (k_used[i] && row_implicit[i]) unknowns.push_back(i);
  bool need_outer = false;
  for (Index i = 0; i < s && !freeze; ++i)
    for (Index j = 0; j < i; ++j)
      if (Ah(i, j) != 0.0 && row_implicit[j]) need_outer = true;

  PrkStats local;
  std::vector<Stage> st(static_cast<size_t>(s));
  for (auto &x : st) x.U = U0;

  const Mat G0 = direct_reduced_rhs(model_, U0, Z0, params_);
  std::vector<Mat> k(static_cast<size_t>(s), G0);

  auto stage_Z = [&](Index i) {
    Mat Zi = Z0;
    for (Index j = 0; j < s; ++j)
      if (A(i, j) != 0.0) Zi.noalias() += (dt * A(i, j)) * k[j];
    return Zi;
  };

  auto sweep = [&](bool final) {
    for (Index i = 0; i < s; ++i) {
      Stage &x = st[i];
      if (!freeze) {
        Mat Vi;
        for (Index j = 0; j < i; ++j) {
          if (Ah(i, j) == 0.0) continue;
          if (Vi.size() == 0) Vi = Mat::Zero(U0.full_dim(), r);
          Vi.noalias() += (dt * Ah(i, j)) * st[j].khat;
        }
        if (!same(Vi, x.V)) {
          x.V = Vi;
          x.U = Vi.size() ? retraction(U0, Vi) : U0;
          x.op.reset();
          x.khat_valid = false;
        }
      }
      x.Z = stage_Z(i);
      if (khat_used[i] && (final || khat_feeds[i])) {
        if (!x.khat_valid || !same(x.khat_Z, x.Z)) {
          const Mat Y = model_.gradient(Mat(x.U.cols() * x.Z), params_);
          const VelocityFieldEval ev = basis_velocity({x.U, x.Z}, Y, opt_.velocity);
          local.regularized = local.regularized || ev.regularized;
          x.khat = x.V.size() ? inverse_tangent_map(U0, x.V, ev.f, x.U.cols()) : ev.f;
          x.khat_Z = x.Z;
          x.khat_valid = true;
        }
      }
    }
  };

  auto ensure_op = [&](Stage &x) {
    if (tensorial_ && (!x.op || !x.op->built_for(x.U))) x.op = TensorialOperator::precompute(model_, x.U);
  };

  auto column_rhs = [&](const Stage &x, const Vec &z, Index c) -> Vec {
    if (tensorial_) return x.op->eval_column(z, weights_.col(c));
    const Vec y = model_.gradient(Vec(x.U.cols() * z), params_[c]);
    return poisson_apply(Mat(x.U.cols().transpose() * y));
  };
  auto column_jac = [&](const Stage &x, const Vec &z, Index c) -> Mat {
    if (tensorial_) return x.op->jacobian_column(z, weights_.col(c));
    return direct_reduced_jacobian(model_, x.U, z, params_[c]);
  };

  auto solve_stages = [&]() {
    for (Index i = 0; i < s; ++i) {
      if (k_used[i] && !row_implicit[i]) {
        ensure_op(st[i]);
        k[i] = reduced_rhs(st[i], st[i].Z);
      }
    }
    if (unknowns.empty()) return;
    for (Index i : unknowns) ensure_op(st[i]);
    const Index m = static_cast<Index>(unknowns.size());
    std::atomic<int> max_it{0};
    parallel_for(p, [&](Index c) {
      Vec K(m * r);
      for (Index a = 0; a < m; ++a) K.segment(a * r, r) = k[unknowns[a]].col(c);
      auto kcol = [&](Index j) -> Vec {
        for (Index a = 0; a < m; ++a)
          if (unknowns[a] == j) return K.segment(a * r, r);
        return k[j].col(c);
      };
      std::vector<Vec> z(static_cast<size_t>(m));
      double rn = 0.0;
      for (int it = 0;; ++it) {
        for (Index a = 0; a < m; ++a) {
          const Index i = unknowns[a];
          z[a] = Z0.col(c);
          for (Index j = 0; j < s; ++j)
            if (A(i, j) != 0.0) z[a] += (dt * A(i, j)) * kcol(j);
        }
        Vec R(m * r);
        for (Index a = 0; a < m; ++a) R.segment(a * r, r) = K.segment(a * r, r) - column_rhs(st[unknowns[a]], z[a], c);
        rn = R.norm();
        if (rn <= opt_.newton.tol) {
          int prev = max_it.load();
          while (it > prev && !max_it.compare_exchange_weak(prev, it)) {
          }
          break;
        }
        if (it >= opt_.newton.max_iter || !std::isfinite(rn))
          throw StepFailure(c, rn, "prk_step: stage Newton did not converge for column " + std::to_string(c) +
                                       " (residual " + std::to_string(rn) + ")");
        Mat Jac = Mat::Identity(m * r, m * r);
        for (Index a = 0; a < m; ++a) {
          const Index i = unknowns[a];
          const Mat DG = column_jac(st[i], z[a], c);
          for (Index b = 0; b < m; ++b) {
            const double aij = A(i, unknowns[b]);
            if (aij != 0.0) Jac.block(a * r, b * r, r, r).noalias() -= (dt * aij) * DG;
          }
        }
        K -= Jac.partialPivLu().solve(R);
      }
      for (Index a = 0; a < m; ++a) k[unknowns[a]].col(c) = K.segment(a * r, r);
    });
    local.newton_iterations = std::max(local.newton_iterations, max_it.load());
  };

  sweep(false);
  std::vector<Mat> k_prev;
  for (int it = 1;; ++it) {
    solve_stages();
    local.coupling_iterations = it;
    if (!need_outer) break;
    if (it > 1) {
      double delta = 0.0;
      for (Index i : unknowns) delta = std::max(delta, (k[i] - k_prev[i]).norm());
      if (delta <= opt_.newton.tol) break;
    }
    if (it >= opt_.max_coupling_iter)
      throw StepFailure(-1, 0.0, "prk_step: stage coupling iteration did not converge");
    k_prev = k;
    sweep(false);
  }
  sweep(true);

  ReducedState next;
  next.coeffs = Z0;
  for (Index i = 0; i < s; ++i)
    if (tab_.b(i) != 0.0) next.coeffs.noalias() += (dt * tab_.b(i)) * k[i];
  if (freeze) {
    next.basis = U0;
  } else {
    Mat V = Mat::Zero(U0.full_dim(), r);
    for (Index i = 0; i < s; ++i)
      if (tab_.bhat(i) != 0.0) V.noalias() += (dt * tab_.bhat(i)) * st[i].khat;
    next.basis = retraction(U0, V);
  }
  if (stats) *stats = local;
  return next;
}

ReducedState prk_step(const HamiltonianModel &model, const ParameterSet &params, const ReducedState &state,
                      double dt, const ButcherPair &tableau, const PrkOptions &opt)
{
  return PrkIntegrator(model, params, tableau, opt).step(state, dt);
}

}  // namespace hamdlr
