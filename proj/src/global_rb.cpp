// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/global_rb.hpp"

#include <Eigen/LU>

#include <cmath>

namespace hamdlr {

GlobalReducedModel train_global(const HamiltonianModel &model, const SnapshotStore &store, Index half_rank,
                                bool tensorial)
{
  require(!store.empty(), ErrorCode::kParameter, "train_global: empty snapshot store");
  const Index rows = store.states.front().rows();
  require(rows == model.full_dim(), ErrorCode::kDimension, "train_global: snapshot/model dimension mismatch");
  Index cols = 0;
  for (const auto &S : store.states) cols += S.cols();
  if (half_rank < 1 || half_rank > std::min(rows / 2, cols))
    fail(ErrorCode::kDimension, "train_global: half rank too large for the snapshot count");
  Mat all(rows, cols);
  Index off = 0;
  for (const auto &S : store.states) {
    all.middleCols(off, S.cols()) = S;
    off += S.cols();
  }
  ComplexSvdBasis c = complex_svd_basis(all, half_rank);
  GlobalReducedModel g;
  g.basis = std::move(c.basis);
  g.singular_values = std::move(c.singular_values);
  g.meta.snapshot_stride = store.stride;
  g.meta.snapshot_count = cols;
  g.meta.training_params = store.states.front().cols();
  if (tensorial && model.polynomial()) g.reduced_ops = TensorialOperator::precompute(model, g.basis);
  return g;
}

Mat global_midpoint_step(const GlobalReducedModel &grm, const HamiltonianModel &model, const Mat &Z,
                         const ParameterSet &params, double dt, const NewtonConfig &cfg)
{
  cfg.validate();
  const Index r = grm.basis.rank();
  require(Z.rows() == r && Z.cols() == params.size(), ErrorCode::kDimension, "global step: coefficient shape");
  const Mat *W = nullptr;
  Mat weights;
  if (grm.reduced_ops) {
    weights = model.polynomial()->weights(params);
    W = &weights;
  }
  auto rhs = [&](const Vec &z, Index c) -> Vec {
    if (W) return grm.reduced_ops->eval_column(z, W->col(c));
    const Vec y = model.gradient(Vec(grm.basis.cols() * z), params[c]);
    return poisson_apply(Mat(grm.basis.cols().transpose() * y));
  };
  auto jac = [&](const Vec &z, Index c) -> Mat {
    if (W) return grm.reduced_ops->jacobian_column(z, W->col(c));
    return direct_reduced_jacobian(model, grm.basis, z, params[c]);
  };

  Mat out(r, Z.cols());
  parallel_for(Z.cols(), [&](Index c) {
    const Vec zp = Z.col(c);
    Vec z = zp + dt * rhs(zp, c);
    double rn = 0.0;
    for (int it = 0;; ++it) {
      const Vec mid = 0.5 * (z + zp);
      const Vec res = z - zp - dt * rhs(mid, c);
      rn = res.norm();
      if (rn <= cfg.tol) break;
      if (it >= cfg.max_iter || !std::isfinite(rn))
        throw StepFailure(c, rn, "global reduced midpoint: Newton did not converge for column " + std::to_string(c));
      const Mat Jm = Mat::Identity(r, r) - (0.5 * dt) * jac(mid, c);
      z -= Jm.partialPivLu().solve(res);
    }
    out.col(c) = z;
  });
  return out;
}

GlobalTrajectory solve_reduced(const GlobalReducedModel &grm, const HamiltonianModel &model,
                               const ParameterSet &params, const Mat &Z0, double t0, double T, double dt,
                               const NewtonConfig &cfg, long stride, const StepObserver &observer)
{
  require(stride >= 1, ErrorCode::kParameter, "solve_reduced: stride must be >= 1");
  const long steps = step_count(t0, T, dt);
  GlobalTrajectory tr;
  tr.coeffs.stride = tr.states.stride = stride;
  Mat Z = Z0;
  auto record = [&](long k, double t) {
    tr.coeffs.push(k, t, Z);
    tr.states.push(k, t, grm.basis.cols() * Z);
  };
  record(0, t0);
  if (observer) observer(0, t0, Z);
  for (long k = 1; k <= steps; ++k) {
    Z = global_midpoint_step(grm, model, Z, params, dt, cfg);
    const double t = t0 + static_cast<double>(k) * dt;
    if (k % stride == 0 || k == steps) record(k, t);
    if (observer) observer(k, t, Z);
  }
  return tr;
}

}  // namespace hamdlr
