// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/full_order.hpp"

#include "hamdlr/symplectic.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>

namespace hamdlr {

void NewtonConfig::validate() const
{
  if (!(tol > 0.0)) fail(ErrorCode::kConfig, "newton tol must be positive");
  if (max_iter < 1) fail(ErrorCode::kConfig, "newton max_iter must be >= 1");
}

void SnapshotStore::push(long step, double t, Mat state)
{
  if (!times.empty() && !(t > times.back() && step > steps.back()))
    fail(ErrorCode::kParameter, "snapshot times must be strictly increasing");
  times.push_back(t);
  steps.push_back(step);
  states.push_back(std::move(state));
}

const Mat *SnapshotStore::at_step(long step) const
{
  auto it = std::lower_bound(steps.begin(), steps.end(), step);
  if (it == steps.end() || *it != step) return nullptr;
  return &states[static_cast<size_t>(it - steps.begin())];
}

namespace {

// Sparse LU that reuses its symbolic analysis while the sparsity pattern is unchanged.
class CachedLU {
 public:
  void factorize(const SpMat &A)
  {
    const bool same = lu_ && A.rows() == rows_ && A.nonZeros() == static_cast<Index>(inner_.size()) &&
                      std::equal(outer_.begin(), outer_.end(), A.outerIndexPtr()) &&
                      std::equal(inner_.begin(), inner_.end(), A.innerIndexPtr());
    if (!same) {
      lu_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
      lu_->analyzePattern(A);
      rows_ = A.rows();
      outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
      inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
    }
    lu_->factorize(A);
    ok_ = lu_->info() == Eigen::Success;
  }
  bool ok() const { return ok_; }
  Vec solve(const Vec &b) const { return lu_->solve(b); }

 private:
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
  Index rows_ = -1;
  std::vector<int> outer_, inner_;
  bool ok_ = false;
};

SpMat midpoint_jacobian(const HamiltonianModel &model, const Vec &mid, const Vec &eta, double dt,
                        JacobianMode mode)
{
  const Index n = model.full_dim();
  const SpMat H = mode == JacobianMode::kAnalytic ? model.hessian(mid, eta) : model.hessian_fd(mid, eta);
  SpMat A = -(0.5 * dt) * (poisson_sparse(n / 2) * H);
  SpMat I(n, n);
  I.setIdentity();
  A += I;
  A.makeCompressed();
  return A;
}

Vec apply_J(const Vec &g)
{
  const Index n = g.size() / 2;
  Vec y(g.size());
  y.head(n) = g.tail(n);
  y.tail(n) = -g.head(n);
  return y;
}

}  // namespace

Vec midpoint_residual(const HamiltonianModel &model, const Vec &u_next, const Vec &u_prev, const Vec &eta,
                      double dt)
{
  const Vec mid = 0.5 * (u_next + u_prev);
  return u_next - u_prev - dt * apply_J(model.gradient(mid, eta));
}

Vec implicit_midpoint_column(const HamiltonianModel &model, const Vec &u_prev, const Vec &eta, double dt,
                             const NewtonConfig &cfg, Index column, int *iterations)
{
  require(u_prev.size() == model.full_dim(), ErrorCode::kDimension, "midpoint: state length");
  thread_local CachedLU lu;
  Vec u = u_prev + dt * apply_J(model.gradient(u_prev, eta));
  double rn = 0.0;
  for (int it = 0;; ++it) {
    const Vec mid = 0.5 * (u + u_prev);
    const Vec r = u - u_prev - dt * apply_J(model.gradient(mid, eta));
    rn = r.norm();
    if (rn <= cfg.tol) {
      if (iterations) *iterations = it;
      return u;
    }
    if (it >= cfg.max_iter || !std::isfinite(rn)) break;
    lu.factorize(midpoint_jacobian(model, mid, eta, dt, cfg.jacobian));
    if (!lu.ok()) break;
    u -= lu.solve(r);
  }
  throw StepFailure(column, rn,
                    "implicit midpoint: Newton did not converge for column " + std::to_string(column) +
                        " (residual " + std::to_string(rn) + ")");
}

Mat implicit_midpoint_step(const HamiltonianModel &model, const Mat &R_prev, const ParameterSet &params,
                           double dt, const NewtonConfig &cfg)
{
  cfg.validate();
  require(dt != 0.0 && std::isfinite(dt), ErrorCode::kParameter, "midpoint: dt must be nonzero");
  require(R_prev.rows() == model.full_dim() && R_prev.cols() == params.size(), ErrorCode::kDimension,
          "midpoint: ensemble shape mismatch");
  Mat R(R_prev.rows(), R_prev.cols());
  parallel_for(R.cols(), [&](Index j) {
    R.col(j) = implicit_midpoint_column(model, Vec(R_prev.col(j)), params[j], dt, cfg, j);
  });
  return R;
}

long step_count(double t0, double T, double dt)
{
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::kParameter, "dt must be positive");
  const double span = T - t0;
  require(span >= 0.0, ErrorCode::kParameter, "time span must be nonnegative");
  const double k = std::round(span / dt);
  if (std::abs(k * dt - span) > 1e-12 * std::max(1.0, std::abs(span)))
    fail(ErrorCode::kParameter, "dt does not divide the time span");
  return static_cast<long>(k);
}

SnapshotStore solve_ensemble(const HamiltonianModel &model, const ParameterSet &params, const Mat &R0,
                             double t0, double T, double dt, const NewtonConfig &cfg, long stride,
                             const StepObserver &observer)
{
  require(stride >= 1, ErrorCode::kParameter, "store stride must be >= 1");
  const long steps = step_count(t0, T, dt);
  SnapshotStore store;
  store.stride = stride;
  store.push(0, t0, R0);
  if (observer) observer(0, t0, R0);
  Mat R = R0;
  for (long k = 1; k <= steps; ++k) {
    R = implicit_midpoint_step(model, R, params, dt, cfg);
    const double t = t0 + static_cast<double>(k) * dt;
    if (k % stride == 0 || k == steps) store.push(k, t, R);
    if (observer) observer(k, t, R);
  }
  return store;
}

Vec singular_values(const Mat &S)
{
  if (S.size() == 0) return Vec();
  Eigen::BDCSVD<Mat> svd(S);
  return svd.singularValues();
}

Index epsilon_rank(const Mat &S, double eps)
{
  const Vec s = singular_values(S);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) / s(0) > eps) ++r;
  return r;
}

Vec singular_spectrum(const SnapshotStore &store, SpectrumMode mode)
{
  require(!store.empty(), ErrorCode::kParameter, "singular_spectrum: empty store");
  auto normalized = [](Vec s) {
    if (s.size() && s(0) > 0.0) s /= s(0);
    return s;
  };
  if (mode == SpectrumMode::kGlobal) {
    const Index rows = store.states.front().rows();
    Index cols = 0;
    for (const auto &S : store.states) cols += S.cols();
    Mat all(rows, cols);
    Index off = 0;
    for (const auto &S : store.states) {
      all.middleCols(off, S.cols()) = S;
      off += S.cols();
    }
    return normalized(singular_values(all));
  }
  Index len = 0;
  std::vector<Vec> per;
  for (const auto &S : store.states) {
    per.push_back(normalized(singular_values(S)));
    len = std::max(len, per.back().size());
  }
  Vec avg = Vec::Zero(len);
  for (const auto &s : per) avg.head(s.size()) += s;
  return avg / static_cast<double>(per.size());
}

}  // namespace hamdlr
