// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/models.hpp"

namespace hamdlr {

enum class JacobianMode { kAnalytic, kFiniteDifference };

struct NewtonConfig {
  double tol = 1e-10;  // absolute, on the residual 2-norm
  int max_iter = 50;
  JacobianMode jacobian = JacobianMode::kAnalytic;
  void validate() const;
};

struct SnapshotStore {
  std::vector<double> times;
  std::vector<long> steps;
  std::vector<Mat> states;
  long stride = 1;

  void push(long step, double t, Mat state);
  Index size() const { return static_cast<Index>(states.size()); }
  bool empty() const { return states.empty(); }
  // State recorded at a given step index, or nullptr.
  const Mat *at_step(long step) const;
};

// One implicit-midpoint step u+ = u- + dt J grad H((u+ + u-)/2) per column, solved by
// Newton with a sparse LU of I - dt/2 J Hess H. Negative dt steps backwards.
Vec implicit_midpoint_column(const HamiltonianModel &model, const Vec &u_prev, const Vec &eta, double dt,
                             const NewtonConfig &cfg, Index column = 0, int *iterations = nullptr);
Mat implicit_midpoint_step(const HamiltonianModel &model, const Mat &R_prev, const ParameterSet &params,
                           double dt, const NewtonConfig &cfg);

// Midpoint residual rho(R+, R-) = R+ - R- - dt J grad H((R+ + R-)/2), per column.
Vec midpoint_residual(const HamiltonianModel &model, const Vec &u_next, const Vec &u_prev, const Vec &eta,
                      double dt);

// Number of steps covering [t0, T] with step dt; throws if dt does not divide the span.
long step_count(double t0, double T, double dt);

using StepObserver = std::function<void(long step, double t, const Mat &R)>;

// Integrates from R0 over [t0, T]; records the initial state, every stride-th step, and the
// final state.
SnapshotStore solve_ensemble(const HamiltonianModel &model, const ParameterSet &params, const Mat &R0,
                             double t0, double T, double dt, const NewtonConfig &cfg, long stride,
                             const StepObserver &observer = {});

Vec singular_values(const Mat &S);
Index epsilon_rank(const Mat &S, double eps);

enum class SpectrumMode { kGlobal, kAveraged };
Vec singular_spectrum(const SnapshotStore &store, SpectrumMode mode);

}  // namespace hamdlr
