// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/dlr.hpp"

namespace hamdlr {

struct ErrorIndicator {
  Mat E;  // 2N x |subset|
  double norm = 0.0;
  double time = 0.0;
};

// First-order error estimate from the midpoint residual of consecutive reduced states
// (columns restricted to the indicator subset):
//   E = -(I - dt/2 J Hess)^{-1} (rho + (-I - dt/2 J Hess) prev_error),
// with the Hessian taken at the midpoint. prev_error defaults to zero.
ErrorIndicator error_indicator(const HamiltonianModel &model, const Mat &R_now, const Mat &R_prev,
                               const ParameterSet &subset_params, double dt, double time,
                               const Mat *prev_error = nullptr);

ErrorIndicator error_indicator(const HamiltonianModel &model, const ReducedState &now, const ReducedState &prev,
                               const ParameterSet &params, const std::vector<Index> &subset, double dt,
                               double time, const Mat *prev_error = nullptr);

struct AdaptiveController {
  double r = 1.1;
  double c = 1.2;
  int lambda = 0;
  double e_star_norm = 0.0;
  double t_star = 0.0;
  bool seeded = false;
  long stride = 100;
  std::vector<Index> subset;
  Index max_rank = 0;  // cap on 2n; 0 means no cap beyond 2N

  void validate() const;
  double threshold() const;
  // First call seeds e_star and returns false; afterwards ||E|| / ||E_*|| > r c^lambda.
  bool should_update(const ErrorIndicator &e);
  void record_update(const ErrorIndicator &e);
};

struct RankUpdateResult {
  ReducedState state;
  bool applied = false;
  std::string reason;  // why the update was skipped
};

RankUpdateResult rank_update(const ReducedState &state, const ErrorIndicator &e, Index max_rank = 0);

struct RankDecreaseResult {
  ReducedState state;
  bool dropped = false;
  double ratio = 0.0;  // D_min / D_max of S(Z)
};

// Rotates into the PVL frame of S(Z) and drops the trailing pair when D_min / D_max < threshold.
RankDecreaseResult rank_decrease(const ReducedState &state, double threshold);

}  // namespace hamdlr
