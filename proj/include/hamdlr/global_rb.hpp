// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/full_order.hpp"
#include "hamdlr/reduced_operators.hpp"

#include <optional>

namespace hamdlr {

struct GlobalTrainingMeta {
  long snapshot_stride = 10;
  Index snapshot_count = 0;  // columns of the training matrix
  Index training_params = 0;
};

struct GlobalReducedModel {
  OrthosymplecticBasis basis;
  std::optional<TensorialOperator> reduced_ops;
  GlobalTrainingMeta meta;
  Vec singular_values;
};

// Complex-SVD basis of all stored training states, plus reduced operators built once.
GlobalReducedModel train_global(const HamiltonianModel &model, const SnapshotStore &store, Index half_rank,
                                bool tensorial = true);

// Implicit midpoint on z' = J_2n A^T grad H(A z) per column.
Mat global_midpoint_step(const GlobalReducedModel &grm, const HamiltonianModel &model, const Mat &Z,
                         const ParameterSet &params, double dt, const NewtonConfig &cfg);

struct GlobalTrajectory {
  SnapshotStore coeffs;
  SnapshotStore states;  // A z at the recorded times
};

GlobalTrajectory solve_reduced(const GlobalReducedModel &grm, const HamiltonianModel &model,
                               const ParameterSet &params, const Mat &Z0, double t0, double T, double dt,
                               const NewtonConfig &cfg, long stride, const StepObserver &observer = {});

}  // namespace hamdlr
