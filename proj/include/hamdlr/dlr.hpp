// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/full_order.hpp"
#include "hamdlr/reduced_operators.hpp"
#include "hamdlr/symplectic.hpp"

#include <map>

namespace hamdlr {

struct ReducedState {
  OrthosymplecticBasis basis;
  Mat coeffs;  // 2n x p

  Mat reconstruct() const { return basis.cols() * coeffs; }
  Index half_rank() const { return basis.half_rank(); }
  // rank S(Z) == 2n, judged on the PVL diagonal.
  bool full_rank(double rank_tol = 1e-10) const;
};

// Initial reduced state from the complex SVD of an ensemble, Z = U^T R.
ReducedState initial_reduced_state(const Mat &R0, Index half_rank);

// Partitioned pair: implicit (A, b) for Z and explicit (Ahat, bhat) for the basis.
struct ButcherPair {
  int order = 0;
  int stages = 0;
  Mat A, Ahat;
  Vec b, bhat;
  double K = 0.0;  // coefficient of z^4 in the explicit stability function, (3,4) only

  Vec c() const { return A.rowwise().sum(); }
  Vec chat() const { return Ahat.rowwise().sum(); }
  std::string label() const { return std::to_string(order) + "-" + std::to_string(stages); }
};

ButcherPair prk_tableau(int order, int stages, double K = 1.0 / 24.0);
ButcherPair prk_tableau(const std::string &label, double K = 1.0 / 24.0);

// Named residuals of the symplectic, order, and coupling conditions (all should vanish).
std::map<std::string, double> tableau_conditions(const ButcherPair &t);

struct BasisVelocityOptions {
  double eps_rel = 1e-8;    // eps = eps_rel * ||S||_2
  double rank_tol = 1e-10;  // regularize when min D <= rank_tol * max D
};

struct VelocityFieldEval {
  Mat f;  // 2N x 2n
  bool regularized = false;
  Index m_eps = 0;
};

// G = J_2n U^T grad H(U Z), through the tensorial operator when one is supplied.
Mat coefficient_velocity(const HamiltonianModel &model, const ReducedState &state, const ParameterSet &params,
                         const TensorialOperator *op = nullptr);

VelocityFieldEval basis_velocity(const ReducedState &state, const Mat &Y, const BasisVelocityOptions &opt = {});

// ||F^T U||_F and ||F J - J F||_F, relative to ||F||_F (0 when F = 0).
double horizontality_defect(const OrthosymplecticBasis &U, const Mat &F);
// Membership of V in the tangent space at Q, relative to ||V||_F.
double tangent_defect(const OrthosymplecticBasis &Q, const Mat &V);

OrthosymplecticBasis retraction(const OrthosymplecticBasis &Q, const Mat &V);
Mat inverse_tangent_map(const OrthosymplecticBasis &Q, const Mat &V, const Mat &F);
Mat inverse_tangent_map(const OrthosymplecticBasis &Q, const Mat &V, const Mat &F, const Mat &RQV);

struct PrkOptions {
  NewtonConfig newton;
  BasisVelocityOptions velocity;
  bool use_tensorial = true;
  bool freeze_basis = false;
  int max_coupling_iter = 50;
};

struct PrkStats {
  int newton_iterations = 0;
  int coupling_iterations = 0;
  bool regularized = false;
};

class PrkIntegrator {
 public:
  PrkIntegrator(const HamiltonianModel &model, ParameterSet params, ButcherPair tableau, PrkOptions opt = {});

  ReducedState step(const ReducedState &state, double dt, PrkStats *stats = nullptr) const;

  const ButcherPair &tableau() const { return tab_; }
  const PrkOptions &options() const { return opt_; }
  const ParameterSet &params() const { return params_; }

 private:
  struct Stage;
  Mat reduced_rhs(const Stage &st, const Mat &Z) const;

  const HamiltonianModel &model_;
  ParameterSet params_;
  ButcherPair tab_;
  PrkOptions opt_;
  Mat weights_;
  bool tensorial_ = false;
};

ReducedState prk_step(const HamiltonianModel &model, const ParameterSet &params, const ReducedState &state,
                      double dt, const ButcherPair &tableau, const PrkOptions &opt = {});

}  // namespace hamdlr
