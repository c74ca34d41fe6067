// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/common.hpp"

#include <memory>
#include <optional>

namespace hamdlr {

// Parameter samples eta_j stored as the columns of a d x p matrix.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(Mat values);

  // Tensor grid with counts[k] equispaced samples on [lower_k, upper_k] (midpoint if 1).
  // The first dimension varies fastest.
  static ParameterSet grid(const Vec &lower, const Vec &upper, const std::vector<int> &counts);

  Index dim() const { return values_.rows(); }
  Index size() const { return values_.cols(); }
  Vec operator[](Index j) const { return values_.col(j); }
  const Mat &values() const { return values_; }
  ParameterSet subset(const std::vector<Index> &idx) const;
  bool inside(const Vec &lower, const Vec &upper, double slack = 1e-12) const;

 private:
  Mat values_;
};

// One term B_t (prod_i A_{t,i} u) of the gradient, scaled by a parameter-dependent weight.
struct PolynomialTerm {
  std::vector<SpMat> factors;  // A_{t,i}: m x 2N
  SpMat output;                // B_t: 2N x m
  std::function<double(const Vec &)> weight;  // empty means 1
  std::string label;
  Index degree() const { return static_cast<Index>(factors.size()); }
};

class PolynomialStructure {
 public:
  explicit PolynomialStructure(Index full_dim) : full_dim_(full_dim) {}
  void add(PolynomialTerm term);

  Index full_dim() const { return full_dim_; }
  Index degree() const;
  const std::vector<PolynomialTerm> &terms() const { return terms_; }

  // terms x p matrix of weights for a parameter set.
  Mat weights(const ParameterSet &params) const;
  Vec term_weights(const Vec &eta) const;
  Vec gradient(const Vec &u, const Vec &w) const;
  SpMat hessian(const Vec &u, const Vec &w) const;

 private:
  Index full_dim_;
  std::vector<PolynomialTerm> terms_;
};

class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual std::string name() const = 0;
  virtual Index half_dim() const = 0;
  virtual Index param_dim() const = 0;
  Index full_dim() const { return 2 * half_dim(); }

  virtual double hamiltonian(const Vec &u, const Vec &eta) const = 0;
  // Direct (hand-coded) gradient, independent of the polynomial structure.
  virtual Vec gradient(const Vec &u, const Vec &eta) const = 0;
  virtual SpMat hessian(const Vec &u, const Vec &eta) const;
  Vec hessian_apply(const Vec &u, const Vec &eta, const Vec &v) const;
  SpMat hessian_fd(const Vec &u, const Vec &eta, double h = 1e-6) const;

  Mat gradient(const Mat &R, const ParameterSet &params) const;
  Vec hamiltonian(const Mat &R, const ParameterSet &params) const;

  const PolynomialStructure *polynomial() const { return poly_.get(); }
  virtual Mat initial_ensemble(const ParameterSet &params) const = 0;

  // Periodic shift of the state by one site (same Hamiltonian by translation invariance).
  virtual Vec shift(const Vec &u) const;

 protected:
  void check_state(const Vec &u, const Vec &eta) const;
  std::unique_ptr<PolynomialStructure> poly_;
};

struct Interval {
  double lo, hi;
};

// Periodic equispaced grid x_i = lo + i (hi - lo) / M.
Vec periodic_grid(Index M, Interval dom);
SpMat periodic_central_difference(Index M, double dx);
SpMat periodic_laplacian(Index M, double dx);

std::unique_ptr<HamiltonianModel> harmonic_model(Index N, Interval domain, double coupling = 0.0);
std::unique_ptr<HamiltonianModel> swe1d_model(Index M, Interval domain);
std::unique_ptr<HamiltonianModel> swe2d_model(Index M, Interval domain);

enum class GammaMode { kFixed, kParametric };
std::unique_ptr<HamiltonianModel> nls1d_model(Index N, Interval domain, GammaMode mode, double gamma = 1.0);
std::unique_ptr<HamiltonianModel> nls2d_model(Index M, Interval domain);

struct VlasovField {
  // External field Xi(x) = -coefficient * x^3.
  double coefficient = 1.0;
  Interval domain{-0.8, 0.8};
};
std::unique_ptr<HamiltonianModel> vlasov_model(Index P, VlasovField field = {}, std::uint64_t seed = 20240607);

// splitmix64 uniform stream on (0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();

 private:
  std::uint64_t state_;
};

}  // namespace hamdlr
