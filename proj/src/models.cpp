// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/models.hpp"

#include <cmath>

namespace hamdlr {

// -- ParameterSet --------------------------------------------------------------------------

ParameterSet::ParameterSet(Mat values) : values_(std::move(values))
{
  require(values_.cols() >= 1, ErrorCode::kParameter, "parameter set must be non-empty");
  require(values_.allFinite(), ErrorCode::kParameter, "parameter set has non-finite entries");
}

ParameterSet ParameterSet::grid(const Vec &lower, const Vec &upper, const std::vector<int> &counts)
{
  const Index d = lower.size();
  require(upper.size() == d && static_cast<Index>(counts.size()) == d, ErrorCode::kParameter,
          "parameter grid: dimension mismatch");
  Index p = 1;
  for (int c : counts) {
    require(c >= 1, ErrorCode::kParameter, "parameter grid: counts must be >= 1");
    p *= c;
  }
  Mat v(d, p);
  for (Index j = 0; j < p; ++j) {
    Index rem = j;
    for (Index k = 0; k < d; ++k) {
      const Index c = counts[k], i = rem % c;
      rem /= c;
      v(k, j) = c == 1 ? 0.5 * (lower(k) + upper(k))
                       : lower(k) + (upper(k) - lower(k)) * static_cast<double>(i) / static_cast<double>(c - 1);
    }
  }
  return ParameterSet(std::move(v));
}

ParameterSet ParameterSet::subset(const std::vector<Index> &idx) const
{
  Mat v(dim(), static_cast<Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    require(idx[k] >= 0 && idx[k] < size(), ErrorCode::kParameter, "parameter subset index out of range");
    v.col(k) = values_.col(idx[k]);
  }
  return ParameterSet(std::move(v));
}

bool ParameterSet::inside(const Vec &lower, const Vec &upper, double slack) const
{
  for (Index j = 0; j < size(); ++j)
    for (Index k = 0; k < dim(); ++k)
      if (values_(k, j) < lower(k) - slack || values_(k, j) > upper(k) + slack) return false;
  return true;
}

// -- PolynomialStructure -------------------------------------------------------------------

void PolynomialStructure::add(PolynomialTerm term)
{
  require(term.degree() >= 1, ErrorCode::kParameter, "polynomial term needs at least one factor");
  const Index m = term.factors.front().rows();
  for (const auto &A : term.factors)
    require(A.rows() == m && A.cols() == full_dim_, ErrorCode::kDimension, "polynomial factor shape");
  require(term.output.rows() == full_dim_ && term.output.cols() == m, ErrorCode::kDimension,
          "polynomial output shape");
  terms_.push_back(std::move(term));
}

Index PolynomialStructure::degree() const
{
  Index q = 0;
  for (const auto &t : terms_) q = std::max(q, t.degree());
  return q;
}

Vec PolynomialStructure::term_weights(const Vec &eta) const
{
  Vec w(static_cast<Index>(terms_.size()));
  for (size_t t = 0; t < terms_.size(); ++t) w(t) = terms_[t].weight ? terms_[t].weight(eta) : 1.0;
  return w;
}

Mat PolynomialStructure::weights(const ParameterSet &params) const
{
  Mat w(static_cast<Index>(terms_.size()), params.size());
  for (Index j = 0; j < params.size(); ++j) w.col(j) = term_weights(params[j]);
  return w;
}

Vec PolynomialStructure::gradient(const Vec &u, const Vec &w) const
{
  Vec g = Vec::Zero(full_dim_);
  for (size_t t = 0; t < terms_.size(); ++t) {
    if (w(t) == 0.0) continue;
    const auto &term = terms_[t];
    Vec prod = term.factors[0] * u;
    for (Index i = 1; i < term.degree(); ++i) prod.array() *= (term.factors[i] * u).array();
    g += w(t) * (term.output * prod);
  }
  return g;
}

SpMat PolynomialStructure::hessian(const Vec &u, const Vec &w) const
{
  SpMat H(full_dim_, full_dim_);
  for (size_t t = 0; t < terms_.size(); ++t) {
    if (w(t) == 0.0) continue;
    const auto &term = terms_[t];
    const Index q = term.degree();
    std::vector<Vec> ys;
    for (const auto &A : term.factors) ys.push_back(A * u);
    SpMat inner(term.output.cols(), full_dim_);
    for (Index i = 0; i < q; ++i) {
      Vec d = Vec::Ones(term.output.cols());
      for (Index k = 0; k < q; ++k)
        if (k != i) d.array() *= ys[k].array();
      SpMat scaled = d.asDiagonal() * term.factors[i];
      inner += scaled;
    }
    H += w(t) * (term.output * inner);
  }
  return H;
}

// -- HamiltonianModel ----------------------------------------------------------------------

void HamiltonianModel::check_state(const Vec &u, const Vec &eta) const
{
  if (u.size() != full_dim()) fail(ErrorCode::kDimension, name() + ": state has wrong length");
  if (eta.size() != param_dim()) fail(ErrorCode::kDimension, name() + ": parameter has wrong length");
}

SpMat HamiltonianModel::hessian(const Vec &u, const Vec &eta) const
{
  check_state(u, eta);
  if (poly_) return poly_->hessian(u, poly_->term_weights(eta));
  return hessian_fd(u, eta);
}

SpMat HamiltonianModel::hessian_fd(const Vec &u, const Vec &eta, double h) const
{
  const Index n = full_dim();
  std::vector<Triplet> trip;
  Vec up = u, um = u;
  for (Index k = 0; k < n; ++k) {
    const double step = h * std::max(1.0, std::abs(u(k)));
    up(k) = u(k) + step;
    um(k) = u(k) - step;
    const Vec col = (gradient(up, eta) - gradient(um, eta)) / (2.0 * step);
    up(k) = um(k) = u(k);
    for (Index i = 0; i < n; ++i)
      if (col(i) != 0.0) trip.emplace_back(i, k, col(i));
  }
  SpMat H(n, n);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

Vec HamiltonianModel::hessian_apply(const Vec &u, const Vec &eta, const Vec &v) const
{
  require(v.size() == full_dim(), ErrorCode::kDimension, "hessian_apply: direction length");
  return hessian(u, eta) * v;
}

Mat HamiltonianModel::gradient(const Mat &R, const ParameterSet &params) const
{
  require(R.rows() == full_dim() && R.cols() == params.size(), ErrorCode::kDimension,
          "gradient: ensemble shape mismatch");
  Mat G(R.rows(), R.cols());
  parallel_for(R.cols(), [&](Index j) { G.col(j) = gradient(Vec(R.col(j)), params[j]); });
  return G;
}

Vec HamiltonianModel::hamiltonian(const Mat &R, const ParameterSet &params) const
{
  require(R.rows() == full_dim() && R.cols() == params.size(), ErrorCode::kDimension,
          "hamiltonian: ensemble shape mismatch");
  Vec h(R.cols());
  for (Index j = 0; j < R.cols(); ++j) h(j) = hamiltonian(Vec(R.col(j)), params[j]);
  return h;
}

Vec HamiltonianModel::shift(const Vec &u) const
{
  const Index n = half_dim();
  Vec s(u.size());
  for (Index b = 0; b < 2; ++b)
    for (Index i = 0; i < n; ++i) s(b * n + (i + 1) % n) = u(b * n + i);
  return s;
}

// -- grids and difference operators -------------------------------------------------------

Vec periodic_grid(Index M, Interval dom)
{
  const double dx = (dom.hi - dom.lo) / static_cast<double>(M);
  Vec x(M);
  for (Index i = 0; i < M; ++i) x(i) = dom.lo + static_cast<double>(i) * dx;
  return x;
}

SpMat periodic_central_difference(Index M, double dx)
{
  std::vector<Triplet> t;
  for (Index i = 0; i < M; ++i) {
    t.emplace_back(i, (i + 1) % M, 0.5 / dx);
    t.emplace_back(i, (i + M - 1) % M, -0.5 / dx);
  }
  SpMat D(M, M);
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

SpMat periodic_laplacian(Index M, double dx)
{
  std::vector<Triplet> t;
  const double s = 1.0 / (dx * dx);
  for (Index i = 0; i < M; ++i) {
    t.emplace_back(i, (i + 1) % M, s);
    t.emplace_back(i, (i + M - 1) % M, s);
    t.emplace_back(i, i, -2.0 * s);
  }
  SpMat L(M, M);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

// -- SplitMix64 ----------------------------------------------------------------------------

std::uint64_t SplitMix64::next()
{
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform()
{
  // 53 random bits, centered in the cell so the result is never 0 or 1.
  return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace hamdlr
