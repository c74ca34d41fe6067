// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/models.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace hamdlr {

namespace {

SpMat select_block(Index N, Index block)
{
  std::vector<Triplet> t;
  for (Index i = 0; i < N; ++i) t.emplace_back(i, block * N + i, 1.0);
  SpMat P(N, 2 * N);
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

SpMat sparse_identity(Index n)
{
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

SpMat blkdiag(const SpMat &A, const SpMat &B)
{
  std::vector<Triplet> t;
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) t.emplace_back(A.rows() + it.row(), A.cols() + it.col(), it.value());
  SpMat C(A.rows() + B.rows(), A.cols() + B.cols());
  C.setFromTriplets(t.begin(), t.end());
  return C;
}

// Acts with the 1D operator D along one axis of an M x M grid stored x-fastest.
SpMat along_axis(const SpMat &D, Index M, int axis)
{
  std::vector<Triplet> t;
  for (Index k = 0; k < D.outerSize(); ++k)
    for (SpMat::InnerIterator it(D, k); it; ++it)
      for (Index o = 0; o < M; ++o) {
        if (axis == 0)
          t.emplace_back(o * M + it.row(), o * M + it.col(), it.value());
        else
          t.emplace_back(it.row() * M + o, it.col() * M + o, it.value());
      }
  SpMat A(M * M, M * M);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline Index wrap(Index i, Index M) { return (i % M + M) % M; }

// -- harmonic chain --------------------------------------------------------------------------

class Harmonic final : public HamiltonianModel {
 public:
  Harmonic(Index N, Interval dom, double kappa) : N_(N), kappa_(kappa), x_(periodic_grid(N, dom))
  {
    require(N >= 1, ErrorCode::kDimension, "harmonic: N >= 1");
    std::vector<Triplet> t;
    for (Index i = 0; i < N; ++i) {
      t.emplace_back(i, i, 1.0);
      if (kappa != 0.0 && N > 1) {
        t.emplace_back(i, i, 2.0 * kappa);
        t.emplace_back(i, wrap(i + 1, N), -kappa);
        t.emplace_back(i, wrap(i - 1, N), -kappa);
      }
    }
    SpMat K(N, N);
    K.setFromTriplets(t.begin(), t.end());
    poly_ = std::make_unique<PolynomialStructure>(2 * N);
    poly_->add({{sparse_identity(2 * N)}, blkdiag(K, sparse_identity(N)), {}, "quadratic"});
  }

  std::string name() const override { return "harmonic"; }
  Index half_dim() const override { return N_; }
  Index param_dim() const override { return 2; }

  double hamiltonian(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    double h = 0.0;
    for (Index i = 0; i < N_; ++i) {
      const double q = u(i), p = u(N_ + i), dq = u(wrap(i + 1, N_)) - q;
      h += 0.5 * (p * p + q * q + kappa_ * dq * dq);
    }
    return h;
  }

  Vec gradient(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    Vec g(2 * N_);
    for (Index i = 0; i < N_; ++i) {
      const double q = u(i);
      g(i) = q + kappa_ * (2.0 * q - u(wrap(i + 1, N_)) - u(wrap(i - 1, N_)));
      g(N_ + i) = u(N_ + i);
    }
    return g;
  }

  Mat initial_ensemble(const ParameterSet &params) const override
  {
    require(params.dim() == 2, ErrorCode::kDimension, "harmonic: parameters are (alpha, beta)");
    Mat R = Mat::Zero(2 * N_, params.size());
    for (Index j = 0; j < params.size(); ++j) {
      const double a = params.values()(0, j), b = params.values()(1, j);
      R.col(j).head(N_) = (a * (-b * x_.array().square()).exp()).matrix();
    }
    return R;
  }

 private:
  Index N_;
  double kappa_;
  Vec x_;
};

// -- shallow water -------------------------------------------------------------------------

class Swe final : public HamiltonianModel {
 public:
  Swe(Index M, Interval dom, int dims) : M_(M), dims_(dims), N_(dims == 1 ? M : M * M)
  {
    require(M >= 3, ErrorCode::kDimension, "swe: M >= 3");
    x_ = periodic_grid(M, dom);
    dx_ = (dom.hi - dom.lo) / static_cast<double>(M);

    const SpMat D1 = periodic_central_difference(M, dx_);
    const SpMat Ph = select_block(N_, 0), Pphi = select_block(N_, 1);
    poly_ = std::make_unique<PolynomialStructure>(2 * N_);
    poly_->add({{Ph}, SpMat(Ph.transpose()), {}, "h"});
    for (int axis = 0; axis < dims; ++axis) {
      const SpMat D = dims == 1 ? D1 : along_axis(D1, M, axis);
      const SpMat DPphi = D * Pphi;
      poly_->add({{DPphi, DPphi}, SpMat(0.5 * SpMat(Ph.transpose())), {}, "kinetic"});
      poly_->add({{Ph, DPphi}, SpMat(SpMat(Pphi.transpose()) * SpMat(D.transpose())), {}, "flux"});
    }
  }

  std::string name() const override { return dims_ == 1 ? "swe1d" : "swe2d"; }
  Index half_dim() const override { return N_; }
  Index param_dim() const override { return 2; }

  double hamiltonian(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    const Vec g = grad_phi2(u);
    double H = 0.0;
    for (Index k = 0; k < N_; ++k) H += 0.5 * (u(k) * g(k) + u(k) * u(k));
    return H;
  }

  Vec gradient(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    Vec g(2 * N_);
    const Vec s = grad_phi2(u);
    for (Index k = 0; k < N_; ++k) g(k) = 0.5 * s(k) + u(k);
    g.tail(N_).setZero();
    for (int axis = 0; axis < dims_; ++axis) {
      Vec w(N_);
      for (Index k = 0; k < N_; ++k) w(k) = u(k) * diff(u, N_, k, axis);
      for (Index k = 0; k < N_; ++k) g(N_ + k) -= diff(w, 0, k, axis);
    }
    return g;
  }

  Mat initial_ensemble(const ParameterSet &params) const override
  {
    require(params.dim() == 2, ErrorCode::kDimension, "swe: parameters are (alpha, beta)");
    Mat R = Mat::Zero(2 * N_, params.size());
    for (Index j = 0; j < params.size(); ++j) {
      const double a = params.values()(0, j), b = params.values()(1, j);
      for (Index k = 0; k < N_; ++k) {
        double r2 = x_(k % M_) * x_(k % M_);
        if (dims_ == 2) r2 += x_(k / M_) * x_(k / M_);
        R(k, j) = 1.0 + a * std::exp(-b * r2);
      }
    }
    return R;
  }

  Vec shift(const Vec &u) const override
  {
    if (dims_ == 1) return HamiltonianModel::shift(u);
    Vec s(u.size());
    for (Index b = 0; b < 2; ++b)
      for (Index j = 0; j < M_; ++j)
        for (Index i = 0; i < M_; ++i) s(b * N_ + j * M_ + (i + 1) % M_) = u(b * N_ + j * M_ + i);
    return s;
  }

 private:
  // Centered difference of v (starting at offset) at site k along axis.
  double diff(const Vec &v, Index offset, Index k, int axis) const
  {
    if (dims_ == 1 || axis == 0) {
      const Index i = k % M_, base = k - i;
      return (v(offset + base + wrap(i + 1, M_)) - v(offset + base + wrap(i - 1, M_))) / (2.0 * dx_);
    }
    const Index i = k % M_, j = k / M_;
    return (v(offset + wrap(j + 1, M_) * M_ + i) - v(offset + wrap(j - 1, M_) * M_ + i)) / (2.0 * dx_);
  }

  // sum over axes of (D phi)^2, per site.
  Vec grad_phi2(const Vec &u) const
  {
    Vec s = Vec::Zero(N_);
    for (int axis = 0; axis < dims_; ++axis)
      for (Index k = 0; k < N_; ++k) {
        const double d = diff(u, N_, k, axis);
        s(k) += d * d;
      }
    return s;
  }

  Index M_;
  int dims_;
  Index N_;
  double dx_ = 0.0;
  Vec x_;
};

// -- nonlinear Schroedinger ----------------------------------------------------------------

class Nls final : public HamiltonianModel {
 public:
  Nls(Index M, Interval dom, int dims, GammaMode mode, double gamma)
      : M_(M), dims_(dims), N_(dims == 1 ? M : M * M), mode_(mode), gamma_(gamma)
  {
    require(M >= 3, ErrorCode::kDimension, "nls: grid size >= 3");
    x_ = periodic_grid(M, dom);
    dx_ = (dom.hi - dom.lo) / static_cast<double>(M);

    const SpMat L1 = periodic_laplacian(M, dx_);
    const SpMat L = dims == 1 ? L1 : SpMat(along_axis(L1, M, 0) + along_axis(L1, M, 1));
    const SpMat Pq = select_block(N_, 0), Pv = select_block(N_, 1);
    const SpMat I2 = sparse_identity(2 * N_);
    poly_ = std::make_unique<PolynomialStructure>(2 * N_);
    poly_->add({{I2}, SpMat(-blkdiag(L, L)), {}, "laplacian"});
    auto stack = [&](const SpMat &P) {
      std::vector<Triplet> t;
      for (Index k = 0; k < P.outerSize(); ++k)
        for (SpMat::InnerIterator it(P, k); it; ++it) {
          t.emplace_back(it.row(), it.col(), it.value());
          t.emplace_back(N_ + it.row(), it.col(), it.value());
        }
      SpMat S(2 * N_, 2 * N_);
      S.setFromTriplets(t.begin(), t.end());
      return S;
    };
    auto w = [this](const Vec &eta) { return -gamma_of(eta); };
    poly_->add({{I2, stack(Pq), stack(Pq)}, I2, w, "cubic_q"});
    poly_->add({{I2, stack(Pv), stack(Pv)}, I2, w, "cubic_v"});
  }

  std::string name() const override { return dims_ == 1 ? "nls1d" : "nls2d"; }
  Index half_dim() const override { return N_; }
  Index param_dim() const override { return mode_ == GammaMode::kParametric ? 2 : (dims_ == 1 ? 1 : 2); }

  double gamma_of(const Vec &eta) const
  {
    return (dims_ == 1 && mode_ == GammaMode::kParametric) ? eta(1) : gamma_;
  }

  double hamiltonian(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    const double g = gamma_of(eta), s = 1.0 / (dx_ * dx_);
    double H = 0.0;
    for (Index k = 0; k < N_; ++k) {
      for (int axis = 0; axis < dims_; ++axis) {
        const Index nb = neighbor(k, axis);
        const double dq = u(nb) - u(k), dv = u(N_ + nb) - u(N_ + k);
        H += 0.5 * s * (dq * dq + dv * dv);
      }
      const double m2 = u(k) * u(k) + u(N_ + k) * u(N_ + k);
      H -= 0.25 * g * m2 * m2;
    }
    return H;
  }

  Vec gradient(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    const double g = gamma_of(eta), s = 1.0 / (dx_ * dx_);
    Vec out(2 * N_);
    for (Index k = 0; k < N_; ++k) {
      double lq = 0.0, lv = 0.0;
      for (int axis = 0; axis < dims_; ++axis) {
        const Index a = neighbor(k, axis), b = back(k, axis);
        lq += s * (u(a) - 2.0 * u(k) + u(b));
        lv += s * (u(N_ + a) - 2.0 * u(N_ + k) + u(N_ + b));
      }
      const double m2 = u(k) * u(k) + u(N_ + k) * u(N_ + k);
      out(k) = -lq - g * m2 * u(k);
      out(N_ + k) = -lv - g * m2 * u(N_ + k);
    }
    return out;
  }

  Mat initial_ensemble(const ParameterSet &params) const override
  {
    require(params.dim() == param_dim(), ErrorCode::kDimension, "nls: parameter dimension");
    Mat R(2 * N_, params.size());
    for (Index j = 0; j < params.size(); ++j) {
      const double a = params.values()(0, j);
      for (Index k = 0; k < N_; ++k) {
        if (dims_ == 1) {
          const double x = x_(k), amp = std::sqrt(2.0) / std::cosh(a * x);
          R(k, j) = amp * std::cos(0.5 * x);
          R(N_ + k, j) = amp * std::sin(0.5 * x);
        } else {
          const double b = params.values()(1, j);
          const double x = x_(k % M_), y = x_(k / M_);
          R(k, j) = (1.0 + a * std::sin(x)) * (2.0 + b * std::sin(y));
          R(N_ + k, j) = 0.0;
        }
      }
    }
    return R;
  }

  Vec shift(const Vec &u) const override
  {
    if (dims_ == 1) return HamiltonianModel::shift(u);
    Vec s(u.size());
    for (Index b = 0; b < 2; ++b)
      for (Index k = 0; k < N_; ++k) s(b * N_ + neighbor(k, 0)) = u(b * N_ + k);
    return s;
  }

 private:
  Index neighbor(Index k, int axis) const
  {
    const Index i = k % M_, j = k / M_;
    return axis == 0 ? j * M_ + wrap(i + 1, M_) : wrap(j + 1, M_) * M_ + i;
  }
  Index back(Index k, int axis) const
  {
    const Index i = k % M_, j = k / M_;
    return axis == 0 ? j * M_ + wrap(i - 1, M_) : wrap(j - 1, M_) * M_ + i;
  }

  Index M_;
  int dims_;
  Index N_;
  GammaMode mode_;
  double gamma_;
  double dx_ = 0.0;
  Vec x_;
};

// -- Vlasov particles in an external field ---------------------------------------------------

class Vlasov final : public HamiltonianModel {
 public:
  Vlasov(Index P, VlasovField field, std::uint64_t seed) : P_(P), field_(field), ux_(P), uv_(P)
  {
    require(P >= 1, ErrorCode::kDimension, "vlasov: P >= 1");
    require(field.domain.hi > field.domain.lo, ErrorCode::kParameter, "vlasov: empty domain");
    SplitMix64 rng(seed);
    for (Index l = 0; l < P; ++l) {
      ux_(l) = rng.uniform();
      uv_(l) = rng.uniform();
    }
    const SpMat PX = select_block(P, 0), PV = select_block(P, 1);
    poly_ = std::make_unique<PolynomialStructure>(2 * P);
    poly_->add({{PV}, SpMat(PV.transpose()), [](const Vec &eta) { return 1.0 / eta(2); }, "kinetic"});
    const double c = field.coefficient;
    poly_->add({{PX, PX, PX}, SpMat(PX.transpose()), [c](const Vec &) { return c; }, "potential"});
  }

  std::string name() const override { return "vlasov"; }
  Index half_dim() const override { return P_; }
  Index param_dim() const override { return 3; }

  double hamiltonian(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    const double eps = eta(2);
    double H = 0.0;
    for (Index l = 0; l < P_; ++l) {
      const double X = u(l), V = u(P_ + l);
      H += V * V / (2.0 * eps) + 0.25 * field_.coefficient * X * X * X * X;
    }
    return H;
  }

  Vec gradient(const Vec &u, const Vec &eta) const override
  {
    check_state(u, eta);
    Vec g(2 * P_);
    for (Index l = 0; l < P_; ++l) {
      const double X = u(l);
      g(l) = field_.coefficient * X * X * X;
      g(P_ + l) = u(P_ + l) / eta(2);
    }
    return g;
  }

  Mat initial_ensemble(const ParameterSet &params) const override
  {
    require(params.dim() == 3, ErrorCode::kDimension, "vlasov: parameters are (alpha, beta, eps)");
    Mat R(2 * P_, params.size());
    for (Index j = 0; j < params.size(); ++j) {
      const double alpha = params.values()(0, j), beta = params.values()(1, j);
      require(std::abs(beta) < 1.0, ErrorCode::kParameter, "vlasov: |beta| must be < 1");
      require(params.values()(2, j) > 0.0, ErrorCode::kParameter, "vlasov: eps must be positive");
      for (Index l = 0; l < P_; ++l) {
        R(l, j) = inverse_spatial_cdf(ux_(l), beta);
        R(P_ + l, j) = alpha * std::numbers::sqrt2 * boost::math::erf_inv(2.0 * uv_(l) - 1.0);
      }
    }
    return R;
  }

  // Spatial marginal (1 + beta cos(4 pi s / L)) / L, s = x - lo.
  double spatial_cdf(double x, double beta) const
  {
    const double L = field_.domain.hi - field_.domain.lo, s = x - field_.domain.lo;
    const double k = 4.0 * std::numbers::pi / L;
    return (s + beta * std::sin(k * s) / k) / L;
  }

 private:
  double inverse_spatial_cdf(double u, double beta) const
  {
    const double L = field_.domain.hi - field_.domain.lo, k = 4.0 * std::numbers::pi / L;
    double lo = 0.0, hi = L, s = u * L;
    for (int it = 0; it < 100; ++it) {
      const double F = (s + beta * std::sin(k * s) / k) / L - u;
      if (F > 0.0) hi = s; else lo = s;
      const double dF = (1.0 + beta * std::cos(k * s)) / L;
      double next = s - F / dF;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-15 * L) {
        s = next;
        break;
      }
      s = next;
    }
    return field_.domain.lo + s;
  }

  Index P_;
  VlasovField field_;
  Vec ux_, uv_;
};

}  // namespace

std::unique_ptr<HamiltonianModel> harmonic_model(Index N, Interval domain, double coupling)
{
  return std::make_unique<Harmonic>(N, domain, coupling);
}

std::unique_ptr<HamiltonianModel> swe1d_model(Index M, Interval domain)
{
  return std::make_unique<Swe>(M, domain, 1);
}

std::unique_ptr<HamiltonianModel> swe2d_model(Index M, Interval domain)
{
  return std::make_unique<Swe>(M, domain, 2);
}

std::unique_ptr<HamiltonianModel> nls1d_model(Index N, Interval domain, GammaMode mode, double gamma)
{
  return std::make_unique<Nls>(N, domain, 1, mode, gamma);
}

std::unique_ptr<HamiltonianModel> nls2d_model(Index M, Interval domain)
{
  return std::make_unique<Nls>(M, domain, 2, GammaMode::kFixed, 1.0);
}

std::unique_ptr<HamiltonianModel> vlasov_model(Index P, VlasovField field, std::uint64_t seed)
{
  return std::make_unique<Vlasov>(P, field, seed);
}

}  // namespace hamdlr
