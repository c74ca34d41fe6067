// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/reduced_operators.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>

using namespace hamdlr;
using hamdlr::testing::random_basis;
using hamdlr::testing::Rng;

namespace {

struct Case {
  std::unique_ptr<HamiltonianModel> model;
  ParameterSet params;
};

ParameterSet box(Rng &rng, std::vector<double> lo, std::vector<double> hi, Index p)
{
  Mat v(static_cast<Index>(lo.size()), p);
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < v.rows(); ++k) v(k, j) = rng.uniform(lo[k], hi[k]);
  return ParameterSet{v};
}

std::vector<Case> polynomial_cases(Rng &rng, Index p)
{
  std::vector<Case> out;
  out.push_back({harmonic_model(16, {-2, 2}, 0.4), box(rng, {0.5, 0.5}, {1.0, 2.0}, p)});
  out.push_back({swe1d_model(24, {-10, 10}), box(rng, {0.1, 0.2}, {1.0 / 7.0, 1.5}, p)});
  out.push_back({swe2d_model(6, {-3, 3}), box(rng, {0.1, 0.2}, {0.15, 1.5}, p)});
  out.push_back({nls1d_model(20, {-5, 5}, GammaMode::kParametric), box(rng, {0.98, 0.98}, {1.1, 1.1}, p)});
  out.push_back({nls2d_model(5, {-3, 3}), box(rng, {0.98, 0.98}, {1.1, 1.1}, p)});
  out.push_back({vlasov_model(12), box(rng, {0.07, 0.02, 0.4}, {0.09, 0.03, 0.8}, p)});
  return out;
}

}  // namespace

TEST_CASE("linear terms give a single constant matrix")
{
  auto m = harmonic_model(10, {-1, 1}, 0.3);
  Rng rng(41);
  const auto U = random_basis(rng, 10, 2);
  const auto op = TensorialOperator::precompute(*m, U);
  CHECK(op.degree() == 1);
  const Vec eta = Vec::Ones(2);
  const Vec w = m->polynomial()->term_weights(eta);
  const Mat oracle = poisson_matrix(2) * U.cols().transpose() * Mat(m->hessian(Vec::Zero(20), eta)) * U.cols();
  const Mat J1 = op.eval_jacobian(U.id(), rng.vector(4), w), J2 = op.eval_jacobian(U.id(), rng.vector(4), w);
  CHECK((J1 - oracle).norm() <= 1e-12 * oracle.norm());
  CHECK((J1 - J2).norm() == 0.0);
  const Vec z = rng.vector(4);
  CHECK((op.eval_column(z, w) - oracle * z).norm() <= 1e-12 * oracle.norm() * z.norm());
}

TEST_CASE("NLS cubic operator matches the direct path")
{
  auto m = nls1d_model(64, {-10, 10}, GammaMode::kFixed, 1.0);
  Rng rng(42);
  const auto U = random_basis(rng, 64, 2);
  const auto op = TensorialOperator::precompute(*m, U);
  CHECK(op.degree() == 3);
  const ParameterSet P{Mat::Ones(1, 5)};
  const Mat Z = rng.matrix(4, 5);
  const Mat direct = direct_reduced_rhs(*m, U, Z, P);
  const Mat tens = op.eval_rhs(U.id(), Z, m->polynomial()->weights(P));
  CHECK((tens - direct).norm() <= 1e-10 * direct.norm());
}

TEST_CASE("tensorial and direct paths agree for every polynomial model")
{
  Rng rng(43);
  for (auto &c : polynomial_cases(rng, 3)) {
    INFO(c.model->name());
    REQUIRE(c.model->polynomial() != nullptr);
    const Mat W = c.model->polynomial()->weights(c.params);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Index n = 1 + trial % 5;  // exercises both the dense and the factored form
      const auto U = random_basis(rng, c.model->half_dim(), n);
      const auto op = TensorialOperator::precompute(*c.model, U);
      const Mat Z = rng.matrix(2 * n, c.params.size());
      const Mat direct = direct_reduced_rhs(*c.model, U, Z, c.params);
      const Mat tens = op.eval_rhs(U.id(), Z, W);
      worst = std::max(worst, (tens - direct).norm() / std::max(direct.norm(), 1e-300));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("single-column quadratic SWE term matches a dense assembly")
{
  auto m = swe1d_model(16, {-10, 10});
  Rng rng(44);
  const auto U = random_basis(rng, 16, 2);
  const auto op = TensorialOperator::precompute(*m, U);
  const Vec z = rng.vector(4);
  const Vec eta = (Vec(2) << 0.12, 1.0).finished();
  const Vec w = m->polynomial()->term_weights(eta);
  // Dense oracle: sum_t w_t J U^T B_t (prod_i A_i U z).
  Vec g = Vec::Zero(32);
  const auto &terms = m->polynomial()->terms();
  for (std::size_t t = 0; t < terms.size(); ++t) {
    Vec prod = Vec::Ones(terms[t].factors[0].rows());
    for (const auto &A : terms[t].factors) prod.array() *= (Mat(A) * U.cols() * z).array();
    g += w(static_cast<Index>(t)) * (Mat(terms[t].output) * prod);
  }
  const Vec oracle = poisson_matrix(2) * U.cols().transpose() * g;
  CHECK((op.eval_column(z, w) - oracle).norm() <= 1e-11 * oracle.norm());
}

TEST_CASE("zero and duplicated coefficients")
{
  Rng rng(45);
  for (auto &c : polynomial_cases(rng, 2)) {
    INFO(c.model->name());
    const auto U = random_basis(rng, c.model->half_dim(), 2);
    const auto op = TensorialOperator::precompute(*c.model, U);
    const Mat W = c.model->polynomial()->weights(c.params);
    if (c.model->polynomial()->degree() >= 2 && c.model->name().rfind("vlasov", 0) != 0)
      CHECK(op.eval_rhs(U.id(), Mat::Zero(4, 2), W).norm() == 0.0);
    Mat Z(4, 2);
    Z.col(0) = rng.vector(4);
    Z.col(1) = Z.col(0);
    Mat Wd(W.rows(), 2);
    Wd.col(0) = W.col(0);
    Wd.col(1) = W.col(0);
    const Mat out = op.eval_rhs(U.id(), Z, Wd);
    CHECK((out.col(0) - out.col(1)).norm() == 0.0);
  }
}

TEST_CASE("reduced Jacobian: finite differences and Hamiltonian symmetry")
{
  Rng rng(46);
  for (auto &c : polynomial_cases(rng, 1)) {
    INFO(c.model->name());
    const auto U = random_basis(rng, c.model->half_dim(), 3);
    const auto op = TensorialOperator::precompute(*c.model, U);
    const Vec w = c.model->polynomial()->term_weights(c.params[0]);
    const Vec z = rng.vector(6), v = rng.vector(6);
    const Mat Jac = op.eval_jacobian(U.id(), z, w);
    const Mat sym = poisson_matrix(3).transpose() * Jac;
    CHECK((sym - sym.transpose()).norm() <= 1e-10 * std::max(sym.norm(), 1.0));
    CHECK((Jac - direct_reduced_jacobian(*c.model, U, z, c.params[0])).norm() <= 1e-10 * std::max(Jac.norm(), 1.0));

    auto fd_err = [&](double h) {
      const Vec fd = (op.eval_column(z + h * v, w) - op.eval_column(z - h * v, w)) / (2 * h);
      return (fd - Jac * v).norm();
    };
    const double e1 = fd_err(1e-2), e2 = fd_err(1e-3);
    if (c.model->polynomial()->degree() <= 2) {
      CHECK(e1 <= 1e-8 * std::max(Jac.norm(), 1.0));  // central differences are exact up to roundoff
    } else {
      CHECK(std::log10(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    }
  }
}

TEST_CASE("stale operators and unsupported models")
{
  auto m = swe1d_model(12, {-10, 10});
  Rng rng(47);
  const auto U = random_basis(rng, 12, 2);
  const auto op = TensorialOperator::precompute(*m, U);
  CHECK(op.built_for(U));
  const auto V = random_basis(rng, 12, 3);
  CHECK(!op.built_for(V));
  const Mat W = m->polynomial()->weights(ParameterSet{Mat::Constant(2, 1, 0.5)});
  try {
    op.eval_rhs(V.id(), rng.matrix(4, 1), W);
    FAIL("expected a stale-operator error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kStaleOperator);
  }
  CHECK_THROWS_AS(op.eval_jacobian(V.id(), rng.vector(4), W.col(0)), Error);

  // Rebuilding for the enlarged basis updates id and sizes together.
  const auto op2 = TensorialOperator::precompute(*m, V);
  CHECK(op2.basis_id() == V.id());
  CHECK(op2.rank() == 6);
  CHECK(op2.eval_rhs(V.id(), rng.matrix(6, 1), W).rows() == 6);

  // A copy of a basis keeps its id; a basis built from the same values gets a new one.
  const OrthosymplecticBasis copy = U;
  CHECK(op.built_for(copy));
  CHECK(!op.built_for(OrthosymplecticBasis(U.cols())));
}

TEST_CASE("reduced evaluation cost does not grow with N")
{
  Rng rng(48);
  const Index p = 16, n = 3;
  auto time_eval = [&](Index N) {
    auto m = nls1d_model(N, {-20, 20}, GammaMode::kFixed, 1.0);
    const auto U = random_basis(rng, N, n);
    const auto op = TensorialOperator::precompute(*m, U);
    const Mat W = m->polynomial()->weights(ParameterSet{Mat::Ones(1, p)});
    const Mat Z = rng.matrix(2 * n, p);
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      Mat out;
      for (int k = 0; k < 20; ++k) out = op.eval_rhs(U.id(), Z, W);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
      CHECK(out.allFinite());
    }
    return best;
  };
  const double a = time_eval(1000), b = time_eval(4000);
  MESSAGE("eval time N=1000: " << a << " s, N=4000: " << b << " s");
  CHECK(b / a <= 1.3);
}
