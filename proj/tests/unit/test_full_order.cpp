// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/full_order.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hamdlr;
using hamdlr::testing::Rng;

namespace {

ParameterSet swe_params(std::vector<int> counts)
{
  Vec lo(2), hi(2);
  lo << 0.1, 0.2;
  hi << 1.0 / 7.0, 1.5;
  return ParameterSet::grid(lo, hi, counts);
}

}  // namespace

TEST_CASE("midpoint step on the one-dof oscillator matches the Cayley map")
{
  auto m = harmonic_model(1, {0, 1});
  Mat R(2, 1);
  R << 1.0, 0.0;
  const ParameterSet P{Mat::Zero(2, 1)};
  NewtonConfig cfg;
  cfg.tol = 1e-14;
  const Mat R1 = implicit_midpoint_step(*m, R, P, 0.1, cfg);
  const double dt = 0.1, den = 1 + dt * dt / 4;
  CHECK(R1(0, 0) == doctest::Approx((1 - dt * dt / 4) / den).epsilon(1e-14));
  CHECK(R1(1, 0) == doctest::Approx(-dt / den).epsilon(1e-14));
  CHECK(R1(0, 0) == doctest::Approx(0.99501247).epsilon(1e-8));
  CHECK(R1(1, 0) == doctest::Approx(-0.09975062).epsilon(1e-7));
}

TEST_CASE("midpoint conserves quadratic Hamiltonians and is time reversible")
{
  auto m = harmonic_model(24, {-5, 5}, 0.5);
  Vec lo(2), hi(2);
  lo << 0.5, 0.5;
  hi << 1.0, 2.0;
  const auto P = ParameterSet::grid(lo, hi, {2, 3});
  const Mat R0 = m->initial_ensemble(P);
  NewtonConfig cfg;
  cfg.tol = 1e-13;
  const Mat R1 = implicit_midpoint_step(*m, R0, P, 0.05, cfg);
  const Vec h0 = m->hamiltonian(R0, P), h1 = m->hamiltonian(R1, P);
  CHECK((h1 - h0).cwiseAbs().maxCoeff() <= 1e-10);
  const Mat back = implicit_midpoint_step(*m, R1, P, -0.05, cfg);
  CHECK((back - R0).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("midpoint is second order on SWE-1D")
{
  auto m = swe1d_model(64, {-10, 10});
  const auto P = swe_params({2, 1});
  const Mat R0 = m->initial_ensemble(P);
  NewtonConfig cfg;
  cfg.tol = 1e-12;
  const double T = 0.4;
  auto final = [&](double dt) { return solve_ensemble(*m, P, R0, 0.0, T, dt, cfg, 1000000).states.back(); };
  const Mat a = final(0.02), b = final(0.01), c = final(0.005);
  const double e1 = (a - b).norm(), e2 = (b - c).norm();
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("Newton failure carries the column and residual")
{
  auto m = nls1d_model(16, {-5, 5}, GammaMode::kFixed, 1.0);
  Mat R = Mat::Zero(32, 2);
  R.col(1).setConstant(50.0);  // strongly nonlinear column
  const ParameterSet P{Mat::Ones(1, 2)};
  NewtonConfig cfg;
  cfg.max_iter = 2;
  cfg.tol = 1e-14;
  try {
    implicit_midpoint_step(*m, R, P, 0.5, cfg);
    FAIL("expected a step failure");
  } catch (const StepFailure &e) {
    CHECK(e.code() == ErrorCode::kStepFailure);
    CHECK(e.column() == 1);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("Newton config validation")
{
  NewtonConfig c;
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.tol = 1e-10;
  c.max_iter = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("finite-difference Jacobians converge to the same step")
{
  auto m = swe1d_model(32, {-10, 10});
  const auto P = swe_params({2, 1});
  const Mat R0 = m->initial_ensemble(P);
  NewtonConfig a, f;
  a.tol = f.tol = 1e-12;
  f.jacobian = JacobianMode::kFiniteDifference;
  CHECK((implicit_midpoint_step(*m, R0, P, 1e-2, a) - implicit_midpoint_step(*m, R0, P, 1e-2, f)).norm() <= 1e-10);
}

TEST_CASE("solve_ensemble bookkeeping")
{
  auto m = harmonic_model(8, {-2, 2}, 0.3);
  const ParameterSet P{Mat::Ones(2, 3)};
  Rng rng(21);
  const Mat R0 = rng.matrix(16, 3);
  NewtonConfig cfg;

  const auto none = solve_ensemble(*m, P, R0, 0.0, 0.0, 0.1, cfg, 1);
  CHECK(none.size() == 1);
  CHECK(none.states[0] == R0);

  const auto s = solve_ensemble(*m, P, R0, 0.0, 1.0, 0.1, cfg, 3);
  std::vector<long> expect{0, 3, 6, 9, 10};
  CHECK(s.steps == expect);
  CHECK(s.times.back() == doctest::Approx(1.0));
  Mat R = R0;
  for (int k = 0; k < 10; ++k) R = implicit_midpoint_step(*m, R, P, 0.1, cfg);
  CHECK((R - s.states.back()).norm() == 0.0);
  CHECK(s.at_step(6) != nullptr);
  CHECK(s.at_step(5) == nullptr);

  CHECK_THROWS_AS(solve_ensemble(*m, P, R0, 0.0, 1.0, 0.3, cfg, 1), Error);
  CHECK(step_count(0.0, 7.0, 1e-3) == 7000);

  // Permuting columns commutes with the solve.
  Mat Rp(16, 3);
  Rp << R0.col(2), R0.col(0), R0.col(1);
  const auto sp = solve_ensemble(*m, P, Rp, 0.0, 1.0, 0.1, cfg, 10);
  CHECK((sp.states.back().col(0) - s.states.back().col(2)).norm() <= 1e-14);
  CHECK((sp.states.back().col(1) - s.states.back().col(0)).norm() <= 1e-14);

  SnapshotStore bad;
  bad.push(0, 0.0, R0);
  CHECK_THROWS_AS(bad.push(0, 0.0, R0), Error);
}

namespace {

double vlasov_drift(double dt)
{
  auto m = vlasov_model(200);
  Vec lo(3), hi(3);
  lo << 0.07, 0.02, 0.4;
  hi << 0.09, 0.03, 0.8;
  const auto P = ParameterSet::grid(lo, hi, {2, 2, 2});
  const Mat R0 = m->initial_ensemble(P);
  NewtonConfig cfg;
  cfg.tol = 1e-12;
  const Vec h0 = m->hamiltonian(R0, P);
  double drift = 0.0;
  solve_ensemble(*m, P, R0, 0.0, 2.0, dt, cfg, 1000000, [&](long, double, const Mat &R) {
    const Vec h = m->hamiltonian(R, P);
    drift = std::max(drift, ((h - h0).array() / h0.array()).abs().maxCoeff());
  });
  return drift;
}

}  // namespace

// Midpoint does not conserve the quartic potential exactly; the drift is a bounded
// O(dt^2) oscillation (about 1.6e-7 at dt = 1e-3), so the 1e-8 level needs dt = 2e-4.
TEST_CASE("Vlasov desk ensemble conserves the Hamiltonian")
{
  const double d1 = vlasov_drift(1e-3), d2 = vlasov_drift(5e-4), d3 = vlasov_drift(2e-4);
  MESSAGE("max relative drift at dt = 1e-3, 5e-4, 2e-4: " << d1 << " " << d2 << " " << d3);
  CHECK(std::log2(d1 / d2) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(d3 <= 1e-8);
}

TEST_CASE("epsilon rank")
{
  CHECK(epsilon_rank(Mat::Identity(5, 5), 0.5) == 5);
  Rng rng(22);
  CHECK(epsilon_rank(rng.vector(6) * rng.vector(4).transpose(), 1e-9) == 1);
  Vec d(3);
  d << 1.0, 1e-2, 1e-6;
  CHECK(epsilon_rank(Mat(d.asDiagonal()), 1e-4) == 2);
  CHECK(epsilon_rank(Mat::Zero(3, 3), 0.1) == 0);
}

TEST_CASE("singular spectra")
{
  Rng rng(23);
  SnapshotStore one;
  one.push(0, 0.0, rng.vector(6) * rng.vector(3).transpose());
  const Vec s1 = singular_spectrum(one, SpectrumMode::kGlobal);
  CHECK(s1(0) == doctest::Approx(1.0));
  CHECK(s1.tail(s1.size() - 1).norm() <= 1e-12);

  const Mat A = rng.matrix(8, 3);
  SnapshotStore two;
  two.push(0, 0.0, A);
  two.push(1, 1.0, A);
  const Vec g = singular_spectrum(two, SpectrumMode::kGlobal);
  const Vec a = singular_spectrum(two, SpectrumMode::kAveraged);
  CHECK((g - a).norm() <= 1e-12);

  SnapshotStore r;
  Mat all(8, 9);
  for (int k = 0; k < 3; ++k) {
    const Mat S = rng.matrix(8, 3);
    all.middleCols(3 * k, 3) = S;
    r.push(k, k, S);
  }
  Eigen::JacobiSVD<Mat> oracle(all);
  const Vec o = oracle.singularValues() / oracle.singularValues()(0);
  CHECK((singular_spectrum(r, SpectrumMode::kGlobal) - o).norm() <= 1e-12);
  CHECK_THROWS_AS(singular_spectrum(SnapshotStore{}, SpectrumMode::kGlobal), Error);
}
