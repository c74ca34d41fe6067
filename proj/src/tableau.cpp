// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/dlr.hpp"

#include <cmath>

namespace hamdlr {

namespace {

ButcherPair midpoint_pair()
{
  ButcherPair t;
  t.order = 2;
  t.stages = 2;
  t.A = Mat::Zero(2, 2);
  t.Ahat = Mat::Zero(2, 2);
  t.A(1, 1) = 0.5;
  t.Ahat(1, 0) = 0.5;
  t.b = Vec::Zero(2);
  t.b(1) = 1.0;
  t.bhat = t.b;
  return t;
}

// Enlarged two-stage Gauss-Legendre with an explicit third-order partner.
ButcherPair gauss4_pair()
{
  const double s3 = std::sqrt(3.0);
  ButcherPair t;
  t.order = 3;
  t.stages = 3;
  t.A = Mat::Zero(3, 3);
  t.A(1, 1) = 0.25;
  t.A(1, 2) = 0.25 - s3 / 6.0;
  t.A(2, 1) = 0.25 + s3 / 6.0;
  t.A(2, 2) = 0.25;
  t.b = Vec::Zero(3);
  t.b(1) = t.b(2) = 0.5;
  t.Ahat = Mat::Zero(3, 3);
  t.Ahat(1, 0) = 0.5 - s3 / 6.0;
  t.Ahat(2, 0) = -1.0 / (3.0 - s3);
  t.Ahat(2, 1) = 2.0 / (3.0 - s3);
  t.bhat = t.b;
  return t;
}

// Enlarged three-stage Gauss-Legendre. The explicit partner shares the weights and nodes;
// the remaining freedom is fixed by sum bhat Ahat chat^2 = 1/12 and the stability
// coefficient K = bhat_4 ahat_43 ahat_32 ahat_21.
ButcherPair gauss6_pair(double K)
{
  const double s15 = std::sqrt(15.0);
  ButcherPair t;
  t.order = 3;
  t.stages = 4;
  t.K = K;
  t.A = Mat::Zero(4, 4);
  t.A(1, 1) = 5.0 / 36.0;
  t.A(1, 2) = 2.0 / 9.0 - s15 / 15.0;
  t.A(1, 3) = 5.0 / 36.0 - s15 / 30.0;
  t.A(2, 1) = 5.0 / 36.0 + s15 / 24.0;
  t.A(2, 2) = 2.0 / 9.0;
  t.A(2, 3) = 5.0 / 36.0 - s15 / 24.0;
  t.A(3, 1) = 5.0 / 36.0 + s15 / 30.0;
  t.A(3, 2) = 2.0 / 9.0 + s15 / 15.0;
  t.A(3, 3) = 5.0 / 36.0;
  t.b = Vec::Zero(4);
  t.b(1) = 5.0 / 18.0;
  t.b(2) = 4.0 / 9.0;
  t.b(3) = 5.0 / 18.0;
  t.bhat = t.b;

  const Vec c = t.c();
  const double c2 = c(1), c3 = c(2), c4 = c(3), b3 = t.b(2), b4 = t.b(3);
  const double a43 = (1.0 / 12.0 - c2 / 6.0) / (b4 * c3 * (c3 - c2));
  if (!std::isfinite(a43) || a43 == 0.0 || K == 0.0)
    fail(ErrorCode::kConstruction, "prk_tableau(3,4): closure has no solution for this K");
  const double a32 = K / (b4 * a43 * c2);
  const double a42 = (1.0 / 6.0 - b3 * a32 * c2 - b4 * a43 * c3) / (b4 * c2);
  t.Ahat = Mat::Zero(4, 4);
  t.Ahat(1, 0) = c2;
  t.Ahat(2, 0) = c3 - a32;
  t.Ahat(2, 1) = a32;
  t.Ahat(3, 0) = c4 - a42 - a43;
  t.Ahat(3, 1) = a42;
  t.Ahat(3, 2) = a43;
  return t;
}

void verify(const ButcherPair &t)
{
  for (const auto &[name, v] : tableau_conditions(t))
    if (!(std::abs(v) <= 1e-14))
      fail(ErrorCode::kConstruction, "prk_tableau(" + t.label() + "): condition " + name + " violated by " +
                                         std::to_string(v));
}

}  // namespace

ButcherPair prk_tableau(int order, int stages, double K)
{
  ButcherPair t;
  if (order == 2 && stages == 2)
    t = midpoint_pair();
  else if (order == 3 && stages == 3)
    t = gauss4_pair();
  else if (order == 3 && stages == 4)
    t = gauss6_pair(K);
  else
    fail(ErrorCode::kParameter, "prk_tableau: unsupported (order, stages) pair");
  verify(t);
  return t;
}

ButcherPair prk_tableau(const std::string &label, double K)
{
  if (label == "2-2") return prk_tableau(2, 2, K);
  if (label == "3-3") return prk_tableau(3, 3, K);
  if (label == "3-4") return prk_tableau(3, 4, K);
  fail(ErrorCode::kParameter, "prk_tableau: unknown tableau '" + label + "'");
}

std::map<std::string, double> tableau_conditions(const ButcherPair &t)
{
  const Mat &A = t.A, &Ah = t.Ahat;
  const Vec &b = t.b, &bh = t.bhat;
  const Vec c = t.c(), ch = t.chat();
  const Index s = b.size();
  std::map<std::string, double> r;

  double sym = 0.0;
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j) sym = std::max(sym, std::abs(b(i) * A(i, j) + b(j) * A(j, i) - b(i) * b(j)));
  r["symplectic"] = sym;

  double upper = 0.0;
  for (Index i = 0; i < s; ++i)
    for (Index j = i; j < s; ++j) upper = std::max(upper, std::abs(Ah(i, j)));
  r["explicit_strictly_lower"] = upper;

  r["sum_b"] = b.sum() - 1.0;
  r["sum_bhat"] = bh.sum() - 1.0;
  r["b_c"] = b.dot(c) - 0.5;
  r["bhat_chat"] = bh.dot(ch) - 0.5;
  r["b_chat"] = b.dot(ch) - 0.5;
  r["bhat_c"] = bh.dot(c) - 0.5;
  if (t.order >= 3) {
    r["row_sums"] = (c - ch).cwiseAbs().maxCoeff();
    r["b_c2"] = b.dot(c.cwiseProduct(c)) - 1.0 / 3.0;
    r["bhat_chat2"] = bh.dot(ch.cwiseProduct(ch)) - 1.0 / 3.0;
    r["b_A_c"] = b.dot(A * c) - 1.0 / 6.0;
    r["bhat_Ahat_chat"] = bh.dot(Ah * ch) - 1.0 / 6.0;
    r["b_Ahat_c"] = b.dot(Ah * c) - 1.0 / 6.0;
    r["bhat_A_c"] = bh.dot(A * c) - 1.0 / 6.0;
  }
  if (t.stages == 4) {
    r["bhat_Ahat_chat2"] = bh.dot(Ah * ch.cwiseProduct(ch)) - 1.0 / 12.0;
    r["stability_K"] = bh(3) * Ah(3, 2) * Ah(2, 1) * Ah(1, 0) - t.K;
  }
  return r;
}

}  // namespace hamdlr
