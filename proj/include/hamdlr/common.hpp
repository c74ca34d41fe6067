// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hamdlr {

using Index = Eigen::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class ErrorCode : int {
  kDimension = 1,
  kDegenerateDirection = 2,
  kStructureViolation = 3,
  kParameter = 4,
  kStepFailure = 5,
  kRetractionBreakdown = 6,
  kIndicatorFailure = 7,
  kStaleOperator = 8,
  kUnsupportedModel = 9,
  kConstruction = 10,
  kConfig = 11,
  kIO = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Newton non-convergence; carries the failing column and its last residual.
class StepFailure : public Error {
 public:
  StepFailure(Index column, double residual, const std::string &what)
      : Error(ErrorCode::kStepFailure, what), column_(column), residual_(residual) {}
  Index column() const noexcept { return column_; }
  double residual() const noexcept { return residual_; }

 private:
  Index column_;
  double residual_;
};

class DegenerateDirection : public Error {
 public:
  DegenerateDirection(Index pair, double norm, const std::string &what)
      : Error(ErrorCode::kDegenerateDirection, what), pair_(pair), norm_(norm) {}
  Index pair() const noexcept { return pair_; }
  double remaining_norm() const noexcept { return norm_; }

 private:
  Index pair_;
  double norm_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &what);

inline void require(bool ok, ErrorCode code, const char *what)
{
  if (!ok) fail(code, what);
}

// Worker count for column-parallel loops (defaults to OpenMP's choice).
void set_num_workers(int n);
int num_workers();

// Runs fn(j) for j in [0, n). Exceptions are captured and the one raised by the lowest
// index is rethrown after the loop, so failures are reported deterministically.
void parallel_for(Index n, const std::function<void(Index)> &fn);

}  // namespace hamdlr
