// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hamdlr/adaptivity.hpp"
#include "hamdlr/global_rb.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace hamdlr::harness {

namespace fs = std::filesystem;

enum class Method { kFull, kDlr, kDlrAdaptive, kGlobal };
std::string method_name(Method m);

struct ModelConfig {
  std::string kind = "harmonic";  // harmonic | swe1d | swe2d | nls1d | nls2d | vlasov
  Index grid = 64;                // N, M per dimension, or particle count
  Interval domain{-10.0, 10.0};
  std::string gamma_mode = "fixed";
  double gamma = 1.0;
  double coupling = 0.0;
  double field_coefficient = 1.0;
};

struct ParameterConfig {
  Vec lower, upper;
  std::vector<int> counts;
};

struct TimeConfig {
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;
};

struct ReducedConfig {
  Index two_n = 4;
  std::string tableau = "2-2";
  double K = 1.0 / 24.0;
  double eps = 1e-8;
  double rank_tol = 1e-10;
  bool tensorial = true;
};

struct AdaptivityConfig {
  double r = 1.1;
  double c = 1.2;
  long stride = 100;
  std::vector<int> subset_counts;  // per dimension; empty means two per dimension
  Index max_rank = 0;
  bool recursive_indicator = false;
};

struct GlobalConfig {
  std::vector<int> training_counts;  // empty means four per dimension
  long snapshot_stride = 10;
};

struct OutputConfig {
  std::string dir;            // empty: nothing is written
  long metrics_stride = 1;
  long snapshot_stride = 0;   // 0: initial and final states only
  std::string reference = "inline";  // inline | none | <run directory>
  bool record_timing = false;        // wall_ms column (breaks byte determinism)
};

struct RunConfig {
  std::string name = "run";
  ModelConfig model;
  ParameterConfig parameters;
  TimeConfig time;
  Method method = Method::kFull;
  ReducedConfig reduced;
  AdaptivityConfig adaptivity;
  GlobalConfig global;
  NewtonConfig newton;
  OutputConfig output;
  std::uint64_t seed = 20240607;
  std::string source;  // verbatim text the config was parsed from

  void validate() const;
};

RunConfig parse_config(const std::string &text);
RunConfig load_config(const fs::path &path);

std::vector<std::string> preset_names();
std::string preset(const std::string &name);  // JSON text

std::unique_ptr<HamiltonianModel> make_model(const RunConfig &cfg);
ParameterSet make_parameters(const RunConfig &cfg);
// Evenly spaced grid indices per dimension (first dimension fastest).
std::vector<Index> indicator_subset(const std::vector<int> &counts, const std::vector<int> &subset_counts);

struct MetricsRow {
  long step = 0;
  double t = 0.0;
  std::optional<double> E, E_H, E_perp;
  std::optional<Index> two_n;
  std::optional<double> indicator_norm, wall_ms;
};

struct UpdateEvent {
  long step = 0;
  double t = 0.0;
  int lambda = 0;  // after the update
  double indicator_norm = 0.0;
  Index two_n_before = 0, two_n_after = 0;
  std::optional<double> e_perp_before, e_perp_after;
  bool applied = false;
  std::string reason;
};

struct PhaseTimes {
  double evolution = 0.0, indicator = 0.0, update = 0.0;  // dynamical
  double offline = 0.0, online = 0.0;                     // global
  double reference = 0.0;                                 // not part of the runtime
  double runtime(Method m) const;
};

struct RunResult {
  std::vector<MetricsRow> metrics;
  std::vector<UpdateEvent> updates;
  PhaseTimes times;
  long steps = 0;
  Index final_two_n = 0;
  double max_orthogonality_defect = 0.0;
  double max_symplecticity_defect = 0.0;
  std::optional<ReducedState> final_state;
  Mat final_ensemble;
};

struct RunHooks {
  const SnapshotStore *reference = nullptr;  // overrides output.reference
  std::function<void(long step, double t)> progress;
};

RunResult run(const RunConfig &cfg, const RunHooks &hooks = {});

// Raw little-endian column-major f64 matrices.
void write_matrix(const fs::path &path, const Mat &M);
Mat read_matrix(const fs::path &path, Index rows, Index cols);
// A directory of <index>.f64 files plus meta.json.
SnapshotStore load_snapshots(const fs::path &dir);

std::vector<MetricsRow> compare(const fs::path &full_run, const fs::path &reduced_run, long stride,
                                const fs::path &out_csv = {});

struct AnalyzeResult {
  Vec global, averaged;
  std::vector<long> steps;
  std::vector<double> times;
  std::vector<std::vector<Index>> eps_rank;  // [eps][time]
};
AnalyzeResult analyze(const fs::path &run_dir, const std::vector<double> &eps_list);

RankDecreaseResult rank_decrease_run(const fs::path &run_dir, double threshold);

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow &r);

}  // namespace hamdlr::harness
