// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end; talks to the library only through the C interface.

#include "hamdlr/hamdlr.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

int report(hamdlr_status s, const char *what)
{
  if (s == HAMDLR_OK) return 0;
  std::fprintf(stderr, "hamdlr: %s failed: %s: %s\n", what, hamdlr_status_string(s), hamdlr_last_error());
  return 1;
}

void progress(long step, double t, void *user)
{
  const long every = *static_cast<const long *>(user);
  if (every > 0 && step % every == 0) std::fprintf(stderr, "step %ld t=%.6g\n", step, t);
}

void apply_worker_env()
{
  if (const char *v = std::getenv("HAMDLR_NUM_WORKERS")) {
    char *end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n >= 0) hamdlr_set_num_workers(static_cast<int>(n));
    else std::fprintf(stderr, "hamdlr: ignoring invalid HAMDLR_NUM_WORKERS=%s\n", v);
  }
}

int cmd_run(const std::string &config, const std::string &preset, long progress_every)
{
  hamdlr_config *cfg = nullptr;
  hamdlr_status s = preset.empty() ? hamdlr_config_load(config.c_str(), &cfg)
                                   : hamdlr_config_from_preset(preset.c_str(), &cfg);
  if (s != HAMDLR_OK) return report(s, "loading the configuration");
  hamdlr_result *res = nullptr;
  s = hamdlr_run(cfg, progress_every > 0 ? progress : nullptr, &progress_every, &res);
  if (s != HAMDLR_OK) {
    hamdlr_config_destroy(cfg);
    return report(s, "run");
  }
  hamdlr_summary sum{};
  hamdlr_result_summary(res, &sum);
  std::printf("run %s (%s): %ld steps, final 2n = %ld, %ld rank updates, runtime %.3f s\n", hamdlr_config_name(cfg),
              hamdlr_config_method(cfg), sum.steps, sum.final_two_n, sum.updates_applied, sum.runtime_seconds);
  const size_t rows = hamdlr_result_metrics_count(res);
  if (rows > 0) {
    hamdlr_metrics_row last{};
    hamdlr_result_metrics_row(res, rows - 1, &last);
    if (!std::isnan(last.E)) std::printf("final E = %.6e, E_H = %.6e\n", last.E, last.E_H);
  }
  if (*hamdlr_config_output_dir(cfg)) std::printf("outputs in %s\n", hamdlr_config_output_dir(cfg));
  hamdlr_result_destroy(res);
  hamdlr_config_destroy(cfg);
  return 0;
}

int cmd_presets_show(const std::string &name)
{
  size_t needed = 0;
  hamdlr_status s = hamdlr_preset_text(name.c_str(), nullptr, 0, &needed);
  if (s != HAMDLR_OK && s != HAMDLR_E_BUFFER_TOO_SMALL) return report(s, "presets show");
  std::string buf(needed, '\0');
  s = hamdlr_preset_text(name.c_str(), buf.data(), buf.size(), &needed);
  if (s != HAMDLR_OK) return report(s, "presets show");
  std::fputs(buf.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  apply_worker_env();
  CLI::App app{"hamdlr: rank-adaptive dynamical reduced basis experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hamdlr_version());

  int code = 0;

  std::string config, preset;
  long progress_every = 0;
  auto *run = app.add_subcommand("run", "run a configuration file or a shipped preset");
  run->add_option("config", config, "JSON configuration file");
  run->add_option("--preset", preset, "run a shipped preset instead of a file");
  run->add_option("--progress", progress_every, "print progress every N steps to stderr")->check(CLI::NonNegativeNumber);
  run->callback([&] {
    if (config.empty() == preset.empty()) throw CLI::ValidationError("run", "give exactly one of <config> or --preset");
    code = cmd_run(config, preset, progress_every);
  });

  std::string full_dir, reduced_dir, out_csv;
  long stride = 1;
  auto *cmp = app.add_subcommand("compare", "error metrics of a reduced run against a full run");
  cmp->add_option("full_run", full_dir, "full-order run directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("reduced_run", reduced_dir, "reduced run directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--stride", stride, "compare every N-th common step")->check(CLI::PositiveNumber);
  cmp->add_option("--out", out_csv, "output CSV (default: <reduced_run>/compare.csv)");
  cmp->callback([&] {
    if (out_csv.empty()) out_csv = reduced_dir + "/compare.csv";
    size_t rows = 0;
    code = report(hamdlr_compare(full_dir.c_str(), reduced_dir.c_str(), stride, out_csv.c_str(), &rows), "compare");
    if (code == 0) std::printf("%zu rows written to %s\n", rows, out_csv.c_str());
  });

  std::string analyze_dir;
  std::vector<double> eps{1e-3, 1e-5, 1e-7};
  auto *ana = app.add_subcommand("analyze", "singular spectra and epsilon-rank of stored snapshots");
  ana->add_option("run_dir", analyze_dir, "run directory with snapshots")->required()->check(CLI::ExistingDirectory);
  ana->add_option("--eps", eps, "epsilon values")->expected(1, -1)->check(CLI::PositiveNumber);
  ana->callback([&] {
    code = report(hamdlr_analyze(analyze_dir.c_str(), eps.data(), eps.size()), "analyze");
    if (code == 0) std::printf("spectra.csv and eps_rank.csv written to %s\n", analyze_dir.c_str());
  });

  std::string rd_dir;
  double threshold = 1e-8;
  auto *rd = app.add_subcommand("rank-decrease", "drop the weakest pair of a finished run's final state");
  rd->add_option("run_dir", rd_dir, "run directory with final_state/")->required()->check(CLI::ExistingDirectory);
  rd->add_option("--threshold", threshold, "drop when D_min / D_max is below this")->check(CLI::PositiveNumber);
  rd->callback([&] {
    long two_n = 0;
    int dropped = 0;
    double ratio = 0.0;
    code = report(hamdlr_rank_decrease(rd_dir.c_str(), threshold, &two_n, &dropped, &ratio), "rank-decrease");
    if (code == 0)
      std::printf("ratio %.6e, %s, 2n = %ld\n", ratio, dropped ? "pair dropped" : "kept", two_n);
  });

  auto *presets = app.add_subcommand("presets", "shipped experiment presets");
  presets->require_subcommand(1);
  presets->add_subcommand("list", "list preset names")->callback([] {
    for (size_t i = 0; i < hamdlr_preset_count(); ++i) std::printf("%s\n", hamdlr_preset_name(i));
  });
  std::string show_name;
  auto *show = presets->add_subcommand("show", "print a preset configuration");
  show->add_option("name", show_name, "preset name")->required();
  show->callback([&] { code = cmd_presets_show(show_name); });

  CLI11_PARSE(app, argc, argv);
  return code;
}
