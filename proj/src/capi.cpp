// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/hamdlr.h"

#include "hamdlr/harness.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>
#include <vector>

using namespace hamdlr;
namespace hh = hamdlr::harness;

struct hamdlr_config {
  hh::RunConfig cfg;
  std::string method;
};

struct hamdlr_result {
  hh::RunResult res;
  hh::Method method = hh::Method::kFull;
};

namespace {

thread_local std::string g_last_error;

hamdlr_status set_error(hamdlr_status s, const std::string &msg)
{
  g_last_error = msg;
  return s;
}

// Runs f, mapping exceptions to status codes and the thread-local message.
template <class F>
hamdlr_status guarded(F &&f)
{
  try {
    g_last_error.clear();
    f();
    return HAMDLR_OK;
  } catch (const Error &e) {
    return set_error(static_cast<hamdlr_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc &) {
    return set_error(HAMDLR_E_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return set_error(HAMDLR_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(HAMDLR_E_INTERNAL, "unknown error");
  }
}

double or_nan(const std::optional<double> &v)
{
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

hamdlr_status make_config(hh::RunConfig cfg, hamdlr_config **out)
{
  auto *h = new hamdlr_config{std::move(cfg), {}};
  h->method = hh::method_name(h->cfg.method);
  *out = h;
  return HAMDLR_OK;
}

}  // namespace

extern "C" {

const char *hamdlr_version(void) { return "0.1.0"; }

const char *hamdlr_status_string(hamdlr_status status)
{
  switch (status) {
    case HAMDLR_OK: return "ok";
    case HAMDLR_E_DIMENSION: return "dimension mismatch";
    case HAMDLR_E_DEGENERATE_DIRECTION: return "degenerate direction";
    case HAMDLR_E_STRUCTURE_VIOLATION: return "structure violation";
    case HAMDLR_E_PARAMETER: return "invalid parameter";
    case HAMDLR_E_STEP_FAILURE: return "step failure";
    case HAMDLR_E_RETRACTION_BREAKDOWN: return "retraction breakdown";
    case HAMDLR_E_INDICATOR_FAILURE: return "indicator failure";
    case HAMDLR_E_STALE_OPERATOR: return "stale operator";
    case HAMDLR_E_UNSUPPORTED_MODEL: return "unsupported model";
    case HAMDLR_E_CONSTRUCTION: return "construction failure";
    case HAMDLR_E_CONFIG: return "configuration error";
    case HAMDLR_E_IO: return "i/o error";
    case HAMDLR_E_INVALID_ARGUMENT: return "invalid argument";
    case HAMDLR_E_BUFFER_TOO_SMALL: return "buffer too small";
    case HAMDLR_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *hamdlr_last_error(void) { return g_last_error.c_str(); }

void hamdlr_set_num_workers(int n) { set_num_workers(n); }
int hamdlr_num_workers(void) { return num_workers(); }

size_t hamdlr_preset_count(void) { return hh::preset_names().size(); }

const char *hamdlr_preset_name(size_t index)
{
  static const std::vector<std::string> names = hh::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

hamdlr_status hamdlr_preset_text(const char *name, char *buf, size_t capacity, size_t *needed)
{
  if (!name) return set_error(HAMDLR_E_INVALID_ARGUMENT, "preset name is null");
  std::string text;
  const hamdlr_status s = guarded([&] { text = hh::preset(name); });
  if (s != HAMDLR_OK) return s;
  if (needed) *needed = text.size() + 1;
  if (!buf || capacity < text.size() + 1) return set_error(HAMDLR_E_BUFFER_TOO_SMALL, "preset buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return HAMDLR_OK;
}

hamdlr_status hamdlr_config_load(const char *path, hamdlr_config **out)
{
  if (!path || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { make_config(hh::load_config(path), out); });
}

hamdlr_status hamdlr_config_parse(const char *text, hamdlr_config **out)
{
  if (!text || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { make_config(hh::parse_config(text), out); });
}

hamdlr_status hamdlr_config_from_preset(const char *name, hamdlr_config **out)
{
  if (!name || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { make_config(hh::parse_config(hh::preset(name)), out); });
}

void hamdlr_config_destroy(hamdlr_config *config) { delete config; }

const char *hamdlr_config_name(const hamdlr_config *config) { return config ? config->cfg.name.c_str() : nullptr; }
const char *hamdlr_config_method(const hamdlr_config *config) { return config ? config->method.c_str() : nullptr; }
const char *hamdlr_config_output_dir(const hamdlr_config *config)
{
  return config ? config->cfg.output.dir.c_str() : nullptr;
}

hamdlr_status hamdlr_run(const hamdlr_config *config, hamdlr_progress_fn progress, void *user, hamdlr_result **out)
{
  if (!config || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    hh::RunHooks hooks;
    if (progress) hooks.progress = [progress, user](long step, double t) { progress(step, t, user); };
    auto *r = new hamdlr_result{hh::run(config->cfg, hooks), config->cfg.method};
    *out = r;
  });
}

void hamdlr_result_destroy(hamdlr_result *result) { delete result; }

hamdlr_status hamdlr_result_summary(const hamdlr_result *result, hamdlr_summary *out)
{
  if (!result || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  const auto &r = result->res;
  out->steps = r.steps;
  out->final_two_n = static_cast<long>(r.final_two_n);
  out->updates_applied = 0;
  for (const auto &u : r.updates) out->updates_applied += u.applied ? 1 : 0;
  out->runtime_seconds = r.times.runtime(result->method);
  out->reference_seconds = r.times.reference;
  out->max_orthogonality_defect = r.max_orthogonality_defect;
  out->max_symplecticity_defect = r.max_symplecticity_defect;
  return HAMDLR_OK;
}

size_t hamdlr_result_metrics_count(const hamdlr_result *result) { return result ? result->res.metrics.size() : 0; }

hamdlr_status hamdlr_result_metrics_row(const hamdlr_result *result, size_t index, hamdlr_metrics_row *out)
{
  if (!result || !out) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  if (index >= result->res.metrics.size()) return set_error(HAMDLR_E_INVALID_ARGUMENT, "row index out of range");
  const auto &m = result->res.metrics[index];
  out->step = m.step;
  out->t = m.t;
  out->E = or_nan(m.E);
  out->E_H = or_nan(m.E_H);
  out->E_perp = or_nan(m.E_perp);
  out->two_n = m.two_n ? static_cast<long>(*m.two_n) : -1;
  out->indicator_norm = or_nan(m.indicator_norm);
  out->wall_ms = or_nan(m.wall_ms);
  return HAMDLR_OK;
}

hamdlr_status hamdlr_compare(const char *full_run, const char *reduced_run, long stride, const char *out_csv,
                             size_t *rows)
{
  if (!full_run || !reduced_run) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto m = hh::compare(full_run, reduced_run, stride, out_csv ? hh::fs::path(out_csv) : hh::fs::path());
    if (rows) *rows = m.size();
  });
}

hamdlr_status hamdlr_analyze(const char *run_dir, const double *eps, size_t eps_count)
{
  if (!run_dir || (eps_count > 0 && !eps)) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] { hh::analyze(run_dir, std::vector<double>(eps, eps + eps_count)); });
}

hamdlr_status hamdlr_rank_decrease(const char *run_dir, double threshold, long *two_n_after, int *dropped,
                                   double *ratio)
{
  if (!run_dir) return set_error(HAMDLR_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto r = hh::rank_decrease_run(run_dir, threshold);
    if (two_n_after) *two_n_after = static_cast<long>(r.state.basis.rank());
    if (dropped) *dropped = r.dropped ? 1 : 0;
    if (ratio) *ratio = r.ratio;
  });
}

}  // extern "C"
