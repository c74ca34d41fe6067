// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hamdlr::harness {

using json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string &what) { fail(ErrorCode::kConfig, "config: " + what); }

void only_keys(const json &j, const std::string &where, std::initializer_list<const char *> keys)
{
  if (!j.is_object()) config_error(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) config_error("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void get(const json &j, const char *key, T &out, const std::string &where)
{
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &) {
    config_error(where + "." + key + " has the wrong type");
  }
}

Vec get_vec(const json &j, const char *key, const std::string &where)
{
  std::vector<double> v;
  get(j, key, v, where);
  return Eigen::Map<Vec>(v.data(), static_cast<Index>(v.size()));
}

Method parse_method(const std::string &s)
{
  if (s == "full") return Method::kFull;
  if (s == "dlr") return Method::kDlr;
  if (s == "dlr-adaptive") return Method::kDlrAdaptive;
  if (s == "global") return Method::kGlobal;
  config_error("unknown method '" + s + "'");
}

Index expected_param_dim(const ModelConfig &m)
{
  if (m.kind == "vlasov") return 3;
  if (m.kind == "nls1d") return m.gamma_mode == "parametric" ? 2 : 1;
  return 2;
}

Index full_dim(const ModelConfig &m)
{
  if (m.kind == "swe2d" || m.kind == "nls2d") return 2 * m.grid * m.grid;
  return 2 * m.grid;
}

Index count_product(const std::vector<int> &c)
{
  Index p = 1;
  for (int v : c) p *= v;
  return p;
}

}  // namespace

std::string method_name(Method m)
{
  switch (m) {
    case Method::kFull: return "full";
    case Method::kDlr: return "dlr";
    case Method::kDlrAdaptive: return "dlr-adaptive";
    case Method::kGlobal: return "global";
  }
  return "unknown";
}

RunConfig parse_config(const std::string &text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"name", "model", "parameters", "time", "method", "reduced", "adaptivity", "global", "newton", "output",
             "seed"});
  RunConfig c;
  c.source = text;
  get(j, "name", c.name, "config");
  get(j, "seed", c.seed, "config");
  std::string method = "full";
  get(j, "method", method, "config");
  c.method = parse_method(method);

  if (!j.contains("model")) config_error("missing model");
  const json &m = j["model"];
  only_keys(m, "model", {"kind", "grid", "domain", "gamma_mode", "gamma", "coupling", "field_coefficient"});
  get(m, "kind", c.model.kind, "model");
  get(m, "grid", c.model.grid, "model");
  if (c.model.kind == "vlasov") c.model.domain = {-0.8, 0.8};
  if (m.contains("domain")) {
    std::vector<double> d;
    get(m, "domain", d, "model");
    if (d.size() != 2) config_error("model.domain must be [lo, hi]");
    c.model.domain = {d[0], d[1]};
  }
  get(m, "gamma_mode", c.model.gamma_mode, "model");
  get(m, "gamma", c.model.gamma, "model");
  get(m, "coupling", c.model.coupling, "model");
  get(m, "field_coefficient", c.model.field_coefficient, "model");

  if (!j.contains("parameters")) config_error("missing parameters");
  const json &p = j["parameters"];
  only_keys(p, "parameters", {"lower", "upper", "counts"});
  c.parameters.lower = get_vec(p, "lower", "parameters");
  c.parameters.upper = get_vec(p, "upper", "parameters");
  get(p, "counts", c.parameters.counts, "parameters");

  if (j.contains("time")) {
    const json &t = j["time"];
    only_keys(t, "time", {"t0", "T", "dt"});
    get(t, "t0", c.time.t0, "time");
    get(t, "T", c.time.T, "time");
    get(t, "dt", c.time.dt, "time");
  }
  if (j.contains("reduced")) {
    const json &r = j["reduced"];
    only_keys(r, "reduced", {"two_n", "tableau", "K", "eps", "rank_tol", "tensorial"});
    get(r, "two_n", c.reduced.two_n, "reduced");
    get(r, "tableau", c.reduced.tableau, "reduced");
    get(r, "K", c.reduced.K, "reduced");
    get(r, "eps", c.reduced.eps, "reduced");
    get(r, "rank_tol", c.reduced.rank_tol, "reduced");
    get(r, "tensorial", c.reduced.tensorial, "reduced");
  }
  if (j.contains("adaptivity")) {
    const json &a = j["adaptivity"];
    only_keys(a, "adaptivity", {"r", "c", "stride", "subset_counts", "max_rank", "recursive_indicator"});
    get(a, "r", c.adaptivity.r, "adaptivity");
    get(a, "c", c.adaptivity.c, "adaptivity");
    get(a, "stride", c.adaptivity.stride, "adaptivity");
    get(a, "subset_counts", c.adaptivity.subset_counts, "adaptivity");
    get(a, "max_rank", c.adaptivity.max_rank, "adaptivity");
    get(a, "recursive_indicator", c.adaptivity.recursive_indicator, "adaptivity");
  }
  if (j.contains("global")) {
    const json &g = j["global"];
    only_keys(g, "global", {"training_counts", "snapshot_stride"});
    get(g, "training_counts", c.global.training_counts, "global");
    get(g, "snapshot_stride", c.global.snapshot_stride, "global");
  }
  if (j.contains("newton")) {
    const json &n = j["newton"];
    only_keys(n, "newton", {"tol", "max_iter", "jacobian"});
    get(n, "tol", c.newton.tol, "newton");
    get(n, "max_iter", c.newton.max_iter, "newton");
    std::string jac = "analytic";
    get(n, "jacobian", jac, "newton");
    if (jac == "analytic")
      c.newton.jacobian = JacobianMode::kAnalytic;
    else if (jac == "finite-difference")
      c.newton.jacobian = JacobianMode::kFiniteDifference;
    else
      config_error("newton.jacobian must be analytic or finite-difference");
  }
  if (j.contains("output")) {
    const json &o = j["output"];
    only_keys(o, "output", {"dir", "metrics_stride", "snapshot_stride", "reference", "record_timing"});
    get(o, "dir", c.output.dir, "output");
    get(o, "metrics_stride", c.output.metrics_stride, "output");
    get(o, "snapshot_stride", c.output.snapshot_stride, "output");
    get(o, "reference", c.output.reference, "output");
    get(o, "record_timing", c.output.record_timing, "output");
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIO, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const
{
  static const std::set<std::string> kinds{"harmonic", "swe1d", "swe2d", "nls1d", "nls2d", "vlasov"};
  if (!kinds.count(model.kind)) config_error("unknown model kind '" + model.kind + "'");
  if (model.grid < 2) config_error("model.grid must be >= 2");
  if (!(model.domain.hi > model.domain.lo)) config_error("model.domain must have hi > lo");
  if (model.gamma_mode != "fixed" && model.gamma_mode != "parametric")
    config_error("model.gamma_mode must be fixed or parametric");
  if (model.kind == "nls2d" && model.gamma_mode != "fixed") config_error("nls2d supports gamma_mode fixed only");

  const Index d = expected_param_dim(model);
  if (parameters.lower.size() != d || parameters.upper.size() != d || static_cast<Index>(parameters.counts.size()) != d)
    config_error("parameters need " + std::to_string(d) + " entries in lower, upper, and counts for " + model.kind);
  for (Index k = 0; k < d; ++k) {
    if (parameters.lower(k) > parameters.upper(k)) config_error("parameters.lower must not exceed upper");
    if (parameters.counts[k] < 1) config_error("parameters.counts must be >= 1");
  }
  if (!(time.dt != 0.0) || !std::isfinite(time.dt)) config_error("time.dt must be nonzero");
  try {
    step_count(time.t0, time.T, time.dt);
  } catch (const Error &e) {
    config_error(std::string("time grid: ") + e.what());
  }
  try {
    newton.validate();
  } catch (const Error &e) {
    config_error(e.what());
  }

  const Index p = count_product(parameters.counts);
  if (method != Method::kFull) {
    if (reduced.two_n < 2 || reduced.two_n % 2 != 0) config_error("reduced.two_n must be even and >= 2");
    if (reduced.two_n > full_dim(model)) config_error("reduced.two_n exceeds the full dimension");
    if (!(reduced.eps > 0.0)) config_error("reduced.eps must be positive");
    if (!(reduced.rank_tol > 0.0)) config_error("reduced.rank_tol must be positive");
  }
  if (method == Method::kDlr || method == Method::kDlrAdaptive) {
    if (reduced.two_n / 2 > p) config_error("reduced.two_n / 2 exceeds the number of parameters");
    try {
      prk_tableau(reduced.tableau, reduced.K);
    } catch (const Error &e) {
      config_error(std::string("reduced.tableau: ") + e.what());
    }
  }
  if (method == Method::kDlrAdaptive) {
    AdaptiveController ctl;
    ctl.r = adaptivity.r;
    ctl.c = adaptivity.c;
    ctl.stride = adaptivity.stride;
    ctl.subset = {0};
    try {
      ctl.validate();
    } catch (const Error &e) {
      config_error(e.what());
    }
    if (!adaptivity.subset_counts.empty()) indicator_subset(parameters.counts, adaptivity.subset_counts);
    if (adaptivity.max_rank < 0 || adaptivity.max_rank % 2 != 0) config_error("adaptivity.max_rank must be even");
    if (adaptivity.max_rank > 0 && adaptivity.max_rank < reduced.two_n)
      config_error("adaptivity.max_rank is below reduced.two_n");
  }
  if (method == Method::kGlobal) {
    if (!global.training_counts.empty()) {
      if (static_cast<Index>(global.training_counts.size()) != d) config_error("global.training_counts dimension");
      for (int v : global.training_counts)
        if (v < 1) config_error("global.training_counts must be >= 1");
    }
    if (global.snapshot_stride < 1) config_error("global.snapshot_stride must be >= 1");
  }
  if (output.metrics_stride < 1) config_error("output.metrics_stride must be >= 1");
  if (output.snapshot_stride < 0) config_error("output.snapshot_stride must be >= 0");
  if (output.reference.empty()) config_error("output.reference must be inline, none, or a run directory");
}

std::unique_ptr<HamiltonianModel> make_model(const RunConfig &cfg)
{
  const ModelConfig &m = cfg.model;
  const GammaMode gm = m.gamma_mode == "parametric" ? GammaMode::kParametric : GammaMode::kFixed;
  if (m.kind == "harmonic") return harmonic_model(m.grid, m.domain, m.coupling);
  if (m.kind == "swe1d") return swe1d_model(m.grid, m.domain);
  if (m.kind == "swe2d") return swe2d_model(m.grid, m.domain);
  if (m.kind == "nls1d") return nls1d_model(m.grid, m.domain, gm, m.gamma);
  if (m.kind == "nls2d") return nls2d_model(m.grid, m.domain);
  if (m.kind == "vlasov") return vlasov_model(m.grid, VlasovField{m.field_coefficient, m.domain}, cfg.seed);
  fail(ErrorCode::kConfig, "config: unknown model kind '" + m.kind + "'");
}

ParameterSet make_parameters(const RunConfig &cfg)
{
  return ParameterSet::grid(cfg.parameters.lower, cfg.parameters.upper, cfg.parameters.counts);
}

std::vector<Index> indicator_subset(const std::vector<int> &counts, const std::vector<int> &subset_counts)
{
  const std::size_t d = counts.size();
  std::vector<int> s = subset_counts.empty() ? std::vector<int>(d, 2) : subset_counts;
  if (s.size() != d) config_error("adaptivity.subset_counts must have one entry per parameter dimension");
  std::vector<std::vector<Index>> pick(d);
  for (std::size_t k = 0; k < d; ++k) {
    const int ck = counts[k], sk = std::min(s[k], ck);
    if (s[k] < 1) config_error("adaptivity.subset_counts must be >= 1");
    if (s[k] > ck) config_error("adaptivity.subset_counts exceeds the parameter counts");
    if (sk == 1) {
      pick[k].push_back((ck - 1) / 2);
    } else {
      for (int i = 0; i < sk; ++i)
        pick[k].push_back(static_cast<Index>(std::lround(static_cast<double>(i) * (ck - 1) / (sk - 1))));
    }
  }
  std::vector<Index> out{0};
  Index mult = 1;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Index> next;
    for (Index idx : pick[k])
      for (Index base : out) next.push_back(base + idx * mult);
    out = std::move(next);
    mult *= counts[k];
  }
  std::sort(out.begin(), out.end());
  return out;
}

// -- Presets ---------------------------------------------------------------------------

namespace {

struct PresetSpec {
  json model;
  json parameters;
  json time;
  json reduced;
  json adaptivity;
  json global;
  json output;
};

json make_preset(const std::string &name, const std::string &method, const PresetSpec &s)
{
  json j;
  j["name"] = name;
  j["method"] = method;
  j["model"] = s.model;
  j["parameters"] = s.parameters;
  j["time"] = s.time;
  j["reduced"] = s.reduced;
  j["adaptivity"] = s.adaptivity;
  j["global"] = s.global;
  j["newton"] = {{"tol", 1e-10}, {"max_iter", 50}};
  j["output"] = s.output;
  j["seed"] = 20240607;
  return j;
}

const std::map<std::string, json> &preset_table()
{
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> t;
    const double pi = 3.14159265358979323846;
    const json swe_box = {{"lower", {0.1, 0.2}}, {"upper", {1.0 / 7.0, 1.5}}};
    const json swe2_box = {{"lower", {0.2, 1.1}}, {"upper", {0.5, 1.7}}};
    const json nls_box = {{"lower", {0.98, 0.98}}, {"upper", {1.1, 1.1}}};
    const json nls2_box = {{"lower", {0.97, 0.97}}, {"upper", {1.03, 1.03}}};
    const json vl_box = {{"lower", {0.07, 0.02, 0.4}}, {"upper", {0.09, 0.03, 0.8}}};
    auto with = [](json box, std::vector<int> counts) {
      box["counts"] = counts;
      return box;
    };
    auto add = [&](const std::string &name, const PresetSpec &s) {
      t[name] = make_preset(name, "dlr-adaptive", s);
    };

    add("swe1d-paper", {{{"kind", "swe1d"}, {"grid", 1000}, {"domain", {-10, 10}}},
                        with(swe_box, {10, 10}),
                        {{"t0", 0}, {"T", 7}, {"dt", 1e-3}},
                        {{"two_n", 8}, {"tableau", "2-2"}},
                        {{"r", 1.1}, {"c", 1.2}, {"stride", 100}, {"subset_counts", {5, 5}}},
                        {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
                        {{"dir", "runs/swe1d-paper"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("swe1d-desk", {{{"kind", "swe1d"}, {"grid", 200}, {"domain", {-10, 10}}},
                       with(swe_box, {4, 4}),
                       {{"t0", 0}, {"T", 7}, {"dt", 1e-3}},
                       {{"two_n", 8}, {"tableau", "2-2"}},
                       {{"r", 1.1}, {"c", 1.2}, {"stride", 100}, {"subset_counts", {3, 3}}},
                       {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
                       {{"dir", "runs/swe1d-desk"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("swe2d-paper", {{{"kind", "swe2d"}, {"grid", 50}, {"domain", {-4, 4}}},
                        with(swe2_box, {10, 10}),
                        {{"t0", 0}, {"T", 20}, {"dt", 2e-3}},
                        {{"two_n", 6}, {"tableau", "2-2"}},
                        {{"r", 1.1}, {"c", 1.3}, {"stride", 100}, {"subset_counts", {5, 5}}},
                        {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
                        {{"dir", "runs/swe2d-paper"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("swe2d-desk", {{{"kind", "swe2d"}, {"grid", 24}, {"domain", {-4, 4}}},
                       with(swe2_box, {3, 3}),
                       {{"t0", 0}, {"T", 2}, {"dt", 2e-3}},
                       {{"two_n", 6}, {"tableau", "2-2"}},
                       {{"r", 1.1}, {"c", 1.2}, {"stride", 50}, {"subset_counts", {2, 2}}},
                       {{"training_counts", {2, 2}}, {"snapshot_stride", 10}},
                       {{"dir", "runs/swe2d-desk"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("nls1d-paper",
        {{{"kind", "nls1d"}, {"grid", 1000}, {"domain", {-20 * pi, 20 * pi}}, {"gamma_mode", "parametric"}},
         with(nls_box, {10, 10}),
         {{"t0", 0}, {"T", 50}, {"dt", 1e-3}},
         {{"two_n", 6}, {"tableau", "2-2"}},
         {{"r", 1.1}, {"c", 1.2}, {"stride", 10}, {"subset_counts", {5, 5}}},
         {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
         {{"dir", "runs/nls1d-paper"}, {"metrics_stride", 10}, {"snapshot_stride", 1000}}});
    add("nls1d-desk",
        {{{"kind", "nls1d"}, {"grid", 256}, {"domain", {-20 * pi, 20 * pi}}, {"gamma_mode", "parametric"}},
         with(nls_box, {4, 4}),
         {{"t0", 0}, {"T", 10}, {"dt", 1e-3}},
         {{"two_n", 6}, {"tableau", "2-2"}},
         {{"r", 1.1}, {"c", 1.2}, {"stride", 10}, {"subset_counts", {2, 2}}},
         {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
         {{"dir", "runs/nls1d-desk"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("nls2d-paper", {{{"kind", "nls2d"}, {"grid", 100}, {"domain", {-2 * pi, 2 * pi}}},
                        with(nls2_box, {8, 8}),
                        {{"t0", 0}, {"T", 3}, {"dt", 2.5e-4}},
                        {{"two_n", 6}, {"tableau", "2-2"}},
                        {{"r", 1.1}, {"c", 1.1}, {"stride", 10}, {"subset_counts", {4, 4}}},
                        {{"training_counts", {4, 4}}, {"snapshot_stride", 10}},
                        {{"dir", "runs/nls2d-paper"}, {"metrics_stride", 10}, {"snapshot_stride", 1000}}});
    add("nls2d-desk", {{{"kind", "nls2d"}, {"grid", 16}, {"domain", {-2 * pi, 2 * pi}}},
                       with(nls2_box, {3, 3}),
                       {{"t0", 0}, {"T", 1}, {"dt", 1e-3}},
                       {{"two_n", 6}, {"tableau", "2-2"}},
                       {{"r", 1.1}, {"c", 1.1}, {"stride", 10}, {"subset_counts", {2, 2}}},
                       {{"training_counts", {2, 2}}, {"snapshot_stride", 10}},
                       {{"dir", "runs/nls2d-desk"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("vlasov-paper", {{{"kind", "vlasov"}, {"grid", 1000}, {"domain", {-0.8, 0.8}}, {"field_coefficient", 1.0}},
                         with(vl_box, {5, 5, 5}),
                         {{"t0", 0}, {"T", 20}, {"dt", 1e-3}},
                         {{"two_n", 8}, {"tableau", "2-2"}},
                         {{"r", 1.1}, {"c", 1.2}, {"stride", 10}, {"subset_counts", {3, 3, 3}}},
                         {{"training_counts", {4, 4, 4}}, {"snapshot_stride", 10}},
                         {{"dir", "runs/vlasov-paper"}, {"metrics_stride", 10}, {"snapshot_stride", 1000}}});
    add("vlasov-desk", {{{"kind", "vlasov"}, {"grid", 500}, {"domain", {-0.8, 0.8}}, {"field_coefficient", 1.0}},
                        with(vl_box, {3, 3, 3}),
                        {{"t0", 0}, {"T", 10}, {"dt", 1e-3}},
                        {{"two_n", 8}, {"tableau", "2-2"}},
                        {{"r", 1.1}, {"c", 1.2}, {"stride", 10}, {"subset_counts", {2, 2, 2}}},
                        {{"training_counts", {2, 2, 2}}, {"snapshot_stride", 10}},
                        {{"dir", "runs/vlasov-desk"}, {"metrics_stride", 10}, {"snapshot_stride", 100}}});
    add("harmonic-demo", {{{"kind", "harmonic"}, {"grid", 32}, {"domain", {-5, 5}}, {"coupling", 0.5}},
                          with(json{{"lower", {0.5, 0.5}}, {"upper", {1.0, 2.0}}}, {3, 3}),
                          {{"t0", 0}, {"T", 1}, {"dt", 1e-2}},
                          {{"two_n", 2}, {"tableau", "2-2"}},
                          {{"r", 1.1}, {"c", 1.2}, {"stride", 5}, {"subset_counts", {2, 2}}},
                          {{"training_counts", {2, 2}}, {"snapshot_stride", 10}},
                          {{"dir", "runs/harmonic-demo"}, {"metrics_stride", 1}, {"snapshot_stride", 10}}});
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names()
{
  std::vector<std::string> out;
  for (const auto &kv : preset_table()) out.push_back(kv.first);
  return out;
}

std::string preset(const std::string &name)
{
  const auto &t = preset_table();
  const auto it = t.find(name);
  if (it == t.end()) fail(ErrorCode::kConfig, "unknown preset '" + name + "'");
  return it->second.dump(2) + "\n";
}

}  // namespace hamdlr::harness
