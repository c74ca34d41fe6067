// Copyright 2026 The hamdlr Authors
// SPDX-License-Identifier: Apache-2.0

#include "hamdlr/harness.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hamdlr::harness {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

static_assert(std::endian::native == std::endian::little, "matrix files are written in native little-endian order");

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_json(const fs::path &path)
{
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIO, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    fail(ErrorCode::kIO, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIO, "cannot write " + path.string());
  out << text;
}

double relative_hamiltonian_error(const HamiltonianModel &model, const Mat &R, const ParameterSet &P, const Vec &H0)
{
  const Vec h = model.hamiltonian(R, P);
  double s = 0.0;
  for (Index j = 0; j < h.size(); ++j) s += std::abs(h(j) - H0(j)) / std::max(std::abs(H0(j)), 1e-300);
  return s;
}

double projection_error(const Mat &U, const Mat &R) { return (R - U * (U.transpose() * R)).norm(); }

// <index>.f64 files plus meta.json, rewritten on finish.
class MatrixSeries {
 public:
  MatrixSeries() = default;
  MatrixSeries(fs::path dir, long stride) : dir_(std::move(dir)), stride_(stride)
  {
    fs::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  void write(long step, double t, const Mat &M)
  {
    if (!enabled()) return;
    const Index idx = static_cast<Index>(entries_.size());
    write_matrix(dir_ / (std::to_string(idx) + ".f64"), M);
    entries_.push_back({{"index", idx}, {"step", step}, {"time", t}, {"rows", M.rows()}, {"cols", M.cols()}});
    if (rows_ == 0) {
      rows_ = M.rows();
      cols_ = M.cols();
    }
  }
  void finish() const
  {
    if (!enabled()) return;
    json meta{{"rows", rows_},      {"cols", cols_},        {"dtype", "f64"},
              {"order", "column-major"}, {"endianness", "little"}, {"stride", stride_},
              {"entries", entries_}};
    write_text(dir_ / "meta.json", meta.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  long stride_ = 1;
  Index rows_ = 0, cols_ = 0;
  json entries_ = json::array();
};

// Owns the run directory: config echo, metrics CSV, events, snapshots, summary.
class RunWriter {
 public:
  explicit RunWriter(const RunConfig &cfg) : cfg_(cfg)
  {
    if (cfg.output.dir.empty()) return;
    dir_ = cfg.output.dir;
    fs::create_directories(dir_);
    write_text(dir_ / "config.json", cfg.source.empty() ? std::string("{}\n") : cfg.source);
    metrics_.open(dir_ / "metrics.csv", std::ios::binary | std::ios::trunc);
    events_.open(dir_ / "events.jsonl", std::ios::binary | std::ios::trunc);
    if (!metrics_ || !events_) fail(ErrorCode::kIO, "cannot open output files in " + dir_.string());
    metrics_ << metrics_csv_header() << '\n' << std::flush;
    const long ss = cfg.output.snapshot_stride;
    snapshots_ = MatrixSeries(dir_ / "snapshots", ss);
    if (cfg.method != Method::kFull) bases_ = MatrixSeries(dir_ / "bases", ss);
  }
  bool enabled() const { return !dir_.empty(); }
  const fs::path &dir() const { return dir_; }

  void metrics(const MetricsRow &r)
  {
    if (enabled()) metrics_ << format_metrics_row(r) << '\n' << std::flush;
  }
  void event(const json &e)
  {
    if (enabled()) events_ << e.dump() << '\n' << std::flush;
  }
  void snapshot(long step, double t, const Mat &R) { snapshots_.write(step, t, R); }
  void basis(long step, double t, const Mat &U) { bases_.write(step, t, U); }
  void final_state(long step, double t, const Mat &U, const Mat &Z)
  {
    if (!enabled()) return;
    const fs::path d = dir_ / "final_state";
    fs::create_directories(d);
    write_matrix(d / "U.f64", U);
    write_matrix(d / "Z.f64", Z);
    json meta{{"step", step},      {"time", t},          {"U", {{"rows", U.rows()}, {"cols", U.cols()}}},
              {"Z", {{"rows", Z.rows()}, {"cols", Z.cols()}}}, {"dtype", "f64"}, {"order", "column-major"},
              {"endianness", "little"}};
    write_text(d / "meta.json", meta.dump(2) + "\n");
  }
  void finish(const json &summary)
  {
    if (!enabled()) return;
    snapshots_.finish();
    bases_.finish();
    write_text(dir_ / "summary.json", summary.dump(2) + "\n");
  }

 private:
  const RunConfig &cfg_;
  fs::path dir_;
  std::ofstream metrics_, events_;
  MatrixSeries snapshots_, bases_;
};

// Full-order reference: stepped alongside the run, or looked up in a store.
class Reference {
 public:
  Reference(const HamiltonianModel &model, const ParameterSet &P, const Mat &R0, const RunConfig &cfg,
            const SnapshotStore *store)
      : model_(model), P_(P), cfg_(cfg), store_(store), current_(R0)
  {
    inline_ = store_ == nullptr && cfg.output.reference == "inline";
  }
  bool available() const { return inline_ || store_ != nullptr; }
  void advance(long step, double &seconds)
  {
    if (!inline_) return;
    const auto t0 = Clock::now();
    current_ = implicit_midpoint_step(model_, current_, P_, cfg_.time.dt, cfg_.newton);
    step_ = step;
    seconds += since(t0);
  }
  const Mat *at(long step) const
  {
    if (inline_) return step == step_ ? &current_ : nullptr;
    if (!store_) return nullptr;
    const Mat *m = store_->at_step(step);
    if (m && (m->rows() != current_.rows() || m->cols() != current_.cols()))
      fail(ErrorCode::kDimension, "reference snapshots do not match the run's ensemble shape");
    return m;
  }

 private:
  const HamiltonianModel &model_;
  const ParameterSet &P_;
  const RunConfig &cfg_;
  const SnapshotStore *store_;
  Mat current_;
  long step_ = 0;
  bool inline_ = false;
};

class Runner {
 public:
  Runner(const RunConfig &cfg, const RunHooks &hooks) : cfg_(cfg), hooks_(hooks), writer_(cfg)
  {
    model_ = make_model(cfg);
    P_ = make_parameters(cfg);
    R0_ = model_->initial_ensemble(P_);
    steps_ = step_count(cfg.time.t0, cfg.time.T, cfg.time.dt);
    const SnapshotStore *store = hooks.reference;
    if (!store && cfg.output.reference != "inline" && cfg.output.reference != "none") {
      loaded_ = load_snapshots(fs::path(cfg.output.reference) / "snapshots");
      store = &loaded_;
    }
    ref_.emplace(*model_, P_, R0_, cfg, store);
  }

  RunResult go()
  {
    writer_.event({{"event", "start"},
                   {"method", method_name(cfg_.method)},
                   {"steps", steps_},
                   {"params", P_.size()},
                   {"full_dim", model_->full_dim()}});
    try {
      switch (cfg_.method) {
        case Method::kFull: run_full(); break;
        case Method::kDlr:
        case Method::kDlrAdaptive: run_dynamical(); break;
        case Method::kGlobal: run_global(); break;
      }
    } catch (const std::exception &e) {
      writer_.event({{"event", "failure"}, {"message", e.what()}});
      writer_.finish(summary("failed", e.what()));
      throw;
    }
    writer_.event({{"event", "end"}, {"steps", steps_}});
    writer_.finish(summary("ok", ""));
    res_.steps = steps_;
    return std::move(res_);
  }

 private:
  double time_at(long k) const { return cfg_.time.t0 + static_cast<double>(k) * cfg_.time.dt; }
  bool metrics_step(long k) const { return k % cfg_.output.metrics_stride == 0 || k == steps_; }
  bool snapshot_step(long k) const
  {
    const long s = cfg_.output.snapshot_stride;
    return k == 0 || k == steps_ || (s > 0 && k % s == 0);
  }
  double runtime() const { return res_.times.runtime(cfg_.method); }

  void emit(MetricsRow row)
  {
    if (cfg_.output.record_timing) row.wall_ms = 1e3 * runtime();
    writer_.metrics(row);
    res_.metrics.push_back(std::move(row));
  }
  void progress(long k)
  {
    if (hooks_.progress) hooks_.progress(k, time_at(k));
  }

  void run_full()
  {
    Mat R = R0_;
    const Vec H0 = model_->hamiltonian(R0_, P_);
    auto record = [&](long k) {
      if (snapshot_step(k)) writer_.snapshot(k, time_at(k), R);
      if (!metrics_step(k)) return;
      MetricsRow row;
      row.step = k;
      row.t = time_at(k);
      // Inline reference for a full run is the run itself.
      const Mat *ref = cfg_.output.reference == "inline" && !hooks_.reference ? &R : ref_->at(k);
      if (ref) row.E = (*ref - R).norm();
      row.E_H = relative_hamiltonian_error(*model_, R, P_, H0);
      emit(row);
    };
    record(0);
    for (long k = 1; k <= steps_; ++k) {
      const auto t0 = Clock::now();
      R = implicit_midpoint_step(*model_, R, P_, cfg_.time.dt, cfg_.newton);
      res_.times.evolution += since(t0);
      record(k);
      progress(k);
    }
    res_.final_ensemble = R;
  }

  void track_defects(const OrthosymplecticBasis &U)
  {
    res_.max_orthogonality_defect = std::max(res_.max_orthogonality_defect, U.orthogonality_defect());
    res_.max_symplecticity_defect = std::max(res_.max_symplecticity_defect, U.symplecticity_defect());
  }

  void run_dynamical()
  {
    const bool adaptive = cfg_.method == Method::kDlrAdaptive;
    ReducedState s = initial_reduced_state(R0_, cfg_.reduced.two_n / 2);
    const Vec H0 = model_->hamiltonian(s.reconstruct(), P_);
    PrkOptions opt;
    opt.newton = cfg_.newton;
    opt.velocity.eps_rel = cfg_.reduced.eps;
    opt.velocity.rank_tol = cfg_.reduced.rank_tol;
    opt.use_tensorial = cfg_.reduced.tensorial;
    const PrkIntegrator prk(*model_, P_, prk_tableau(cfg_.reduced.tableau, cfg_.reduced.K), opt);

    AdaptiveController ctl;
    ctl.r = cfg_.adaptivity.r;
    ctl.c = cfg_.adaptivity.c;
    ctl.stride = cfg_.adaptivity.stride;
    ctl.max_rank = cfg_.adaptivity.max_rank;
    if (adaptive) {
      ctl.subset = indicator_subset(cfg_.parameters.counts, cfg_.adaptivity.subset_counts);
      ctl.validate();
      json sub = json::array();
      for (Index i : ctl.subset) sub.push_back(i);
      writer_.event({{"event", "indicator_subset"}, {"indices", sub}});
    }
    std::optional<Mat> last_e;
    std::optional<double> last_norm;

    auto e_perp = [&](const ReducedState &st, long k) -> std::optional<double> {
      const Mat *ref = ref_->at(k);
      if (!ref) return std::nullopt;
      return projection_error(st.basis.cols(), *ref);
    };
    auto record = [&](long k) {
      const double t = time_at(k);
      if (snapshot_step(k)) {
        writer_.snapshot(k, t, s.reconstruct());
        writer_.basis(k, t, s.basis.cols());
      }
      if (!metrics_step(k)) return;
      MetricsRow row;
      row.step = k;
      row.t = t;
      const Mat R = s.reconstruct();
      if (const Mat *ref = ref_->at(k)) {
        row.E = (*ref - R).norm();
        row.E_perp = projection_error(s.basis.cols(), *ref);
      }
      row.E_H = relative_hamiltonian_error(*model_, R, P_, H0);
      row.two_n = s.basis.rank();
      row.indicator_norm = last_norm;
      emit(row);
    };

    track_defects(s.basis);
    record(0);
    for (long k = 1; k <= steps_; ++k) {
      const double t = time_at(k);
      auto t0 = Clock::now();
      ReducedState next = prk.step(s, cfg_.time.dt);
      res_.times.evolution += since(t0);
      ref_->advance(k, res_.times.reference);

      if (adaptive && k % ctl.stride == 0) {
        t0 = Clock::now();
        std::optional<ErrorIndicator> e;
        try {
          const Mat *prev = cfg_.adaptivity.recursive_indicator && last_e ? &*last_e : nullptr;
          e = error_indicator(*model_, next, s, P_, ctl.subset, cfg_.time.dt, t, prev);
        } catch (const Error &err) {
          if (err.code() != ErrorCode::kIndicatorFailure) throw;
          writer_.event({{"event", "indicator_failure"}, {"step", k}, {"time", t}, {"message", err.what()}});
        }
        res_.times.indicator += since(t0);
        if (e) {
          last_norm = e->norm;
          if (cfg_.adaptivity.recursive_indicator) last_e = e->E;
          if (ctl.should_update(*e)) {
            UpdateEvent ev;
            ev.step = k;
            ev.t = t;
            ev.indicator_norm = e->norm;
            ev.two_n_before = next.basis.rank();
            ev.e_perp_before = e_perp(next, k);
            t0 = Clock::now();
            RankUpdateResult ru = rank_update(next, *e, ctl.max_rank);
            res_.times.update += since(t0);
            ev.applied = ru.applied;
            ev.reason = ru.reason;
            if (ru.applied) {
              next = std::move(ru.state);
              ctl.record_update(*e);
              ev.e_perp_after = e_perp(next, k);
            }
            ev.lambda = ctl.lambda;
            ev.two_n_after = next.basis.rank();
            json j{{"event", ev.applied ? "rank_update" : "rank_update_skipped"},
                   {"step", k},
                   {"time", t},
                   {"lambda", ev.lambda},
                   {"indicator_norm", ev.indicator_norm},
                   {"two_n_before", ev.two_n_before},
                   {"two_n_after", ev.two_n_after}};
            if (ev.e_perp_before) j["e_perp_before"] = *ev.e_perp_before;
            if (ev.e_perp_after) j["e_perp_after"] = *ev.e_perp_after;
            if (!ev.applied) j["reason"] = ev.reason;
            writer_.event(j);
            res_.updates.push_back(std::move(ev));
          }
        }
      }
      s = std::move(next);
      track_defects(s.basis);
      record(k);
      progress(k);
    }
    res_.final_two_n = s.basis.rank();
    res_.final_ensemble = s.reconstruct();
    writer_.final_state(steps_, time_at(steps_), s.basis.cols(), s.coeffs);
    res_.final_state = std::move(s);
  }

  void run_global()
  {
    auto t0 = Clock::now();
    std::vector<int> counts = cfg_.global.training_counts;
    if (counts.empty()) counts.assign(cfg_.parameters.counts.size(), 4);
    const ParameterSet train = ParameterSet::grid(cfg_.parameters.lower, cfg_.parameters.upper, counts);
    const SnapshotStore store = solve_ensemble(*model_, train, model_->initial_ensemble(train), cfg_.time.t0,
                                               cfg_.time.T, cfg_.time.dt, cfg_.newton, cfg_.global.snapshot_stride);
    const GlobalReducedModel grm = train_global(*model_, store, cfg_.reduced.two_n / 2, cfg_.reduced.tensorial);
    res_.times.offline = since(t0);
    writer_.event({{"event", "global_training"},
                   {"training_params", train.size()},
                   {"snapshot_columns", grm.meta.snapshot_count},
                   {"offline_s", res_.times.offline}});
    track_defects(grm.basis);

    const Mat &A = grm.basis.cols();
    Mat Z = A.transpose() * R0_;
    const Vec H0 = model_->hamiltonian(Mat(A * Z), P_);
    auto record = [&](long k) {
      const double t = time_at(k);
      const Mat R = A * Z;
      if (snapshot_step(k)) writer_.snapshot(k, t, R);
      if (k == 0) writer_.basis(k, t, A);
      if (!metrics_step(k)) return;
      MetricsRow row;
      row.step = k;
      row.t = t;
      if (const Mat *ref = ref_->at(k)) {
        row.E = (*ref - R).norm();
        row.E_perp = projection_error(A, *ref);
      }
      row.E_H = relative_hamiltonian_error(*model_, R, P_, H0);
      row.two_n = A.cols();
      emit(row);
    };
    record(0);
    for (long k = 1; k <= steps_; ++k) {
      t0 = Clock::now();
      Z = global_midpoint_step(grm, *model_, Z, P_, cfg_.time.dt, cfg_.newton);
      res_.times.online += since(t0);
      ref_->advance(k, res_.times.reference);
      record(k);
      progress(k);
    }
    res_.final_two_n = A.cols();
    res_.final_ensemble = A * Z;
    writer_.final_state(steps_, time_at(steps_), A, Z);
    res_.final_state = ReducedState{grm.basis, Z};
  }

  json summary(const std::string &status, const std::string &message) const
  {
    json j{{"name", cfg_.name},
           {"method", method_name(cfg_.method)},
           {"status", status},
           {"steps", steps_},
           {"params", P_.size()},
           {"full_dim", model_->full_dim()},
           {"workers", num_workers()}};
    if (!message.empty()) j["message"] = message;
    if (!res_.metrics.empty()) {
      const MetricsRow &last = res_.metrics.back();
      j["last_step"] = last.step;
      j["last_time"] = last.t;
      if (last.E) j["E"] = *last.E;
      if (last.E_H) j["E_H"] = *last.E_H;
      if (last.E_perp) j["E_perp"] = *last.E_perp;
      if (last.two_n) j["two_n"] = *last.two_n;
    }
    if (cfg_.method != Method::kFull) {
      j["two_n_initial"] = cfg_.reduced.two_n;
      j["max_orthogonality_defect"] = res_.max_orthogonality_defect;
      j["max_symplecticity_defect"] = res_.max_symplecticity_defect;
    }
    long applied = 0;
    for (const auto &u : res_.updates) applied += u.applied ? 1 : 0;
    j["rank_updates"] = applied;
    const PhaseTimes &p = res_.times;
    j["timing"] = {{"evolution_s", p.evolution}, {"indicator_s", p.indicator}, {"update_s", p.update},
                   {"offline_s", p.offline},     {"online_s", p.online},       {"reference_s", p.reference},
                   {"runtime_s", p.runtime(cfg_.method)}};
    return j;
  }

  const RunConfig &cfg_;
  const RunHooks &hooks_;
  RunWriter writer_;
  std::unique_ptr<HamiltonianModel> model_;
  ParameterSet P_;
  Mat R0_;
  long steps_ = 0;
  SnapshotStore loaded_;
  std::optional<Reference> ref_;
  RunResult res_;
};

}  // namespace

double PhaseTimes::runtime(Method m) const
{
  switch (m) {
    case Method::kGlobal: return offline + online;
    case Method::kFull: return evolution;
    default: return evolution + indicator + update;
  }
}

std::string metrics_csv_header() { return "t,E,E_H,E_perp,two_n,indicator_norm,wall_ms"; }

std::string format_metrics_row(const MetricsRow &r)
{
  auto opt = [](const std::optional<double> &v) { return v ? num(*v) : std::string(); };
  std::string s = num(r.t);
  s += ',' + opt(r.E) + ',' + opt(r.E_H) + ',' + opt(r.E_perp) + ',';
  if (r.two_n) s += std::to_string(*r.two_n);
  s += ',' + opt(r.indicator_norm) + ',' + opt(r.wall_ms);
  return s;
}

RunResult run(const RunConfig &cfg, const RunHooks &hooks)
{
  cfg.validate();
  Runner r(cfg, hooks);
  return r.go();
}

void write_matrix(const fs::path &path, const Mat &M)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIO, "cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(M.data()), static_cast<std::streamsize>(M.size() * sizeof(double)));
  if (!out) fail(ErrorCode::kIO, "short write to " + path.string());
}

Mat read_matrix(const fs::path &path, Index rows, Index cols)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIO, "cannot read " + path.string());
  Mat M(rows, cols);
  in.read(reinterpret_cast<char *>(M.data()), static_cast<std::streamsize>(M.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(M.size() * sizeof(double)))
    fail(ErrorCode::kIO, "truncated matrix file " + path.string());
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorCode::kIO, "oversized matrix file " + path.string());
  return M;
}

SnapshotStore load_snapshots(const fs::path &dir)
{
  const json meta = read_json(dir / "meta.json");
  SnapshotStore s;
  try {
    s.stride = meta.value("stride", 1L);
    for (const auto &e : meta.at("entries")) {
      const Index rows = e.value("rows", meta.at("rows").get<Index>());
      const Index cols = e.value("cols", meta.at("cols").get<Index>());
      s.push(e.at("step").get<long>(), e.at("time").get<double>(),
             read_matrix(dir / (std::to_string(e.at("index").get<long>()) + ".f64"), rows, cols));
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kIO, "malformed snapshot metadata in " + dir.string() + ": " + e.what());
  }
  return s;
}

std::vector<MetricsRow> compare(const fs::path &full_run, const fs::path &reduced_run, long stride,
                                const fs::path &out_csv)
{
  require(stride >= 1, ErrorCode::kParameter, "compare: stride must be >= 1");
  const SnapshotStore A = load_snapshots(full_run / "snapshots");
  const SnapshotStore B = load_snapshots(reduced_run / "snapshots");
  SnapshotStore bases;
  if (fs::exists(reduced_run / "bases" / "meta.json")) bases = load_snapshots(reduced_run / "bases");
  const RunConfig cfg = load_config(reduced_run / "config.json");
  const auto model = make_model(cfg);
  const ParameterSet P = make_parameters(cfg);
  if (A.empty() || B.empty()) fail(ErrorCode::kDimension, "compare: a run has no snapshots");
  if (A.states[0].rows() != B.states[0].rows() || A.states[0].cols() != B.states[0].cols())
    fail(ErrorCode::kDimension, "compare: mismatched grids (ensemble shapes differ)");
  if (B.states[0].rows() != model->full_dim() || B.states[0].cols() != P.size())
    fail(ErrorCode::kDimension, "compare: snapshots do not match the run configuration");
  const Vec H0 = model->hamiltonian(B.states[0], P);

  std::vector<MetricsRow> rows;
  for (Index i = 0; i < B.size(); ++i) {
    const long k = B.steps[i];
    if (k % stride != 0) continue;
    const Mat *ref = A.at_step(k);
    if (!ref) continue;
    const Index ia = static_cast<Index>(std::find(A.steps.begin(), A.steps.end(), k) - A.steps.begin());
    if (std::abs(A.times[ia] - B.times[i]) > 1e-9 * std::max(1.0, std::abs(B.times[i])))
      fail(ErrorCode::kDimension, "compare: mismatched time grids at step " + std::to_string(k));
    const Mat &R = B.states[i];
    MetricsRow row;
      row.step = k;
      row.t = B.times[i];
    row.E = (*ref - R).norm();
    row.E_H = relative_hamiltonian_error(*model, R, P, H0);
    const Mat *U = nullptr;
    for (Index b = 0; b < bases.size(); ++b)
      if (bases.steps[b] <= k) U = &bases.states[b];
    if (U) {
      row.E_perp = projection_error(*U, *ref);
      row.two_n = U->cols();
    }
    rows.push_back(row);
  }
  if (rows.empty()) fail(ErrorCode::kDimension, "compare: mismatched grids (no common sampled steps)");

  const fs::path out = out_csv.empty() ? reduced_run / "compare.csv" : out_csv;
  std::string text = metrics_csv_header() + "\n";
  for (const auto &r : rows) text += format_metrics_row(r) + "\n";
  write_text(out, text);
  return rows;
}

AnalyzeResult analyze(const fs::path &run_dir, const std::vector<double> &eps_list)
{
  for (double e : eps_list) require(e > 0.0 && e < 1.0, ErrorCode::kParameter, "analyze: eps must lie in (0, 1)");
  const SnapshotStore store = load_snapshots(run_dir / "snapshots");
  AnalyzeResult res;
  res.global = singular_spectrum(store, SpectrumMode::kGlobal);
  res.averaged = singular_spectrum(store, SpectrumMode::kAveraged);
  res.steps = store.steps;
  res.times = store.times;
  for (double e : eps_list) {
    std::vector<Index> r;
    for (const auto &S : store.states) r.push_back(epsilon_rank(S, e));
    res.eps_rank.push_back(std::move(r));
  }

  std::string spec = "index,global,averaged\n";
  const Index n = std::max(res.global.size(), res.averaged.size());
  for (Index i = 0; i < n; ++i) {
    spec += std::to_string(i + 1) + ',';
    if (i < res.global.size()) spec += num(res.global(i));
    spec += ',';
    if (i < res.averaged.size()) spec += num(res.averaged(i));
    spec += '\n';
  }
  write_text(run_dir / "spectra.csv", spec);

  std::string er = "step,t";
  for (double e : eps_list) {
    char buf[48];
    std::snprintf(buf, sizeof buf, ",eps_%g", e);
    er += buf;
  }
  er += '\n';
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    er += std::to_string(res.steps[k]) + ',' + num(res.times[k]);
    for (const auto &r : res.eps_rank) er += ',' + std::to_string(r[k]);
    er += '\n';
  }
  write_text(run_dir / "eps_rank.csv", er);
  return res;
}

RankDecreaseResult rank_decrease_run(const fs::path &run_dir, double threshold)
{
  const fs::path d = run_dir / "final_state";
  const json meta = read_json(d / "meta.json");
  Mat U, Z;
  try {
    U = read_matrix(d / "U.f64", meta.at("U").at("rows").get<Index>(), meta.at("U").at("cols").get<Index>());
    Z = read_matrix(d / "Z.f64", meta.at("Z").at("rows").get<Index>(), meta.at("Z").at("cols").get<Index>());
  } catch (const json::exception &e) {
    fail(ErrorCode::kIO, "malformed final-state metadata: " + std::string(e.what()));
  }
  const ReducedState s{OrthosymplecticBasis(U), Z};
  s.basis.check(1e-10);
  RankDecreaseResult r = rank_decrease(s, threshold);

  const fs::path out = run_dir / "rank_decrease";
  fs::create_directories(out);
  write_matrix(out / "U.f64", r.state.basis.cols());
  write_matrix(out / "Z.f64", r.state.coeffs);
  const Mat R = s.reconstruct();
  json m{{"threshold", threshold},
         {"dropped", r.dropped},
         {"ratio", r.ratio},
         {"two_n_before", s.basis.rank()},
         {"two_n_after", r.state.basis.rank()},
         {"reconstruction_change", (r.state.reconstruct() - R).norm() / std::max(R.norm(), 1e-300)},
         {"U", {{"rows", r.state.basis.cols().rows()}, {"cols", r.state.basis.cols().cols()}}},
         {"Z", {{"rows", r.state.coeffs.rows()}, {"cols", r.state.coeffs.cols()}}},
         {"step", meta.value("step", 0L)},
         {"time", meta.value("time", 0.0)},
         {"dtype", "f64"},
         {"order", "column-major"},
         {"endianness", "little"}};
  write_text(out / "meta.json", m.dump(2) + "\n");
  return r;
}

}  // namespace hamdlr::harness
