#include "g2flow/flow.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace g2flow {

namespace {

using Field = BasicFormField<double>;
using State = StructureField<double>;

Field rhs_only(const State& state, const State& bar, FlowKind kind) {
  switch (kind) {
    case FlowKind::dirichlet:
      return gradient_q(state);
    case FlowKind::deturck: {
      Field q = gradient_q(state);
      Field x = deturck_vector_field(bar, state.omega());
      q += lie_derivative(x, state.omega());
      return q;
    }
    case FlowKind::laplacian:
      return laplacian_flow_rhs(state);
  }
  throw std::logic_error("unknown flow kind");
}

struct Diagnostics {
  EnergyReport report;
  double grad_norm = 0.0;
  double gauged_norm = 0.0;
  double min_metric_eig = 0.0;
  Field rhs;
  Diagnostics(const State& state, const State& bar, FlowKind kind)
      : report(energy(state)), rhs(state.grid(), 3) {
    Field q = gradient_q(state);
    Field x = deturck_vector_field(bar, state.omega());
    Field qt = q;
    qt += lie_derivative(x, state.omega());
    grad_norm = std::sqrt(l2_norm2(state, q));
    gauged_norm = std::sqrt(l2_norm2(state, qt));
    min_metric_eig = state.min_metric_eigenvalue();
    switch (kind) {
      case FlowKind::dirichlet: rhs = std::move(q); break;
      case FlowKind::deturck: rhs = std::move(qt); break;
      case FlowKind::laplacian: rhs = laplacian_flow_rhs(state); break;
    }
  }
};

FlowRecord make_record(int step, double t, double dt, const Diagnostics& dg) {
  FlowRecord r;
  r.step = step;
  r.t = t;
  r.dt = dt;
  r.dirichlet = dg.report.dirichlet;
  r.hitchin = dg.report.hitchin;
  r.grad_norm = dg.grad_norm;
  r.gauged_norm = dg.gauged_norm;
  r.d_norm = std::sqrt(dg.report.torsion_d);
  r.codiff_norm = std::sqrt(dg.report.torsion_delta);
  r.min_metric_eig = dg.min_metric_eig;
  return r;
}

double driving_norm(const FlowRecord& r, FlowKind kind) {
  return kind == FlowKind::deturck ? r.gauged_norm : r.grad_norm;
}

std::optional<State> advance(const State& state, const Field& k1,
                             const State& bar, const FlowConfig& cfg,
                             double dt) {
  if (cfg.integrator == Integrator::euler) {
    Field om = state.omega();
    om.axpy(dt, k1);
    return try_structure(om);
  }
  // Classical four-stage scheme; every stage state must stay positive.
  Field om2 = state.omega();
  om2.axpy(0.5 * dt, k1);
  std::optional<State> s2 = try_structure(om2);
  if (!s2) return std::nullopt;
  Field k2 = rhs_only(*s2, bar, cfg.kind);

  Field om3 = state.omega();
  om3.axpy(0.5 * dt, k2);
  std::optional<State> s3 = try_structure(om3);
  if (!s3) return std::nullopt;
  Field k3 = rhs_only(*s3, bar, cfg.kind);

  Field om4 = state.omega();
  om4.axpy(dt, k3);
  std::optional<State> s4 = try_structure(om4);
  if (!s4) return std::nullopt;
  Field k4 = rhs_only(*s4, bar, cfg.kind);

  Field om = state.omega();
  om.axpy(dt / 6.0, k1);
  om.axpy(dt / 3.0, k2);
  om.axpy(dt / 3.0, k3);
  om.axpy(dt / 6.0, k4);
  return try_structure(om);
}

// Halving cascade on top of a proposed dt.  `d_current` feeds the
// monotonicity guard of the plain gradient kind.
StepResult cascade(const State& state, const FlowConfig& cfg, const State& bar,
                   const Field& k1, double dt, double d_current) {
  StepResult out{state, false, 0.0, 0, FlowStatus::running};
  while (true) {
    std::optional<State> trial = advance(state, k1, bar, cfg, dt);
    bool positivity_ok = trial.has_value();
    bool mono_ok = true;
    if (positivity_ok && cfg.kind == FlowKind::dirichlet) {
      double d_new = energy(*trial).dirichlet;
      mono_ok = d_new <= d_current + 1e-12 * std::fabs(d_current);
    }
    if (positivity_ok && mono_ok) {
      out.state = std::move(*trial);
      out.accepted = true;
      out.dt_used = dt;
      return out;
    }
    ++out.rejections;
    out.failure =
        positivity_ok ? FlowStatus::step_floor : FlowStatus::positivity_loss;
    dt *= 0.5;
    if (dt < cfg.dt_min) {
      out.dt_used = dt;
      return out;
    }
  }
}

}  // namespace

std::string to_string(Integrator integrator) {
  return integrator == Integrator::euler ? "euler" : "rk4";
}

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::running: return "running";
    case FlowStatus::converged: return "converged";
    case FlowStatus::t_max_reached: return "t_max";
    case FlowStatus::positivity_loss: return "positivity_loss";
    case FlowStatus::step_floor: return "step_floor";
  }
  return "unknown";
}

void validate(const FlowConfig& cfg) {
  if (!(cfg.dt_safety > 0.0 && cfg.dt_safety < 1.0))
    throw std::invalid_argument("flow: dt_safety must lie in (0,1)");
  if (!(cfg.t_max > 0.0))
    throw std::invalid_argument("flow: t_max must be positive");
  if (cfg.stop_grad_tol < 0.0)
    throw std::invalid_argument("flow: stop_grad_tol must be >= 0");
  if (cfg.max_steps <= 0)
    throw std::invalid_argument("flow: max_steps must be positive");
  if (cfg.settle_steps <= 0)
    throw std::invalid_argument("flow: settle_steps must be positive");
  if (!(cfg.dt_min > 0.0))
    throw std::invalid_argument("flow: dt_min must be positive");
}

double cfl_dt(const StructureField<double>& state, const FlowConfig& cfg) {
  const TorusGrid& g = state.grid();
  double smax[7];
  for (int a = 0; a < 7; ++a) smax[a] = g.max_derivative_symbol(a);

  // Worst-corner bound on |xi|^2 in the covector metric over the box of
  // representable stencil frequencies, maximized over nodes.
  double worst = 0.0;
  double e[7], col[7];
  for (int64_t i = 0; i < g.nodes(); ++i) {
    const auto& pt = state.point(i);
    double bound = 0.0;
    for (int b = 0; b < 7; ++b) {
      if (smax[b] == 0.0) continue;
      for (int k = 0; k < 7; ++k) e[k] = 0.0;
      e[b] = 1.0;
      pt.gram_apply(1, e, col);
      for (int a = 0; a < 7; ++a)
        bound += smax[a] * smax[b] * std::fabs(col[a]);
    }
    worst = std::max(worst, bound);
  }
  double s = symbol_spectral_bound(cfg.kind) * worst;
  if (s <= 0.0) return cfg.t_max;  // no active axis: nothing can move
  return cfg.dt_safety * 2.0 / s;
}

StepResult step(const StructureField<double>& state, const FlowConfig& cfg) {
  validate(cfg);
  state.require_positive();
  State bar = State::flat(state.grid());
  Field k1 = rhs_only(state, bar, cfg.kind);
  double d_current = cfg.kind == FlowKind::dirichlet
                         ? energy(state).dirichlet
                         : 0.0;
  return cascade(state, cfg, bar, k1, cfl_dt(state, cfg), d_current);
}

FlowTrace run(const StructureField<double>& init, const FlowConfig& cfg) {
  validate(cfg);
  init.require_positive();
  auto clock_start = std::chrono::steady_clock::now();

  FlowTrace trace;
  trace.config = cfg;
  State bar = State::flat(init.grid());
  State state = init;

  Diagnostics dg(state, bar, cfg.kind);
  trace.records.push_back(make_record(0, 0.0, 0.0, dg));
  const double initial = driving_norm(trace.records.front(), cfg.kind);
  const double stop_tol =
      cfg.stop_grad_tol > 0.0 ? cfg.stop_grad_tol
                              : std::max(1e-8 * initial, 1e-13);

  double t = 0.0;
  int below = initial < stop_tol ? 1 : 0;
  for (int s = 1; s <= cfg.max_steps && t < cfg.t_max; ++s) {
    double dt = std::min(cfl_dt(state, cfg), cfg.t_max - t);
    StepResult sr =
        cascade(state, cfg, bar, dg.rhs, dt, dg.report.dirichlet);
    trace.rejected_steps += sr.rejections;
    if (!sr.accepted) {
      trace.status = sr.failure;
      trace.stop_reason = sr.failure == FlowStatus::positivity_loss
                              ? "positivity failed at the smallest step"
                              : "step cascade hit dt_min";
      break;
    }
    state = std::move(sr.state);
    t += sr.dt_used;
    ++trace.accepted_steps;
    dg = Diagnostics(state, bar, cfg.kind);
    trace.records.push_back(make_record(s, t, sr.dt_used, dg));
    if (driving_norm(trace.records.back(), cfg.kind) < stop_tol) {
      if (++below >= cfg.settle_steps) {
        trace.status = FlowStatus::converged;
        trace.stop_reason = "driving norm settled below tolerance";
        break;
      }
    } else {
      below = 0;
    }
  }
  if (trace.status == FlowStatus::running) {
    trace.status = FlowStatus::t_max_reached;
    trace.stop_reason =
        t >= cfg.t_max ? "reached t_max" : "exhausted max_steps";
  }
  trace.final_state = std::move(state);
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    clock_start)
          .count();
  return trace;
}

double gauge_residual(const StructureField<double>& state) {
  Field delta = codiff_adjoint(state, state.omega());
  Field s7(state.grid(), 2), s14(state.grid(), 2);
  project2_field(state, delta, s7, s14);
  return std::sqrt(l2_norm2(state, s7));
}

DecayFit decay_fit(const FlowTrace& trace, int window) {
  if (window < 5)
    throw std::invalid_argument("decay_fit: window must cover >= 5 records");
  const int n = static_cast<int>(trace.records.size());
  if (window > n)
    throw std::invalid_argument("decay_fit: window exceeds the trace");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = n - window; i < n; ++i) {
    double x = trace.records[i].t;
    double y =
        2.0 * std::log(std::max(trace.records[i].gauged_norm, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double w = window;
  double denom = w * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("decay_fit: degenerate time axis");
  double slope = (w * sxy - sx * sy) / denom;
  double mean = sy / w;
  double ss_tot = 0, ss_res = 0;
  double intercept = (sy - slope * sx) / w;
  for (int i = n - window; i < n; ++i) {
    double x = trace.records[i].t;
    double y =
        2.0 * std::log(std::max(trace.records[i].gauged_norm, 1e-300));
    ss_tot += (y - mean) * (y - mean);
    ss_res += (y - intercept - slope * x) * (y - intercept - slope * x);
  }
  DecayFit fit;
  fit.rate = -slope;
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

std::string trace_csv(const FlowTrace& trace) {
  std::string out =
      "step,t,dt,dirichlet,hitchin,grad_norm,gauged_norm,d_norm,"
      "codiff_norm,min_metric_eig\n";
  char line[512];
  for (const FlowRecord& r : trace.records) {
    std::snprintf(line, sizeof line,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.step, r.t, r.dt, r.dirichlet, r.hitchin, r.grad_norm,
                  r.gauged_norm, r.d_norm, r.codiff_norm, r.min_metric_eig);
    out += line;
  }
  return out;
}

std::string trace_json(const FlowTrace& trace, bool include_timing) {
  nlohmann::json j;
  j["status"] = to_string(trace.status);
  j["stop_reason"] = trace.stop_reason;
  j["accepted_steps"] = trace.accepted_steps;
  j["rejected_steps"] = trace.rejected_steps;
  j["records"] = trace.records.size();
  if (include_timing) j["wall_seconds"] = trace.wall_seconds;
  j["config"] = {{"kind", to_string(trace.config.kind)},
                 {"integrator", to_string(trace.config.integrator)},
                 {"dt_safety", trace.config.dt_safety},
                 {"t_max", trace.config.t_max},
                 {"stop_grad_tol", trace.config.stop_grad_tol},
                 {"max_steps", trace.config.max_steps}};
  if (!trace.records.empty()) {
    const FlowRecord& r = trace.records.back();
    j["final"] = {{"t", r.t},
                  {"dirichlet", r.dirichlet},
                  {"hitchin", r.hitchin},
                  {"grad_norm", r.grad_norm},
                  {"gauged_norm", r.gauged_norm},
                  {"d_norm", r.d_norm},
                  {"codiff_norm", r.codiff_norm},
                  {"min_metric_eig", r.min_metric_eig}};
  }
  return j.dump(2);
}

namespace {
void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}
}  // namespace

void write_trace_csv(const FlowTrace& trace, const std::string& path) {
  write_text(trace_csv(trace), path);
}

void write_trace_json(const FlowTrace& trace, const std::string& path) {
  write_text(trace_json(trace), path);
}

}  // namespace g2flow
