#pragma once

// Explicit time integration of the energy-gradient flow, its gauged
// variant, and the Hodge-Laplacian flow.  The step size comes from the
// parabolic stability bound built out of the universal symbol constant
// and the worst representable stencil frequency in the current metric;
// steps are rejected (and halved) on positivity loss, and additionally
// on energy increase for the plain gradient kind.  Each accepted step
// appends a full diagnostic record.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "g2flow/deturck.hpp"
#include "g2flow/energy.hpp"
#include "g2flow/symbol.hpp"

namespace g2flow {

enum class Integrator { euler, rk4 };

std::string to_string(Integrator integrator);

enum class FlowStatus {
  running,
  converged,        // driving norm below tolerance for settle_steps in a row
  t_max_reached,    // also covers the max_steps budget
  positivity_loss,  // a node left the positive cone at the smallest step
  step_floor,       // halving cascade hit dt_min for a non-positivity reason
};

std::string to_string(FlowStatus status);

struct FlowConfig {
  FlowKind kind = FlowKind::deturck;
  Integrator integrator = Integrator::euler;
  double dt_safety = 0.2;      // fraction of the stability limit, in (0,1)
  double t_max = 1.0;
  double stop_grad_tol = 0.0;  // absolute; 0 selects 1e-8 * initial norm,
                               // floored at 1e-13 so exact fixed points settle
  int max_steps = 100000;
  int settle_steps = 10;
  double dt_min = 1e-12;
};

// Throws std::invalid_argument when a field is out of range.
void validate(const FlowConfig& cfg);

struct FlowRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double dirichlet = 0.0;       // energy
  double hitchin = 0.0;         // total volume
  double grad_norm = 0.0;       // L2 norm of the energy gradient
  double gauged_norm = 0.0;     // L2 norm of the gauged gradient
  double d_norm = 0.0;          // L2 norm of d omega
  double codiff_norm = 0.0;     // L2 norm of delta omega
  double min_metric_eig = 0.0;  // worst pointwise metric eigenvalue
};

struct FlowTrace {
  std::vector<FlowRecord> records;  // initial state plus one per accepted step
  FlowStatus status = FlowStatus::running;
  std::string stop_reason;
  int accepted_steps = 0;
  int rejected_steps = 0;
  double wall_seconds = 0.0;
  FlowConfig config;
  std::optional<StructureField<double>> final_state;
};

// Proposed step size at the current state: dt_safety * 2 / S, where S
// bounds the symbol spectral radius over all nodes and all grid-
// representable frequencies.
double cfl_dt(const StructureField<double>& state, const FlowConfig& cfg);

struct StepResult {
  StructureField<double> state;
  bool accepted = false;
  double dt_used = 0.0;
  int rejections = 0;
  FlowStatus failure = FlowStatus::running;  // set when not accepted
};

// One guarded step, including the halving cascade.  Returns the original
// state with accepted == false when the cascade hits dt_min.
StepResult step(const StructureField<double>& state, const FlowConfig& cfg);

FlowTrace run(const StructureField<double>& init, const FlowConfig& cfg);

// L2 norm of the 7-type part of delta omega: the gauge-slice residual
// that the gauged flow drives to zero.
double gauge_residual(const StructureField<double>& state);

struct DecayFit {
  double rate = 0.0;       // negated slope of log ||gauged gradient||^2 vs t
  double r_squared = 0.0;  // goodness of the least-squares fit
};

// Fits the last `window` records; throws std::invalid_argument when the
// window is shorter than 5 records or longer than the trace.
DecayFit decay_fit(const FlowTrace& trace, int window);

// CSV with one row per record; column set fixed by FlowRecord.
std::string trace_csv(const FlowTrace& trace);
// Terminal summary.  include_timing=false gives a canonical byte-stable
// form (wall time omitted) for determinism checks.
std::string trace_json(const FlowTrace& trace, bool include_timing = true);

void write_trace_csv(const FlowTrace& trace, const std::string& path);
void write_trace_json(const FlowTrace& trace, const std::string& path);

}  // namespace g2flow
