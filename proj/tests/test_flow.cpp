#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "g2flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "g2flow/rng.hpp"

using namespace g2flow;

namespace {

TorusGrid mk(int n1, int n2, int fd, double len = 1.0) {
  std::array<int, 7> nn{n1, n2, 1, 1, 1, 1, 1};
  std::array<double, 7> ll{len, len, len, len, len, len, len};
  return TorusGrid(nn, ll, fd);
}

StructureField<double> perturbed(const TorusGrid& g, uint64_t seed,
                                 double eps) {
  SplitMix64 rng(seed);
  TrigForm t = random_trig_form(g, 3, rng, 3, 2);
  FormField om = StructureField<double>::flat(g).omega() + eps * sample(g, t);
  StructureField<double> sf(om);
  REQUIRE(sf.positive());
  return sf;
}

FlowConfig base_config(FlowKind kind) {
  FlowConfig cfg;
  cfg.kind = kind;
  cfg.t_max = 2.0;
  return cfg;
}

double dirichlet_drop(const FlowTrace& tr) {
  double worst = 0.0;  // most positive increase between consecutive records
  for (size_t i = 1; i < tr.records.size(); ++i) {
    double prev = tr.records[i - 1].dirichlet;
    double inc = tr.records[i].dirichlet - prev;
    worst = std::max(worst, inc - 1e-12 * std::fabs(prev));
  }
  return worst;
}

}  // namespace

// ==== configuration and step control ====

TEST_CASE("configuration validation rejects out-of-range fields") {
  FlowConfig good;
  CHECK_NOTHROW(validate(good));

  auto bad = [&](auto&& tweak) {
    FlowConfig c;
    tweak(c);
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
  };
  bad([](FlowConfig& c) { c.dt_safety = 0.0; });
  bad([](FlowConfig& c) { c.dt_safety = 1.0; });
  bad([](FlowConfig& c) { c.dt_safety = -0.1; });
  bad([](FlowConfig& c) { c.t_max = 0.0; });
  bad([](FlowConfig& c) { c.t_max = -1.0; });
  bad([](FlowConfig& c) { c.stop_grad_tol = -1e-9; });
  bad([](FlowConfig& c) { c.max_steps = 0; });
  bad([](FlowConfig& c) { c.settle_steps = 0; });
  bad([](FlowConfig& c) { c.dt_min = 0.0; });

  // run() and step() validate before touching the state.
  TorusGrid g = mk(4, 4, 2);
  auto flat = StructureField<double>::flat(g);
  FlowConfig broken;
  broken.max_steps = -3;
  CHECK_THROWS_AS(run(flat, broken), std::invalid_argument);
  CHECK_THROWS_AS(step(flat, broken), std::invalid_argument);
}

TEST_CASE("step size bound follows the symbol constant and the stencil") {
  TorusGrid g = mk(5, 5, 2);
  auto flat = StructureField<double>::flat(g);
  double s0 = g.max_derivative_symbol(0);
  CHECK(s0 > 0.0);
  // Two active axes, identity metric: the frequency-corner bound is
  // exactly s0^2 + s1^2 with s1 == s0.
  double corner = 2.0 * s0 * s0;

  FlowConfig det = base_config(FlowKind::deturck);
  double dt_det = cfl_dt(flat, det);
  CHECK(dt_det ==
        doctest::Approx(det.dt_safety * 2.0 / (3.0 * corner)).epsilon(1e-14));

  FlowConfig dir = base_config(FlowKind::dirichlet);
  double dt_dir = cfl_dt(flat, dir);
  CHECK(dt_dir ==
        doctest::Approx(dt_det * 3.0 / (7.0 / 3.0)).epsilon(1e-14));

  // Halving the safety factor halves the step exactly.
  FlowConfig half = det;
  half.dt_safety = det.dt_safety / 2.0;
  CHECK(cfl_dt(flat, half) == dt_det / 2.0);

  // Finer grid: the bound shrinks quadratically with the spacing.
  TorusGrid g2 = mk(10, 10, 2);
  auto flat2 = StructureField<double>::flat(g2);
  CHECK(cfl_dt(flat2, det) == doctest::Approx(dt_det / 4.0).epsilon(1e-13));
}

TEST_CASE("a guarded step from a perturbed state is accepted") {
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 7, 5e-3);
  FlowConfig cfg = base_config(FlowKind::dirichlet);

  double d0 = energy(sf).dirichlet;
  StepResult sr = step(sf, cfg);
  CHECK(sr.accepted);
  CHECK(sr.rejections == 0);
  CHECK(sr.dt_used == cfl_dt(sf, cfg));
  CHECK(sr.state.positive());
  CHECK(energy(sr.state).dirichlet < d0);
}

// ==== fixed points ====

TEST_CASE("flat, rescaled flat, and constant structures are exact fixed points") {
  TorusGrid g = mk(5, 5, 2);
  auto flat = StructureField<double>::flat(g);

  // A constant positive structure away from the reference point.
  SplitMix64 rng(402);
  std::vector<double> coeffs(flat.omega().dim());
  const std::vector<double> fc = reference_positive_form().coeffs();
  for (size_t r = 0; r < coeffs.size(); ++r) coeffs[r] = fc[r] + 0.05 * rng.sym();
  auto constant = try_structure(constant_field<double>(g, 3, coeffs));
  REQUIRE(constant.has_value());

  // Dyadic rescaling keeps every arithmetic step exact.
  auto scaled = try_structure(2.0 * flat.omega());
  REQUIRE(scaled.has_value());

  for (FlowKind kind :
       {FlowKind::dirichlet, FlowKind::deturck, FlowKind::laplacian}) {
    CAPTURE(to_string(kind));
    FlowConfig cfg = base_config(kind);
    for (const StructureField<double>* s : {&flat, &*scaled, &*constant}) {
      StepResult sr = step(*s, cfg);
      CHECK(sr.accepted);
      CHECK((sr.state.omega() - s->omega()).max_abs() == 0.0);
    }
  }

  // A full run on the rescaled structure settles through the absolute
  // floor of the stopping rule without moving.
  FlowConfig cfg = base_config(FlowKind::deturck);
  FlowTrace tr = run(*scaled, cfg);
  CHECK(tr.status == FlowStatus::converged);
  CHECK(tr.accepted_steps == cfg.settle_steps - 1);
  CHECK(tr.rejected_steps == 0);
  REQUIRE(tr.final_state.has_value());
  CHECK((tr.final_state->omega() - scaled->omega()).max_abs() == 0.0);
  for (const FlowRecord& r : tr.records) {
    CHECK(r.grad_norm == 0.0);
    CHECK(r.gauged_norm == 0.0);
    CHECK(r.d_norm == 0.0);
    CHECK(r.dirichlet == 0.0);
    CHECK(r.hitchin == doctest::Approx(std::pow(2.0, 7.0 / 3.0)).epsilon(1e-13));
  }
}

// ==== gradient flow ====

TEST_CASE("gradient flow decreases the energy monotonically and converges") {
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 7, 5e-3);
  FlowConfig cfg = base_config(FlowKind::dirichlet);

  FlowTrace tr = run(sf, cfg);
  CHECK(tr.status == FlowStatus::converged);
  CHECK(tr.rejected_steps == 0);
  CHECK(dirichlet_drop(tr) <= 0.0);

  const FlowRecord& last = tr.records.back();
  CHECK(last.grad_norm <= 1e-8 * tr.records.front().grad_norm);
  CHECK(last.dirichlet <= 1e-10 * tr.records.front().dirichlet);
  for (const FlowRecord& r : tr.records) CHECK(r.min_metric_eig > 0.5);

  // Time axis: contiguous steps, strictly increasing t, dt within the bound.
  for (size_t i = 1; i < tr.records.size(); ++i) {
    CHECK(tr.records[i].step == static_cast<int>(i));
    CHECK(tr.records[i].t > tr.records[i - 1].t);
    CHECK(tr.records[i].dt > 0.0);
  }
}

// ==== gauged flow ====

TEST_CASE("gauged flow converges to a torsion-free structure at the expected rate") {
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 11, 5e-3);
  FlowConfig cfg = base_config(FlowKind::deturck);

  FlowTrace tr = run(sf, cfg);
  REQUIRE(tr.status == FlowStatus::converged);
  REQUIRE(tr.final_state.has_value());

  const FlowRecord& last = tr.records.back();
  CHECK(last.d_norm + last.codiff_norm <= 1e-6);
  CHECK(gauge_residual(*tr.final_state) <= 1e-6);
  CHECK(tr.final_state->min_metric_eigenvalue() ==
        doctest::Approx(1.0).epsilon(0.05));

  // Tail decay of the gauged gradient against the smallest nonzero
  // eigenvalue of the linearized operator on this grid.
  double lam1 = flat_l_spectrum_fourier(g).lambda1;
  DecayFit fit = decay_fit(tr, 40);
  CHECK(fit.r_squared >= 0.995);
  CHECK(fit.rate >= 1.6 * lam1);
  CHECK(fit.rate <= 2.6 * lam1);
}

TEST_CASE("the four-stage integrator reproduces the gauged flow limit") {
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 19, 5e-3);
  FlowConfig cfg = base_config(FlowKind::deturck);
  cfg.integrator = Integrator::rk4;

  FlowTrace tr = run(sf, cfg);
  REQUIRE(tr.status == FlowStatus::converged);
  const FlowRecord& last = tr.records.back();
  CHECK(last.d_norm + last.codiff_norm <= 1e-6);

  double lam1 = flat_l_spectrum_fourier(g).lambda1;
  DecayFit fit = decay_fit(tr, 40);
  CHECK(fit.rate >= 1.6 * lam1);
  CHECK(fit.rate <= 2.6 * lam1);
}

// ==== laplacian flow ====

TEST_CASE("laplacian flow does not settle on data with torsion") {
  // Short horizon: the non-closed components grow exponentially, and past
  // a few e-foldings the state leaves the regime the diagnostics trust.
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 13, 1e-3);
  FlowConfig cfg = base_config(FlowKind::laplacian);
  cfg.t_max = 0.025;

  FlowTrace tr = run(sf, cfg);
  CHECK(tr.status != FlowStatus::converged);
  bool grew = tr.records.back().d_norm > 2.0 * tr.records.front().d_norm;
  bool lost = tr.status == FlowStatus::positivity_loss;
  CHECK((grew || lost));
}

// ==== budgets and serialization ====

TEST_CASE("step and time budgets end the run with the time-budget status") {
  TorusGrid g = mk(5, 5, 2);
  auto sf = perturbed(g, 11, 5e-3);

  FlowConfig few = base_config(FlowKind::deturck);
  few.max_steps = 5;
  FlowTrace tr = run(sf, few);
  CHECK(tr.status == FlowStatus::t_max_reached);
  CHECK(tr.stop_reason == "exhausted max_steps");
  CHECK(tr.accepted_steps == 5);
  CHECK(tr.records.size() == 6);

  FlowConfig shortt = base_config(FlowKind::deturck);
  shortt.t_max = 1.5 * cfl_dt(sf, shortt);
  FlowTrace tr2 = run(sf, shortt);
  CHECK(tr2.status == FlowStatus::t_max_reached);
  CHECK(tr2.stop_reason == "reached t_max");
  CHECK(tr2.records.back().t == doctest::Approx(shortt.t_max).epsilon(1e-12));
}

TEST_CASE("traces are deterministic and serialize faithfully") {
  TorusGrid g = mk(5, 5, 2);
  FlowConfig cfg = base_config(FlowKind::deturck);
  cfg.t_max = 0.05;

  FlowTrace a = run(perturbed(g, 11, 5e-3), cfg);
  FlowTrace b = run(perturbed(g, 11, 5e-3), cfg);
  CHECK(trace_csv(a) == trace_csv(b));
  CHECK(trace_json(a, false) == trace_json(b, false));

  // CSV shape.
  std::string csv = trace_csv(a);
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line ==
        "step,t,dt,dirichlet,hitchin,grad_norm,gauged_norm,d_norm,"
        "codiff_norm,min_metric_eig");
  size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == a.records.size());

  // JSON summary round-trips the terminal record and echoes the config.
  nlohmann::json j = nlohmann::json::parse(trace_json(a, false));
  CHECK(j["status"].get<std::string>() == to_string(a.status));
  CHECK(j["config"]["kind"].get<std::string>() == "deturck");
  CHECK(j["config"]["integrator"].get<std::string>() == "euler");
  CHECK(j["config"]["t_max"].get<double>() == cfg.t_max);
  CHECK(j["records"].get<size_t>() == a.records.size());
  CHECK(j["final"]["grad_norm"].get<double>() == a.records.back().grad_norm);
  CHECK(j["final"]["t"].get<double>() == a.records.back().t);
  CHECK(!j.contains("wall_seconds"));
  CHECK(nlohmann::json::parse(trace_json(a, true)).contains("wall_seconds"));

  // File writers emit the same bytes.
  const std::string path = "/tmp/g2flow_trace_test.csv";
  write_trace_csv(a, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == csv);
}

TEST_CASE("status and integrator names are stable") {
  CHECK(to_string(FlowStatus::running) == "running");
  CHECK(to_string(FlowStatus::converged) == "converged");
  CHECK(to_string(FlowStatus::t_max_reached) == "t_max");
  CHECK(to_string(FlowStatus::positivity_loss) == "positivity_loss");
  CHECK(to_string(FlowStatus::step_floor) == "step_floor");
  CHECK(to_string(Integrator::euler) == "euler");
  CHECK(to_string(Integrator::rk4) == "rk4");
}

// ==== decay fitting ====

TEST_CASE("decay fit recovers an exact exponential and validates its window") {
  FlowTrace synth;
  for (int i = 0; i < 12; ++i) {
    FlowRecord r;
    r.step = i;
    r.t = 0.1 * i;
    r.gauged_norm = 5.0 * std::exp(-1.5 * r.t);
    synth.records.push_back(r);
  }
  DecayFit fit = decay_fit(synth, 12);
  CHECK(fit.rate == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(decay_fit(synth, 4), std::invalid_argument);
  CHECK_THROWS_AS(decay_fit(synth, 13), std::invalid_argument);

  FlowTrace flat_time;
  for (int i = 0; i < 6; ++i) {
    FlowRecord r;
    r.t = 0.0;
    r.gauged_norm = 1.0;
    flat_time.records.push_back(r);
  }
  CHECK_THROWS_AS(decay_fit(flat_time, 6), std::invalid_argument);
}
