// Command-line driver: seeded invariant suites, flow runs, and flat
// spectra from a plain key=value configuration.  All stdout output is
// byte-stable for identical (config, seed) pairs; wall-clock timing goes
// to stderr only.  Exit codes: 0 pass, 1 check/flow failure, 2
// configuration or usage errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "g2flow/config.hpp"
#include "g2flow/deturck.hpp"
#include "g2flow/flow.hpp"
#include "g2flow/suite.hpp"

namespace {

using namespace g2flow;

struct Options {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  bool out_set = false;
  double tol = 0.0;
};

RunConfig load_config(const Options& opt) {
  std::string text;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in)
      throw ConfigError(0, 0, "cannot read config file: " + opt.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  RunConfig cfg = parse_config(text);
  if (opt.seed_set) cfg.init_seed = opt.seed;
  if (opt.out_set) cfg.out_path = opt.out_dir;
  return cfg;
}

void write_text_file(const std::string& dir, const std::string& name,
                     const std::string& text) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

int cmd_suite(const Options& opt, const std::string& name) {
  RunConfig cfg = load_config(opt);
  SuiteReport report = run_suite(name, cfg, cfg.init_seed, opt.tol);

  std::string table =
      suite_table(report) + "\nresolved config:\n" + config_echo(cfg);
  std::cout << table;
  if (!cfg.out_path.empty()) {
    nlohmann::json j = nlohmann::json::parse(suite_json(report));
    j["config"] = nlohmann::json::parse(config_json(cfg));
    write_text_file(cfg.out_path, "suite_" + name + ".json", j.dump(2) + "\n");
    write_text_file(cfg.out_path, "suite_" + name + ".txt", table);
  }
  return report.passed ? 0 : 1;
}

int cmd_flow(const Options& opt) {
  RunConfig cfg = load_config(opt);
  TorusGrid grid = make_grid(cfg);
  FormField init = initial_form(grid, cfg);

  nlohmann::json out;
  out["config"] = nlohmann::json::parse(config_json(cfg));
  int code = 1;
  auto state = try_structure(init);
  if (!state) {
    out["status"] = to_string(FlowStatus::positivity_loss);
    out["stop_reason"] = "initial state is not positive";
  } else {
    FlowConfig fc = make_flow_config(cfg);
    FlowTrace trace = run(*state, fc);
    out["status"] = to_string(trace.status);
    out["stop_reason"] = trace.stop_reason;
    out["trace"] = nlohmann::json::parse(trace_json(trace, false));
    code = trace.status == FlowStatus::converged ||
                   trace.status == FlowStatus::t_max_reached
               ? 0
               : 1;
    if (!cfg.out_path.empty()) {
      write_text_file(cfg.out_path, "flow_trace.csv", trace_csv(trace));
      nlohmann::json jt = nlohmann::json::parse(trace_json(trace, false));
      jt["config_run"] = nlohmann::json::parse(config_json(cfg));
      write_text_file(cfg.out_path, "flow_trace.json", jt.dump(2) + "\n");
      write_text_file(cfg.out_path, "flow_config.txt", config_echo(cfg));
      if (trace.final_state)
        write_field(cfg.out_path + "/flow_final.field",
                    trace.final_state->omega());
    }
    std::fprintf(stderr, "# wall %.3f s, %d accepted / %d rejected steps\n",
                 trace.wall_seconds, trace.accepted_steps,
                 trace.rejected_steps);
  }
  std::cout << out.dump(2) << "\n";
  return code;
}

int cmd_spectrum(const Options& opt) {
  RunConfig cfg = load_config(opt);
  TorusGrid grid = make_grid(cfg);
  SpectrumResult s = flat_l_spectrum_fourier(grid);

  nlohmann::json out;
  out["config"] = nlohmann::json::parse(config_json(cfg));
  out["dim"] = s.eigenvalues.size();
  out["kernel_cut"] = s.kernel_cut;
  out["kernel_count"] = s.kernel_count;
  out["lambda1"] = s.lambda1;
  out["lambda_max"] = s.lambda_max;
  std::cout << out.dump(2) << "\n";
  if (!cfg.out_path.empty()) {
    write_text_file(cfg.out_path, "spectrum.json", out.dump(2) + "\n");
    std::ostringstream csv;
    write_spectrum_csv(csv, s);
    write_text_file(cfg.out_path, "spectrum.csv", csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "torsion-energy flow toolkit: invariant suites, gradient/gauged/"
      "Laplacian flow runs, and flat linearization spectra"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path,
                 "key=value configuration file (strict; unknown keys fail)");
  auto* seed_opt = app.add_option("--seed", opt.seed,
                                  "override init.seed / suite seed");
  auto* out_opt =
      app.add_option("--out", opt.out_dir, "override out.path artifact dir");
  app.add_option("--tol", opt.tol,
                 "override the identity-check tolerance of suites");

  std::string suite_name;
  auto* suite_cmd =
      app.add_subcommand("suite", "run a named invariant battery");
  suite_cmd
      ->add_option("name", suite_name,
                   "one of: algebra, fields, symbols, spectrum")
      ->required()
      ->check(CLI::IsMember({"algebra", "fields", "symbols", "spectrum"}));
  auto* flow_cmd =
      app.add_subcommand("flow", "run the configured flow from a seeded init");
  auto* spectrum_cmd = app.add_subcommand(
      "spectrum", "flat-background linearization spectrum on the config grid");

  CLI11_PARSE(app, argc, argv);
  opt.seed_set = seed_opt->count() > 0;
  opt.out_set = out_opt->count() > 0;

  try {
    if (suite_cmd->parsed()) return cmd_suite(opt, suite_name);
    if (flow_cmd->parsed()) return cmd_flow(opt);
    if (spectrum_cmd->parsed()) return cmd_spectrum(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
