#pragma once

// Strict key=value run configuration: every key is known, every value is
// validated at parse time, and misspellings are hard errors with a line
// and column, never silent defaults.  The resolved configuration can be
// echoed back in a canonical form so that every artifact records exactly
// what produced it.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "g2flow/calculus.hpp"
#include "g2flow/flow.hpp"

namespace g2flow {

enum class InitKind { flat, flat_plus_random, flat_plus_exact, scaled };

std::string to_string(InitKind kind);

struct RunConfig {
  std::array<int, 7> grid_n{8, 8, 1, 1, 1, 1, 1};
  std::array<double, 7> grid_l{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  int fd_order = 4;
  FlowKind flow_kind = FlowKind::deturck;
  double flow_dt_safety = 0.2;
  double flow_t_max = 1.0;
  double flow_stop_grad_tol = 0.0;
  InitKind init_kind = InitKind::flat_plus_random;
  double init_eps = 1e-2;  // perturbation amplitude; scale factor for `scaled`
  uint64_t init_seed = 1;
  std::string out_path;  // artifact directory; empty writes nothing to disk
};

// Parse failure with a 1-based position in the input text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Strict parser for `key=value` lines.  Blank lines and `#` comments are
// ignored; unknown or duplicate keys, malformed values, and out-of-range
// settings all throw ConfigError.
RunConfig parse_config(const std::string& text);

// Canonical echo: every key, resolved value, one per line, fixed order.
// Feeding the echo back through parse_config reproduces the config.
std::string config_echo(const RunConfig& cfg);

// The same resolved settings as a flat JSON object keyed by config key.
std::string config_json(const RunConfig& cfg);

TorusGrid make_grid(const RunConfig& cfg);

FlowConfig make_flow_config(const RunConfig& cfg);

// Seeded scenario construction: the initial 3-form of the configured run.
// flat            -> the flat structure's form
// flat_plus_random-> flat + eps * band-limited random trig 3-form
// flat_plus_exact -> flat + eps * d(band-limited random trig 2-form)
// scaled          -> eps * flat (eps must be positive)
// `g` is the caller-owned grid (normally make_grid(cfg)); fields keep a
// reference to it.
FormField initial_form(const TorusGrid& g, const RunConfig& cfg);

}  // namespace g2flow
