#include "g2flow/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <string_view>

#include "json.hpp"
#include "g2flow/rng.hpp"

namespace g2flow {

namespace {

std::string format_what(int line, int column, const std::string& what) {
  return "config:" + std::to_string(line) + ":" + std::to_string(column) +
         ": " + what;
}

struct Cursor {
  int line;
  int column;  // 1-based position in the raw line
};

[[noreturn]] void fail(Cursor at, const std::string& what) {
  throw ConfigError(at.line, at.column, what);
}

bool parse_int_full(std::string_view s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && !s.empty();
}

bool parse_u64_full(std::string_view s, uint64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && !s.empty();
}

bool parse_double_full(std::string_view s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && !s.empty();
}

int axis_digit(std::string_view key, std::string_view prefix) {
  // grid.n1 .. grid.n7 / grid.l1 .. grid.l7 -> 0-based axis, else -1.
  if (key.size() != prefix.size() + 1 || key.substr(0, prefix.size()) != prefix)
    return -1;
  char c = key.back();
  return c >= '1' && c <= '7' ? c - '1' : -1;
}

void apply(RunConfig& cfg, std::string_view key, std::string_view value,
           Cursor key_at, Cursor value_at) {
  const std::string v(value);
  if (int a = axis_digit(key, "grid.n"); a >= 0) {
    long long n;
    if (!parse_int_full(value, n) || n < 1)
      fail(value_at, "grid.n" + std::to_string(a + 1) +
                         " needs a positive integer, got '" + v + "'");
    cfg.grid_n[static_cast<size_t>(a)] = static_cast<int>(n);
    return;
  }
  if (int a = axis_digit(key, "grid.l"); a >= 0) {
    double l;
    if (!parse_double_full(value, l) || !(l > 0.0))
      fail(value_at, "grid.l" + std::to_string(a + 1) +
                         " needs a positive real, got '" + v + "'");
    cfg.grid_l[static_cast<size_t>(a)] = l;
    return;
  }
  if (key == "fd.order") {
    long long n;
    if (!parse_int_full(value, n) || (n != 2 && n != 4))
      fail(value_at, "fd.order must be 2 or 4, got '" + v + "'");
    cfg.fd_order = static_cast<int>(n);
    return;
  }
  if (key == "flow.kind") {
    if (value == "dirichlet") cfg.flow_kind = FlowKind::dirichlet;
    else if (value == "deturck") cfg.flow_kind = FlowKind::deturck;
    else if (value == "laplacian") cfg.flow_kind = FlowKind::laplacian;
    else
      fail(value_at,
           "flow.kind must be dirichlet, deturck, or laplacian, got '" + v +
               "'");
    return;
  }
  if (key == "flow.dt_safety") {
    double x;
    if (!parse_double_full(value, x) || !(x > 0.0 && x < 1.0))
      fail(value_at, "flow.dt_safety needs a real in (0,1), got '" + v + "'");
    cfg.flow_dt_safety = x;
    return;
  }
  if (key == "flow.t_max") {
    double x;
    if (!parse_double_full(value, x) || !(x > 0.0))
      fail(value_at, "flow.t_max needs a positive real, got '" + v + "'");
    cfg.flow_t_max = x;
    return;
  }
  if (key == "flow.stop_grad_tol") {
    double x;
    if (!parse_double_full(value, x) || x < 0.0)
      fail(value_at,
           "flow.stop_grad_tol needs a nonnegative real, got '" + v + "'");
    cfg.flow_stop_grad_tol = x;
    return;
  }
  if (key == "init.kind") {
    if (value == "flat") cfg.init_kind = InitKind::flat;
    else if (value == "flat_plus_random")
      cfg.init_kind = InitKind::flat_plus_random;
    else if (value == "flat_plus_exact")
      cfg.init_kind = InitKind::flat_plus_exact;
    else if (value == "scaled") cfg.init_kind = InitKind::scaled;
    else
      fail(value_at,
           "init.kind must be flat, flat_plus_random, flat_plus_exact, or "
           "scaled, got '" +
               v + "'");
    return;
  }
  if (key == "init.eps") {
    double x;
    if (!parse_double_full(value, x))
      fail(value_at, "init.eps needs a real, got '" + v + "'");
    cfg.init_eps = x;
    return;
  }
  if (key == "init.seed") {
    uint64_t s;
    if (!parse_u64_full(value, s))
      fail(value_at, "init.seed needs an unsigned 64-bit integer, got '" + v +
                         "'");
    cfg.init_seed = s;
    return;
  }
  if (key == "out.path") {
    cfg.out_path = v;
    return;
  }
  fail(key_at, "unknown key '" + std::string(key) + "'");
}

}  // namespace

ConfigError::ConfigError(int line, int column, const std::string& what)
    : std::runtime_error(format_what(line, column, what)),
      line_(line),
      column_(column) {}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::flat: return "flat";
    case InitKind::flat_plus_random: return "flat_plus_random";
    case InitKind::flat_plus_exact: return "flat_plus_exact";
    case InitKind::scaled: return "scaled";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    size_t begin = raw.find_first_not_of(" \t");
    if (begin == std::string::npos || raw[begin] == '#') continue;

    size_t eq = raw.find('=', begin);
    if (eq == std::string::npos)
      fail({line_no, static_cast<int>(begin) + 1},
           "expected key=value, got '" + raw.substr(begin) + "'");

    size_t key_end = raw.find_last_not_of(" \t", eq - 1);
    if (key_end == std::string::npos || key_end < begin)
      fail({line_no, static_cast<int>(begin) + 1}, "empty key before '='");
    std::string key = raw.substr(begin, key_end - begin + 1);

    size_t val_begin = raw.find_first_not_of(" \t", eq + 1);
    size_t val_end = raw.find_last_not_of(" \t");
    std::string value = val_begin == std::string::npos
                            ? std::string()
                            : raw.substr(val_begin, val_end - val_begin + 1);
    Cursor key_at{line_no, static_cast<int>(begin) + 1};
    Cursor value_at{line_no,
                    static_cast<int>(val_begin == std::string::npos
                                         ? eq + 2
                                         : val_begin + 1)};
    if (!seen.insert(key).second)
      fail(key_at, "duplicate key '" + key + "'");
    apply(cfg, key, value, key_at, value_at);
  }
  return cfg;
}

std::string config_echo(const RunConfig& cfg) {
  std::string out;
  char buf[128];
  auto add = [&](const std::string& k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  auto real = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  for (int a = 0; a < 7; ++a)
    add("grid.n" + std::to_string(a + 1), std::to_string(cfg.grid_n[a]));
  for (int a = 0; a < 7; ++a)
    add("grid.l" + std::to_string(a + 1), real(cfg.grid_l[a]));
  add("fd.order", std::to_string(cfg.fd_order));
  add("flow.kind", to_string(cfg.flow_kind));
  add("flow.dt_safety", real(cfg.flow_dt_safety));
  add("flow.t_max", real(cfg.flow_t_max));
  add("flow.stop_grad_tol", real(cfg.flow_stop_grad_tol));
  add("init.kind", to_string(cfg.init_kind));
  add("init.eps", real(cfg.init_eps));
  add("init.seed", std::to_string(cfg.init_seed));
  add("out.path", cfg.out_path);
  return out;
}

std::string config_json(const RunConfig& cfg) {
  nlohmann::json j;
  for (int a = 0; a < 7; ++a) {
    j["grid.n" + std::to_string(a + 1)] = cfg.grid_n[a];
    j["grid.l" + std::to_string(a + 1)] = cfg.grid_l[a];
  }
  j["fd.order"] = cfg.fd_order;
  j["flow.kind"] = to_string(cfg.flow_kind);
  j["flow.dt_safety"] = cfg.flow_dt_safety;
  j["flow.t_max"] = cfg.flow_t_max;
  j["flow.stop_grad_tol"] = cfg.flow_stop_grad_tol;
  j["init.kind"] = to_string(cfg.init_kind);
  j["init.eps"] = cfg.init_eps;
  j["init.seed"] = cfg.init_seed;
  j["out.path"] = cfg.out_path;
  return j.dump(2);
}

TorusGrid make_grid(const RunConfig& cfg) {
  return TorusGrid(cfg.grid_n, cfg.grid_l, cfg.fd_order);
}

FlowConfig make_flow_config(const RunConfig& cfg) {
  FlowConfig fc;
  fc.kind = cfg.flow_kind;
  fc.dt_safety = cfg.flow_dt_safety;
  fc.t_max = cfg.flow_t_max;
  fc.stop_grad_tol = cfg.flow_stop_grad_tol;
  return fc;
}

FormField initial_form(const TorusGrid& g, const RunConfig& cfg) {
  FormField flat = StructureField<double>::flat(g).omega();
  switch (cfg.init_kind) {
    case InitKind::flat:
      return flat;
    case InitKind::flat_plus_random: {
      SplitMix64 rng(cfg.init_seed);
      TrigForm t = random_trig_form(g, 3, rng, 3, 2);
      return flat + cfg.init_eps * sample(g, t);
    }
    case InitKind::flat_plus_exact: {
      SplitMix64 rng(cfg.init_seed);
      TrigForm t = random_trig_form(g, 2, rng, 3, 2);
      return flat + cfg.init_eps * d(sample(g, t));
    }
    case InitKind::scaled: {
      if (!(cfg.init_eps > 0.0))
        throw std::invalid_argument(
            "initial_form: scaled init needs init.eps > 0");
      return cfg.init_eps * flat;
    }
  }
  throw std::logic_error("unknown init kind");
}

}  // namespace g2flow
