#pragma once
// Run configuration, the check / evolve / scan commands and their reports.
// The executable in tools/ only does argument handling and file I/O around
// these functions.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "basic_state.hpp"
#include "constraints.hpp"
#include "evolution.hpp"
#include "wellposedness.hpp"

namespace plasmavac {

using ojson = nlohmann::ordered_json;

enum ExitCode : int { kExitPass = 0, kExitInvariant = 1, kExitConfig = 2, kExitSolver = 3 };

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& path, const std::string& msg)
      : std::runtime_error("config error at '" + path + "': " + msg), path_(path) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

struct StateConfig {
  std::string family = "constant";  // constant | linear_pressure | traveling_front | harmonic_vacuum
  std::string eos = "ideal";         // ideal | linear
  double gamma = 5.0 / 3.0;
  double c2 = 1.0, rho_ref = 1.0, p_ref = 1.0;
  double p = 1.0, S = 0.0;
  Vec3 v = Vec3::Zero(), H = Vec3(0, 1, 0), Hvac = Vec3(0, 0, 1);
  double alpha = 0.0;                  // linear_pressure: d1 p
  double amplitude = 0.0, speed = 0.0; // traveling_front
  double a = 0.0;                      // harmonic_vacuum
  int k = 1;
};

struct GridConfig {
  int n1 = 32, n2 = 16, n3 = 16;
  double L = 8.0;
};

struct TimeConfig {
  double T = 2.0;
  double dt = 0.0;  // 0: h1 / 2
};

struct DataConfig {
  std::string kind = "random";  // zero | random | modes
  std::uint64_t seed = 1;
  int count = 1;
  int kmax = 2;
  double tau = 0.0;  // 0: T / 4
  bool forcing = true, boundary = true;
  std::vector<ModeData> modes;
};

struct CheckConfig {
  double eps = 1e-6, eps1 = 1e-6;
  double slack_tol = 1e-3;   // (68) slack >= -slack_tol * (data norm)^2
  double ratio_band = 0.2;   // refinement stability of the estimate ratios
  double front_tol = 1e-4;   // front gradient relative error
  bool constraints = true;   // report constraint residuals of the first run
};

struct RunConfig {
  StateConfig state;
  GridConfig grid;
  TimeConfig time;
  DataConfig data;
  CheckConfig checks;
  ScanSpec scan;
  std::string out = "out";

  Thresholds thresholds() const { return {checks.eps, checks.eps1}; }
};

// ---- parsing ---------------------------------------------------------------

namespace detail {

class Reader {
public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
  }

  // every key must be consumed; catches typos
  void finish(const std::set<std::string>& known) const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!known.count(it.key())) throw ConfigError(sub(it.key()), "unknown field");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const nlohmann::json& at(const std::string& k) const { return j_.at(k); }

  double number(const std::string& k, double def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(sub(k), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(sub(k), "must be finite");
    return x;
  }
  long long integer(const std::string& k, long long def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(sub(k), "expected an integer");
    return v.get<long long>();
  }
  std::uint64_t uinteger(const std::string& k, std::uint64_t def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_number_unsigned()) throw ConfigError(sub(k), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_boolean()) throw ConfigError(sub(k), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& k, const std::string& def, const std::set<std::string>& allowed = {}) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(sub(k), "expected a string");
    const std::string s = v.get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) {
      std::string msg = "must be one of";
      for (const auto& a : allowed) msg += " " + a;
      throw ConfigError(sub(k), msg);
    }
    return s;
  }
  std::vector<double> numbers(const std::string& k, const std::vector<double>& def) const {
    if (!has(k)) return def;
    const auto& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(sub(k), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(sub(k) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  Vec3 vec3(const std::string& k, const Vec3& def) const {
    if (!has(k)) return def;
    const auto v = numbers(k, {});
    if (v.size() != 3) throw ConfigError(sub(k), "expected 3 numbers");
    return Vec3(v[0], v[1], v[2]);
  }
  cplx complex(const std::string& k) const {
    if (!has(k)) return 0.0;
    const auto v = numbers(k, {});
    if (v.size() != 2) throw ConfigError(sub(k), "expected [re, im]");
    return {v[0], v[1]};
  }
  CVec8 cvec8(const std::string& k) const {
    CVec8 out = CVec8::Zero();
    if (!has(k)) return out;
    const auto& v = j_.at(k);
    if (!v.is_array() || v.size() != 8) throw ConfigError(sub(k), "expected 8 entries [re, im]");
    for (int i = 0; i < 8; ++i) {
      const std::string p = sub(k) + "[" + std::to_string(i) + "]";
      if (!v[i].is_array() || v[i].size() != 2 || !v[i][0].is_number() || !v[i][1].is_number())
        throw ConfigError(p, "expected [re, im]");
      out(i) = {v[i][0].get<double>(), v[i][1].get<double>()};
    }
    return out;
  }

private:
  const nlohmann::json& j_;
  std::string path_;
};

inline const nlohmann::json& empty_object() {
  static const nlohmann::json e = nlohmann::json::object();
  return e;
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& doc) {
  using detail::Reader;
  RunConfig c;
  const Reader top(doc, "");
  top.finish({"state", "grid", "time", "data", "checks", "scan", "output"});
  auto section = [&](const char* name) -> const nlohmann::json& {
    return top.has(name) ? top.at(name) : detail::empty_object();
  };

  {
    const Reader r(section("state"), "state");
    r.finish({"family", "eos", "gamma", "c2", "rho_ref", "p_ref", "p", "S", "v", "H", "Hvac", "alpha", "amplitude",
              "speed", "a", "k"});
    auto& s = c.state;
    s.family = r.string("family", s.family, {"constant", "linear_pressure", "traveling_front", "harmonic_vacuum"});
    s.eos = r.string("eos", s.eos, {"ideal", "linear"});
    s.gamma = r.number("gamma", s.gamma);
    s.c2 = r.number("c2", s.c2);
    s.rho_ref = r.number("rho_ref", s.rho_ref);
    s.p_ref = r.number("p_ref", s.p_ref);
    s.p = r.number("p", s.p);
    s.S = r.number("S", s.S);
    s.v = r.vec3("v", s.v);
    s.H = r.vec3("H", s.H);
    s.Hvac = r.vec3("Hvac", s.Hvac);
    s.alpha = r.number("alpha", s.alpha);
    s.amplitude = r.number("amplitude", s.amplitude);
    s.speed = r.number("speed", s.speed);
    s.a = r.number("a", s.a);
    s.k = int(r.integer("k", s.k));
  }
  {
    const Reader r(section("grid"), "grid");
    r.finish({"n1", "n2", "n3", "L"});
    auto& g = c.grid;
    g.n1 = int(r.integer("n1", g.n1));
    g.n2 = int(r.integer("n2", g.n2));
    g.n3 = int(r.integer("n3", g.n3));
    g.L = r.number("L", g.L);
    if (g.n1 < 8) throw ConfigError("grid.n1", "must be at least 8");
    if (g.n2 < 8) throw ConfigError("grid.n2", "must be at least 8");
    if (g.n3 < 8) throw ConfigError("grid.n3", "must be at least 8");
    if (!(g.L > 0.0)) throw ConfigError("grid.L", "must be positive");
  }
  {
    const Reader r(section("time"), "time");
    r.finish({"T", "dt"});
    c.time.T = r.number("T", c.time.T);
    c.time.dt = r.number("dt", c.time.dt);
    if (!(c.time.T > 0.0)) throw ConfigError("time.T", "must be positive");
    if (c.time.dt < 0.0) throw ConfigError("time.dt", "must be non-negative (0 selects h1/2)");
  }
  {
    const Reader r(section("data"), "data");
    r.finish({"kind", "seed", "count", "kmax", "tau", "forcing", "boundary", "modes"});
    auto& d = c.data;
    d.kind = r.string("kind", d.kind, {"zero", "random", "modes"});
    d.seed = r.uinteger("seed", d.seed);
    d.count = int(r.integer("count", d.count));
    d.kmax = int(r.integer("kmax", d.kmax));
    d.tau = r.number("tau", d.tau);
    d.forcing = r.boolean("forcing", d.forcing);
    d.boundary = r.boolean("boundary", d.boundary);
    if (d.count < 1) throw ConfigError("data.count", "must be at least 1");
    if (d.kmax < 1) throw ConfigError("data.kmax", "must be at least 1");
    if (d.tau < 0.0) throw ConfigError("data.tau", "must be non-negative");
    if (2 * d.kmax >= std::min(c.grid.n2, c.grid.n3))
      throw ConfigError("data.kmax", "not resolved by the tangential grid (need 2 kmax < n2, n3)");
    if (r.has("modes")) {
      const auto& arr = r.at("modes");
      if (!arr.is_array()) throw ConfigError("data.modes", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "data.modes[" + std::to_string(i) + "]";
        const Reader m(arr[i], p);
        m.finish({"k", "f0", "f1", "g1", "g2"});
        ModeData md;
        const auto k = m.numbers("k", {});
        if (k.size() != 2 || k[0] != std::floor(k[0]) || k[1] != std::floor(k[1]))
          throw ConfigError(m.sub("k"), "expected two integers");
        md.k2 = int(k[0]);
        md.k3 = int(k[1]);
        if (!in_half_plane(md.k2, md.k3))
          throw ConfigError(m.sub("k"), "must lie in the half plane k2 > 0 or (k2 = 0, k3 > 0)");
        if (2 * std::abs(md.k2) >= c.grid.n2 || 2 * std::abs(md.k3) >= c.grid.n3)
          throw ConfigError(m.sub("k"), "not resolved by the tangential grid");
        for (const auto& o : d.modes)
          if (o.k2 == md.k2 && o.k3 == md.k3) throw ConfigError(m.sub("k"), "repeated wavenumber");
        md.f0 = m.cvec8("f0");
        md.f1 = m.cvec8("f1");
        md.g1 = m.complex("g1");
        md.g2 = m.complex("g2");
        d.modes.push_back(md);
      }
    }
    if (d.kind == "modes" && d.modes.empty()) throw ConfigError("data.modes", "required for kind 'modes'");
  }
  {
    const Reader r(section("checks"), "checks");
    r.finish({"eps", "eps1", "slack_tol", "ratio_band", "front_tol", "constraints"});
    auto& k = c.checks;
    k.eps = r.number("eps", k.eps);
    k.eps1 = r.number("eps1", k.eps1);
    k.slack_tol = r.number("slack_tol", k.slack_tol);
    k.ratio_band = r.number("ratio_band", k.ratio_band);
    k.front_tol = r.number("front_tol", k.front_tol);
    k.constraints = r.boolean("constraints", k.constraints);
    if (k.eps < 0.0) throw ConfigError("checks.eps", "must be non-negative");
    if (k.eps1 < 0.0) throw ConfigError("checks.eps1", "must be non-negative");
  }
  {
    const Reader r(section("scan"), "scan");
    std::set<std::string> names(std::begin(ScanSpec::names), std::end(ScanSpec::names));
    r.finish(names);
    auto ax = c.scan.axes();
    for (int i = 0; i < 9; ++i)
      *const_cast<std::vector<double>*>(ax[i]) = r.numbers(ScanSpec::names[i], *ax[i]);
  }
  {
    const Reader r(section("output"), "output");
    r.finish({"dir"});
    c.out = r.string("dir", c.out);
    if (c.out.empty()) throw ConfigError("output.dir", "must not be empty");
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    const auto pos = what.find("] ");
    throw ConfigError("<document>", pos == std::string::npos ? what : what.substr(pos + 2));
  }
  return parse_config(doc);
}

// ---- serialisation ---------------------------------------------------------

namespace detail {
inline ojson jvec(const Vec3& v) { return ojson::array({v(0), v(1), v(2)}); }
inline ojson jc(cplx z) { return ojson::array({z.real(), z.imag()}); }
inline ojson jc8(const CVec8& v) {
  ojson a = ojson::array();
  for (int i = 0; i < 8; ++i) a.push_back(jc(v(i)));
  return a;
}
}  // namespace detail

inline ojson to_json(const RunConfig& c) {
  using namespace detail;
  ojson j;
  const auto& s = c.state;
  j["state"] = {{"family", s.family}, {"eos", s.eos},   {"gamma", s.gamma},   {"c2", s.c2},
                {"rho_ref", s.rho_ref}, {"p_ref", s.p_ref}, {"p", s.p},      {"S", s.S},
                {"v", jvec(s.v)},       {"H", jvec(s.H)},   {"Hvac", jvec(s.Hvac)}, {"alpha", s.alpha},
                {"amplitude", s.amplitude}, {"speed", s.speed}, {"a", s.a}, {"k", s.k}};
  j["grid"] = {{"n1", c.grid.n1}, {"n2", c.grid.n2}, {"n3", c.grid.n3}, {"L", c.grid.L}};
  j["time"] = {{"T", c.time.T}, {"dt", c.time.dt}};
  ojson modes = ojson::array();
  for (const auto& m : c.data.modes)
    modes.push_back({{"k", {m.k2, m.k3}}, {"f0", jc8(m.f0)}, {"f1", jc8(m.f1)}, {"g1", jc(m.g1)}, {"g2", jc(m.g2)}});
  j["data"] = {{"kind", c.data.kind},       {"seed", c.data.seed},         {"count", c.data.count},
               {"kmax", c.data.kmax},       {"tau", c.data.tau},           {"forcing", c.data.forcing},
               {"boundary", c.data.boundary}, {"modes", modes}};
  j["checks"] = {{"eps", c.checks.eps},           {"eps1", c.checks.eps1},
                 {"slack_tol", c.checks.slack_tol}, {"ratio_band", c.checks.ratio_band},
                 {"front_tol", c.checks.front_tol}, {"constraints", c.checks.constraints}};
  ojson scan;
  const auto ax = c.scan.axes();
  for (int i = 0; i < 9; ++i) scan[ScanSpec::names[i]] = *ax[i];
  j["scan"] = scan;
  j["output"] = {{"dir", c.out}};
  return j;
}

// ---- building the problem --------------------------------------------------

inline EquationOfState make_eos(const StateConfig& s) {
  if (s.eos == "linear") return LinearEos{s.p_ref, s.rho_ref, s.c2};
  return IdealGas{s.gamma};
}

inline InterfaceField front_of(const StateConfig& s) {
  if (s.family == "traveling_front") return InterfaceField::single(s.amplitude, 1, 0, s.speed);
  return InterfaceField::zero();
}

inline BasicState build_basic_state(const StateConfig& s) {
  PlasmaState U;
  U.p = s.p;
  U.S = s.S;
  U.v = s.v;
  U.H = s.H;
  const EquationOfState eos = make_eos(s);
  if (s.family == "linear_pressure") return make_linear_pressure_state(U, s.Hvac, s.alpha, eos);
  if (s.family == "traveling_front")
    return make_traveling_front_state(s.p, s.S, s.amplitude, s.speed, s.H(2), s.Hvac(2), eos);
  if (s.family == "harmonic_vacuum") return make_harmonic_vacuum_state(U, s.Hvac, s.a, s.k, eos);
  return make_constant_state(U, s.Hvac, eos);
}

inline ValidationGrid validation_grid(const RunConfig& c) {
  ValidationGrid g;
  g.t0 = 0.0;
  g.t1 = c.time.T;
  g.nt = 3;
  g.L = c.grid.L;
  g.n1 = c.grid.n1;
  g.n2 = c.grid.n2;
  g.n3 = c.grid.n3;
  return g;
}

struct CommandResult {
  int exit_code = kExitPass;
  ojson report;
};

namespace detail {

inline ojson margins_json(const MarginReport& m) {
  return {{"gasdyn_margin", m.gasdyn_margin}, {"mhd_margin", m.mhd_margin}, {"class", to_string(m.classification)}};
}

// Shared by check and evolve: admissibility, validation, freeze, margins.
struct Prepared {
  bool ok = false;
  ojson report;
  FrozenState frozen;
  MarginReport margins;
};

inline Prepared prepare(const RunConfig& c) {
  Prepared p;
  ojson& r = p.report;
  r["family"] = c.state.family;
  const InterfaceField front = front_of(c.state);
  const AdmissibilityReport adm = admissibility(front, CutOff(), SampleSpec{c.grid.n2, c.grid.n3, {0.0}});
  r["admissibility"] = {{"sup_abs_phi", adm.sup_abs_phi},
                        {"inf_d1phi_plus", adm.inf_d1phi_plus},
                        {"sup_d1phi_minus", adm.sup_d1phi_minus},
                        {"pass", adm.pass}};
  if (!adm.pass) {
    r["failures"] = ojson::array({"admissibility: sup|phi| exceeds 1"});
    return p;
  }
  BasicState bs;
  try {
    bs = build_basic_state(c.state);
  } catch (const ConstraintError& e) {
    r["failures"] = ojson::array({std::string("basic state: ") + e.what()});
    return p;
  } catch (const std::domain_error& e) {
    r["failures"] = ojson::array({std::string("equation of state: ") + e.what()});
    return p;
  }
  const ValidationGrid vg = validation_grid(c);
  const ValidationReport v = validate_basic_state(bs, vg);
  r["residuals"] = {{"hyperbolicity_min", v.hyperbolicity_min}, {"kinematic", v.kinematic},
                    {"vacuum_normal", v.vacuum_normal},         {"vacuum_curl", v.vacuum_curl},
                    {"vacuum_div", v.vacuum_div},               {"induction", v.induction},
                    {"plasma_div", v.plasma_div},               {"plasma_normal", v.plasma_normal},
                    {"w2inf_bound", v.w2inf_bound},             {"tolerance", v.tolerance}};
  r["validation"] = {{"hyperbolic", v.pass_hyperbolic}, {"boundary", v.pass_boundary}, {"vacuum", v.pass_vacuum},
                     {"induction", v.pass_induction},   {"divergence", v.pass_divergence}, {"pass", v.pass}};
  ojson failures = ojson::array();
  if (!v.pass) {
    if (!v.pass_hyperbolic) failures.push_back("validation: hyperbolicity");
    if (!v.pass_boundary) failures.push_back("validation: boundary constraints");
    if (!v.pass_vacuum) failures.push_back("validation: vacuum equations");
    if (!v.pass_induction) failures.push_back("validation: induction equation");
    if (!v.pass_divergence) failures.push_back("validation: divergence constraint");
  }
  FreezeOptions fo;
  fo.domain = vg;
  p.frozen = freeze(bs, 0.0, Vec3::Zero(), fo);
  p.margins = compute_margins(p.frozen, c.thresholds());
  r["frozen"] = {{"jump_dq", p.frozen.jump_dq},
                 {"d1_vN", p.frozen.d1_vN},
                 {"d1_HN", p.frozen.d1_HN},
                 {"H", jvec(p.frozen.Ub.H)},
                 {"Hvac", jvec(p.frozen.Hvac)}};
  r["margins"] = margins_json(p.margins);
  r["failures"] = failures;
  p.ok = failures.empty();
  return p;
}

}  // namespace detail

inline CommandResult cmd_check(const RunConfig& c) {
  CommandResult out;
  detail::Prepared p = detail::prepare(c);
  out.report["command"] = "check";
  for (auto it = p.report.begin(); it != p.report.end(); ++it) out.report[it.key()] = it.value();
  out.report["pass"] = p.ok;
  out.exit_code = p.ok ? kExitPass : kExitInvariant;
  return out;
}

// ---- evolve ----------------------------------------------------------------

inline DataSet make_data(const DataConfig& d, double T, int run) {
  const double tau = d.tau > 0.0 ? d.tau : 0.25 * T;
  if (d.kind == "zero") return DataSet{Ramp{tau}, {}};
  if (d.kind == "modes") {
    DataSet s{Ramp{tau}, d.modes};
    return s;
  }
  return DataSet::random(d.seed + std::uint64_t(run), d.kmax, tau, d.forcing, d.boundary);
}

struct RunSummary {
  std::uint64_t seed = 0;
  RatioReport ratios;
  double min_slack = 0.0, min_slack_rel = 0.0, max_J_gap = 0.0, max_front_error = 0.0;
  bool front_checked = false;
};

inline void write_ledger_rows(std::ostream& os, int run, const EnergyLedger& led) {
  for (const auto& r : led.rows) {
    const double v[] = {r.t, r.I, r.K, r.J, r.L, r.M, r.N, r.Ncal, r.boundary_split, r.lhs, r.rhs, r.slack};
    os << run;
    for (double x : v) os << ',' << format_double(x);
    os << '\n';
  }
}

// Runs the ensemble on the configured grid (and on the grid refined by
// `refine` when > 1), writes ledger.csv and summary.json into the output
// directory and returns the summary.
inline CommandResult cmd_evolve(const RunConfig& c, int refine = 1) {
  CommandResult out;
  ojson& rep = out.report;
  rep["command"] = "evolve";
  rep["config"] = to_json(c);
  std::ostringstream ledger;
  ledger << "run,t,I,K,J,L,M,N,Ncal,boundary_split,lhs68,rhs68,slack68\n";
  auto write_files = [&] {
    namespace fs = std::filesystem;
    const fs::path dir(c.out);
    std::ofstream(dir / "ledger.csv", std::ios::binary) << ledger.str();
    std::ofstream(dir / "summary.json", std::ios::binary) << rep.dump(2) << '\n';
  };
  detail::Prepared p = detail::prepare(c);
  for (const char* k : {"admissibility", "residuals", "validation", "frozen", "margins", "failures"})
    if (p.report.contains(k)) rep[k] = p.report[k];
  if (!p.ok) {
    rep["pass"] = false;
    out.exit_code = kExitInvariant;
    write_files();
    return out;
  }
  const MarginReport& mg = p.margins;
  const bool gasdyn = mg.classification == StabilityClass::gas_dynamical || mg.classification == StabilityClass::both;
  const bool mhd = mg.classification == StabilityClass::purely_mhd || mg.classification == StabilityClass::both;

  ojson grids = ojson::array();
  std::vector<double> max40, max42;
  double worst_slack = 0.0, worst_front = 0.0;
  const int levels = refine > 1 ? 2 : 1;
  for (int lev = 0; lev < levels; ++lev) {
    const int f = lev == 0 ? 1 : refine;
    const SlabGrid g{c.grid.n1 * f, c.grid.n2 * f, c.grid.n3 * f, c.grid.L};
    const double dt = c.time.dt > 0.0 ? c.time.dt / f : 0.0;
    const int count = c.data.kind == "random" ? c.data.count : 1;
    ojson runs = ojson::array();
    double m40 = 0.0, m42 = 0.0;
    int steps = 0;
    double used_dt = 0.0;
    for (int run = 0; run < count; ++run) {
      const DataSet d = make_data(c.data, c.time.T, run);
      const Trajectory tr = evolve_frozen(p.frozen, g, d, {c.time.T, dt, true});
      steps = tr.steps();
      used_dt = tr.dt();
      const EnergyLedger led = energy_ledger(tr);
      RunSummary s;
      s.seed = c.data.kind == "random" ? c.data.seed + std::uint64_t(run) : c.data.seed;
      s.ratios = estimate_ratio(tr);
      const double dn2 = s.ratios.den40 * s.ratios.den40;
      s.min_slack = led.min_slack();
      s.min_slack_rel = dn2 > 0.0 ? s.min_slack / dn2 : (s.min_slack < 0.0 ? -1.0 : 0.0);
      s.max_J_gap = led.max_J_gap();
      if (mg.mhd_margin >= c.checks.eps1) {
        s.front_checked = true;
        for (double e : front_gradient_errors(tr, c.thresholds())) s.max_front_error = std::max(s.max_front_error, e);
      }
      if (lev == 0) {
        write_ledger_rows(ledger, run, led);
        worst_slack = std::min(worst_slack, s.min_slack_rel);
        worst_front = std::max(worst_front, s.max_front_error);
        if (run == 0 && c.checks.constraints) {
          const SlabField U = sample_plasma(tr, tr.steps());
          const PlaneField phi = sample_front(tr, tr.steps());
          const auto rr = evolve_constraint_r(discrete_constraint_source_F(d, p.frozen, g),
                                              TransportCoefficients::from_frozen(p.frozen), g, tr.sys->T(), steps);
          const auto gg = evolve_constraint_g3(constraint_source_G(d, p.frozen),
                                               BoundaryTransportCoefficients::from_frozen(p.frozen), g.n2, g.n3,
                                               tr.sys->T(), steps);
          const auto res = constraint_residuals(U, phi, rr.r, gg.g3, p.frozen, NormalStencil::sbp);
          rep["constraints"] = {{"div_residual", res.div_residual},
                                {"boundary_residual", res.boundary_residual},
                                {"r_l2", res.r_l2},
                                {"g3_l2", res.g3_l2}};
        }
      }
      m40 = std::max(m40, s.ratios.ratio_40);
      m42 = std::max(m42, s.ratios.ratio_42);
      runs.push_back({{"seed", s.seed},
                      {"ratio_40", s.ratios.ratio_40},
                      {"ratio_42", s.ratios.ratio_42},
                      {"num40", s.ratios.num40},
                      {"den40", s.ratios.den40},
                      {"num42", s.ratios.num42},
                      {"den42", s.ratios.den42},
                      {"min_slack", s.min_slack},
                      {"min_slack_rel", s.min_slack_rel},
                      {"max_J_gap", s.max_J_gap},
                      {"max_front_error", s.front_checked ? ojson(s.max_front_error) : ojson(nullptr)}});
    }
    max40.push_back(m40);
    max42.push_back(m42);
    grids.push_back({{"n1", g.n1},
                     {"n2", g.n2},
                     {"n3", g.n3},
                     {"dt", used_dt},
                     {"steps", steps},
                     {"max_ratio_40", m40},
                     {"max_ratio_42", m42},
                     {"runs", runs}});
  }
  rep["grids"] = grids;

  ojson checks = ojson::array();
  bool pass = true;
  auto add = [&](const char* name, bool applicable, double value, double tol, bool ok) {
    const bool passed = !applicable || ok;
    pass = pass && passed;
    checks.push_back({{"name", name}, {"applicable", applicable}, {"value", value}, {"tolerance", tol}, {"pass", passed}});
  };
  add("energy_slack", gasdyn, worst_slack, -c.checks.slack_tol, worst_slack >= -c.checks.slack_tol);
  add("front_gradient", mg.mhd_margin >= c.checks.eps1, worst_front, c.checks.front_tol,
      worst_front <= c.checks.front_tol);
  auto drift = [](double a, double b) { return a > 0.0 ? std::abs(b / a - 1.0) : (b > 0.0 ? 1.0 : 0.0); };
  const double d40 = levels > 1 ? drift(max40[0], max40[1]) : 0.0, d42 = levels > 1 ? drift(max42[0], max42[1]) : 0.0;
  add("ratio_40_refinement", levels > 1 && gasdyn, d40, c.checks.ratio_band, d40 <= c.checks.ratio_band);
  add("ratio_42_refinement", levels > 1 && mhd, d42, c.checks.ratio_band, d42 <= c.checks.ratio_band);
  rep["checks"] = checks;
  rep["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitInvariant;

  write_files();
  return out;
}

// ---- scan ------------------------------------------------------------------

inline CommandResult cmd_scan(const RunConfig& c) {
  CommandResult out;
  const auto rows = scan_stability(c.scan, c.thresholds());
  std::ostringstream csv;
  write_scan_csv(csv, rows);
  std::ofstream(std::filesystem::path(c.out) / "scan.csv", std::ios::binary) << csv.str();
  std::size_t counts[4] = {0, 0, 0, 0};
  for (const auto& r : rows) ++counts[int(r.margins.classification)];
  out.report = {{"command", "scan"},
                {"points", rows.size()},
                {"neither", counts[0]},
                {"gas-dynamical", counts[1]},
                {"purely-MHD", counts[2]},
                {"both", counts[3]}};
  return out;
}

// Output directory must exist (created if needed) and be writable.
inline void ensure_output_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", "cannot create '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw ConfigError("output.dir", "'" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

}  // namespace plasmavac
