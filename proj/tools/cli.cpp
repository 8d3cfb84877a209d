#include "cli.hpp"

#include "hocp/io.hpp"
#include "hocp/sensitivity.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

namespace hocp::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string problem;
  std::string out = ".";
  std::uint64_t seed = 0;
  std::vector<std::string> tol;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("problem", c.problem, "Problem file or builtin:<name>")->required();
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--tol", c.tol, "Simulation tolerance override key=value (rtol, atol, event_tol, ...)");
}

void apply_tol(SimConfig& cfg, const std::vector<std::string>& items) {
  Json j = Json::object();
  for (const auto& s : items) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--tol expects key=value, got '" + s + "'");
    Json v = Json::parse(s.substr(eq + 1), nullptr, false);
    if (!v.is_number()) throw UsageError("--tol value for '" + s.substr(0, eq) + "' is not a number");
    j[s.substr(0, eq)] = v;
  }
  apply_sim_overrides(cfg, j, "--tol");
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create " + p.string() + ": " + ec.message());
  return p;
}

template <class F>
void write_with(const fs::path& path, F&& body) {
  std::ostringstream ss;
  body(ss);
  write_text(path, ss.str());
}

void stamp(Json& j, const ProblemSpec& spec) {
  j["problem"] = spec.name;
  j["fingerprint"] = fingerprint(spec);
}

const Location& segment_location(const ProblemSpec& spec, std::size_t seg) {
  const auto& locs = spec.schedule.locations;
  return spec.model.location(locs[std::min(seg, locs.size() - 1)]);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Json v = Json::parse(item, nullptr, false);
    if (!v.is_number()) throw UsageError(what + ": '" + item + "' is not a number");
    out.push_back(v.get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// simulate inputs

ControlLaw policy_law(const ProblemSpec& spec, const std::string& policy) {
  std::vector<double> values;
  std::string kind = policy;
  if (policy.starts_with("const:")) {
    kind = "const";
    values = parse_list(policy.substr(6), "--input const");
    if (values.empty()) throw UsageError("--input const: needs at least one value");
  } else if (kind != "zero" && kind != "center" && kind != "lower" && kind != "upper") {
    throw UsageError("unknown control policy '" + policy + "'");
  }
  for (std::size_t i = 0; i < spec.schedule.locations.size(); ++i) {
    const std::size_t m = segment_location(spec, i).control_dim;
    if (kind == "const" && values.size() != 1 && values.size() != m) {
      throw UsageError("--input const: location " + spec.schedule.locations[i] + " has " + std::to_string(m) +
                       " controls");
    }
  }
  return [spec_ptr = std::make_shared<const ProblemSpec>(spec), kind, values](std::size_t seg, double,
                                                                              const Eigen::VectorXd&) {
    const Location& loc = segment_location(*spec_ptr, seg);
    Eigen::VectorXd u(static_cast<Eigen::Index>(loc.control_dim));
    for (std::size_t c = 0; c < loc.control_dim; ++c) {
      const Interval& iv = loc.control_box[c];
      double v = 0.0;
      if (kind == "center") {
        v = 0.5 * (iv.lo + iv.hi);
      } else if (kind == "lower") {
        v = iv.lo;
      } else if (kind == "upper") {
        v = iv.hi;
      } else if (kind == "const") {
        v = values[values.size() == 1 ? 0 : c];
      }
      u(static_cast<Eigen::Index>(c)) = std::clamp(v, iv.lo, iv.hi);
    }
    return u;
  };
}

struct ControlTable {
  std::vector<double> t;  // empty for a constant
  std::vector<Eigen::VectorXd> u;
};

Eigen::VectorXd table_value(const ControlTable& tb, double t) {
  if (tb.t.empty() || t <= tb.t.front()) return tb.u.front();
  if (t >= tb.t.back()) return tb.u.back();
  const auto it = std::upper_bound(tb.t.begin(), tb.t.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - tb.t.begin()) - 1;
  const double w = (t - tb.t[k]) / (tb.t[k + 1] - tb.t[k]);
  return (1.0 - w) * tb.u[k] + w * tb.u[k + 1];
}

// {"switch_times": [t | null, ...], "segments": [{"u": [..]} | {"t": [..], "u": [[..], ..]}, ...]}
HybridInput controls_file(const ProblemSpec& spec, const std::string& path) {
  const std::string text = read_text(path);
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError(path, "malformed JSON");
  auto bad = [&](const std::string& ptr, const std::string& msg) { throw SchemaError(path + "#" + ptr, msg); };
  if (!doc.is_object()) bad("/", "expected an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "switch_times" && k != "segments") bad("/" + k, "unknown key '" + k + "'");
  }
  const std::size_t S = spec.schedule.locations.size();
  HybridInput in;
  in.switch_times.assign(S - 1, std::nullopt);
  if (doc.contains("switch_times")) {
    const Json& st = doc["switch_times"];
    if (!st.is_array() || st.size() != S - 1) bad("/switch_times", "expected one entry per switch");
    for (std::size_t j = 0; j < st.size(); ++j) {
      if (st[j].is_number()) {
        in.switch_times[j] = st[j].get<double>();
      } else if (!st[j].is_null()) {
        bad("/switch_times/" + std::to_string(j), "expected a number or null");
      }
    }
  }
  if (!doc.contains("segments") || !doc["segments"].is_array() || doc["segments"].size() != S) {
    bad("/segments", "expected one entry per scheduled segment");
  }
  auto tables = std::make_shared<std::vector<ControlTable>>();
  for (std::size_t i = 0; i < S; ++i) {
    const std::string p = "/segments/" + std::to_string(i);
    const Json& sj = doc["segments"][i];
    if (!sj.is_object() || !sj.contains("u")) bad(p, "expected an object with \"u\"");
    for (const auto& [k, v] : sj.items()) {
      if (k != "t" && k != "u") bad(p + "/" + k, "unknown key '" + k + "'");
    }
    const std::size_t m = segment_location(spec, i).control_dim;
    auto vec = [&](const Json& a, const std::string& ptr) {
      if (!a.is_array() || a.size() != m) bad(ptr, "expected " + std::to_string(m) + " numbers");
      Eigen::VectorXd v(static_cast<Eigen::Index>(m));
      for (std::size_t c = 0; c < m; ++c) {
        if (!a[c].is_number()) bad(ptr + "/" + std::to_string(c), "expected a number");
        v(static_cast<Eigen::Index>(c)) = a[c].get<double>();
      }
      return v;
    };
    ControlTable tb;
    if (sj.contains("t")) {
      const Json& tj = sj["t"];
      const Json& uj = sj["u"];
      if (!tj.is_array() || tj.size() < 2 || !uj.is_array() || uj.size() != tj.size()) {
        bad(p, "\"t\" and \"u\" must be arrays of equal length >= 2");
      }
      for (std::size_t k = 0; k < tj.size(); ++k) {
        if (!tj[k].is_number()) bad(p + "/t/" + std::to_string(k), "expected a number");
        const double t = tj[k].get<double>();
        if (!tb.t.empty() && !(t > tb.t.back())) bad(p + "/t/" + std::to_string(k), "times must increase");
        tb.t.push_back(t);
        tb.u.push_back(vec(uj[k], p + "/u/" + std::to_string(k)));
        in.breakpoints.push_back(t);
      }
    } else {
      tb.u.push_back(vec(sj["u"], p + "/u"));
    }
    tables->push_back(std::move(tb));
  }
  in.control = [tables](std::size_t seg, double t, const Eigen::VectorXd&) {
    return table_value((*tables)[std::min(seg, tables->size() - 1)], t);
  };
  return in;
}

std::vector<std::optional<double>> default_switch_times(const ProblemSpec& spec) {
  const std::size_t L = spec.schedule.switches();
  std::vector<std::optional<double>> out(L);
  for (std::size_t j = 0; j < L; ++j) {
    if (spec.schedule.kinds[j] == SwitchKind::controlled) {
      out[j] = spec.t0 + static_cast<double>(j + 1) * (spec.tf - spec.t0) / static_cast<double>(L + 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands

struct SimulateArgs {
  Common c;
  std::string input = "zero";
  std::string switch_times;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.c.problem);
  SimConfig cfg = spec.config;
  apply_tol(cfg, a.c.tol);
  HybridInput in;
  const bool file = a.input.ends_with(".json") || fs::exists(a.input);
  if (file) {
    in = controls_file(spec, a.input);
    const auto defaults = default_switch_times(spec);
    for (std::size_t j = 0; j < in.switch_times.size(); ++j) {
      if (!in.switch_times[j]) in.switch_times[j] = defaults[j];
    }
  } else {
    in.control = policy_law(spec, a.input);
    in.switch_times = default_switch_times(spec);
  }
  if (!a.switch_times.empty()) {
    const std::vector<double> ts = parse_list(a.switch_times, "--switch-times");
    std::size_t k = 0;
    for (std::size_t j = 0; j < spec.schedule.switches(); ++j) {
      if (spec.schedule.kinds[j] != SwitchKind::controlled) continue;
      if (k >= ts.size()) throw UsageError("--switch-times: too few values for the controlled switches");
      in.switch_times[j] = ts[k++];
    }
    if (k != ts.size()) throw UsageError("--switch-times: more values than controlled switches");
  }

  const CompiledModel cm(spec.model);
  const HybridTrajectory traj = run(cm, spec.schedule, spec.h0, in, spec.t0, spec.tf, cfg);
  Json ev = events_to_json(traj, spec.model);
  stamp(ev, spec);
  if (traj.outcome == Outcome::completed) ev["cost"] = cost_of(cm, traj, in.control);

  const fs::path dir = out_dir(a.c);
  write_with(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, traj, in.control); });
  write_text(dir / "events.json", ev.dump(2) + "\n");

  out << "simulate: " << to_string(traj.outcome);
  if (!traj.message.empty()) out << " (" << traj.message << ")";
  if (ev.contains("cost")) out << ", J = " << format_double(ev["cost"].get<double>());
  out << "\n";
  switch (traj.outcome) {
    case Outcome::completed:
      return kOk;
    case Outcome::error:
      return kUsage;
    default:
      return kDynamics;
  }
}

SolverConfig solver_config(const ProblemSpec& spec, const std::vector<std::string>& tol) {
  SolverConfig sc;
  sc.sim = spec.config;
  sc.sim.rtol = std::min(sc.sim.rtol, shooting_sim_config().rtol);
  sc.sim.atol = std::min(sc.sim.atol, shooting_sim_config().atol);
  apply_tol(sc.sim, tol);
  return sc;
}

struct SolveArgs {
  Common c;
  std::size_t starts = 16;
  unsigned threads = 0;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.c.problem);
  SolverConfig sc = solver_config(spec, a.c.tol);
  sc.threads = a.threads;
  ShootingProblem prob;
  try {
    prob = assemble(spec.model, spec.schedule, spec.h0, spec.t0, spec.tf);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const MultistartResult ms = multistart(prob, a.starts, a.c.seed, sc);

  std::size_t converged = 0, feasible = 0;
  for (const auto& r : ms.reports) {
    converged += r.converged;
    feasible += r.converged && r.feasible;
  }
  // without a feasible extremal, report the start that came closest
  std::size_t pick = 0;
  if (ms.best) {
    pick = *ms.best;
  } else {
    for (std::size_t s = 1; s < ms.reports.size(); ++s) {
      if (ms.reports[s].residual_norm < ms.reports[pick].residual_norm) pick = s;
    }
  }
  const SolveReport& rep = ms.reports[pick];
  Json j = report_to_json(rep, prob);
  stamp(j, spec);
  j["starts"] = a.starts;
  j["seed"] = a.c.seed;
  j["converged_starts"] = converged;
  j["feasible_starts"] = feasible;

  const fs::path dir = out_dir(a.c);
  write_text(dir / "report.json", j.dump(2) + "\n");
  if (!rep.trajectory.segments.empty() && rep.adjoint.segments.size() == rep.trajectory.segments.size()) {
    write_with(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, rep.trajectory, rep.control); });
    write_with(dir / "adjoint.csv", [&](std::ostream& os) { write_adjoint_csv(os, rep.adjoint, rep.trajectory); });
    write_with(dir / "hamiltonian.csv", [&](std::ostream& os) {
      write_hamiltonian_csv(os, *prob.hs, rep.trajectory, rep.adjoint, rep.control);
    });
  }

  out << "solve: " << converged << "/" << a.starts << " starts converged, " << feasible << " feasible\n";
  if (!ms.best) {
    out << "solve: no feasible extremal (closest start " << pick << ": " << rep.message << ", |R| = "
        << format_double(rep.residual_norm) << ")\n";
    return kNoResult;
  }
  out << "solve: J = " << format_double(rep.cost) << ", |R| = " << format_double(rep.residual_norm)
      << ", switching times";
  for (double t : rep.switch_times) out << " " << format_double(t);
  out << "\n";
  return kOk;
}

struct VerifyArgs {
  Common c;
  std::string solution;
  double residual_tol = 1e-8;
  std::size_t needles = 100;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.c.problem);
  const std::string text = read_text(a.solution);
  const Json rep_json = Json::parse(text, nullptr, false);
  if (rep_json.is_discarded() || !rep_json.is_object()) throw SchemaError(a.solution, "malformed report");
  const std::string fp = fingerprint(spec);
  if (!rep_json.contains("fingerprint") || rep_json["fingerprint"] != fp) {
    throw UsageError("provenance mismatch: " + a.solution + " was not produced from this problem (fingerprint " +
                     (rep_json.contains("fingerprint") ? rep_json["fingerprint"].dump() : std::string("missing")) +
                     ", expected \"" + fp + "\")");
  }
  const SolverConfig sc = solver_config(spec, a.c.tol);
  const ShootingProblem prob = assemble(spec.model, spec.schedule, spec.h0, spec.t0, spec.tf);
  const Eigen::VectorXd z = report_unknowns(rep_json, prob);

  Json checks = Json::array();
  bool all = true;
  auto check = [&](const std::string& name, double value, double tol) {
    const bool pass = std::isfinite(value) && value <= tol;
    all = all && pass;
    checks.push_back({{"name", name}, {"value", value}, {"tol", tol}, {"pass", pass}});
    if (!pass) out << "verify: FAIL " << name << " = " << format_double(value) << " > " << format_double(tol) << "\n";
  };
  auto fail_check = [&](const std::string& name, const std::string& why) {
    all = false;
    checks.push_back({{"name", name}, {"value", nullptr}, {"tol", nullptr}, {"pass", false}, {"error", why}});
    out << "verify: FAIL " << name << ": " << why << "\n";
  };

  const SolveReport rep = evaluate(prob, z, sc);
  std::size_t needles_run = 0;
  if (rep.residuals.size() != prob.size()) {
    fail_check("propagation", rep.message);
  } else {
    for (const ResidualRow& r : rep.residuals) check("residual " + r.name, std::fabs(r.value), a.residual_tol);
    check("replay switching-time gap", rep.validation_gap, sc.feasibility_tol);

    // H is constant on the (time-invariant) working model and minimized by u
    const auto& hs = *prob.hs;
    const double H_ref = hs.value(rep.trajectory.segments.back().loc, rep.trajectory.final_state(),
                                  rep.control(rep.trajectory.segments.size() - 1, spec.tf, rep.trajectory.final_state()),
                                  rep.adjoint.at(rep.adjoint.segments.size() - 1, spec.tf), spec.tf);
    double drift = 0.0, below = 0.0;
    std::mt19937_64 rng(a.c.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < rep.trajectory.segments.size(); ++i) {
      const Segment& s = rep.trajectory.segments[i];
      const Location& loc = prob.working_model().locations[s.loc];
      for (double t : s.x.mesh()) {
        const Eigen::VectorXd x = s.x(t);
        const Eigen::VectorXd u = rep.control(i, t, x);
        const Eigen::VectorXd lam = rep.adjoint.at(i, t);
        const double H = hs.value(s.loc, x, u, lam, t);
        drift = std::max(drift, std::fabs(H - H_ref) / (1.0 + std::fabs(H_ref)));
        for (int k = 0; k < 4; ++k) {
          Eigen::VectorXd v(u.size());
          for (Eigen::Index c = 0; c < v.size(); ++c) {
            const Interval& iv = loc.control_box[static_cast<std::size_t>(c)];
            v(c) = iv.lo + unif(rng) * (iv.hi - iv.lo);
          }
          below = std::max(below, (H - hs.value(s.loc, x, v, lam, t)) / (1.0 + std::fabs(H)));
        }
      }
    }
    check("hamiltonian drift", drift, 1e-5);
    check("hamiltonian minimality", below, 1e-9);

    if (a.needles > 0) {
      try {
        HybridInput in;
        in.control = rep.control;
        for (std::size_t j = 0; j < prob.slots.size(); ++j) {
          if (prob.slots[j].autonomous) {
            in.switch_times.emplace_back(std::nullopt);
          } else {
            in.switch_times.emplace_back(rep.switch_times[j]);
          }
        }
        const SensitivityContext ctx(prob.working_model(), prob.schedule, InitialState{prob.h0.q, prob.x0}, in,
                                     prob.t0, prob.tf, sc.sim);
        const double J = ctx.cost();
        const auto& segs = ctx.trajectory().segments;
        double worst_needle = 0.0, worst_duality = 0.0;
        std::size_t done = 0;
        for (std::size_t attempt = 0; done < a.needles && attempt < 20 * a.needles; ++attempt) {
          const double t = prob.t0 + unif(rng) * (prob.tf - prob.t0);
          std::size_t i = 0;
          while (i + 1 < segs.size() && t >= segs[i].t_end) ++i;
          const double margin = 1e-6 * (prob.tf - prob.t0);
          if (!(t > segs[i].t_begin + margin && t < segs[i].t_end - margin)) continue;
          const Location& loc = prob.working_model().locations[segs[i].loc];
          Eigen::VectorXd v(static_cast<Eigen::Index>(loc.control_dim));
          for (std::size_t c = 0; c < loc.control_dim; ++c) {
            v(static_cast<Eigen::Index>(c)) =
                loc.control_box[c].lo + unif(rng) * (loc.control_box[c].hi - loc.control_box[c].lo);
          }
          const VariationRecord rec = propagate_variation(ctx, t, v);
          worst_needle = std::max(worst_needle, -first_order_cost_change(ctx, rec) / (1.0 + std::fabs(J)));
          const DualityAudit audit = duality_audit(ctx, ctx.adjoint(), rec);
          worst_duality = std::max(worst_duality, audit.deviation / (1.0 + audit.scale));
          ++done;
        }
        if (done < a.needles) {
          fail_check("needle sampling", std::to_string(done) + " of " + std::to_string(a.needles) + " needles placed");
        }
        needles_run = done;
        check("needle first-order decrease", worst_needle, 1e-4);
        check("duality deviation", worst_duality, 1e-6);
      } catch (const std::exception& e) {
        fail_check("sensitivity", e.what());
      }
    }
  }

  Json v = {{"pass", all}, {"solution", a.solution}, {"residual_tol", a.residual_tol}, {"needles", needles_run},
            {"checks", checks}};
  stamp(v, spec);
  write_text(out_dir(a.c) / "verify.json", v.dump(2) + "\n");
  out << "verify: " << (all ? "pass" : "fail") << " (" << checks.size() << " checks)\n";
  return all ? kOk : kNoResult;
}

struct OracleArgs {
  Common c;
  std::size_t nodes = 11;
  std::size_t budget = 10000;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const ProblemSpec spec = load_problem(a.c.problem);
  OracleOptions o;
  o.nodes = a.nodes;
  o.budget = a.budget;
  o.seed = a.c.seed;
  o.sim = spec.config;
  apply_tol(o.sim, a.c.tol);
  OracleResult res;
  try {
    res = optimize(spec.model, spec.schedule, spec.h0, spec.t0, spec.tf, o);
  } catch (const OracleError& e) {
    out << "oracle: " << e.what() << "\n";
    return kDynamics;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Json j = oracle_to_json(res, o);
  stamp(j, spec);
  const fs::path dir = out_dir(a.c);
  write_text(dir / "oracle.json", j.dump(2) + "\n");
  write_with(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, res.trace); });
  write_with(dir / "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, res.trajectory, res.control); });
  out << "oracle: J = " << format_double(res.cost) << " after " << res.evaluations << " evaluations"
      << (res.unoptimized ? " (unoptimized: budget is zero)" : "") << "\n";
  return res.unoptimized ? kNoResult : kOk;
}

struct ExportArgs {
  std::string name;
  std::string out;
  std::vector<std::string> params;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  ProblemSpec spec;
  if (a.params.empty()) {
    spec = builtin(a.name);
  } else {
    if (a.name != "ev") throw UsageError("--param only applies to the ev builtin");
    ParameterTable p = ev_default_parameters();
    for (const auto& s : a.params) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + s + "'");
      const std::string key = s.substr(0, eq);
      if (!p.contains(key)) throw UsageError("unknown ev parameter '" + key + "'");
      const auto vals = parse_list(s.substr(eq + 1), "--param " + key);
      if (vals.size() != 1) throw UsageError("--param " + key + " needs exactly one value");
      p[key] = vals.front();
    }
    spec = ev_transmission(p);
  }
  const std::string text = dump_problem(spec);
  if (a.out.empty() || a.out == "-") {
    out << text;
  } else {
    write_text(a.out, text);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal control of hybrid systems: simulate, solve, verify, oracle", "hocp"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Simulate the schedule under a fixed input");
  add_common(s_sim, sim.c);
  s_sim->add_option("--input", sim.input, "Controls file (.json) or policy: zero, center, lower, upper, const:v1,v2,..")
      ->capture_default_str();
  s_sim->add_option("--switch-times", sim.switch_times, "Comma separated times of the controlled switches");

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "Multistart shooting on the minimum-principle conditions");
  add_common(s_solve, solve.c);
  s_solve->add_option("--starts", solve.starts, "Number of starting guesses")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s_solve->add_option("--threads", solve.threads, "Worker threads (0: hardware count)")->capture_default_str();

  VerifyArgs ver;
  auto* s_ver = app.add_subcommand("verify", "Re-check a solve report");
  add_common(s_ver, ver.c);
  s_ver->add_option("--solution", ver.solution, "report.json from solve")->required();
  s_ver->add_option("--residual-tol", ver.residual_tol, "Bound on every shooting residual")->capture_default_str();
  s_ver->add_option("--needles", ver.needles, "Random needle variations")->capture_default_str();

  OracleArgs orc;
  auto* s_orc = app.add_subcommand("oracle", "Direct-method reference cost");
  add_common(s_orc, orc.c);
  s_orc->add_option("--nodes", orc.nodes, "Control nodes per segment")->capture_default_str();
  s_orc->add_option("--budget", orc.budget, "Cost evaluations")->capture_default_str();

  ExportArgs exp;
  auto* s_exp = app.add_subcommand("export-builtin", "Write a builtin problem as a problem file");
  s_exp->add_option("name", exp.name, "analytic, ev or lq")->required();
  s_exp->add_option("--out", exp.out, "Output file (default: stdout)");
  s_exp->add_option("--param", exp.params, "EV parameter override key=value");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s_sim->parsed()) return cmd_simulate(sim, out);
    if (s_solve->parsed()) return cmd_solve(solve, out);
    if (s_ver->parsed()) return cmd_verify(ver, out);
    if (s_orc->parsed()) return cmd_oracle(orc, out);
    if (s_exp->parsed()) return cmd_export(exp, out);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace hocp::cli
