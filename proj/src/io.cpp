#include "hocp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace hocp {

SchemaError::SchemaError(std::string where, const std::string& message)
    : std::runtime_error(where + ": " + message), where_(std::move(where)) {}

namespace {

std::string escape_token(std::string_view k) {
  std::string out;
  for (char c : k) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

std::string child(const std::string& p, std::string_view key) { return p + "/" + escape_token(key); }
std::string child(const std::string& p, std::size_t i) { return p + "/" + std::to_string(i); }

[[noreturn]] void fail(const std::string& p, const std::string& msg) { throw SchemaError(p.empty() ? "/" : p, msg); }

void only_keys(const Json& obj, const std::string& p, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(p, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) fail(child(p, k), "unknown key '" + k + "'");
  }
}

const Json& require(const Json& obj, const std::string& p, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) fail(child(p, key), "missing required key");
  return *it;
}

const Json& array_at(const Json& j, const std::string& p) {
  if (!j.is_array()) fail(p, "expected an array");
  return j;
}

std::string get_string(const Json& j, const std::string& p) {
  if (!j.is_string()) fail(p, "expected a string");
  return j.get<std::string>();
}

double get_number(const Json& j, const std::string& p) {
  if (!j.is_number()) fail(p, "expected a number");
  return j.get<double>();
}

std::size_t get_count(const Json& j, const std::string& p) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(p, "expected a non-negative integer");
  const auto v = j.get<std::int64_t>();
  if (v < 0) fail(p, "expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

Expr get_expr(const Json& j, const std::string& p, const VarSet& vars) {
  const std::string src = get_string(j, p);
  try {
    return parse(src, vars);
  } catch (const ParseError& e) {
    fail(p, e.what());
  }
}

SwitchKind get_kind(const Json& j, const std::string& p) {
  const std::string s = get_string(j, p);
  if (s == "autonomous") return SwitchKind::autonomous;
  if (s == "controlled") return SwitchKind::controlled;
  fail(p, "kind must be \"autonomous\" or \"controlled\"");
}

// "locations[0].f[1]" -> "/locations/0/f/1"
std::string issue_pointer(const std::string& path) {
  std::string out = "/";
  for (char c : path) {
    if (c == '.' || c == '[') {
      out += '/';
    } else if (c != ']') {
      out += c;
    }
  }
  return out;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string csv_row(std::initializer_list<std::string> head, const std::vector<std::string>& tail) {
  std::string row;
  bool first = true;
  for (const auto& h : head) {
    if (!first) row += ',';
    row += h;
    first = false;
  }
  for (const auto& c : tail) {
    row += ',';
    row += c;
  }
  row += '\n';
  return row;
}

std::vector<std::string> padded(const Eigen::VectorXd& v, std::size_t width) {
  std::vector<std::string> out(width);
  for (Eigen::Index i = 0; i < v.size() && static_cast<std::size_t>(i) < width; ++i) {
    out[static_cast<std::size_t>(i)] = format_double(v(i));
  }
  return out;
}

std::vector<std::string> numbered(std::string_view stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(stem) + std::to_string(i + 1));
  return out;
}

// Mesh points of segment i in ascending time with the jump marks.
struct MeshRow {
  double t;
  std::string mark;
};

std::vector<MeshRow> ascending_rows(std::vector<double> mesh, std::size_t i, std::size_t count) {
  if (!mesh.empty() && mesh.front() > mesh.back()) std::reverse(mesh.begin(), mesh.end());
  std::vector<MeshRow> rows;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    std::string mark;
    if (k == 0 && i > 0) mark = "+";
    if (k + 1 == mesh.size() && i + 1 < count) mark = "-";
    rows.push_back({mesh[k], mark});
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Problem files

Json sim_config_to_json(const SimConfig& cfg) {
  Json j = {{"rtol", cfg.rtol},
            {"atol", cfg.atol},
            {"event_tol", cfg.event_tol},
            {"transversality_eps", cfg.transversality_eps},
            {"max_switches", cfg.max_switches},
            {"manifold_zero_tol", cfg.manifold_zero_tol}};
  if (cfg.min_dwell) j["min_dwell"] = *cfg.min_dwell;
  if (std::isfinite(cfg.h_max)) j["h_max"] = cfg.h_max;
  return j;
}

void apply_sim_overrides(SimConfig& cfg, const Json& overrides, const std::string& pointer) {
  only_keys(overrides, pointer,
            {"rtol", "atol", "event_tol", "transversality_eps", "min_dwell", "max_switches", "manifold_zero_tol",
             "h_max"});
  auto positive = [&](const char* key, double& slot) {
    if (!overrides.contains(key)) return;
    const double v = get_number(overrides[key], child(pointer, key));
    if (!(v > 0.0)) fail(child(pointer, key), "must be positive");
    slot = v;
  };
  positive("rtol", cfg.rtol);
  positive("atol", cfg.atol);
  positive("event_tol", cfg.event_tol);
  positive("transversality_eps", cfg.transversality_eps);
  positive("manifold_zero_tol", cfg.manifold_zero_tol);
  positive("h_max", cfg.h_max);
  if (overrides.contains("min_dwell")) {
    const double v = get_number(overrides["min_dwell"], child(pointer, "min_dwell"));
    if (v < 0.0) fail(child(pointer, "min_dwell"), "must be non-negative");
    cfg.min_dwell = v;
  }
  if (overrides.contains("max_switches")) {
    cfg.max_switches = get_count(overrides["max_switches"], child(pointer, "max_switches"));
  }
}

ProblemSpec parse_problem(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(line_column(text, e.byte), e.what());
  }
  return parse_problem_json(doc);
}

ProblemSpec parse_problem_json(const Json& doc) {
  only_keys(doc, "", {"name", "time_varying", "locations", "transitions", "terminal", "problem", "config",
                      "references"});
  ProblemSpec spec;
  if (doc.contains("name")) spec.name = get_string(doc["name"], "/name");
  HybridModel& M = spec.model;
  if (doc.contains("time_varying")) {
    if (!doc["time_varying"].is_boolean()) fail("/time_varying", "expected a boolean");
    M.time_varying = doc["time_varying"].get<bool>();
  }

  const Json& locs = array_at(require(doc, "", "locations"), "/locations");
  std::map<std::string, std::size_t, std::less<>> dims;
  std::size_t max_dim = 0;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const std::string p = child("/locations", i);
    const Json& L = locs[i];
    only_keys(L, p, {"id", "state_dim", "control_box", "f", "l"});
    Location loc;
    loc.id = get_string(require(L, p, "id"), child(p, "id"));
    loc.state_dim = get_count(require(L, p, "state_dim"), child(p, "state_dim"));
    if (loc.state_dim == 0 || loc.state_dim > kMaxStateDim) fail(child(p, "state_dim"), "out of range");
    const Json& box = array_at(require(L, p, "control_box"), child(p, "control_box"));
    for (std::size_t c = 0; c < box.size(); ++c) {
      const std::string bp = child(child(p, "control_box"), c);
      if (!box[c].is_array() || box[c].size() != 2) fail(bp, "expected [lo, hi]");
      loc.control_box.push_back({get_number(box[c][0], child(bp, std::size_t{0})),
                                 get_number(box[c][1], child(bp, std::size_t{1}))});
    }
    loc.control_dim = loc.control_box.size();
    if (loc.control_dim == 0) fail(child(p, "control_box"), "at least one control interval is required");
    const VarSet vars = location_vars(loc.state_dim, loc.control_dim);
    const Json& f = array_at(require(L, p, "f"), child(p, "f"));
    for (std::size_t k = 0; k < f.size(); ++k) loc.field.push_back(get_expr(f[k], child(child(p, "f"), k), vars));
    loc.running_cost = get_expr(require(L, p, "l"), child(p, "l"), vars);
    dims[loc.id] = loc.state_dim;
    max_dim = std::max(max_dim, loc.state_dim);
    M.locations.push_back(std::move(loc));
  }

  if (doc.contains("transitions")) {
    const Json& trs = array_at(doc["transitions"], "/transitions");
    for (std::size_t i = 0; i < trs.size(); ++i) {
      const std::string p = child("/transitions", i);
      const Json& T = trs[i];
      only_keys(T, p, {"sigma", "from", "to", "kind", "m", "xi", "c"});
      Transition tr;
      tr.event = get_string(require(T, p, "sigma"), child(p, "sigma"));
      tr.from = get_string(require(T, p, "from"), child(p, "from"));
      tr.to = get_string(require(T, p, "to"), child(p, "to"));
      tr.kind = get_kind(require(T, p, "kind"), child(p, "kind"));
      auto from = dims.find(tr.from);
      if (from == dims.end()) fail(child(p, "from"), "unknown location '" + tr.from + "'");
      if (!dims.contains(tr.to)) fail(child(p, "to"), "unknown location '" + tr.to + "'");
      const VarSet vars = state_vars(from->second);
      if (T.contains("m")) tr.manifold = get_expr(T["m"], child(p, "m"), vars);
      const Json& xi = array_at(require(T, p, "xi"), child(p, "xi"));
      for (std::size_t k = 0; k < xi.size(); ++k) tr.jump.push_back(get_expr(xi[k], child(child(p, "xi"), k), vars));
      tr.switching_cost = T.contains("c") ? get_expr(T["c"], child(p, "c"), vars) : Expr::constant(0.0);
      M.transitions.push_back(std::move(tr));
    }
  }

  const Json& term = require(doc, "", "terminal");
  only_keys(term, "/terminal", {"g"});
  M.terminal_cost = get_expr(require(term, "/terminal", "g"), "/terminal/g", state_vars(max_dim));

  const ValidationReport issues = validate(M);
  if (!issues.empty()) fail(issue_pointer(issues.front().path), issues.front().message);

  const Json& pb = require(doc, "", "problem");
  only_keys(pb, "/problem", {"schedule", "kinds", "q0", "x0", "t0", "tf"});
  const Json& sch = array_at(require(pb, "/problem", "schedule"), "/problem/schedule");
  if (sch.empty()) fail("/problem/schedule", "schedule is empty");
  for (std::size_t i = 0; i < sch.size(); ++i) {
    const std::string p = child("/problem/schedule", i);
    std::string id = get_string(sch[i], p);
    if (!dims.contains(id)) fail(p, "unknown location '" + id + "'");
    spec.schedule.locations.push_back(std::move(id));
  }
  const auto& S = spec.schedule.locations;
  if (pb.contains("kinds")) {
    const Json& kinds = array_at(pb["kinds"], "/problem/kinds");
    if (kinds.size() + 1 != S.size()) fail("/problem/kinds", "expected one kind per switch");
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      spec.schedule.kinds.push_back(get_kind(kinds[i], child("/problem/kinds", i)));
    }
  } else {
    for (std::size_t i = 0; i + 1 < S.size(); ++i) {
      const bool a = M.transition_index(S[i], S[i + 1], SwitchKind::autonomous).has_value();
      const bool c = M.transition_index(S[i], S[i + 1], SwitchKind::controlled).has_value();
      const std::string p = child("/problem/schedule", i + 1);
      if (!a && !c) fail(p, "no transition " + S[i] + " -> " + S[i + 1]);
      if (a && c) fail(p, "both kinds connect " + S[i] + " -> " + S[i + 1] + "; give /problem/kinds");
      spec.schedule.kinds.push_back(a ? SwitchKind::autonomous : SwitchKind::controlled);
    }
  }
  if (!schedule_check(M, spec.schedule)) fail("/problem/kinds", "schedule is not a path of the automaton");

  spec.h0.q = pb.contains("q0") ? get_string(pb["q0"], "/problem/q0") : S.front();
  if (spec.h0.q != S.front()) fail("/problem/q0", "must equal the first scheduled location");
  const Json& x0 = array_at(require(pb, "/problem", "x0"), "/problem/x0");
  if (x0.size() != dims.at(spec.h0.q)) {
    fail("/problem/x0", "expected " + std::to_string(dims.at(spec.h0.q)) + " components");
  }
  spec.h0.x.resize(static_cast<Eigen::Index>(x0.size()));
  for (std::size_t i = 0; i < x0.size(); ++i) {
    spec.h0.x(static_cast<Eigen::Index>(i)) = get_number(x0[i], child("/problem/x0", i));
  }
  spec.t0 = pb.contains("t0") ? get_number(pb["t0"], "/problem/t0") : 0.0;
  spec.tf = get_number(require(pb, "/problem", "tf"), "/problem/tf");
  if (!(spec.tf > spec.t0)) fail("/problem/tf", "must exceed t0");

  if (doc.contains("config")) apply_sim_overrides(spec.config, doc["config"], "/config");

  if (doc.contains("references")) {
    const Json& refs = array_at(doc["references"], "/references");
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const std::string p = child("/references", i);
      only_keys(refs[i], p, {"name", "value", "source"});
      Reference r;
      r.name = get_string(require(refs[i], p, "name"), child(p, "name"));
      r.value = get_number(require(refs[i], p, "value"), child(p, "value"));
      if (refs[i].contains("source")) r.source = get_string(refs[i]["source"], child(p, "source"));
      spec.references.push_back(std::move(r));
    }
  }
  return spec;
}

ProblemSpec load_problem(const std::string& source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.starts_with(prefix)) return builtin(std::string_view(source).substr(prefix.size()));
  return parse_problem(read_text(source));
}

Json problem_to_json(const ProblemSpec& spec) {
  const HybridModel& M = spec.model;
  Json doc;
  doc["name"] = spec.name;
  doc["time_varying"] = M.time_varying;
  Json locs = Json::array();
  for (const Location& loc : M.locations) {
    Json box = Json::array();
    for (const Interval& iv : loc.control_box) box.push_back({iv.lo, iv.hi});
    Json f = Json::array();
    for (const Expr& e : loc.field) f.push_back(to_string(e));
    locs.push_back({{"id", loc.id},
                    {"state_dim", loc.state_dim},
                    {"control_box", box},
                    {"f", f},
                    {"l", to_string(loc.running_cost)}});
  }
  doc["locations"] = locs;
  Json trs = Json::array();
  for (const Transition& tr : M.transitions) {
    Json xi = Json::array();
    for (const Expr& e : tr.jump) xi.push_back(to_string(e));
    Json t = {{"sigma", tr.event},       {"from", tr.from}, {"to", tr.to}, {"kind", std::string(to_string(tr.kind))},
              {"xi", xi}, {"c", to_string(tr.switching_cost)}};
    if (tr.manifold) t["m"] = to_string(*tr.manifold);
    trs.push_back(t);
  }
  doc["transitions"] = trs;
  doc["terminal"] = {{"g", to_string(M.terminal_cost)}};
  Json kinds = Json::array();
  for (SwitchKind k : spec.schedule.kinds) kinds.push_back(std::string(to_string(k)));
  doc["problem"] = {{"schedule", spec.schedule.locations},
                    {"kinds", kinds},
                    {"q0", spec.h0.q},
                    {"x0", vec_json(spec.h0.x)},
                    {"t0", spec.t0},
                    {"tf", spec.tf}};
  doc["config"] = sim_config_to_json(spec.config);
  if (!spec.references.empty()) {
    Json refs = Json::array();
    for (const Reference& r : spec.references) refs.push_back({{"name", r.name}, {"value", r.value}, {"source", r.source}});
    doc["references"] = refs;
  }
  return doc;
}

std::string dump_problem(const ProblemSpec& spec) { return problem_to_json(spec).dump(2) + "\n"; }

bool structurally_equal(const ProblemSpec& a, const ProblemSpec& b) {
  const HybridModel &A = a.model, &B = b.model;
  if (a.name != b.name || A.time_varying != B.time_varying) return false;
  if (A.locations.size() != B.locations.size() || A.transitions.size() != B.transitions.size()) return false;
  auto same_exprs = [](const std::vector<Expr>& x, const std::vector<Expr>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] == y[i])) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < A.locations.size(); ++i) {
    const Location &p = A.locations[i], &q = B.locations[i];
    if (p.id != q.id || p.state_dim != q.state_dim || p.control_dim != q.control_dim ||
        p.control_box != q.control_box || !same_exprs(p.field, q.field) || !(p.running_cost == q.running_cost)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < A.transitions.size(); ++i) {
    const Transition &p = A.transitions[i], &q = B.transitions[i];
    if (p.event != q.event || p.from != q.from || p.to != q.to || p.kind != q.kind ||
        p.manifold.has_value() != q.manifold.has_value() || (p.manifold && !(*p.manifold == *q.manifold)) ||
        !same_exprs(p.jump, q.jump) || !(p.switching_cost == q.switching_cost)) {
      return false;
    }
  }
  if (!(A.terminal_cost == B.terminal_cost)) return false;
  if (a.schedule.locations != b.schedule.locations || a.schedule.kinds != b.schedule.kinds) return false;
  if (a.h0.q != b.h0.q || a.h0.x.size() != b.h0.x.size() || a.h0.x != b.h0.x) return false;
  if (a.t0 != b.t0 || a.tf != b.tf) return false;
  if (sim_config_to_json(a.config) != sim_config_to_json(b.config)) return false;
  if (a.references.size() != b.references.size()) return false;
  for (std::size_t i = 0; i < a.references.size(); ++i) {
    const Reference &p = a.references[i], &q = b.references[i];
    if (p.name != q.name || p.value != q.value || p.source != q.source) return false;
  }
  return true;
}

std::string fingerprint(const ProblemSpec& spec) {
  // FNV-1a over the canonical compact dump
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : problem_to_json(spec).dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV artifacts

void write_trajectory_csv(std::ostream& os, const HybridTrajectory& traj, const ControlLaw& control) {
  struct Row {
    double t;
    std::size_t seg;
    const Segment* s;
    std::string mark;
    Eigen::VectorXd x, u;
  };
  std::vector<Row> rows;
  std::size_t nx = 0, nu = 0;
  for (std::size_t i = 0; i < traj.segments.size(); ++i) {
    const Segment& s = traj.segments[i];
    const std::size_t seg = traj.segment_offset + i;
    for (const MeshRow& r : ascending_rows(s.x.mesh(), i, traj.segments.size())) {
      Row row{r.t, seg, &s, r.mark, s.x(r.t), {}};
      if (control) row.u = control(seg, r.t, row.x);
      nx = std::max<std::size_t>(nx, static_cast<std::size_t>(row.x.size()));
      nu = std::max<std::size_t>(nu, static_cast<std::size_t>(row.u.size()));
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::string> head = numbered("x", nx);
  for (auto& u : numbered("u", nu)) head.push_back(u);
  os << csv_row({"t", "segment", "location", "mark"}, head);
  for (const Row& r : rows) {
    std::vector<std::string> cells = padded(r.x, nx);
    for (auto& c : padded(r.u, nu)) cells.push_back(c);
    os << csv_row({format_double(r.t), std::to_string(r.seg), r.s->location, r.mark}, cells);
  }
}

void write_adjoint_csv(std::ostream& os, const AdjointTrajectory& adj, const HybridTrajectory& traj) {
  std::size_t n = 0;
  for (const auto& s : adj.segments) n = std::max(n, s.lam.dim());
  os << csv_row({"t", "segment", "location", "mark"}, numbered("lam", n));
  for (std::size_t i = 0; i < adj.segments.size(); ++i) {
    const AdjointSegment& s = adj.segments[i];
    const std::string loc = i < traj.segments.size() ? traj.segments[i].location : std::to_string(s.loc);
    for (const MeshRow& r : ascending_rows(s.lam.mesh(), i, adj.segments.size())) {
      os << csv_row({format_double(r.t), std::to_string(traj.segment_offset + i), loc, r.mark},
                    padded(s.lam(r.t), n));
    }
  }
}

void write_hamiltonian_csv(std::ostream& os, const HamiltonianSet& hs, const HybridTrajectory& traj,
                           const AdjointTrajectory& adj, const ControlLaw& control) {
  os << "t,segment,location,mark,H\n";
  const std::size_t count = traj.segments.size();
  for (std::size_t i = 0; i < count && i < adj.segments.size(); ++i) {
    const Segment& s = traj.segments[i];
    const std::size_t seg = traj.segment_offset + i;
    for (const MeshRow& r : ascending_rows(s.x.mesh(), i, count)) {
      double H = 0.0;
      if (r.mark == "+" && i - 1 < adj.switches.size()) {
        H = adj.switches[i - 1].H_plus;
      } else if (r.mark == "-" && i < adj.switches.size()) {
        H = adj.switches[i].H_minus;
      } else {
        const Eigen::VectorXd x = s.x(r.t);
        H = hs.value(s.loc, x, control(seg, r.t, x), adj.at(i, r.t), r.t);
      }
      os << format_double(r.t) << ',' << seg << ',' << s.location << ',' << r.mark << ',' << format_double(H) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
  os << "iteration,evaluations,cost,step\n";
  for (const TraceRow& r : trace) {
    os << r.iteration << ',' << r.evaluations << ',' << format_double(r.cost) << ',' << format_double(r.step) << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON artifacts

Json events_to_json(const HybridTrajectory& traj, const HybridModel& model) {
  Json jumps = Json::array();
  for (const JumpRecord& j : traj.jumps) {
    const Transition& tr = model.transitions[j.transition];
    jumps.push_back({{"t", j.t},
                     {"event", j.event},
                     {"kind", std::string(to_string(j.kind))},
                     {"from", tr.from},
                     {"to", tr.to},
                     {"x_minus", vec_json(j.x_minus)},
                     {"x_plus", vec_json(j.x_plus)}});
  }
  Json out = {{"outcome", std::string(to_string(traj.outcome))},
              {"message", traj.message},
              {"t0", traj.t0},
              {"tf", traj.tf},
              {"jumps", jumps}};
  if (traj.failing_transition) {
    const Transition& tr = model.transitions[*traj.failing_transition];
    out["failing_transition"] = {
        {"event", tr.event}, {"from", tr.from}, {"to", tr.to}, {"kind", std::string(to_string(tr.kind))}};
  } else {
    out["failing_transition"] = nullptr;
  }
  if (!traj.segments.empty()) {
    const Segment& last = traj.segments.back();
    out["final"] = {{"t", last.t_end}, {"location", last.location}, {"x", vec_json(traj.final_state())}};
  }
  return out;
}

Json report_to_json(const SolveReport& report, const ShootingProblem& prob) {
  Json unknowns = Json::array();
  for (std::size_t i = 0; i < report.unknown_names.size(); ++i) {
    unknowns.push_back({{"name", report.unknown_names[i]}, {"value", report.unknowns(static_cast<Eigen::Index>(i))}});
  }
  Json residuals = Json::array();
  for (const ResidualRow& r : report.residuals) residuals.push_back({{"name", r.name}, {"value", r.value}});
  Json switches = Json::array();
  for (std::size_t j = 0; j < report.adjoint.switches.size(); ++j) {
    const SwitchRecord& s = report.adjoint.switches[j];
    const Transition& tr = prob.working_model().transitions[s.transition];
    switches.push_back({{"t", s.t},
                        {"event", tr.event},
                        {"kind", std::string(to_string(tr.kind))},
                        {"p", s.p},
                        {"H_minus", s.H_minus},
                        {"H_plus", s.H_plus},
                        {"lambda_minus", vec_json(s.lam_minus)},
                        {"lambda_plus", vec_json(s.lam_plus)}});
  }
  Json out = {{"converged", report.converged},
              {"feasible", report.feasible},
              {"iterations", report.iterations},
              {"residual_norm", report.residual_norm},
              {"message", report.message},
              {"cost", report.cost},
              {"validation_gap", report.validation_gap},
              {"clock", prob.clock},
              {"unknowns", unknowns},
              {"residuals", residuals},
              {"switch_times", report.switch_times},
              {"multipliers", report.multipliers},
              {"switches", switches}};
  out["start"] = report.start ? Json(*report.start) : Json(nullptr);
  if (!report.trajectory.segments.empty()) out["final_state"] = vec_json(report.trajectory.final_state());
  return out;
}

Json oracle_to_json(const OracleResult& res, const OracleOptions& opt) {
  Json params = Json::array();
  for (Eigen::Index i = 0; i < res.params.size(); ++i) params.push_back(res.params(i));
  return {{"cost", res.cost},
          {"unoptimized", res.unoptimized},
          {"evaluations", res.evaluations},
          {"nodes", opt.nodes},
          {"budget", opt.budget},
          {"seed", opt.seed},
          {"switch_times", res.switch_times},
          {"outcome", std::string(to_string(res.trajectory.outcome))},
          {"params", params}};
}

Eigen::VectorXd report_unknowns(const Json& report, const ShootingProblem& prob) {
  if (!report.is_object()) fail("", "expected an object");
  const Json& u = array_at(require(report, "", "unknowns"), "/unknowns");
  if (u.size() != prob.size()) {
    fail("/unknowns", "expected " + std::to_string(prob.size()) + " unknowns, got " + std::to_string(u.size()));
  }
  Eigen::VectorXd z(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::string p = child("/unknowns", i);
    const std::string name = get_string(require(u[i], p, "name"), child(p, "name"));
    if (name != prob.unknown_names[i]) fail(child(p, "name"), "expected '" + prob.unknown_names[i] + "'");
    z(static_cast<Eigen::Index>(i)) = get_number(require(u[i], p, "value"), child(p, "value"));
  }
  return z;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace hocp
