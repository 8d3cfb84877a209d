#pragma once

#include "hocp/hmp.hpp"
#include "hocp/oracle.hpp"
#include "hocp/problems.hpp"
#include "hocp/simulate.hpp"
#include "hocp/solver.hpp"

#include "json.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hocp {

using Json = nlohmann::json;

/// Problem-file error. `where` is a JSON pointer ("/locations/0/f/1") for
/// schema errors or "line L, column C" for syntax errors.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string where, const std::string& message);
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// Parses a problem file. Unknown keys, wrong types, bad expressions and
/// model validation issues all raise SchemaError.
ProblemSpec parse_problem(std::string_view text);
ProblemSpec parse_problem_json(const Json& doc);
/// Reads a file, or resolves "builtin:<name>".
ProblemSpec load_problem(const std::string& source);

Json problem_to_json(const ProblemSpec& spec);
/// Pretty-printed problem file.
std::string dump_problem(const ProblemSpec& spec);

/// Same names, structure, expressions (printed form), numbers and config.
bool structurally_equal(const ProblemSpec& a, const ProblemSpec& b);

/// Hex digest of the canonical problem file; ties artifacts to their problem.
std::string fingerprint(const ProblemSpec& spec);

/// Applies {"rtol": .., "atol": .., ...}; unknown keys raise SchemaError.
void apply_sim_overrides(SimConfig& cfg, const Json& overrides, const std::string& pointer = "/config");
Json sim_config_to_json(const SimConfig& cfg);

/// printf("%.17g").
std::string format_double(double v);

/// t, segment, location, mark, x1.., u1.. on every mesh point. `mark` is "-"
/// on the last row before a jump and "+" on the first row after it. Shorter
/// states leave trailing cells empty.
void write_trajectory_csv(std::ostream& os, const HybridTrajectory& traj, const ControlLaw& control);
/// t, segment, location, mark, lam1.. on every adjoint mesh point.
void write_adjoint_csv(std::ostream& os, const AdjointTrajectory& adj, const HybridTrajectory& traj);
/// t, segment, location, mark, H along the state mesh; switch rows carry the
/// recorded H- and H+.
void write_hamiltonian_csv(std::ostream& os, const HamiltonianSet& hs, const HybridTrajectory& traj,
                           const AdjointTrajectory& adj, const ControlLaw& control);
/// iteration, evaluations, cost, step.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

Json events_to_json(const HybridTrajectory& traj, const HybridModel& model);
Json report_to_json(const SolveReport& report, const ShootingProblem& prob);
Json oracle_to_json(const OracleResult& res, const OracleOptions& opt);

/// The unknown vector stored in a report, checked against the layout of
/// `prob`. Throws SchemaError on missing or mismatched entries.
Eigen::VectorXd report_unknowns(const Json& report, const ShootingProblem& prob);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hocp
