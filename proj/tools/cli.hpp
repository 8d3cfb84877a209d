#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hocp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,     // usage, schema and I/O errors
  kDynamics = 2,  // zeno, manifold termination, infeasible schedule
  kNoResult = 3,  // no convergence, failed verification, unoptimized oracle
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hocp::cli
