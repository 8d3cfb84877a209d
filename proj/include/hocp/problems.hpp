#pragma once

#include "hocp/model.hpp"
#include "hocp/simulate.hpp"

#include <map>
#include <string>
#include <vector>

namespace hocp {

struct Reference {
  std::string name;
  double value = 0.0;
  std::string source;
};

struct ProblemSpec {
  std::string name;
  HybridModel model;
  LocationSchedule schedule;
  InitialState h0;
  double t0 = 0.0;
  double tf = 1.0;
  SimConfig config;
  std::vector<Reference> references;
};

/// Two locations x' = x + x u and x' = -x + x u joined by a controlled switch
/// with jump x -> -x, switching cost 1/(1 + x^2), l = u^2/2, g = x^2/2.
ProblemSpec analytic_example();

using ParameterTable = std::map<std::string, double, std::less<>>;

ParameterTable ev_default_parameters();

/// Six-location electric vehicle with a two-speed planetary transmission.
/// Throws std::invalid_argument on a missing or unknown parameter.
ProblemSpec ev_transmission(const ParameterTable& params = ev_default_parameters());

/// x' = u, l = u^2/2, g = x^2/2, x(0) = 1 on [0, 1].
ProblemSpec lq_toy();

std::vector<std::string> builtin_names();
/// "analytic", "ev" or "lq". Throws std::invalid_argument otherwise.
ProblemSpec builtin(std::string_view name);

}  // namespace hocp
