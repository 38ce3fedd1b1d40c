#pragma once

#include <stdexcept>
#include <string>

#include "formctl/certificates.hpp"
#include "formctl/sim.hpp"

namespace formctl {

// Raised on any structural or semantic problem in a scenario file; the message
// carries the offending line/key.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  std::string model_kind;  // "planar2" | "spatial3"
  Network network{FormationGraph(0, 2, Flavor::Distance),
                  {},
                  {},
                  {},
                  {},
                  Controller(Variant::Exact, {})};
  SimConfig sim;
  GridSpec grid;
  Eigen::VectorXd ahat0;        // per-agent initial parameter guess
  double mass_scale = 1.0;      // Naive variant gravity model error
};

// Strict INI-style parser: sections [formation], [model], [agent i],
// [controller], [simulation], [grid]; unknown sections or keys are errors.
Scenario parse_scenario(const std::string& text, const std::string& name);
Scenario load_scenario(const std::string& path);

}  // namespace formctl
