#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "survsim/sim.hpp"

namespace survsim {

// One study = one manifest file. The scenario grid is the cross product of
// the n, censor_rate and rho lists, expanded in that nesting order with
// scenario_id equal to the expansion index.
struct RunManifest {
  std::vector<std::size_t> n_values;
  std::vector<double> censor_rates;
  std::vector<double> rhos;
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 1;
  std::vector<double> baseline_grid = ScenarioConfig::default_baseline_grid();
  SolverSettings solver;

  static RunManifest from_json_text(const std::string& text);
  static RunManifest from_json_file(const std::string& path);

  std::vector<ScenarioConfig> expand() const;
};

}  // namespace survsim
