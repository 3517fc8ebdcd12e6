#include "survsim/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "survsim/errors.hpp"

namespace survsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw InvalidParameterError("manifest: field '" + field + "' " + why);
}

template <class T>
T require(const json& j, const std::string& field) {
  if (!j.contains(field)) bad_field(field, "is missing");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    bad_field(field, "has the wrong type");
  }
}

template <class T>
T optional(const json& j, const std::string& field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    bad_field(field, "has the wrong type");
  }
}

std::vector<double> parse_baseline_grid(const json& j) {
  if (!j.contains("baseline_grid")) return ScenarioConfig::default_baseline_grid();
  const json& g = j.at("baseline_grid");
  if (g.is_array()) {
    try {
      return g.get<std::vector<double>>();
    } catch (const json::exception&) {
      bad_field("baseline_grid", "has the wrong type");
    }
  }
  if (!g.is_object()) bad_field("baseline_grid", "must be an array or {min,max,step}");
  const double lo = require<double>(g, "min");
  const double hi = require<double>(g, "max");
  const double step = require<double>(g, "step");
  if (!(step > 0.0) || hi < lo) bad_field("baseline_grid", "has an empty or inverted range");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

}  // namespace

RunManifest RunManifest::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidParameterError(std::string("manifest: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidParameterError("manifest: top level must be an object");

  RunManifest m;
  m.n_values = require<std::vector<std::size_t>>(j, "n");
  m.censor_rates = require<std::vector<double>>(j, "censor_rate");
  m.rhos = require<std::vector<double>>(j, "rho");
  m.replicates = optional<std::size_t>(j, "replicates", 1000);
  m.master_seed = optional<std::uint64_t>(j, "master_seed", 1);
  m.baseline_grid = parse_baseline_grid(j);

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) bad_field("solver", "must be an object");
    m.solver.mix = optional<double>(s, "mix", m.solver.mix);
    m.solver.include_event_indicator_in_cox = optional<bool>(
        s, "include_event_indicator_in_cox", m.solver.include_event_indicator_in_cox);
    m.solver.gaussian_elnet_lambda =
        optional<double>(s, "gaussian_elnet_lambda", m.solver.gaussian_elnet_lambda);
    m.solver.event_threshold =
        optional<std::size_t>(s, "event_threshold", m.solver.event_threshold);
    m.solver.cv_folds = optional<std::size_t>(s, "cv_folds", m.solver.cv_folds);
    m.solver.n_lambda = optional<std::size_t>(s, "n_lambda", m.solver.n_lambda);
    m.solver.eps_ratio = optional<double>(s, "eps_ratio", m.solver.eps_ratio);
    m.solver.cd_tol = optional<double>(s, "cd_tol", m.solver.cd_tol);
  }

  if (m.n_values.empty()) bad_field("n", "must be a nonempty list");
  if (m.censor_rates.empty()) bad_field("censor_rate", "must be a nonempty list");
  if (m.rhos.empty()) bad_field("rho", "must be a nonempty list");

  // Every grid cell must make a valid scenario.
  for (const ScenarioConfig& c : m.expand()) c.validate();
  return m;
}

RunManifest RunManifest::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameterError("manifest: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::vector<ScenarioConfig> RunManifest::expand() const {
  std::vector<ScenarioConfig> out;
  out.reserve(n_values.size() * censor_rates.size() * rhos.size());
  std::uint64_t id = 0;
  for (std::size_t n : n_values) {
    for (double censor : censor_rates) {
      for (double rho : rhos) {
        ScenarioConfig c;
        c.n = n;
        c.censor_rate = censor;
        c.rho = rho;
        c.replicates = replicates;
        c.master_seed = master_seed;
        c.scenario_id = id++;
        c.baseline_grid = baseline_grid;
        c.solver = solver;
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

}  // namespace survsim
