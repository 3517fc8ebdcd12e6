#pragma once

#include <optional>
#include <string>
#include <vector>

#include "survsim/bench.hpp"

namespace survsim {

// Locale-independent numeric text. 6 significant digits for metrics, exact
// shortest round-trip for raw data; NaN renders as "NA".
std::string format_g6(double v);
std::string format_exact(double v);

// CSV of aggregated metrics, one row per (scenario, method), byte-stable
// across reruns of the same manifest and seed.
std::string results_csv(const std::vector<ScenarioReport>& reports);

std::string scenario_json(const ScenarioReport& report);

// One replicate's raw data for external cross-checking.
std::string dataset_csv(const SimDataset& ds);
std::string dataset_sidecar_json(const SimDataset& ds, std::uint64_t master_seed,
                                 std::uint64_t scenario_id, std::size_t replicate);

std::string probe_csv(const std::vector<ProbeRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};
CsvTable parse_csv(const std::string& text);

enum class PanelKind { selection_accuracy, ranking_accuracy, sensitivity, specificity };

std::optional<PanelKind> panel_from_string(const std::string& name);
const char* panel_column(PanelKind panel);

// Line chart of one metric vs. the total number of events, one polyline per
// method, y fixed to [0, 1]. Throws Error when the filter leaves no data.
std::string render_metric_chart(const CsvTable& table, PanelKind panel,
                                std::optional<double> rho_filter);

}  // namespace survsim
