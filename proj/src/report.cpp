#include "survsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "survsim/errors.hpp"

namespace survsim {

namespace {

std::string to_chars_str(double v, int precision) {
  char buf[40];
  std::to_chars_result res =
      precision > 0 ? std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision)
                    : std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_g6(double v) {
  if (std::isnan(v)) return "NA";
  return to_chars_str(v, 6);
}

std::string format_exact(double v) {
  if (std::isnan(v)) return "NA";
  return to_chars_str(v, 0);
}

std::string results_csv(const std::vector<ScenarioReport>& reports) {
  std::string out =
      "scenario_id,n,censor_rate,rho,n_events,method,"
      "sensitivity,sens_ci_low,sens_ci_high,"
      "specificity,spec_ci_low,spec_ci_high,"
      "selection_accuracy,ranking_accuracy,rank_ci_low,rank_ci_high,"
      "n_replicates,n_fit_failures\n";
  for (const ScenarioReport& rep : reports) {
    const std::string prefix = std::to_string(rep.config.scenario_id) + "," +
                               std::to_string(rep.config.n) + "," +
                               format_g6(rep.config.censor_rate) + "," +
                               format_g6(rep.config.rho) + "," + std::to_string(rep.n_events) + ",";
    for (const MethodMetrics& m : rep.per_method) {
      out += prefix;
      out += method_name(m.method);
      out += ',';
      out += format_g6(m.sensitivity) + "," + format_g6(m.sens_ci.low) + "," +
             format_g6(m.sens_ci.high) + ",";
      out += format_g6(m.specificity) + "," + format_g6(m.spec_ci.low) + "," +
             format_g6(m.spec_ci.high) + ",";
      out += format_g6(m.selection_accuracy) + "," + format_g6(m.ranking_accuracy) + "," +
             format_g6(m.rank_ci.low) + "," + format_g6(m.rank_ci.high) + ",";
      out += std::to_string(m.n_replicates) + "," + std::to_string(m.n_fit_failures) + "\n";
    }
  }
  return out;
}

std::string scenario_json(const ScenarioReport& report) {
  nlohmann::json j;
  j["scenario_id"] = report.config.scenario_id;
  j["n"] = report.config.n;
  j["censor_rate"] = report.config.censor_rate;
  j["rho"] = report.config.rho;
  j["replicates"] = report.config.replicates;
  j["master_seed"] = report.config.master_seed;
  j["n_events"] = report.n_events;
  j["wall_time_s"] = report.wall_time_s;
  j["solver"] = {{"mix", report.config.solver.mix},
                 {"include_event_indicator_in_cox",
                  report.config.solver.include_event_indicator_in_cox},
                 {"gaussian_elnet_lambda", report.config.solver.gaussian_elnet_lambda},
                 {"event_threshold", report.config.solver.event_threshold},
                 {"cv_folds", report.config.solver.cv_folds},
                 {"n_lambda", report.config.solver.n_lambda},
                 {"eps_ratio", report.config.solver.eps_ratio},
                 {"cd_tol", report.config.solver.cd_tol}};
  nlohmann::json methods = nlohmann::json::array();
  for (const MethodMetrics& m : report.per_method) {
    nlohmann::json mj;
    mj["method"] = method_name(m.method);
    mj["selection_scored"] = m.selection_scored;
    if (m.selection_scored) {
      mj["sensitivity"] = m.sensitivity;
      mj["sensitivity_ci"] = {m.sens_ci.low, m.sens_ci.high};
      mj["specificity"] = m.specificity;
      mj["specificity_ci"] = {m.spec_ci.low, m.spec_ci.high};
      mj["selection_accuracy"] = m.selection_accuracy;
    }
    mj["ranking_accuracy"] = m.ranking_accuracy;
    mj["ranking_accuracy_ci"] = {m.rank_ci.low, m.rank_ci.high};
    mj["n_replicates"] = m.n_replicates;
    mj["n_fit_failures"] = m.n_fit_failures;
    methods.push_back(std::move(mj));
  }
  j["methods"] = std::move(methods);
  return j.dump(2) + "\n";
}

std::string dataset_csv(const SimDataset& ds) {
  std::string out = "time_obs,status";
  for (std::size_t j = 1; j <= kObservedDim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    out += format_exact(ds.time_obs[i]);
    out += ',';
    out += ds.status[i] ? '1' : '0';
    for (std::size_t j = 0; j < kObservedDim; ++j) {
      out += ',';
      out += format_exact(ds.x_obs(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string dataset_sidecar_json(const SimDataset& ds, std::uint64_t master_seed,
                                 std::uint64_t scenario_id, std::size_t replicate) {
  nlohmann::json j;
  j["master_seed"] = master_seed;
  j["scenario_id"] = scenario_id;
  j["replicate"] = replicate;
  j["n"] = ds.n();
  j["n_events"] = ds.n_events();
  // 1-based ids into the true coefficient vector (1, ..., 10)
  std::vector<std::size_t> ids;
  for (std::size_t id : ds.true_ids) ids.push_back(id + 1);
  j["true_ids"] = ids;
  j["true_beta_obs"] = std::vector<double>(ds.true_beta_obs.begin(), ds.true_beta_obs.end());
  j["baseline"] = {{"shape_alpha", ds.baseline.shape_alpha},
                   {"scale_lambda", ds.baseline.scale_lambda}};
  return j.dump(2) + "\n";
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::string out =
      "shape_alpha,n_replicates,n_failures,failure_rate,n_degenerate_times,"
      "n_divergence,n_singular,n_nonidentifiable,n_nonconverged\n";
  for (const ProbeRow& r : rows) {
    out += format_g6(r.shape_alpha) + "," + std::to_string(r.n_replicates) + "," +
           std::to_string(r.n_failures) + "," + format_g6(r.failure_rate) + "," +
           std::to_string(r.n_degenerate_times) + "," + std::to_string(r.n_divergence) + "," +
           std::to_string(r.n_singular) + "," + std::to_string(r.n_nonidentifiable) + "," +
           std::to_string(r.n_nonconverged) + "\n";
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("csv: missing column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

std::optional<PanelKind> panel_from_string(const std::string& name) {
  if (name == "selection_accuracy") return PanelKind::selection_accuracy;
  if (name == "ranking_accuracy") return PanelKind::ranking_accuracy;
  if (name == "sensitivity") return PanelKind::sensitivity;
  if (name == "specificity") return PanelKind::specificity;
  return std::nullopt;
}

const char* panel_column(PanelKind panel) {
  switch (panel) {
    case PanelKind::selection_accuracy: return "selection_accuracy";
    case PanelKind::ranking_accuracy: return "ranking_accuracy";
    case PanelKind::sensitivity: return "sensitivity";
    case PanelKind::specificity: return "specificity";
  }
  return "";
}

namespace {

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Series {
  std::string method;
  std::vector<std::pair<double, double>> points;  // (n_events, metric)
};

}  // namespace

std::string render_metric_chart(const CsvTable& table, PanelKind panel,
                                std::optional<double> rho_filter) {
  const std::size_t c_events = table.column("n_events");
  const std::size_t c_method = table.column("method");
  const std::size_t c_rho = table.column("rho");
  const std::size_t c_metric = table.column(panel_column(panel));

  std::map<std::string, Series> by_method;
  std::vector<std::string> method_order;
  for (const auto& row : table.rows) {
    if (rho_filter) {
      const double rho = std::stod(row[c_rho]);
      if (std::fabs(rho - *rho_filter) > 1e-9) continue;
    }
    if (row[c_metric] == "NA") continue;
    const std::string& method = row[c_method];
    if (!by_method.count(method)) method_order.push_back(method);
    by_method[method].method = method;
    by_method[method].points.emplace_back(std::stod(row[c_events]), std::stod(row[c_metric]));
  }
  if (method_order.empty()) {
    throw Error("plot: no data after applying the filter");
  }

  double x_min = 1e300, x_max = -1e300;
  for (auto& [name, s] : by_method) {
    std::sort(s.points.begin(), s.points.end());
    for (auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
  }
  if (x_max <= x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }

  const double width = 880, height = 540;
  const double ml = 70, mr = 230, mt = 50, mb = 60;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return mt + (1.0 - y) * ph; };  // y domain fixed to [0, 1]

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::string title = panel_column(panel);
  if (rho_filter) title += " (rho = " + format_g6(*rho_filter) + ")";
  svg << "<text x=\"" << ml << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\">" << title
      << "</text>\n";

  // axes and gridlines
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = 0.25 * k;
    svg << "<line x1=\"" << ml << "\" y1=\"" << sy(yv) << "\" x2=\"" << ml + pw << "\" y2=\""
        << sy(yv) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << sy(yv) + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << format_g6(yv)
        << "</text>\n";
  }
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 5.0;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << mt + ph + 20
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << format_g6(xv) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
      << "total number of events</text>\n";

  std::size_t ci = 0;
  for (const std::string& name : method_order) {
    const Series& s = by_method[name];
    const char* color = kPalette[ci % 10];
    if (s.points.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : s.points) svg << sx(x) << "," << sy(y) << " ";
      svg << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3.5\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = mt + 18.0 * static_cast<double>(ci);
    svg << "<line x1=\"" << ml + pw + 16 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 44
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + pw + 50 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
    ++ci;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace survsim
