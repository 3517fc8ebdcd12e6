// survsim: run simulation scenario grids, plot the resulting metric curves,
// regenerate single datasets for external cross-checks, and probe the
// degenerate-baseline Cox failure mode.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survsim/bench.hpp"
#include "survsim/errors.hpp"
#include "survsim/manifest.hpp"
#include "survsim/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw survsim::Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw survsim::Error("write failed for '" + path.string() + "'");
}

struct RunOptions {
  std::string manifest_path;
  std::string out_dir;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  bool include_event_indicator = false;
  std::optional<double> mix;
};

int cmd_run(const RunOptions& opt) {
  survsim::RunManifest manifest = survsim::RunManifest::from_json_file(opt.manifest_path);
  if (opt.seed) manifest.master_seed = *opt.seed;
  if (opt.replicates) manifest.replicates = *opt.replicates;
  if (opt.include_event_indicator) manifest.solver.include_event_indicator_in_cox = true;
  if (opt.mix) manifest.solver.mix = *opt.mix;

  const std::vector<survsim::ScenarioConfig> grid = manifest.expand();
  for (const auto& c : grid) c.validate();

  fs::create_directories(opt.out_dir);
  std::vector<survsim::ScenarioReport> reports;
  reports.reserve(grid.size());
  for (const survsim::ScenarioConfig& config : grid) {
    const survsim::TrueModel model = survsim::TrueModel::standard(config.rho);
    survsim::ScenarioReport rep = survsim::run_scenario(config, model, opt.threads);
    write_file(fs::path(opt.out_dir) / ("scenario_" + std::to_string(config.scenario_id) + ".json"),
               survsim::scenario_json(rep));
    std::cerr << "scenario " << config.scenario_id << ": n=" << config.n
              << " censor=" << config.censor_rate << " rho=" << config.rho
              << " events=" << rep.n_events << " (" << rep.wall_time_s << " s)\n";
    reports.push_back(std::move(rep));
  }
  write_file(fs::path(opt.out_dir) / "results.csv", survsim::results_csv(reports));
  std::cout << "wrote " << (fs::path(opt.out_dir) / "results.csv").string() << " ("
            << grid.size() << " scenarios)\n";
  return kExitOk;
}

int cmd_plot(const std::string& csv_path, const std::string& panel_name,
             std::optional<double> rho, const std::string& out_path) {
  const auto panel = survsim::panel_from_string(panel_name);
  if (!panel) {
    throw survsim::InvalidParameterError(
        "plot: unknown panel '" + panel_name +
        "' (expected selection_accuracy, ranking_accuracy, sensitivity or specificity)");
  }
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw survsim::Error("plot: cannot read '" + csv_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const survsim::CsvTable table = survsim::parse_csv(text);
  write_file(out_path, survsim::render_metric_chart(table, *panel, rho));
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_gen(const std::string& manifest_path, std::uint64_t scenario_id, std::size_t replicate,
            const std::string& out_path) {
  const survsim::RunManifest manifest = survsim::RunManifest::from_json_file(manifest_path);
  const std::vector<survsim::ScenarioConfig> grid = manifest.expand();
  if (scenario_id >= grid.size()) {
    throw survsim::InvalidParameterError("gen: scenario-id out of range (grid has " +
                                         std::to_string(grid.size()) + " cells)");
  }
  const survsim::ScenarioConfig& config = grid[scenario_id];
  if (replicate >= config.replicates) {
    throw survsim::InvalidParameterError("gen: replicate index out of range (scenario has " +
                                         std::to_string(config.replicates) + " replicates)");
  }
  survsim::RandomStream stream =
      survsim::derive_stream(config.master_seed, config.scenario_id, replicate);
  const survsim::SimDataset ds =
      survsim::assemble_dataset(config, survsim::TrueModel::standard(config.rho), stream);
  write_file(out_path, survsim::dataset_csv(ds));
  write_file(out_path + ".meta.json",
             survsim::dataset_sidecar_json(ds, config.master_seed, config.scenario_id, replicate));
  std::cout << "wrote " << out_path << " and " << out_path << ".meta.json\n";
  return kExitOk;
}

int cmd_probe(const std::string& manifest_path, std::vector<double> alphas,
              std::optional<std::size_t> replicates, unsigned threads,
              const std::string& out_path) {
  const survsim::RunManifest manifest = survsim::RunManifest::from_json_file(manifest_path);
  survsim::ScenarioConfig config = manifest.expand().front();
  if (replicates) config.replicates = *replicates;
  if (alphas.empty()) alphas = {0.1, 0.5, 1.0, 2.0, 4.0};

  const auto rows = survsim::degenerate_alpha_probe(alphas, config, threads);
  const std::string csv = survsim::probe_csv(rows);
  std::cout << csv;
  if (!out_path.empty()) write_file(out_path, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival feature-selection simulation harness"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "execute a scenario grid and write CSV/JSON results");
  run->add_option("--manifest", run_opt.manifest_path, "manifest JSON path")->required();
  run->add_option("--out", run_opt.out_dir, "output directory")->required();
  run->add_option("--threads", run_opt.threads, "worker threads (0 = all cores)");
  std::uint64_t seed_val = 0;
  CLI::Option* seed_opt = run->add_option("--seed", seed_val, "override the manifest master seed");
  std::size_t reps_val = 0;
  CLI::Option* reps_opt =
      run->add_option("--replicates", reps_val, "override the manifest replicate count");
  run->add_flag("--include-event-indicator", run_opt.include_event_indicator,
                "add the event indicator as a penalized Cox covariate");
  double mix_val = 1.0;
  CLI::Option* mix_opt = run->add_option("--mix", mix_val, "elastic-net mixing weight");

  std::string plot_csv, plot_panel = "selection_accuracy", plot_out = "panel.svg";
  double plot_rho = 0.0;
  CLI::App* plot = app.add_subcommand("plot", "render a metric-vs-events SVG line chart");
  plot->add_option("csv", plot_csv, "results.csv from a run")->required();
  plot->add_option("--panel", plot_panel,
                   "selection_accuracy | ranking_accuracy | sensitivity | specificity");
  CLI::Option* rho_opt = plot->add_option("--rho", plot_rho, "keep only scenarios with this rho");
  plot->add_option("--out", plot_out, "output SVG path");

  std::string gen_manifest, gen_out = "dataset.csv";
  std::uint64_t gen_scenario = 0;
  std::size_t gen_replicate = 0;
  CLI::App* gen = app.add_subcommand("gen", "write one replicate's dataset as CSV + JSON sidecar");
  gen->add_option("--manifest", gen_manifest, "manifest JSON path")->required();
  gen->add_option("--scenario-id", gen_scenario, "grid cell index")->required();
  gen->add_option("--replicate", gen_replicate, "replicate index")->required();
  gen->add_option("--out", gen_out, "output CSV path");

  std::string probe_manifest, probe_out;
  std::vector<double> probe_alphas;
  std::size_t probe_reps = 0;
  unsigned probe_threads = 0;
  CLI::App* probe = app.add_subcommand("probe", "degenerate-baseline Cox fit-failure rates");
  probe->add_option("--manifest", probe_manifest, "manifest JSON path (first grid cell is used)")
      ->required();
  probe->add_option("--alphas", probe_alphas, "shape parameters to probe, each in (0, 4]");
  CLI::Option* probe_reps_opt =
      probe->add_option("--replicates", probe_reps, "replicates per alpha");
  probe->add_option("--threads", probe_threads, "worker threads (0 = all cores)");
  probe->add_option("--out", probe_out, "also write the table to this CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      if (*seed_opt) run_opt.seed = seed_val;
      if (*reps_opt) run_opt.replicates = reps_val;
      if (*mix_opt) run_opt.mix = mix_val;
      return cmd_run(run_opt);
    }
    if (*plot) {
      return cmd_plot(plot_csv, plot_panel,
                      *rho_opt ? std::optional<double>(plot_rho) : std::nullopt, plot_out);
    }
    if (*gen) {
      return cmd_gen(gen_manifest, gen_scenario, gen_replicate, gen_out);
    }
    if (*probe) {
      return cmd_probe(probe_manifest, probe_alphas,
                       *probe_reps_opt ? std::optional<std::size_t>(probe_reps) : std::nullopt,
                       probe_threads, probe_out);
    }
  } catch (const survsim::InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
