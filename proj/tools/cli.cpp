#include "cran/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

void print_summary(const cran::Summary& s) {
  std::printf("%-10s %-12s %7s %10s %12s %12s %12s %8s\n", "point", "scheme", "trials", "infeasible", "mean_total",
              "mean_ap", "mean_mu", "active");
  for (const auto& r : s.rows) {
    std::printf("%-10s %-12s %7d %10d %12.5g %12.5g %12.5g %8.3g\n", r.sweep_label.c_str(), r.scheme.c_str(),
                r.trials, r.infeasible, r.mean_total, r.mean_ap, r.mean_mu, r.mean_active);
  }
}

void write_outputs(const cran::ExperimentResult& result, const cran::Summary* summary, const std::string& dir) {
  for (auto f : {cran::OutputFormat::csv, cran::OutputFormat::json, cran::OutputFormat::plotdata}) {
    if (f == cran::OutputFormat::plotdata && !summary) continue;
    for (const auto& p : cran::emit(result, summary, f, dir)) std::cerr << "wrote " << p.string() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"C-RAN joint DL/UL AP association experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int workers = -1;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* workers_opt = run->add_option("--workers", workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Override the master seed");

  std::string in_dir, mode_name;
  auto* agg = app.add_subcommand("aggregate", "Summarize records.json from a run directory");
  agg->add_option("--in", in_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  agg->add_option("--mode", mode_name, "feasibility | sum_power | tradeoff")
      ->required()
      ->check(CLI::IsMember({"feasibility", "sum_power", "tradeoff"}));

  std::uint64_t demo_seed = 1;
  std::string demo_out;
  auto* demo = app.add_subcommand("demo-fig1", "Active sets of all schemes on one heterogeneous layout");
  demo->add_option("--seed", demo_seed, "First seed to try");
  demo->add_option("--out", demo_out, "Write JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::ifstream in(config_path);
      auto config = cran::experiment_config_from_json(nlohmann::json::parse(in));
      if (*workers_opt) config.workers = workers;
      if (*seed_opt) config.master_seed = seed;
      const auto result = cran::run_experiment(config);
      for (const auto& m : result.skipped)
        std::cerr << "skipped " << m.scheme << " at point " << m.sweep_point << ": " << m.reason << '\n';
      if (result.records.empty()) {
        write_outputs(result, nullptr, out_dir);
        return 0;
      }
      const auto summary = cran::aggregate(result.records);
      write_outputs(result, &summary, out_dir);
      print_summary(summary);
    } else if (*agg) {
      const auto result = cran::load_records(in_dir);
      if (result.records.empty()) throw std::runtime_error("no records in " + in_dir);
      const auto summary = cran::aggregate(result.records);
      if (summary.mode != cran::mode_from_string(mode_name))
        throw std::runtime_error("records were produced in " + cran::to_string(summary.mode) + " mode");
      cran::ExperimentResult none;
      for (auto f : {cran::OutputFormat::plotdata}) cran::emit(none, &summary, f, in_dir);
      std::ofstream(std::filesystem::path(in_dir) / "summary.csv") << cran::summary_csv(summary);
      std::ofstream(std::filesystem::path(in_dir) / "summary.json") << cran::to_json(summary).dump(1) << '\n';
      print_summary(summary);
    } else if (*demo) {
      const auto doc = cran::demo_fig1(demo_seed);
      if (demo_out.empty()) {
        std::cout << doc.dump(1) << '\n';
      } else {
        std::ofstream(demo_out) << doc.dump(1) << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
