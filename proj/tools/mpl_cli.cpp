// Command-line front end: run experiments, dump decision grids, run the
// gradient oracles, and summarize finished runs.
//
// Exit codes: 0 success, 1 configuration or input error, 2 numerical abort.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mpl/errors.hpp"
#include "mpl/harness.hpp"
#include "mpl/model.hpp"
#include "mpl/verify.hpp"

namespace {

int cmd_run(const std::string& config_path, std::optional<std::size_t> seeds, std::optional<std::string> out) {
  mpl::ExperimentConfig config = mpl::load_experiment_config(config_path);
  if (seeds) config.n_seeds = *seeds;
  if (out) config.output_dir = *out;
  config.validate();
  const auto summary = mpl::run_experiment(config);
  for (const auto& s : summary.seeds) {
    std::printf("seed %zu  accuracy %.4f  %s\n", s.seed_index, s.final_accuracy, s.success ? "success" : "fail");
  }
  std::printf("%s: %zu/%zu successes (rate %.3f), accuracy %.4f +- %.4f\n", mpl::to_string(summary.method).c_str(),
              summary.successes, summary.seeds.size(), summary.success_rate, summary.mean_accuracy,
              summary.std_accuracy);
  return 0;
}

int cmd_grid(const std::string& checkpoint, const std::string& bounds, std::size_t res, const std::string& out) {
  const mpl::Params params = mpl::load_params(checkpoint);
  const auto grid = mpl::decision_grid(params, mpl::parse_bounds(bounds), res);
  if (out.empty() || out == "-") {
    mpl::write_grid_csv(std::cout, grid);
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    mpl::write_grid_csv(f, grid);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta Pseudo Labels on small synthetic tasks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::size_t> seeds;
  std::optional<std::string> out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Override the number of seeds");
  run->add_option("--out", out_dir, "Override the output directory");

  std::string checkpoint, bounds = "-1.5,2.5,-1,1.5", grid_out;
  std::size_t res = 100;
  auto* grid = app.add_subcommand("grid", "Evaluate a 2-D checkpoint on a regular grid");
  grid->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  grid->add_option("--bounds", bounds, "x_min,x_max,y_min,y_max")->capture_default_str();
  grid->add_option("--res", res, "Points per axis")->capture_default_str();
  grid->add_option("--out", grid_out, "Output CSV (default stdout)");

  auto* verify = app.add_subcommand("verify", "Run the gradient oracle suite");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Print a summary table of finished runs");
  report->add_option("--dir", report_dir, "Directory containing run outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, seeds, out_dir);
    if (*grid) return cmd_grid(checkpoint, bounds, res, grid_out);
    if (*verify) return mpl::run_oracle_suite(std::cout) ? 0 : 2;
    if (*report) {
      mpl::print_report(report_dir, std::cout);
      return 0;
    }
  } catch (const mpl::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
