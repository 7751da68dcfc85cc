#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spectra/harness.hpp"

namespace {

int run_experiment(spectra::ExperimentConfig cfg) {
  const spectra::RunResult result = spectra::run(cfg);
  std::cout << spectra::render_report(result, "csv");
  std::fprintf(stderr, "wall clock: %.3f s\n", result.wall_clock_seconds);
  return result.all_pass() ? 0 : 2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo harness for sparse Bernoulli matrix structure experiments"};
  app.require_subcommand(1);

  spectra::ExperimentConfig cfg;
  std::string config_path, out_path;
  int n = 0, beta = 0, trials = 0, workers = 0, checkpoint_every = -1;
  double p = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> t_grid;

  std::vector<CLI::App*> experiment_cmds;
  for (int k = 0; k < 9; ++k) {
    CLI::App* cmd = app.add_subcommand(spectra::to_string(spectra::ExperimentKind(k)));
    cmd->add_option("--n", n, "matrix dimension");
    cmd->add_option("--p", p, "Bernoulli parameter");
    cmd->add_option("--beta", beta, "corank target");
    cmd->add_option("--trials", trials, "Monte Carlo trials");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "RNG seed");
    cmd->add_option("--workers", workers, "worker threads");
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--out", out_path, "result output path");
    cmd->add_option("--checkpoint-every", checkpoint_every, "checkpoint cadence in trials");
    cmd->add_option("--t-grid", t_grid, "tail thresholds (increasing)");
    experiment_cmds.push_back(cmd);
  }

  std::string resume_path;
  CLI::App* cmd_resume = app.add_subcommand("resume", "continue from a checkpoint");
  cmd_resume->add_option("checkpoint", resume_path, "checkpoint path")->required();

  std::string report_path, format = "csv";
  CLI::App* cmd_report = app.add_subcommand("report", "render a saved result");
  cmd_report->add_option("result", report_path, "result path")->required();
  cmd_report->add_option("--format", format, "csv|json|plotdata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (cmd_resume->parsed()) {
      const spectra::RunResult result = spectra::resume(resume_path);
      std::cout << spectra::render_report(result, "csv");
      return result.all_pass() ? 0 : 2;
    }
    if (cmd_report->parsed()) {
      const spectra::RunResult result = spectra::parse_run_result(slurp(report_path));
      try {
        std::cout << spectra::render_report(result, format);
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
      return 0;
    }
    for (int k = 0; k < 9; ++k) {
      if (!experiment_cmds[std::size_t(k)]->parsed()) continue;
      if (!config_path.empty()) cfg = spectra::parse_config_text(slurp(config_path));
      cfg.experiment = spectra::ExperimentKind(k);
      if (n > 0) cfg.model.n = n;
      if (p >= 0) cfg.model.p = p;
      if (beta > 0) {
        cfg.model.beta = beta;
        cfg.class_params = spectra::ClassParams::defaults(beta);
      }
      if (seed_set) cfg.model.seed = seed;
      if (trials > 0) cfg.trials = trials;
      if (workers > 0) cfg.workers = workers;
      if (checkpoint_every >= 0) cfg.checkpoint_every = checkpoint_every;
      if (!t_grid.empty()) cfg.t_grid = t_grid;
      if (!out_path.empty()) cfg.output_path = out_path;
      return run_experiment(cfg);
    }
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
