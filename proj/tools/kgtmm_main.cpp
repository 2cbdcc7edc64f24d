#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "kgtmm/harness.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 divergence, 4 I/O error.
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string out_dir;
  int jobs = 1;
  std::int64_t seed = -1;
};

void apply_overrides(kgtmm::ExperimentConfig& cfg, const CommonFlags& flags) {
  if (!flags.out_dir.empty()) {
    cfg.io.out_dir = flags.out_dir;
  } else if (const char* env = std::getenv("KGTMM_OUT")) {
    if (cfg.io.out_dir == ".") cfg.io.out_dir = env;
  }
  if (flags.seed >= 0)
    cfg.run.master_seed = static_cast<std::uint64_t>(flags.seed);
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--jobs", flags.jobs, "Parallel sweep points");
  cmd->add_option("--seed", flags.seed, "Override the master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-GT-Minimax decentralized minimax optimization simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> algo_names = {"kgt_minimax", "local_sgda"};
  CommonFlags flags;

  auto* cmd_run = app.add_subcommand("run", "Run one experiment");
  cmd_run->add_option("config", config_path, "Experiment config file")
      ->required();
  add_common(cmd_run, flags);

  auto* cmd_sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  cmd_sweep->add_option("config", config_path, "Sweep config file")
      ->required();
  add_common(cmd_sweep, flags);

  auto* cmd_compare =
      app.add_subcommand("compare", "Run aligned algorithm comparison");
  cmd_compare->add_option("config", config_path, "Experiment config file")
      ->required();
  cmd_compare->add_option("--algos", algo_names,
                          "Algorithms: kgt_minimax local_sgda centralized_gda");
  add_common(cmd_compare, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    kgtmm::ConfigMap map = kgtmm::ConfigMap::load(config_path);
    if (cmd_run->parsed()) {
      auto cfg = kgtmm::ExperimentConfig::from_map(map);
      apply_overrides(cfg, flags);
      auto art = kgtmm::run_experiment(cfg);
      std::cout << "trace: " << art.trace_path << "\n"
                << "summary: " << art.summary_path << "\n";
    } else if (cmd_sweep->parsed()) {
      auto sweep = kgtmm::SweepSpec::from_map(map);
      apply_overrides(sweep.base, flags);
      auto summary = kgtmm::run_sweep(sweep, flags.jobs);
      std::cout << "sweep summary: " << summary << "\n";
    } else if (cmd_compare->parsed()) {
      auto cfg = kgtmm::ExperimentConfig::from_map(map);
      apply_overrides(cfg, flags);
      std::vector<kgtmm::AlgorithmKind> algos;
      for (const auto& name : algo_names)
        algos.push_back(kgtmm::algorithm_from_string(name));
      auto path = kgtmm::compare_algorithms(cfg, algos);
      std::cout << "comparison: " << path << "\n";
    }
  } catch (const kgtmm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const kgtmm::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const kgtmm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
