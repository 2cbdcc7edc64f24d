#pragma once

#include <string>
#include <vector>

#include "kgtmm/algorithm.hpp"
#include "kgtmm/config.hpp"

namespace kgtmm {

// Everything an experiment needs, resolved from a config: the generated
// problem, the certified mixing matrix, and the run parameters with step
// sizes filled in.
struct BuiltExperiment {
  MinimaxProblem problem;
  MixingMatrix mixing;
  RunConfig run_config;
  std::vector<std::string> step_report;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg);

extern const char* kTraceCsvHeader;
std::string trace_csv_row(const DiagnosticsRecord& rec);

enum class AlgorithmKind { kKgtMinimax, kLocalSgda, kCentralizedGda };
AlgorithmKind algorithm_from_string(const std::string& name);
std::string to_string(AlgorithmKind kind);

struct ExperimentArtifacts {
  std::string trace_path;
  std::string summary_path;
  RunResult result;
};

// Runs one experiment and writes <label>_trace.csv and <label>_summary.txt
// into the config's output directory. Trace bytes are reproducible given an
// identical config.
ExperimentArtifacts run_experiment(
    const ExperimentConfig& cfg,
    AlgorithmKind algorithm = AlgorithmKind::kKgtMinimax);

// One trace per (value, repeat) plus sweep_summary.csv with per-value mean
// and standard error of the final grad_phi_sq. Points run in parallel up to
// `jobs`; failures are recorded and the sweep continues.
std::string run_sweep(const SweepSpec& sweep, int jobs = 1);

// Aligned traces for >= 2 algorithms on the identical problem, topology and
// seeds; writes <label>_compare.csv with per-round grad_phi_sq columns.
std::string compare_algorithms(const ExperimentConfig& cfg,
                               const std::vector<AlgorithmKind>& algorithms);

}  // namespace kgtmm
