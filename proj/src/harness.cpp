#include "kgtmm/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "kgtmm/errors.hpp"

namespace fs = std::filesystem;

namespace kgtmm {

namespace {

MinimaxProblem build_problem(const ProblemSpec& spec) {
  ProblemDims dims{spec.n, spec.d_x, spec.d_y};
  switch (spec.family) {
    case ProblemFamily::kQuadratic:
      return make_quadratic_suite(dims, spec.heterogeneity, spec.target_kappa,
                                  spec.seed, spec.sigma);
    case ProblemFamily::kRegression:
      return make_regression_suite(dims, spec.heterogeneity, spec.seed,
                                   spec.mu, spec.sigma);
    case ProblemFamily::kExplicitQuadratic: {
      std::vector<Client> clients;
      for (const auto& c : spec.clients)
        clients.push_back(QuadraticClient{c.A, c.B, c.C, c.a, c.b});
      SmoothnessProfile s = certify_smoothness(clients);
      return MinimaxProblem(dims, s, std::move(clients),
                            NoiseModel{spec.sigma});
    }
  }
  throw ConfigError("unreachable problem family");
}

MixingMatrix build_mixing(const TopologySpec& spec, int n) {
  if (spec.explicit_W) return mixing_from_matrix(*spec.explicit_W);
  Graph g = build_graph(graph_kind_from_string(spec.kind), n, spec.seed,
                        spec.er_prob);
  return metropolis_weights(g);
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  MinimaxProblem problem = build_problem(cfg.problem);
  MixingMatrix mixing = build_mixing(cfg.topology, cfg.problem.n);

  RunConfig rc;
  rc.T = cfg.run.T;
  rc.K = cfg.run.K;
  rc.master_seed = cfg.run.master_seed;
  rc.diag_every = cfg.run.diag_every;
  rc.output_selection = cfg.run.output_selection;
  rc.x0 = cfg.run.x0;
  rc.y0 = cfg.run.y0;
  rc.lyapunov_v = cfg.run.v;
  std::vector<std::string> report;
  if (cfg.run.step_mode == StepMode::kTheorem) {
    rc.steps = theorem_stepsizes(problem.smoothness(), mixing.p, rc.K,
                                 cfg.run.v, &report);
  } else {
    rc.steps = cfg.run.manual_steps;
  }
  return BuiltExperiment{std::move(problem), std::move(mixing), rc,
                         std::move(report)};
}

const char* kTraceCsvHeader =
    "round,grad_phi_sq,xi_x,xi_y,drift_x,drift_y,gamma_x,gamma_y,"
    "eps_consensus,lyapunov,phi_gap";

std::string trace_csv_row(const DiagnosticsRecord& rec) {
  std::string row = std::to_string(rec.t);
  row += "," + format_double(rec.grad_phi_sq);
  row += "," + format_double(rec.xi_x);
  row += "," + format_double(rec.xi_y);
  row += "," + format_double(rec.drift_x);
  row += "," + format_double(rec.drift_y);
  row += "," + format_double(rec.gamma_x);
  row += "," + format_double(rec.gamma_y);
  row += "," + format_double(rec.eps_consensus);
  row += "," + optional_field(rec.lyapunov);
  row += "," + optional_field(rec.phi_gap);
  return row;
}

AlgorithmKind algorithm_from_string(const std::string& name) {
  if (name == "kgt_minimax") return AlgorithmKind::kKgtMinimax;
  if (name == "local_sgda") return AlgorithmKind::kLocalSgda;
  if (name == "centralized_gda") return AlgorithmKind::kCentralizedGda;
  throw ConfigError("unknown algorithm: " + name);
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kKgtMinimax: return "kgt_minimax";
    case AlgorithmKind::kLocalSgda: return "local_sgda";
    case AlgorithmKind::kCentralizedGda: return "centralized_gda";
  }
  return "?";
}

namespace {

RunResult dispatch(AlgorithmKind kind, const BuiltExperiment& exp) {
  switch (kind) {
    case AlgorithmKind::kKgtMinimax:
      return run(exp.problem, exp.mixing, exp.run_config);
    case AlgorithmKind::kLocalSgda:
      return run_local_sgda_baseline(exp.problem, exp.mixing, exp.run_config);
    case AlgorithmKind::kCentralizedGda:
      return run_centralized_gda_baseline(exp.problem, exp.run_config);
  }
  throw ConfigError("unreachable algorithm kind");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir);
}

}  // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& cfg,
                                   AlgorithmKind algorithm) {
  const auto t_start = std::chrono::steady_clock::now();
  BuiltExperiment exp = build_experiment(cfg);
  ensure_out_dir(cfg.io.out_dir);

  const std::string trace_path =
      (fs::path(cfg.io.out_dir) / (cfg.io.label + "_trace.csv")).string();
  std::ofstream trace(trace_path, std::ios::binary | std::ios::trunc);
  if (!trace) throw IoError("cannot open " + trace_path);
  trace << kTraceCsvHeader << "\n";
  trace.flush();

  ExperimentArtifacts out;
  out.trace_path = trace_path;
  try {
    out.result = dispatch(algorithm, exp);
  } catch (const DivergenceError&) {
    trace.close();
    throw;
  }
  // Rows are written whole, one flush per diagnostic round.
  for (const auto& rec : out.result.trajectory) {
    trace << trace_csv_row(rec) << "\n";
    trace.flush();
  }
  trace.close();

  const auto t_end = std::chrono::steady_clock::now();
  const double wall =
      std::chrono::duration<double>(t_end - t_start).count();

  const std::string summary_path =
      (fs::path(cfg.io.out_dir) / (cfg.io.label + "_summary.txt")).string();
  std::ofstream summary(summary_path, std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError("cannot open " + summary_path);
  const auto& final_rec = out.result.trajectory.back();
  summary << "algorithm = " << to_string(algorithm) << "\n";
  summary << "selected_tau = " << out.result.tau << "\n";
  summary << "final_grad_phi_sq = " << format_double(final_rec.grad_phi_sq)
          << "\n";
  summary << "final_xi_x = " << format_double(final_rec.xi_x) << "\n";
  summary << "final_xi_y = " << format_double(final_rec.xi_y) << "\n";
  summary << "final_eps_consensus = "
          << format_double(final_rec.eps_consensus) << "\n";
  summary << "certified_p = " << format_double(exp.mixing.p) << "\n";
  summary << "L = " << format_double(exp.problem.smoothness().L) << "\n";
  summary << "mu = " << format_double(exp.problem.smoothness().mu) << "\n";
  summary << "kappa = " << format_double(exp.problem.smoothness().kappa)
          << "\n";
  summary << "eta_c_x = " << format_double(exp.run_config.steps.eta_c_x)
          << "\n";
  summary << "eta_c_y = " << format_double(exp.run_config.steps.eta_c_y)
          << "\n";
  summary << "eta_s_x = " << format_double(exp.run_config.steps.eta_s_x)
          << "\n";
  summary << "eta_s_y = " << format_double(exp.run_config.steps.eta_s_y)
          << "\n";
  for (const auto& note : exp.step_report)
    summary << "stepsize_note = " << note << "\n";
  summary << "wall_seconds = " << format_double(wall) << "\n";
  summary << "---- config echo ----\n";
  summary << cfg.to_map().serialize();
  summary.close();
  out.summary_path = summary_path;
  return out;
}

namespace {

struct SweepPoint {
  ExperimentConfig cfg;
  std::string value;
  int repeat = 0;
};

ExperimentConfig config_for_point(const SweepSpec& sweep,
                                  const std::string& value, int repeat) {
  ExperimentConfig cfg = sweep.base;
  switch (sweep.axis) {
    case SweepAxis::kN:
      cfg.problem.n = static_cast<int>(parse_double(value, "sweep.values"));
      break;
    case SweepAxis::kK:
      cfg.run.K = static_cast<int>(parse_double(value, "sweep.values"));
      break;
    case SweepAxis::kSigma:
      cfg.problem.sigma = parse_double(value, "sweep.values");
      break;
    case SweepAxis::kTopology:
      cfg.topology.kind = value;
      break;
    case SweepAxis::kSeed:
      cfg.run.master_seed =
          static_cast<std::uint64_t>(parse_double(value, "sweep.values"));
      break;
  }
  if (sweep.axis != SweepAxis::kSeed)
    cfg.run.master_seed = sweep.base.run.master_seed + repeat;
  std::string axis_tag = value;
  for (auto& c : axis_tag)
    if (c == '.') c = 'p';
  cfg.io.label =
      sweep.base.io.label + "_" + axis_tag + "_r" + std::to_string(repeat);
  return cfg;
}

}  // namespace

std::string run_sweep(const SweepSpec& sweep, int jobs) {
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  std::vector<SweepPoint> points;
  for (const auto& value : sweep.values)
    for (int r = 0; r < sweep.repeats; ++r)
      points.push_back({config_for_point(sweep, value, r), value, r});

  struct PointOutcome {
    bool ok = false;
    double final_grad_phi_sq = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  std::vector<PointOutcome> outcomes(points.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= points.size()) return;
      try {
        ExperimentArtifacts art = run_experiment(points[idx].cfg);
        outcomes[idx].ok = true;
        outcomes[idx].final_grad_phi_sq =
            art.result.trajectory.back().grad_phi_sq;
      } catch (const std::exception& e) {
        outcomes[idx].error = e.what();
      }
    }
  };
  if (jobs == 1 || points.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const int count = std::min<size_t>(jobs, points.size());
    for (int i = 0; i < count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  ensure_out_dir(sweep.base.io.out_dir);
  const std::string summary_path =
      (fs::path(sweep.base.io.out_dir) /
       (sweep.base.io.label + "_sweep_summary.csv"))
          .string();
  std::ofstream summary(summary_path, std::ios::binary | std::ios::trunc);
  if (!summary) throw IoError("cannot open " + summary_path);
  summary << "value,repeats,failures,mean_final_grad_phi_sq,"
             "stderr_final_grad_phi_sq\n";
  for (size_t v = 0; v < sweep.values.size(); ++v) {
    double sum = 0.0, sum_sq = 0.0;
    int ok = 0, failures = 0;
    for (size_t i = 0; i < points.size(); ++i) {
      if (points[i].value != sweep.values[v]) continue;
      if (!outcomes[i].ok) {
        ++failures;
        continue;
      }
      sum += outcomes[i].final_grad_phi_sq;
      sum_sq += outcomes[i].final_grad_phi_sq * outcomes[i].final_grad_phi_sq;
      ++ok;
    }
    const double mean = ok ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    double stderr_v = 0.0;
    if (ok > 1) {
      const double var = std::max(0.0, (sum_sq - ok * mean * mean) / (ok - 1));
      stderr_v = std::sqrt(var / ok);
    }
    summary << sweep.values[v] << "," << sweep.repeats << "," << failures << ","
            << (ok ? format_double(mean) : "") << ","
            << (ok > 1 ? format_double(stderr_v) : "") << "\n";
  }
  summary.close();
  return summary_path;
}

std::string compare_algorithms(const ExperimentConfig& cfg,
                               const std::vector<AlgorithmKind>& algorithms) {
  if (algorithms.size() < 2)
    throw ConfigError("compare: need at least two algorithms");
  BuiltExperiment exp = build_experiment(cfg);

  std::vector<RunResult> results;
  results.reserve(algorithms.size());
  for (AlgorithmKind kind : algorithms)
    results.push_back(dispatch(kind, exp));

  ensure_out_dir(cfg.io.out_dir);
  const std::string path =
      (fs::path(cfg.io.out_dir) / (cfg.io.label + "_compare.csv")).string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path);
  out << "round";
  for (AlgorithmKind kind : algorithms)
    out << "," << to_string(kind) << "_grad_phi_sq";
  out << "\n";
  const size_t rows = results.front().trajectory.size();
  for (size_t r = 0; r < rows; ++r) {
    out << results.front().trajectory[r].t;
    for (const auto& res : results)
      out << "," << format_double(res.trajectory[r].grad_phi_sq);
    out << "\n";
  }
  out.close();
  return path;
}

}  // namespace kgtmm
