// Acceptance suite: one criterion per invocation (argv[1] in 1..7), one
// pass/fail line each, nonzero exit on failure. Thresholds are frozen; a
// failure prints the measured values so regressions are actionable.
#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kgtmm/algorithm.hpp"
#include "kgtmm/harness.hpp"

using namespace kgtmm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Mixing certification across the built-in topology set.
Outcome criterion_mixing() {
  Outcome out;
  struct Case {
    GraphKind kind;
    int n;
  };
  const std::vector<Case> cases = {
      {GraphKind::kComplete, 8}, {GraphKind::kRing, 4},  {GraphKind::kRing, 8},
      {GraphKind::kRing, 16},    {GraphKind::kStar, 5},  {GraphKind::kPath, 8},
      {GraphKind::kErdosRenyi, 16}};
  for (const auto& c : cases) {
    MixingMatrix mix =
        metropolis_weights(build_graph(c.kind, c.n, /*seed=*/7, 0.3));
    const std::string tag = to_string(c.kind) + "/n=" + std::to_string(c.n);
    out.require((mix.W - mix.W.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
                tag + ": W not symmetric");
    out.require(
        (mix.W.rowwise().sum() - Eigen::VectorXd::Ones(c.n)).cwiseAbs()
                .maxCoeff() <= 1e-12,
        tag + ": rows do not sum to 1");
    out.require(
        (mix.W.colwise().sum().transpose() - Eigen::VectorXd::Ones(c.n))
                .cwiseAbs()
                .maxCoeff() <= 1e-12,
        tag + ": columns do not sum to 1");
    out.require(mix.W.minCoeff() >= -1e-15, tag + ": negative weight");
    out.require(mix.p > 0.0 && mix.p <= 1.0, tag + ": p out of (0, 1]");
    RngStream rng(31, StreamPurpose::kTest, c.n);
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::MatrixXd X = rng.normal_matrix(3, c.n);
      const Eigen::VectorXd xbar = X.rowwise().mean();
      const Eigen::MatrixXd D = X.colwise() - xbar;
      const double lhs = (D * mix.W).squaredNorm();
      const double rhs = (1.0 - mix.p) * D.squaredNorm();
      if (lhs > rhs + 1e-12 * (1.0 + rhs)) {
        out.require(false, tag + ": contraction inequality violated");
        break;
      }
    }
  }
  MixingMatrix ring4 = metropolis_weights(build_graph(GraphKind::kRing, 4, 0));
  out.require(std::abs(ring4.p - 8.0 / 9.0) <= 1e-12,
              "ring n=4: p = " + fmt(ring4.p) + ", expected 8/9");
  if (out.pass)
    out.detail = "7 topologies certified, ring-4 p within 1e-12 of 8/9";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Corrections keep zero column mean at every round of a long noisy run.
Outcome criterion_tracking_invariant() {
  Outcome out;
  MinimaxProblem problem =
      make_quadratic_suite({8, 4, 3}, 1.0, 3.0, /*seed=*/11, /*sigma=*/0.5);
  MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kRing, 8, 0));
  RunConfig cfg;
  cfg.T = 500;
  cfg.K = 4;
  cfg.steps = theorem_stepsizes(problem.smoothness(), mix.p, cfg.K, 1.0);
  cfg.master_seed = 2024;
  SwarmState state = init_state(problem, cfg, mix);
  double worst = 0.0;
  Eigen::MatrixXd X_end, Y_end;
  InnerTrace trace;
  for (int t = 0; t < cfg.T; ++t) {
    const double scale_x = std::max(1.0, state.Cx.cwiseAbs().maxCoeff());
    const double scale_y = std::max(1.0, state.Cy.cwiseAbs().maxCoeff());
    const double rel_x =
        state.Cx.rowwise().mean().cwiseAbs().maxCoeff() / scale_x;
    const double rel_y =
        state.Cy.rowwise().mean().cwiseAbs().maxCoeff() / scale_y;
    worst = std::max({worst, rel_x, rel_y});
    local_phase(state, problem, cfg, X_end, Y_end, trace);
    communication_phase(state, X_end, Y_end, cfg, mix);
  }
  out.require(worst <= 1e-10, "max relative column mean " + fmt(worst));
  if (out.pass)
    out.detail = "500 rounds (n=8, K=4, sigma=0.5): max relative column mean " +
                 fmt(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Exact reductions to centralized GDA.
Outcome criterion_reductions() {
  Outcome out;

  // (a) Single client, 50 rounds x K=3, eta_s = 1.
  {
    MinimaxProblem problem = make_quadratic_suite({1, 4, 3}, 0.0, 3.0, 21);
    MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kComplete, 1, 0));
    RunConfig cfg;
    cfg.T = 50;
    cfg.K = 3;
    cfg.steps = StepSizes{0.01, 0.01, 1.0, 1.0};
    cfg.master_seed = 5;
    cfg.diag_every = 50;
    cfg.output_selection = OutputSelection::kFinal;
    RunResult dec = run(problem, mix, cfg);
    RunResult cen = run_centralized_gda_baseline(problem, cfg);
    double gap = 0.0;
    for (size_t t = 0; t < dec.xbar_history.size(); ++t)
      gap = std::max(gap, (dec.xbar_history[t] - cen.xbar_history[t])
                              .cwiseAbs()
                              .maxCoeff());
    out.require(gap <= 1e-12, "n=1 reduction gap " + fmt(gap));
    if (out.pass) out.note("n=1 max gap " + fmt(gap));
  }

  // (b) Full mixing W = J with K = 1 on a heterogeneous suite.
  {
    const int n = 4;
    MinimaxProblem problem = make_quadratic_suite({n, 4, 3}, 1.0, 3.0, 22);
    MixingMatrix full;
    full.W = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    full.p = 1.0;
    RunConfig cfg;
    cfg.T = 50;
    cfg.K = 1;
    cfg.steps = StepSizes{0.01, 0.01, 1.0, 1.0};
    cfg.master_seed = 6;
    cfg.diag_every = 50;
    cfg.output_selection = OutputSelection::kFinal;
    RunResult dec = run(problem, full, cfg);
    RunResult cen = run_centralized_gda_baseline(problem, cfg);
    double gap = 0.0;
    for (size_t t = 0; t < dec.xbar_history.size(); ++t)
      gap = std::max(gap, (dec.xbar_history[t] - cen.xbar_history[t])
                              .cwiseAbs()
                              .maxCoeff());
    out.require(gap <= 1e-10, "W=J reduction gap " + fmt(gap));
    if (out.pass) out.note("W=J max gap " + fmt(gap));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared setup for criteria 4 and 5: heterogeneous ring suite, kappa ~ 5,
// Theorem-1 steps with v = 1, T = 5000, K = 4.
RunResult reference_run(int n, double sigma, std::uint64_t run_seed,
                        bool tracking, bool shared_init = false, int T = 5000) {
  MinimaxProblem problem =
      make_quadratic_suite({n, 4, 3}, 1.0, 5.0, /*seed=*/31, sigma);
  MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kRing, n, 0));
  RunConfig cfg;
  cfg.T = T;
  cfg.K = 4;
  cfg.steps = theorem_stepsizes(problem.smoothness(), mix.p, cfg.K, 1.0);
  cfg.master_seed = run_seed;
  cfg.diag_every = T;  // only the endpoints matter here
  cfg.output_selection = OutputSelection::kFinal;
  if (shared_init) {
    // One pinned starting point for every (n, seed) cell, so cross-n
    // comparisons isolate the noise and consensus effects. The averaged
    // problem is n-independent by construction of the suite.
    RngStream rng(777, StreamPurpose::kInitPoint);
    cfg.x0 = rng.normal_vector(4);
    cfg.y0 = rng.normal_vector(3);
  }
  return tracking ? run(problem, mix, cfg)
                  : run_local_sgda_baseline(problem, mix, cfg);
}

// 4. Heterogeneity robustness: tracking converges, the uncorrected baseline
// plateaus.
Outcome criterion_heterogeneity() {
  Outcome out;
  RunResult kgt = reference_run(8, 0.0, 1, /*tracking=*/true);
  RunResult sgda = reference_run(8, 0.0, 1, /*tracking=*/false);
  const double kgt_final = kgt.trajectory.back().grad_phi_sq;
  const double sgda_final = sgda.trajectory.back().grad_phi_sq;
  out.require(kgt_final <= 1e-8,
              "kgt_minimax final grad_phi_sq " + fmt(kgt_final) + " > 1e-8");
  out.require(sgda_final >= 1e-4,
              "local_sgda final grad_phi_sq " + fmt(sgda_final) + " < 1e-4");
  out.note("kgt=" + fmt(kgt_final) + " sgda=" + fmt(sgda_final) +
           " start=" + fmt(kgt.trajectory.front().grad_phi_sq));
  return out;
}

// 5. Noise scaling: multi-seed plateaus shrink with n.
Outcome criterion_noise_scaling() {
  Outcome out;
  const int R = 10;
  auto mean_final = [&](int n) {
    double sum = 0.0;
    for (int r = 0; r < R; ++r) {
      RunResult res =
          reference_run(n, 1.0, 100 + r, /*tracking=*/true, /*shared_init=*/true);
      sum += res.trajectory.back().grad_phi_sq;
    }
    return sum / R;
  };
  const double m2 = mean_final(2);
  const double m4 = mean_final(4);
  const double m8 = mean_final(8);
  const double m16 = mean_final(16);
  const double plateau16 =
      reference_run(16, 0.0, 100, /*tracking=*/true, /*shared_init=*/true)
          .trajectory.back()
          .grad_phi_sq;
  out.require(m16 <= 10.0 * plateau16,
              "noisy n=16 mean " + fmt(m16) + " > 10x noiseless plateau " +
                  fmt(plateau16));
  out.require(m2 >= m4 && m4 >= m8,
              "plateau ordering not monotone: n=2 " + fmt(m2) + ", n=4 " +
                  fmt(m4) + ", n=8 " + fmt(m8));
  out.note("means: n=2 " + fmt(m2) + ", n=4 " + fmt(m4) + ", n=8 " + fmt(m8) +
           ", n=16 " + fmt(m16) + "; sigma=0 n=16 plateau " + fmt(plateau16));
  return out;
}

// ---------------------------------------------------------------------------
// 6. Oracle and analysis inequalities, zero violations.
Outcome criterion_inequalities() {
  Outcome out;
  MinimaxProblem p = make_quadratic_suite({4, 4, 3}, 1.0, 4.0, 41);
  const double L = p.smoothness().L;
  const double mu = p.smoothness().mu;

  // Gradients against central finite differences, 1e-6 relative.
  {
    RngStream rng(51, StreamPurpose::kTest);
    const double h = 1e-6;
    int bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int i = static_cast<int>(rng.uniform_index(p.dims().n));
      Eigen::VectorXd x = rng.normal_vector(p.dims().d_x);
      Eigen::VectorXd y = rng.normal_vector(p.dims().d_y);
      GradPair g = p.grad(i, x, y);
      for (int c = 0; c < p.dims().d_x; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const double fd = (p.value(i, xp, y) - p.value(i, xm, y)) / (2 * h);
        if (std::abs(fd - g.gx[c]) > 1e-6 * (1.0 + std::abs(fd))) ++bad;
      }
      for (int c = 0; c < p.dims().d_y; ++c) {
        Eigen::VectorXd yp = y, ym = y;
        yp[c] += h;
        ym[c] -= h;
        const double fd = (p.value(i, x, yp) - p.value(i, x, ym)) / (2 * h);
        if (std::abs(fd - g.gy[c]) > 1e-6 * (1.0 + std::abs(fd))) ++bad;
      }
    }
    out.require(bad == 0,
                std::to_string(bad) + " finite-difference gradient violations");
  }

  // Danskin: grad Phi against finite differences of Phi, 1e-6 relative.
  {
    RngStream rng(52, StreamPurpose::kTest);
    const double h = 1e-6;
    int bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x = rng.normal_vector(p.dims().d_x);
      Eigen::VectorXd gphi = p.primal_value_and_grad(x).second;
      for (int c = 0; c < p.dims().d_x; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const double fd = (p.primal_value_and_grad(xp).first -
                           p.primal_value_and_grad(xm).first) /
                          (2 * h);
        if (std::abs(fd - gphi[c]) > 1e-6 * (1.0 + std::abs(fd))) ++bad;
      }
    }
    out.require(bad == 0, std::to_string(bad) + " Danskin gradient violations");
  }

  // Strong concavity in y, 1000 random triples.
  {
    RngStream rng(53, StreamPurpose::kTest);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int i = static_cast<int>(rng.uniform_index(p.dims().n));
      Eigen::VectorXd x = rng.normal_vector(p.dims().d_x);
      Eigen::VectorXd y = rng.normal_vector(p.dims().d_y);
      Eigen::VectorXd y2 = rng.normal_vector(p.dims().d_y);
      const double lhs = p.value(i, x, y2);
      const double rhs = p.value(i, x, y) + p.grad(i, x, y).gy.dot(y2 - y) -
                         0.5 * mu * (y2 - y).squaredNorm();
      if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) ++bad;
    }
    out.require(bad == 0, std::to_string(bad) + " strong-concavity violations");
  }

  // Single-ascent-step progress inequality, 1000 random triples, for the
  // averaged objective: with y+ = y + (1/L) grad_y f(x, y),
  // grad_y f(x,y)'(y - y') + 1/(2L)||grad_y f||^2 + mu/2 ||y - y'||^2
  //   <= f(x, y+) - f(x, y').
  {
    RngStream rng(54, StreamPurpose::kTest);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::VectorXd x = rng.normal_vector(p.dims().d_x);
      Eigen::VectorXd y = rng.normal_vector(p.dims().d_y);
      Eigen::VectorXd y2 = rng.normal_vector(p.dims().d_y);
      const Eigen::VectorXd gy = p.mean_grad(x, y).gy;
      const Eigen::VectorXd y_plus = y + gy / L;
      const double lhs = gy.dot(y - y2) + gy.squaredNorm() / (2.0 * L) +
                         0.5 * mu * (y - y2).squaredNorm();
      const double rhs = p.mean_value(x, y_plus) - p.mean_value(x, y2);
      if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) ++bad;
    }
    out.require(bad == 0,
                std::to_string(bad) + " ascent-progress violations");
  }

  // Consensus-distance bounds at every diagnostic round of a reference run:
  // ||grad_x f(xbar, ybar)||^2 <= 2 L^2 eps + 2 ||grad Phi(xbar)||^2 and
  // ||grad_y f(xbar, ybar)||^2 <= L^2 eps.
  {
    MinimaxProblem ref = make_quadratic_suite({8, 4, 3}, 1.0, 5.0, 31);
    MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kRing, 8, 0));
    RunConfig cfg;
    cfg.T = 200;
    cfg.K = 4;
    cfg.steps = theorem_stepsizes(ref.smoothness(), mix.p, cfg.K, 1.0);
    cfg.master_seed = 9;
    cfg.diag_every = 10;
    cfg.output_selection = OutputSelection::kFinal;
    const double Lr = ref.smoothness().L;
    int bad = 0;
    // The bounds need ybar at each diagnostic round, so step the loop
    // manually instead of using run().
    SwarmState state = init_state(ref, cfg, mix);
    Eigen::MatrixXd X_end, Y_end;
    InnerTrace trace;
    for (int t = 0; t <= cfg.T; ++t) {
      if (t % cfg.diag_every == 0 || t == cfg.T) {
        const Eigen::VectorXd xbar = state.X.rowwise().mean();
        const Eigen::VectorXd ybar = state.Y.rowwise().mean();
        const double eps =
            (ybar - ref.best_response_y(xbar)).squaredNorm();
        const double gphi_sq =
            ref.primal_value_and_grad(xbar).second.squaredNorm();
        GradPair g = ref.mean_grad(xbar, ybar);
        if (g.gx.squaredNorm() >
            2.0 * Lr * Lr * eps + 2.0 * gphi_sq + 1e-12)
          ++bad;
        if (g.gy.squaredNorm() > Lr * Lr * eps + 1e-12) ++bad;
      }
      if (t == cfg.T) break;
      local_phase(state, ref, cfg, X_end, Y_end, trace);
      communication_phase(state, X_end, Y_end, cfg, mix);
    }
    out.require(bad == 0,
                std::to_string(bad) + " consensus-bound violations");
  }

  if (out.pass) out.detail = "all oracle and analysis inequalities hold";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Byte-identical determinism, including a parallel sweep.
Outcome criterion_determinism() {
  Outcome out;
  fs::path dir = fs::temp_directory_path() / "kgtmm_acceptance_determinism";
  fs::remove_all(dir);

  ConfigMap map = ConfigMap::parse(
      "problem.family = quadratic\n"
      "problem.n = 6\n"
      "problem.d_x = 3\n"
      "problem.d_y = 2\n"
      "problem.heterogeneity = 1\n"
      "problem.target_kappa = 3\n"
      "problem.sigma = 0.5\n"
      "problem.seed = 13\n"
      "topology.kind = ring\n"
      "run.T = 60\n"
      "run.K = 3\n"
      "run.step_mode = theorem\n"
      "run.seed = 99\n"
      "run.output_selection = final\n"
      "io.label = det\n");

  auto slurp = [](const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  map.set("io.out_dir", (dir / "a").string());
  ExperimentArtifacts first = run_experiment(ExperimentConfig::from_map(map));
  map.set("io.out_dir", (dir / "b").string());
  ExperimentArtifacts second = run_experiment(ExperimentConfig::from_map(map));
  out.require(slurp(first.trace_path) == slurp(second.trace_path),
              "single-run traces differ");

  map.set("sweep.axis", "seed");
  map.set("sweep.values", "[1, 2, 3, 4, 5, 6]");
  map.set("sweep.repeats", "1");
  map.set("io.out_dir", (dir / "s1").string());
  const std::string sweep1 = run_sweep(SweepSpec::from_map(map), 4);
  map.set("io.out_dir", (dir / "s2").string());
  const std::string sweep2 = run_sweep(SweepSpec::from_map(map), 4);
  out.require(slurp(sweep1) == slurp(sweep2), "sweep summaries differ");
  for (int seed = 1; seed <= 6; ++seed) {
    const std::string name =
        "det_" + std::to_string(seed) + "_r0_trace.csv";
    if (slurp(dir / "s1" / name) != slurp(dir / "s2" / name)) {
      out.require(false, "sweep trace " + name + " differs across --jobs 4 runs");
      break;
    }
  }
  fs::remove_all(dir);
  if (out.pass)
    out.detail = "single run and 6-point --jobs 4 sweep byte-identical";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..7>\n";
    return 64;
  }
  const int which = std::atoi(argv[1]);
  static const struct {
    const char* name;
    Outcome (*fn)();
  } criteria[] = {
      {"mixing certification", criterion_mixing},
      {"tracking zero-mean invariant", criterion_tracking_invariant},
      {"centralized reductions", criterion_reductions},
      {"heterogeneity robustness", criterion_heterogeneity},
      {"noise-scaling plateaus", criterion_noise_scaling},
      {"oracle and analysis inequalities", criterion_inequalities},
      {"byte-identical determinism", criterion_determinism},
  };
  if (which < 1 || which > 7) {
    std::cerr << "criterion out of range: " << which << "\n";
    return 64;
  }
  Outcome out;
  try {
    out = criteria[which - 1].fn();
  } catch (const std::exception& e) {
    out.pass = false;
    out.note(std::string("exception: ") + e.what());
  }
  std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << which
            << " (" << criteria[which - 1].name << ")"
            << (out.detail.empty() ? "" : ": " + out.detail) << "\n";
  return out.pass ? 0 : 1;
}
