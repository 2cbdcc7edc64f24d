#include "kgtmm/algorithm.hpp"

#include <cmath>
#include <sstream>

namespace kgtmm {

namespace {

void check_finite(const Eigen::MatrixXd& M, const char* what, int round) {
  if (!M.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at round " << round
        << " (step sizes too large?)";
    throw DivergenceError(msg.str(), round);
  }
}

}  // namespace

StepSizes theorem_stepsizes(const SmoothnessProfile& s, double p, int K,
                            double v, std::vector<std::string>* report) {
  if (p <= 0.0 || p > 1.0)
    throw ConfigError("theorem_stepsizes: need p in (0, 1]");
  if (K < 1) throw ConfigError("theorem_stepsizes: need K >= 1");
  if (v < 1.0) throw ConfigError("theorem_stepsizes: need v >= 1");

  StepSizes st;
  st.eta_c_y = p / (300.0 * v * s.kappa * K * s.L);
  st.eta_c_x = st.eta_c_y / (s.kappa * s.kappa);
  st.eta_s_x = v * p;
  st.eta_s_y = v * p;
  st.validate();

  const double L = s.L, kappa = s.kappa;
  const double ex = st.eta_x(), ey = st.eta_y();
  std::vector<std::string> hard;
  auto check = [&](bool ok, const std::string& desc, bool fatal) {
    if (ok) return;
    if (fatal)
      hard.push_back(desc);
    else if (report)
      report->push_back("violated: " + desc);
  };
  check(st.eta_c_x <= 1.0 / (8.0 * K * L) && st.eta_c_y <= 1.0 / (8.0 * K * L),
        "eta_c <= 1/(8KL) (local-drift bound)", true);
  const double mix_cap = std::sqrt(p) / (2.0 * std::sqrt(6.0) * K * L);
  check(ex <= mix_cap && ey <= mix_cap,
        "eta <= sqrt(p)/(2 sqrt(6) K L) (correction recursion)", true);
  check(ey <= 1.0 / (K * L), "eta_y <= 1/(KL) (consensus recursion)", true);
  check(ex <= 1.0 / (16.0 * K * L * kappa),
        "eta_x <= 1/(16 K L kappa) (descent bound)", true);
  // The schedule itself fixes eta_x = eta_y / kappa^2, which exceeds the
  // consensus-recursion ratio cap eta_y/(4 sqrt(6) kappa^2) by a constant
  // factor; reported, not fatal.
  check(ex <= ey / (4.0 * std::sqrt(6.0) * kappa * kappa),
        "eta_x <= eta_y/(4 sqrt(6) kappa^2) (consensus recursion ratio)",
        false);
  if (report) {
    for (const auto& h : hard) report->push_back("violated: " + h);
  }
  if (!hard.empty()) {
    std::string msg = "theorem_stepsizes: step-size bound violated:";
    for (const auto& h : hard) msg += " [" + h + "]";
    throw ConfigError(msg);
  }
  return st;
}

SwarmState init_state(const MinimaxProblem& problem, const RunConfig& config,
                      const MixingMatrix& mixing) {
  config.validate();
  const auto& dims = problem.dims();
  if (mixing.n() != dims.n)
    throw ContractError("init_state: mixing matrix size != client count");
  if (config.x0.size() != 0 && config.x0.size() != dims.d_x)
    throw ContractError("init_state: x0 dimension mismatch");
  if (config.y0.size() != 0 && config.y0.size() != dims.d_y)
    throw ContractError("init_state: y0 dimension mismatch");

  Eigen::VectorXd x0 = config.x0;
  Eigen::VectorXd y0 = config.y0;
  if (x0.size() == 0 || y0.size() == 0) {
    RngStream rng(config.master_seed, StreamPurpose::kInitPoint);
    if (x0.size() == 0) x0 = rng.normal_vector(dims.d_x);
    if (y0.size() == 0) y0 = rng.normal_vector(dims.d_y);
  }

  SwarmState state;
  state.round = 0;
  state.X = x0.replicate(1, dims.n);
  state.Y = y0.replicate(1, dims.n);

  // One shared stochastic draw per client feeds both the local term and its
  // contribution to the global average (a conceptual all-reduce at t = 0).
  Eigen::MatrixXd Gx(dims.d_x, dims.n), Gy(dims.d_y, dims.n);
  for (int i = 0; i < dims.n; ++i) {
    RngStream stream(config.master_seed, StreamPurpose::kInitCorrection, i);
    GradPair g = problem.stoch_grad(i, x0, y0, stream);
    Gx.col(i) = g.gx;
    Gy.col(i) = g.gy;
  }
  const Eigen::VectorXd gx_mean = Gx.rowwise().mean();
  const Eigen::VectorXd gy_mean = Gy.rowwise().mean();
  state.Cx = (-Gx).colwise() + gx_mean;
  state.Cy = (-Gy).colwise() + gy_mean;
  // Force the column mean to exact zero (it is zero up to rounding).
  state.Cx.colwise() -= Eigen::VectorXd(state.Cx.rowwise().mean());
  state.Cy.colwise() -= Eigen::VectorXd(state.Cy.rowwise().mean());
  return state;
}

void local_phase(const SwarmState& state, const MinimaxProblem& problem,
                 const RunConfig& config, Eigen::MatrixXd& X_end,
                 Eigen::MatrixXd& Y_end, InnerTrace& trace, bool tracking) {
  const auto& dims = problem.dims();
  const double ecx = config.steps.eta_c_x;
  const double ecy = config.steps.eta_c_y;
  X_end = state.X;
  Y_end = state.Y;
  trace.X_steps.clear();
  trace.Y_steps.clear();
  trace.X_steps.reserve(config.K);
  trace.Y_steps.reserve(config.K);
  for (int k = 0; k < config.K; ++k) {
    trace.X_steps.push_back(X_end);
    trace.Y_steps.push_back(Y_end);
    for (int i = 0; i < dims.n; ++i) {
      RngStream stream(config.master_seed, StreamPurpose::kLocalStep, i,
                       state.round, k);
      GradPair g = problem.stoch_grad(i, X_end.col(i), Y_end.col(i), stream);
      if (tracking) {
        X_end.col(i) -= ecx * (g.gx + state.Cx.col(i));
        Y_end.col(i) += ecy * (g.gy + state.Cy.col(i));
      } else {
        X_end.col(i) -= ecx * g.gx;
        Y_end.col(i) += ecy * g.gy;
      }
    }
    check_finite(X_end, "x iterate", state.round);
    check_finite(Y_end, "y iterate", state.round);
  }
}

void communication_phase(SwarmState& state, const Eigen::MatrixXd& X_end,
                         const Eigen::MatrixXd& Y_end, const RunConfig& config,
                         const MixingMatrix& mixing, bool tracking) {
  const Eigen::MatrixXd dX = X_end - state.X;
  const Eigen::MatrixXd dY = Y_end - state.Y;
  if (tracking) {
    // dM (I - W) has zero column mean, so the corrections keep theirs.
    state.Cx += (dX - dX * mixing.W) / (config.K * config.steps.eta_c_x);
    state.Cy -= (dY - dY * mixing.W) / (config.K * config.steps.eta_c_y);
  }
  state.X = (state.X + config.steps.eta_s_x * dX) * mixing.W;
  state.Y = (state.Y + config.steps.eta_s_y * dY) * mixing.W;
  check_finite(state.X, "x iterate after mixing", state.round);
  check_finite(state.Y, "y iterate after mixing", state.round);
  ++state.round;
}

namespace {

RunResult run_impl(const MinimaxProblem& problem, const MixingMatrix& mixing,
                   const RunConfig& config, bool tracking) {
  config.validate();
  SwarmState state = init_state(problem, config, mixing);
  if (!tracking) {
    state.Cx.setZero();
    state.Cy.setZero();
  }

  RunResult result;
  result.xbar_history.reserve(config.T + 1);
  result.xbar_history.push_back(state.X.rowwise().mean());

  Eigen::MatrixXd X_end, Y_end;
  InnerTrace trace;
  for (int t = 0; t < config.T; ++t) {
    local_phase(state, problem, config, X_end, Y_end, trace, tracking);
    if (t % config.diag_every == 0)
      result.trajectory.push_back(
          measure(state, &trace, problem, config, mixing.p));
    communication_phase(state, X_end, Y_end, config, mixing, tracking);
    result.xbar_history.push_back(state.X.rowwise().mean());
  }
  result.trajectory.push_back(measure(state, nullptr, problem, config,
                                      mixing.p));

  switch (config.output_selection) {
    case OutputSelection::kRandomizedTau: {
      RngStream rng(config.master_seed, StreamPurpose::kOutputSelection);
      result.tau = static_cast<int>(rng.uniform_index(config.T));
      break;
    }
    case OutputSelection::kFinal:
      result.tau = config.T;
      break;
    case OutputSelection::kBestGrad: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& rec : result.trajectory) {
        if (rec.grad_phi_sq < best) {
          best = rec.grad_phi_sq;
          result.tau = rec.t;
        }
      }
      break;
    }
  }
  result.x_out = result.xbar_history[result.tau];
  result.final_state = std::move(state);
  return result;
}

}  // namespace

RunResult run(const MinimaxProblem& problem, const MixingMatrix& mixing,
              const RunConfig& config) {
  return run_impl(problem, mixing, config, /*tracking=*/true);
}

RunResult run_local_sgda_baseline(const MinimaxProblem& problem,
                                  const MixingMatrix& mixing,
                                  const RunConfig& config) {
  return run_impl(problem, mixing, config, /*tracking=*/false);
}

RunResult run_centralized_gda_baseline(const MinimaxProblem& problem,
                                       const RunConfig& config) {
  config.validate();
  const auto& dims = problem.dims();
  Eigen::VectorXd x = config.x0;
  Eigen::VectorXd y = config.y0;
  if (x.size() == 0 || y.size() == 0) {
    RngStream rng(config.master_seed, StreamPurpose::kInitPoint);
    if (x.size() == 0) x = rng.normal_vector(dims.d_x);
    if (y.size() == 0) y = rng.normal_vector(dims.d_y);
  }
  const double ex = config.steps.eta_x();
  const double ey = config.steps.eta_y();

  RunResult result;
  result.xbar_history.reserve(config.T + 1);
  result.xbar_history.push_back(x);

  auto snapshot = [&](int round) {
    SwarmState s;
    s.round = round;
    s.X = x.replicate(1, dims.n);
    s.Y = y.replicate(1, dims.n);
    s.Cx = Eigen::MatrixXd::Zero(dims.d_x, dims.n);
    s.Cy = Eigen::MatrixXd::Zero(dims.d_y, dims.n);
    return s;
  };

  for (int t = 0; t < config.T; ++t) {
    if (t % config.diag_every == 0)
      result.trajectory.push_back(
          measure(snapshot(t), nullptr, problem, config, 1.0));
    for (int k = 0; k < config.K; ++k) {
      Eigen::VectorXd gx = Eigen::VectorXd::Zero(dims.d_x);
      Eigen::VectorXd gy = Eigen::VectorXd::Zero(dims.d_y);
      for (int i = 0; i < dims.n; ++i) {
        RngStream stream(config.master_seed, StreamPurpose::kCentralStep, i, t,
                         k);
        GradPair g = problem.stoch_grad(i, x, y, stream);
        gx += g.gx;
        gy += g.gy;
      }
      x -= ex * (gx / dims.n);
      y += ey * (gy / dims.n);
      check_finite(x, "x iterate", t);
      check_finite(y, "y iterate", t);
    }
    result.xbar_history.push_back(x);
  }
  result.trajectory.push_back(
      measure(snapshot(config.T), nullptr, problem, config, 1.0));

  switch (config.output_selection) {
    case OutputSelection::kRandomizedTau: {
      RngStream rng(config.master_seed, StreamPurpose::kOutputSelection);
      result.tau = static_cast<int>(rng.uniform_index(config.T));
      break;
    }
    case OutputSelection::kFinal:
      result.tau = config.T;
      break;
    case OutputSelection::kBestGrad: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& rec : result.trajectory) {
        if (rec.grad_phi_sq < best) {
          best = rec.grad_phi_sq;
          result.tau = rec.t;
        }
      }
      break;
    }
  }
  result.x_out = result.xbar_history[result.tau];
  result.final_state = snapshot(config.T);
  return result;
}

}  // namespace kgtmm
