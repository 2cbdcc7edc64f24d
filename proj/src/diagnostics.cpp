#include "kgtmm/diagnostics.hpp"

#include <cmath>

#include "kgtmm/errors.hpp"

namespace kgtmm {

LyapunovConstants LyapunovConstants::defaults(double v, double p,
                                              bool proof_variant) {
  LyapunovConstants c;
  c.v = v;
  const double a = proof_variant ? (72.0 * v * v * v + 24.0 * v)
                                 : (108.0 * v * v * v + 54.0 * v);
  c.A_x = c.A_y = a / p;
  c.B_x = c.B_y = 6.0 * v / p;
  c.C = 1.0 / 24.0;
  return c;
}

std::pair<double, double> client_variance(const SwarmState& state) {
  const auto n = state.X.cols();
  const Eigen::VectorXd xbar = state.X.rowwise().mean();
  const Eigen::VectorXd ybar = state.Y.rowwise().mean();
  const double xi_x = (state.X.colwise() - xbar).squaredNorm() / n;
  const double xi_y = (state.Y.colwise() - ybar).squaredNorm() / n;
  return {xi_x, xi_y};
}

std::pair<double, double> client_drift(const InnerTrace& trace,
                                       const SwarmState& round_start) {
  const auto n = round_start.X.cols();
  if (trace.X_steps.size() != trace.Y_steps.size() || trace.X_steps.empty())
    throw ContractError("client_drift: malformed inner trace");
  const Eigen::VectorXd xbar = round_start.X.rowwise().mean();
  const Eigen::VectorXd ybar = round_start.Y.rowwise().mean();
  double drift_x = 0.0, drift_y = 0.0;
  for (const auto& Xk : trace.X_steps)
    drift_x += (Xk.colwise() - xbar).squaredNorm() / n;
  for (const auto& Yk : trace.Y_steps)
    drift_y += (Yk.colwise() - ybar).squaredNorm() / n;
  return {drift_x, drift_y};
}

std::pair<double, double> correction_quality(const SwarmState& state,
                                             const MinimaxProblem& problem) {
  const int n = problem.dims().n;
  const double L = problem.smoothness().L;
  const Eigen::VectorXd xbar = state.X.rowwise().mean();
  const Eigen::VectorXd ybar = state.Y.rowwise().mean();
  Eigen::MatrixXd Gx(problem.dims().d_x, n);
  Eigen::MatrixXd Gy(problem.dims().d_y, n);
  for (int i = 0; i < n; ++i) {
    GradPair g = problem.grad(i, xbar, ybar);
    Gx.col(i) = g.gx;
    Gy.col(i) = g.gy;
  }
  const Eigen::VectorXd gx_mean = Gx.rowwise().mean();
  const Eigen::VectorXd gy_mean = Gy.rowwise().mean();
  const double norm = 1.0 / (n * L * L);
  const double gamma_x =
      norm * (state.Cx + (Gx.colwise() - gx_mean)).squaredNorm();
  const double gamma_y =
      norm * (state.Cy + (Gy.colwise() - gy_mean)).squaredNorm();
  return {gamma_x, gamma_y};
}

double consensus_distance_y(const SwarmState& state,
                            const MinimaxProblem& problem, double tol) {
  const Eigen::VectorXd xbar = state.X.rowwise().mean();
  const Eigen::VectorXd ybar = state.Y.rowwise().mean();
  return (ybar - problem.best_response_y(xbar, tol)).squaredNorm();
}

double stationarity(const SwarmState& state, const MinimaxProblem& problem,
                    double tol) {
  const Eigen::VectorXd xbar = state.X.rowwise().mean();
  return problem.primal_value_and_grad(xbar, tol).second.squaredNorm();
}

double lyapunov(const DiagnosticsRecord& record, double phi_gap,
                const LyapunovConstants& c, const StepSizes& steps,
                const MinimaxProblem& problem, int K, double p) {
  const double L = problem.smoothness().L;
  const double kappa = problem.smoothness().kappa;
  const double ecy = steps.eta_c_y;
  return phi_gap + c.B_x * ecy * L * record.xi_x +
         c.B_y * ecy * L * record.xi_y +
         c.A_x * K * K * L * L * L * ecy * ecy * ecy * record.gamma_x +
         c.A_y * K * K * L * L * L * ecy * ecy * ecy * record.gamma_y +
         c.C * record.eps_consensus / (K * kappa * p);
}

DiagnosticsRecord measure(const SwarmState& state, const InnerTrace* trace,
                          const MinimaxProblem& problem,
                          const RunConfig& config, double p) {
  DiagnosticsRecord rec;
  rec.t = state.round;
  std::tie(rec.xi_x, rec.xi_y) = client_variance(state);
  if (trace) std::tie(rec.drift_x, rec.drift_y) = client_drift(*trace, state);
  std::tie(rec.gamma_x, rec.gamma_y) = correction_quality(state, problem);
  rec.eps_consensus = consensus_distance_y(state, problem, config.oracle_tol);
  const Eigen::VectorXd xbar = state.X.rowwise().mean();
  auto [phi, gphi] = problem.primal_value_and_grad(xbar, config.oracle_tol);
  rec.grad_phi_sq = gphi.squaredNorm();
  if (auto phi_star = problem.phi_star()) {
    rec.phi_gap = phi - *phi_star;
    LyapunovConstants lc = LyapunovConstants::defaults(
        config.lyapunov_v, p, config.lyapunov_proof_constants);
    rec.lyapunov =
        lyapunov(rec, *rec.phi_gap, lc, config.steps, problem, config.K, p);
  }
  return rec;
}

}  // namespace kgtmm
