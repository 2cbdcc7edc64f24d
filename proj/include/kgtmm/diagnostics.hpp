#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>

#include "kgtmm/problem.hpp"
#include "kgtmm/state.hpp"

namespace kgtmm {

// One round's measured analysis quantities. Expectations in the defining
// formulas are reported as single-run realizations; multi-seed averaging is
// the harness's job.
struct DiagnosticsRecord {
  int t = 0;
  double grad_phi_sq = 0.0;   // ||grad Phi(xbar)||^2
  double xi_x = 0.0;          // client variance, x block
  double xi_y = 0.0;
  double drift_x = 0.0;       // client drift accumulated over local steps
  double drift_y = 0.0;
  double gamma_x = 0.0;       // quality of correction
  double gamma_y = 0.0;
  double eps_consensus = 0.0;  // ||ybar - yhat(xbar)||^2
  std::optional<double> lyapunov;
  std::optional<double> phi_gap;  // Phi(xbar) - Phi*, when Phi* is known
};

struct LyapunovConstants {
  double v = 1.0;
  double A_x = 0.0;
  double A_y = 0.0;
  double B_x = 0.0;
  double B_y = 0.0;
  double C = 1.0 / 24.0;

  // Defaults from the Lyapunov recursion statement: A = (108 v^3 + 54 v)/p,
  // B = 6 v / p, C = 1/24. The proof-variant flag swaps in
  // A = (72 v^3 + 24 v)/p.
  static LyapunovConstants defaults(double v, double p,
                                    bool proof_variant = false);
};

// Xi_t: mean squared deviation of client columns from their average.
std::pair<double, double> client_variance(const SwarmState& state);

// E_t: sum over local steps k of the mean squared deviation of the step-k
// iterates from the round-start average.
std::pair<double, double> client_drift(const InnerTrace& trace,
                                       const SwarmState& round_start);

// gamma_t = 1/(n L^2) ||C + G(I - J)||_F^2 where column i of G is the
// deterministic client gradient at the averaged point.
std::pair<double, double> correction_quality(const SwarmState& state,
                                             const MinimaxProblem& problem);

// eps_t = ||ybar - yhat(xbar)||^2.
double consensus_distance_y(const SwarmState& state,
                            const MinimaxProblem& problem, double tol = 1e-10);

// ||grad Phi(xbar)||^2 through the primal oracle.
double stationarity(const SwarmState& state, const MinimaxProblem& problem,
                    double tol = 1e-10);

// The Lyapunov combination; requires phi_gap (Phi(xbar) - Phi*).
double lyapunov(const DiagnosticsRecord& record, double phi_gap,
                const LyapunovConstants& constants, const StepSizes& steps,
                const MinimaxProblem& problem, int K, double p);

// Fills a full record for the given round-boundary state. inner_trace may be
// null (round 0): drifts are then reported as zero.
DiagnosticsRecord measure(const SwarmState& state, const InnerTrace* trace,
                          const MinimaxProblem& problem,
                          const RunConfig& config, double p);

}  // namespace kgtmm
