#pragma once

#include <string>
#include <vector>

#include "kgtmm/diagnostics.hpp"
#include "kgtmm/problem.hpp"
#include "kgtmm/state.hpp"
#include "kgtmm/topology.hpp"

namespace kgtmm {

struct RunResult {
  Eigen::VectorXd x_out;
  int tau = 0;
  std::vector<DiagnosticsRecord> trajectory;
  SwarmState final_state;
  // xbar at every round boundary 0..T; needed for randomized output
  // selection and the comparison harness.
  std::vector<Eigen::VectorXd> xbar_history;
};

// Theorem step-size schedule: eta_c_y = p/(300 v kappa K L),
// eta_c_x = eta_c_y / kappa^2, eta_s_x = eta_s_y = v p. Downstream
// step-size preconditions of the analysis are checked; hard violations
// throw, the remainder are appended to `report` when given.
StepSizes theorem_stepsizes(const SmoothnessProfile& smoothness, double p,
                            int K, double v,
                            std::vector<std::string>* report = nullptr);

// Shared initial point broadcast to all clients; corrections start at the
// negative (stochastic) gradient plus its network average, one shared draw
// per client, so their column mean is zero from round 0 on.
SwarmState init_state(const MinimaxProblem& problem, const RunConfig& config,
                      const MixingMatrix& mixing);

// K local GDA steps per client; x descends, y ascends, both blocks of a
// step share one stochastic sample. Returns the advanced iterates and the
// per-step trace.
void local_phase(const SwarmState& state, const MinimaxProblem& problem,
                 const RunConfig& config, Eigen::MatrixXd& X_end,
                 Eigen::MatrixXd& Y_end, InnerTrace& trace,
                 bool tracking = true);

// Tracking update with (I - W) on the local progress, then gossip of the
// advanced iterates. Advances state.round.
void communication_phase(SwarmState& state, const Eigen::MatrixXd& X_end,
                         const Eigen::MatrixXd& Y_end, const RunConfig& config,
                         const MixingMatrix& mixing, bool tracking = true);

RunResult run(const MinimaxProblem& problem, const MixingMatrix& mixing,
              const RunConfig& config);

// Same loop with corrections pinned to zero (no tracking): the local-SGDA
// baseline used for the heterogeneity-robustness regression.
RunResult run_local_sgda_baseline(const MinimaxProblem& problem,
                                  const MixingMatrix& mixing,
                                  const RunConfig& config);

// Plain (stochastic) GDA on the averaged objective with the effective step
// sizes per iteration; oracle for the n = 1 and full-mixing reductions.
RunResult run_centralized_gda_baseline(const MinimaxProblem& problem,
                                       const RunConfig& config);

}  // namespace kgtmm
