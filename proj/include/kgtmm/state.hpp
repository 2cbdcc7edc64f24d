#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "kgtmm/errors.hpp"

namespace kgtmm {

// Local step sizes eta_c and communication step sizes eta_s. The effective
// products are always recomputed from the four primitives.
struct StepSizes {
  double eta_c_x = 0.0;
  double eta_c_y = 0.0;
  double eta_s_x = 0.0;
  double eta_s_y = 0.0;

  double eta_x() const { return eta_s_x * eta_c_x; }
  double eta_y() const { return eta_s_y * eta_c_y; }

  void validate() const {
    if (eta_c_x <= 0.0 || eta_c_y <= 0.0 || eta_s_x <= 0.0 || eta_s_y <= 0.0)
      throw ConfigError("step sizes must all be strictly positive");
  }
};

enum class OutputSelection { kRandomizedTau, kFinal, kBestGrad };

struct RunConfig {
  int T = 1;          // communication rounds
  int K = 1;          // local steps per round
  StepSizes steps;
  std::uint64_t master_seed = 0;
  int diag_every = 1;
  OutputSelection output_selection = OutputSelection::kRandomizedTau;

  // Optional explicit initial point; empty means drawn from master_seed.
  Eigen::VectorXd x0;
  Eigen::VectorXd y0;

  // Tolerance for diagnostic oracles (best response on non-closed-form
  // families).
  double oracle_tol = 1e-10;
  // Lyapunov diagnostic inputs; lyapunov is reported only when phi_star is
  // available.
  double lyapunov_v = 1.0;
  bool lyapunov_proof_constants = false;

  void validate() const {
    if (T < 1 || K < 1 || diag_every < 1)
      throw ConfigError("run config: need T >= 1, K >= 1, diag_every >= 1");
    steps.validate();
  }
};

// Per-client variables at a communication round boundary. Column i of each
// matrix belongs to client i.
struct SwarmState {
  int round = 0;
  Eigen::MatrixXd X;   // d_x x n
  Eigen::MatrixXd Y;   // d_y x n
  Eigen::MatrixXd Cx;  // d_x x n tracking corrections
  Eigen::MatrixXd Cy;  // d_y x n
};

// The K within-round iterate matrices (k = 0 is the round-start iterate),
// kept for drift diagnostics.
struct InnerTrace {
  std::vector<Eigen::MatrixXd> X_steps;
  std::vector<Eigen::MatrixXd> Y_steps;
};

}  // namespace kgtmm
