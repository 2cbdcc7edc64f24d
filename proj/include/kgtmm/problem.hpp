#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kgtmm/rng.hpp"

namespace kgtmm {

struct ProblemDims {
  int n = 1;    // client count
  int d_x = 1;  // primal dimension
  int d_y = 1;  // dual dimension
};

// Joint smoothness L and strong-concavity modulus mu; kappa = L/mu.
struct SmoothnessProfile {
  double L = 1.0;
  double mu = 1.0;
  double kappa = 1.0;
};

// f_i(x,y) = 1/2 x'Ax + x'By - 1/2 y'Cy + a'x + b'y.
// A symmetric (may be indefinite), C symmetric positive definite.
struct QuadraticClient {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

// Robust linear regression: f_i(x,y) = y'(Ax - b) - mu/2 ||y||^2.
// Bilinear coupling plus concave regularizer; exercises the iterative
// best-response path.
struct RegressionClient {
  Eigen::MatrixXd A;  // d_y x d_x
  Eigen::VectorXd b;  // d_y
  double mu = 1.0;
};

using Client = std::variant<QuadraticClient, RegressionClient>;

// Isotropic Gaussian noise per gradient block, scaled so that
// E||noise||^2 = sigma^2 per block.
struct NoiseModel {
  double sigma = 0.0;
};

struct GradPair {
  Eigen::VectorXd gx;
  Eigen::VectorXd gy;
};

class MinimaxProblem {
 public:
  MinimaxProblem(ProblemDims dims, SmoothnessProfile smoothness,
                 std::vector<Client> clients, NoiseModel noise);

  const ProblemDims& dims() const { return dims_; }
  const SmoothnessProfile& smoothness() const { return smoothness_; }
  const NoiseModel& noise() const { return noise_; }
  const std::vector<Client>& clients() const { return clients_; }
  bool quadratic() const;

  double value(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double mean_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  // Deterministic per-client gradients (closed form).
  GradPair grad(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  GradPair mean_grad(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  // grad plus zero-mean Gaussian noise with E||noise||^2 = sigma^2 per
  // block. With sigma = 0 this is bitwise identical to grad.
  GradPair stoch_grad(int i, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      RngStream& stream) const;

  // Inner maximizer yhat(x) of the averaged objective. Quadratics solve the
  // linear system Cbar yhat = Bbar'x + bbar; other families run gradient
  // ascent with step 1/L until ||grad_y f(x, yhat)|| <= tol (cap 1e6 steps).
  Eigen::VectorXd best_response_y(const Eigen::VectorXd& x,
                                  double tol = 1e-10) const;
  // The iterative path regardless of family; used as a cross-check.
  Eigen::VectorXd best_response_y_iterative(const Eigen::VectorXd& x,
                                            double tol) const;

  // Danskin: Phi(x) = f(x, yhat(x)), grad Phi(x) = grad_x f(x, yhat(x)).
  std::pair<double, Eigen::VectorXd> primal_value_and_grad(
      const Eigen::VectorXd& x, double tol = 1e-10) const;

  // Stationary point of Phi for the quadratic family (Schur-complement
  // solve); nullopt for other families.
  std::optional<Eigen::VectorXd> saddle_x() const;
  // Phi(x*) when the Schur complement is positive definite (x* is then the
  // unique minimizer of Phi).
  std::optional<double> phi_star() const;

  // Mean quadratic data, valid only when quadratic().
  const Eigen::MatrixXd& mean_A() const { return A_bar_; }
  const Eigen::MatrixXd& mean_B() const { return B_bar_; }
  const Eigen::MatrixXd& mean_C() const { return C_bar_; }
  const Eigen::VectorXd& mean_a() const { return a_bar_; }
  const Eigen::VectorXd& mean_b() const { return b_bar_; }

 private:
  void check_dims(int i, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y) const;

  ProblemDims dims_;
  SmoothnessProfile smoothness_;
  std::vector<Client> clients_;
  NoiseModel noise_;
  Eigen::MatrixXd A_bar_, B_bar_, C_bar_;
  Eigen::VectorXd a_bar_, b_bar_;
};

// Spectral norm of the full Hessian of client i (the tight joint-smoothness
// constant for quadratic/bilinear families).
double client_hessian_norm(const Client& client);

// Recomputes (L, mu, kappa) from the client data.
SmoothnessProfile certify_smoothness(const std::vector<Client>& clients);

// Generates n quadratic clients. Per-client deviations from the shared base
// matrices have zero mean across clients and magnitude `heterogeneity`, so
// the averaged problem is independent of the heterogeneity level.
// The y-curvature scale is tuned by bisection until L/mu lands within 5% of
// target_kappa. Deterministic in seed.
MinimaxProblem make_quadratic_suite(ProblemDims dims, double heterogeneity,
                                    double target_kappa, std::uint64_t seed,
                                    double sigma = 0.0);

// Synthetic robust-regression suite (bilinear + concave regularizer).
MinimaxProblem make_regression_suite(ProblemDims dims, double heterogeneity,
                                     std::uint64_t seed, double mu = 1.0,
                                     double sigma = 0.0);

}  // namespace kgtmm
