#include "kgtmm/problem.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "kgtmm/errors.hpp"

namespace kgtmm {

namespace {

double sym_spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd full_hessian(const QuadraticClient& c) {
  const auto dx = c.A.rows();
  const auto dy = c.C.rows();
  Eigen::MatrixXd H(dx + dy, dx + dy);
  H.topLeftCorner(dx, dx) = c.A;
  H.topRightCorner(dx, dy) = c.B;
  H.bottomLeftCorner(dy, dx) = c.B.transpose();
  H.bottomRightCorner(dy, dy) = -c.C;
  return H;
}

Eigen::MatrixXd full_hessian(const RegressionClient& c) {
  const auto dy = c.A.rows();
  const auto dx = c.A.cols();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  H.topRightCorner(dx, dy) = c.A.transpose();
  H.bottomLeftCorner(dy, dx) = c.A;
  H.bottomRightCorner(dy, dy) = -c.mu * Eigen::MatrixXd::Identity(dy, dy);
  return H;
}

}  // namespace

double client_hessian_norm(const Client& client) {
  return std::visit(
      [](const auto& c) { return sym_spectral_norm(full_hessian(c)); }, client);
}

SmoothnessProfile certify_smoothness(const std::vector<Client>& clients) {
  SmoothnessProfile s;
  s.L = 0.0;
  s.mu = std::numeric_limits<double>::infinity();
  for (const auto& client : clients) {
    s.L = std::max(s.L, client_hessian_norm(client));
    if (const auto* q = std::get_if<QuadraticClient>(&client))
      s.mu = std::min(s.mu, min_eigenvalue(q->C));
    else
      s.mu = std::min(s.mu, std::get<RegressionClient>(client).mu);
  }
  s.kappa = s.L / s.mu;
  return s;
}

MinimaxProblem::MinimaxProblem(ProblemDims dims, SmoothnessProfile smoothness,
                               std::vector<Client> clients, NoiseModel noise)
    : dims_(dims),
      smoothness_(smoothness),
      clients_(std::move(clients)),
      noise_(noise) {
  if (dims_.n < 1 || dims_.d_x < 1 || dims_.d_y < 1)
    throw ConfigError("problem: dims must be positive");
  if (static_cast<int>(clients_.size()) != dims_.n)
    throw ContractError("problem: client count does not match dims.n");
  if (noise_.sigma < 0.0) throw ConfigError("problem: sigma must be >= 0");
  if (smoothness_.L < smoothness_.mu || smoothness_.mu <= 0.0)
    throw ConfigError("problem: need L >= mu > 0");
  if (std::abs(smoothness_.kappa - smoothness_.L / smoothness_.mu) >
      1e-12 * smoothness_.kappa)
    throw ConfigError("problem: stored kappa inconsistent with L/mu");

  for (const auto& client : clients_) {
    if (const auto* q = std::get_if<QuadraticClient>(&client)) {
      if (q->A.rows() != dims_.d_x || q->C.rows() != dims_.d_y ||
          q->B.rows() != dims_.d_x || q->B.cols() != dims_.d_y)
        throw ContractError("problem: client matrix dims mismatch");
      const double scale = std::max(1.0, q->C.cwiseAbs().maxCoeff());
      if ((q->C - q->C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ConfigError("problem: C_i must be symmetric");
      if (min_eigenvalue(q->C) < smoothness_.mu * (1.0 - 1e-9) - 1e-12)
        throw ConfigError("problem: C_i violates the strong-concavity modulus");
    }
    if (client_hessian_norm(client) > smoothness_.L * (1.0 + 1e-9) + 1e-12)
      throw ConfigError("problem: client Hessian norm exceeds L");
  }

  if (quadratic()) {
    A_bar_ = Eigen::MatrixXd::Zero(dims_.d_x, dims_.d_x);
    B_bar_ = Eigen::MatrixXd::Zero(dims_.d_x, dims_.d_y);
    C_bar_ = Eigen::MatrixXd::Zero(dims_.d_y, dims_.d_y);
    a_bar_ = Eigen::VectorXd::Zero(dims_.d_x);
    b_bar_ = Eigen::VectorXd::Zero(dims_.d_y);
    for (const auto& client : clients_) {
      const auto& q = std::get<QuadraticClient>(client);
      A_bar_ += q.A;
      B_bar_ += q.B;
      C_bar_ += q.C;
      a_bar_ += q.a;
      b_bar_ += q.b;
    }
    const double inv_n = 1.0 / dims_.n;
    A_bar_ *= inv_n;
    B_bar_ *= inv_n;
    C_bar_ *= inv_n;
    a_bar_ *= inv_n;
    b_bar_ *= inv_n;
  }
}

bool MinimaxProblem::quadratic() const {
  return std::holds_alternative<QuadraticClient>(clients_.front());
}

void MinimaxProblem::check_dims(int i, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y) const {
  if (i < 0 || i >= dims_.n) throw ContractError("client index out of range");
  if (x.size() != dims_.d_x || y.size() != dims_.d_y)
    throw ContractError("gradient query: vector dims mismatch");
}

double MinimaxProblem::value(int i, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y) const {
  check_dims(i, x, y);
  if (const auto* q = std::get_if<QuadraticClient>(&clients_[i])) {
    return 0.5 * x.dot(q->A * x) + x.dot(q->B * y) - 0.5 * y.dot(q->C * y) +
           q->a.dot(x) + q->b.dot(y);
  }
  const auto& r = std::get<RegressionClient>(clients_[i]);
  return y.dot(r.A * x - r.b) - 0.5 * r.mu * y.squaredNorm();
}

double MinimaxProblem::mean_value(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) const {
  double v = 0.0;
  for (int i = 0; i < dims_.n; ++i) v += value(i, x, y);
  return v / dims_.n;
}

GradPair MinimaxProblem::grad(int i, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y) const {
  check_dims(i, x, y);
  GradPair g;
  if (const auto* q = std::get_if<QuadraticClient>(&clients_[i])) {
    g.gx = q->A * x + q->B * y + q->a;
    g.gy = q->B.transpose() * x - q->C * y + q->b;
  } else {
    const auto& r = std::get<RegressionClient>(clients_[i]);
    g.gx = r.A.transpose() * y;
    g.gy = r.A * x - r.b - r.mu * y;
  }
  return g;
}

GradPair MinimaxProblem::mean_grad(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y) const {
  GradPair acc;
  acc.gx = Eigen::VectorXd::Zero(dims_.d_x);
  acc.gy = Eigen::VectorXd::Zero(dims_.d_y);
  for (int i = 0; i < dims_.n; ++i) {
    GradPair g = grad(i, x, y);
    acc.gx += g.gx;
    acc.gy += g.gy;
  }
  acc.gx /= dims_.n;
  acc.gy /= dims_.n;
  return acc;
}

GradPair MinimaxProblem::stoch_grad(int i, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y,
                                    RngStream& stream) const {
  GradPair g = grad(i, x, y);
  const double sigma = noise_.sigma;
  if (sigma == 0.0) return g;
  g.gx += (sigma / std::sqrt(static_cast<double>(dims_.d_x))) *
          stream.normal_vector(dims_.d_x);
  g.gy += (sigma / std::sqrt(static_cast<double>(dims_.d_y))) *
          stream.normal_vector(dims_.d_y);
  return g;
}

Eigen::VectorXd MinimaxProblem::best_response_y(const Eigen::VectorXd& x,
                                                double tol) const {
  if (quadratic()) {
    // Cbar is SPD (min eigenvalue >= mu), so LLT applies.
    return C_bar_.llt().solve(B_bar_.transpose() * x + b_bar_);
  }
  return best_response_y_iterative(x, tol);
}

Eigen::VectorXd MinimaxProblem::best_response_y_iterative(
    const Eigen::VectorXd& x, double tol) const {
  if (tol <= 0.0) throw ContractError("best_response_y: tol must be > 0");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dims_.d_y);
  const double step = 1.0 / smoothness_.L;
  double residual = std::numeric_limits<double>::infinity();
  for (long iter = 0; iter < 1000000; ++iter) {
    Eigen::VectorXd gy = mean_grad(x, y).gy;
    residual = gy.norm();
    if (residual <= tol) return y;
    y += step * gy;
  }
  throw ConvergenceError("best_response_y: iteration cap reached", residual);
}

std::pair<double, Eigen::VectorXd> MinimaxProblem::primal_value_and_grad(
    const Eigen::VectorXd& x, double tol) const {
  Eigen::VectorXd yhat = best_response_y(x, tol);
  return {mean_value(x, yhat), mean_grad(x, yhat).gx};
}

std::optional<Eigen::VectorXd> MinimaxProblem::saddle_x() const {
  if (!quadratic()) return std::nullopt;
  const Eigen::MatrixXd Cinv_Bt = C_bar_.llt().solve(B_bar_.transpose());
  const Eigen::MatrixXd S = A_bar_ + B_bar_ * Cinv_Bt;
  const Eigen::VectorXd rhs = -(a_bar_ + B_bar_ * C_bar_.llt().solve(b_bar_));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) return std::nullopt;
  return lu.solve(rhs);
}

std::optional<double> MinimaxProblem::phi_star() const {
  if (!quadratic()) return std::nullopt;
  const Eigen::MatrixXd Cinv_Bt = C_bar_.llt().solve(B_bar_.transpose());
  const Eigen::MatrixXd S = A_bar_ + B_bar_ * Cinv_Bt;
  if (min_eigenvalue(0.5 * (S + S.transpose())) <= 0.0) return std::nullopt;
  auto xs = saddle_x();
  if (!xs) return std::nullopt;
  return primal_value_and_grad(*xs).first;
}

namespace {

// Zero-sum collection of random symmetric perturbations, scaled so the
// largest spectral norm equals `magnitude`.
std::vector<Eigen::MatrixXd> zero_sum_symmetric(RngStream& rng, int n, int d,
                                                double magnitude) {
  std::vector<Eigen::MatrixXd> out(n);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd g = rng.normal_matrix(d, d);
    out[i] = 0.5 * (g + g.transpose());
    mean += out[i];
  }
  mean /= n;
  double max_norm = 0.0;
  for (auto& m : out) {
    m -= mean;
    max_norm = std::max(max_norm, sym_spectral_norm(m));
  }
  if (magnitude == 0.0 || max_norm == 0.0) {
    for (auto& m : out) m.setZero();
  } else {
    for (auto& m : out) m *= magnitude / max_norm;
  }
  return out;
}

std::vector<Eigen::MatrixXd> zero_sum_general(RngStream& rng, int n, int rows,
                                              int cols, double magnitude) {
  std::vector<Eigen::MatrixXd> out(n);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < n; ++i) {
    out[i] = rng.normal_matrix(rows, cols);
    mean += out[i];
  }
  mean /= n;
  double max_norm = 0.0;
  for (auto& m : out) {
    m -= mean;
    max_norm = std::max(max_norm, m.norm());
  }
  if (magnitude == 0.0 || max_norm == 0.0) {
    for (auto& m : out) m.setZero();
  } else {
    for (auto& m : out) m *= magnitude / max_norm;
  }
  return out;
}

}  // namespace

MinimaxProblem make_quadratic_suite(ProblemDims dims, double heterogeneity,
                                    double target_kappa, std::uint64_t seed,
                                    double sigma) {
  if (target_kappa < 1.0)
    throw ConfigError("make_quadratic_suite: target_kappa must be >= 1");
  if (heterogeneity < 0.0)
    throw ConfigError("make_quadratic_suite: heterogeneity must be >= 0");
  const int n = dims.n, dx = dims.d_x, dy = dims.d_y;

  RngStream rng(seed, StreamPurpose::kProblemGen);

  // Shared base data. A_base is symmetric with eigenvalues in [0.2, 1], so
  // the mean primal curvature (Schur complement) is positive definite and
  // the saddle is the unique stationary point of Phi. Per-client deviations
  // may make individual A_i indefinite.
  Eigen::MatrixXd G = rng.normal_matrix(dx, dx);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd spec(dx);
  for (int i = 0; i < dx; ++i) spec[i] = 0.2 + 0.8 * rng.uniform();
  Eigen::MatrixXd A_base = Q * spec.asDiagonal() * Q.transpose();
  A_base = 0.5 * (A_base + A_base.transpose());

  Eigen::MatrixXd B_base =
      rng.normal_matrix(dx, dy) * (0.5 / std::sqrt(static_cast<double>(dx)));
  Eigen::VectorXd a_base = 0.5 * rng.normal_vector(dx);
  Eigen::VectorXd b_base = 0.5 * rng.normal_vector(dy);

  auto dA = zero_sum_symmetric(rng, n, dx, heterogeneity);
  auto dB = zero_sum_general(rng, n, dx, dy, heterogeneity);
  auto da = zero_sum_general(rng, n, dx, 1, heterogeneity);
  auto db = zero_sum_general(rng, n, dy, 1, heterogeneity);
  // C_i stays SPD: the relative perturbation is capped below 0.2.
  const double c_rel = 0.2 * heterogeneity / (1.0 + heterogeneity);
  auto dC = zero_sum_symmetric(rng, n, dy, c_rel);

  auto build = [&](double c_scale) {
    std::vector<Client> clients;
    clients.reserve(n);
    for (int i = 0; i < n; ++i) {
      QuadraticClient q;
      q.A = A_base + dA[i];
      q.B = B_base + dB[i];
      q.C = c_scale * (Eigen::MatrixXd::Identity(dy, dy) + dC[i]);
      q.a = a_base + da[i].col(0);
      q.b = b_base + db[i].col(0);
      clients.emplace_back(std::move(q));
    }
    return clients;
  };

  // kappa(c) = L(c)/mu(c) is decreasing in the y-curvature scale c, down to
  // a floor set by the relative spread of the C_i. Bisect in log space.
  auto kappa_of = [&](double c) {
    return certify_smoothness(build(c)).kappa;
  };
  double lo = 1e-8, hi = 1e8;
  if (kappa_of(hi) > target_kappa * 1.05 || kappa_of(lo) < target_kappa * 0.95)
    throw ConfigError(
        "make_quadratic_suite: target_kappa infeasible for these dims");
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (kappa_of(mid) > target_kappa)
      lo = mid;
    else
      hi = mid;
  }
  const double c_scale = std::sqrt(lo * hi);

  std::vector<Client> clients = build(c_scale);
  SmoothnessProfile s = certify_smoothness(clients);
  if (std::abs(s.kappa - target_kappa) > 0.05 * target_kappa)
    throw ConfigError("make_quadratic_suite: could not certify target_kappa");
  return MinimaxProblem(dims, s, std::move(clients), NoiseModel{sigma});
}

MinimaxProblem make_regression_suite(ProblemDims dims, double heterogeneity,
                                     std::uint64_t seed, double mu,
                                     double sigma) {
  if (mu <= 0.0) throw ConfigError("make_regression_suite: mu must be > 0");
  if (heterogeneity < 0.0)
    throw ConfigError("make_regression_suite: heterogeneity must be >= 0");
  const int n = dims.n, dx = dims.d_x, dy = dims.d_y;
  RngStream rng(seed, StreamPurpose::kProblemGen, /*client=*/1);

  Eigen::MatrixXd A_base =
      rng.normal_matrix(dy, dx) / std::sqrt(static_cast<double>(dx));
  Eigen::VectorXd x_true = rng.normal_vector(dx);
  auto dA = zero_sum_general(rng, n, dy, dx, heterogeneity);
  auto db = zero_sum_general(rng, n, dy, 1, heterogeneity);

  std::vector<Client> clients;
  clients.reserve(n);
  for (int i = 0; i < n; ++i) {
    RegressionClient r;
    r.A = A_base + dA[i];
    r.b = r.A * x_true + db[i].col(0);
    r.mu = mu;
    clients.emplace_back(std::move(r));
  }
  SmoothnessProfile s = certify_smoothness(clients);
  return MinimaxProblem(dims, s, std::move(clients), NoiseModel{sigma});
}

}  // namespace kgtmm
