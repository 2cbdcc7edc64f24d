#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kgtmm/algorithm.hpp"
#include "kgtmm/diagnostics.hpp"
#include "kgtmm/errors.hpp"

using namespace kgtmm;

namespace {

Eigen::VectorXd scalar(double v) {
  Eigen::VectorXd out(1);
  out[0] = v;
  return out;
}

MinimaxProblem toy_problem() {
  QuadraticClient q;
  q.A = scalar(-1.0).asDiagonal();
  q.B = scalar(2.0).asDiagonal();
  q.C = scalar(2.0).asDiagonal();
  q.a = scalar(0.0);
  q.b = scalar(0.0);
  std::vector<Client> clients{q};
  return MinimaxProblem({1, 1, 1}, certify_smoothness(clients), clients,
                        NoiseModel{});
}

// Two scalar clients with constant x gradients (1, 3); L = mu = 1.
MinimaxProblem constant_grad_problem() {
  std::vector<Client> clients;
  for (double ai : {1.0, 3.0}) {
    QuadraticClient q;
    q.A = scalar(0.0).asDiagonal();
    q.B = scalar(0.0).asDiagonal();
    q.C = scalar(1.0).asDiagonal();
    q.a = scalar(ai);
    q.b = scalar(0.0);
    clients.emplace_back(std::move(q));
  }
  return MinimaxProblem({2, 1, 1}, certify_smoothness(clients), clients,
                        NoiseModel{});
}

SwarmState two_client_state(double x0, double x1, double y0, double y1) {
  SwarmState s;
  s.X = (Eigen::MatrixXd(1, 2) << x0, x1).finished();
  s.Y = (Eigen::MatrixXd(1, 2) << y0, y1).finished();
  s.Cx = Eigen::MatrixXd::Zero(1, 2);
  s.Cy = Eigen::MatrixXd::Zero(1, 2);
  return s;
}

}  // namespace

TEST_CASE("client variance of a hand-built state") {
  SwarmState s = two_client_state(1.0, 3.0, -1.0, -1.0);
  auto [xi_x, xi_y] = client_variance(s);
  CHECK(xi_x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(xi_y == doctest::Approx(0.0));
}

TEST_CASE("client variance is zero at consensus") {
  SwarmState s = two_client_state(2.5, 2.5, 0.5, 0.5);
  auto [xi_x, xi_y] = client_variance(s);
  CHECK(xi_x == 0.0);
  CHECK(xi_y == 0.0);
}

TEST_CASE("drift with a single recorded step equals the client variance") {
  SwarmState s = two_client_state(1.0, 3.0, 0.0, 2.0);
  InnerTrace trace;
  trace.X_steps = {s.X};
  trace.Y_steps = {s.Y};
  auto [dx, dy] = client_drift(trace, s);
  CHECK(dx == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dy == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("frozen iterates accumulate K copies of the client variance") {
  SwarmState s = two_client_state(1.0, 3.0, 0.0, 0.0);
  InnerTrace trace;
  for (int k = 0; k < 4; ++k) {
    trace.X_steps.push_back(s.X);
    trace.Y_steps.push_back(s.Y);
  }
  auto [dx, dy] = client_drift(trace, s);
  CHECK(dx == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(dy == 0.0);
}

TEST_CASE("drift of a single wandering client, by hand") {
  SwarmState s;
  s.X = (Eigen::MatrixXd(1, 1) << 0.0).finished();
  s.Y = (Eigen::MatrixXd(1, 1) << 0.0).finished();
  s.Cx = s.Cy = Eigen::MatrixXd::Zero(1, 1);
  InnerTrace trace;
  trace.X_steps = {(Eigen::MatrixXd(1, 1) << 0.0).finished(),
                   (Eigen::MatrixXd(1, 1) << 0.1).finished()};
  trace.Y_steps = {(Eigen::MatrixXd(1, 1) << 0.0).finished(),
                   (Eigen::MatrixXd(1, 1) << 0.0).finished()};
  auto [dx, dy] = client_drift(trace, s);
  CHECK(dx == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(dy == 0.0);
  InnerTrace empty;
  CHECK_THROWS_AS(client_drift(empty, s), ContractError);
}

TEST_CASE("correction quality of uncorrected heterogeneous gradients") {
  MinimaxProblem p = constant_grad_problem();
  SwarmState s = two_client_state(0.0, 0.0, 0.0, 0.0);
  auto [gx, gy] = correction_quality(s, p);
  // Gradient spread is (-1, +1) around the mean, corrections zero, L = 1:
  // gamma_x = (1 + 1)/2 = 1; the y gradients agree, so gamma_y = 0.
  CHECK(gx == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gy == doctest::Approx(0.0));
}

TEST_CASE("ideal corrections zero the correction-quality measure") {
  MinimaxProblem p = constant_grad_problem();
  SwarmState s = two_client_state(0.3, 0.3, -0.2, -0.2);
  // c_i = -(grad_i - mean grad) at the averaged point.
  s.Cx(0, 0) = 1.0;
  s.Cx(0, 1) = -1.0;
  auto [gx, gy] = correction_quality(s, p);
  CHECK(gx < 1e-28);
  CHECK(gy < 1e-28);
}

TEST_CASE("dual consensus distance against the toy best response") {
  MinimaxProblem p = toy_problem();
  SwarmState at_best = two_client_state(0, 0, 0, 0);
  at_best.X = (Eigen::MatrixXd(1, 1) << 1.0).finished();
  at_best.Y = (Eigen::MatrixXd(1, 1) << 1.0).finished();
  at_best.Cx = at_best.Cy = Eigen::MatrixXd::Zero(1, 1);
  CHECK(consensus_distance_y(at_best, p) < 1e-24);
  at_best.Y(0, 0) = 0.0;  // yhat(1) = 1, so the gap is 1.
  CHECK(consensus_distance_y(at_best, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stationarity(at_best, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lyapunov constants and the weighted combination") {
  LyapunovConstants c = LyapunovConstants::defaults(1.0, 1.0);
  CHECK(c.A_x == doctest::Approx(162.0).epsilon(1e-15));
  CHECK(c.B_x == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(c.C == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  LyapunovConstants proof = LyapunovConstants::defaults(1.0, 1.0, true);
  CHECK(proof.A_x == doctest::Approx(96.0).epsilon(1e-15));
  LyapunovConstants halved = LyapunovConstants::defaults(1.0, 0.5);
  CHECK(halved.A_x == doctest::Approx(324.0).epsilon(1e-15));

  // At a consensus saddle every term vanishes, so H equals the primal gap.
  MinimaxProblem p = toy_problem();
  DiagnosticsRecord rec;
  StepSizes steps{0.01, 0.01, 1.0, 1.0};
  CHECK(lyapunov(rec, 0.0, c, steps, p, 2, 1.0) == 0.0);
  CHECK(lyapunov(rec, 0.7, c, steps, p, 2, 1.0) ==
        doctest::Approx(0.7).epsilon(1e-15));

  // Each diagnostic enters with its stated weight.
  rec.xi_x = 2.0;
  const double L = p.smoothness().L;
  CHECK(lyapunov(rec, 0.0, c, steps, p, 2, 1.0) ==
        doctest::Approx(c.B_x * steps.eta_c_y * L * 2.0).epsilon(1e-13));
  rec.xi_x = 0.0;
  rec.eps_consensus = 3.0;
  const double kappa = p.smoothness().kappa;
  CHECK(lyapunov(rec, 0.0, c, steps, p, 2, 0.5) ==
        doctest::Approx(c.C * 3.0 / (2 * kappa * 0.5)).epsilon(1e-13));
}

TEST_CASE("measure assembles a full record and is nonnegative everywhere") {
  MinimaxProblem p = make_quadratic_suite({4, 3, 2}, 1.0, 3.0, 17, 0.5);
  MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kRing, 4, 0));
  RunConfig cfg;
  cfg.T = 12;
  cfg.K = 3;
  cfg.steps = StepSizes{0.01, 0.01, 0.5, 0.5};
  cfg.master_seed = 3;
  cfg.output_selection = OutputSelection::kFinal;
  RunResult res = run(p, mix, cfg);
  REQUIRE(res.trajectory.size() == 13);
  for (const auto& rec : res.trajectory) {
    CHECK(std::isfinite(rec.grad_phi_sq));
    CHECK(rec.grad_phi_sq >= 0.0);
    CHECK(rec.xi_x >= 0.0);
    CHECK(rec.xi_y >= 0.0);
    CHECK(rec.drift_x >= 0.0);
    CHECK(rec.drift_y >= 0.0);
    CHECK(rec.gamma_x >= 0.0);
    CHECK(rec.gamma_y >= 0.0);
    CHECK(rec.eps_consensus >= 0.0);
    // The within-round drift can only exceed the round-start variance.
    if (rec.t < 12) {
      CHECK(rec.drift_x >= rec.xi_x - 1e-15);
      CHECK(rec.drift_y >= rec.xi_y - 1e-15);
    }
    REQUIRE(rec.phi_gap.has_value());
    REQUIRE(rec.lyapunov.has_value());
    // H dominates the primal gap: all other terms are nonnegative.
    CHECK(*rec.lyapunov >= *rec.phi_gap - 1e-15);
  }
  // Round 0 starts from a broadcast point: no client variance yet.
  CHECK(res.trajectory[0].xi_x == 0.0);
  CHECK(res.trajectory[0].xi_y == 0.0);
  // The closing boundary has no inner trace; drift is reported as zero.
  CHECK(res.trajectory.back().drift_x == 0.0);
  CHECK(res.trajectory.back().t == 12);
}

TEST_CASE("measure omits the lyapunov and gap for non-quadratic families") {
  MinimaxProblem p = make_regression_suite({3, 2, 2}, 0.5, 23);
  MixingMatrix mix = metropolis_weights(build_graph(GraphKind::kComplete, 3, 0));
  RunConfig cfg;
  cfg.T = 2;
  cfg.K = 1;
  cfg.steps = StepSizes{0.01, 0.01, 0.5, 0.5};
  cfg.output_selection = OutputSelection::kFinal;
  RunResult res = run(p, mix, cfg);
  for (const auto& rec : res.trajectory) {
    CHECK(!rec.phi_gap.has_value());
    CHECK(!rec.lyapunov.has_value());
    CHECK(std::isfinite(rec.grad_phi_sq));
  }
}
