#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgtmm/algorithm.hpp"
#include "kgtmm/harness.hpp"

namespace py = pybind11;
using namespace kgtmm;

namespace {

OutputSelection output_from_name(const std::string& name) {
  if (name == "randomized_tau") return OutputSelection::kRandomizedTau;
  if (name == "final") return OutputSelection::kFinal;
  if (name == "best_grad") return OutputSelection::kBestGrad;
  throw ConfigError("unknown output selection: " + name);
}

RunConfig make_run_config(int T, int K, const StepSizes& steps,
                          std::uint64_t seed, int diag_every,
                          const std::string& output_selection,
                          const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& y0) {
  RunConfig rc;
  rc.T = T;
  rc.K = K;
  rc.steps = steps;
  rc.master_seed = seed;
  rc.diag_every = diag_every;
  rc.output_selection = output_from_name(output_selection);
  rc.x0 = x0;
  rc.y0 = y0;
  return rc;
}

}  // namespace

PYBIND11_MODULE(_kgtmm, m) {
  m.doc() = "Decentralized K-GT minimax optimization simulator";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DivergenceError>(m, "DivergenceError");
  py::register_exception<ConvergenceError>(m, "ConvergenceError");

  py::class_<ProblemDims>(m, "ProblemDims")
      .def(py::init<int, int, int>(), py::arg("n"), py::arg("d_x"),
           py::arg("d_y"))
      .def_readonly("n", &ProblemDims::n)
      .def_readonly("d_x", &ProblemDims::d_x)
      .def_readonly("d_y", &ProblemDims::d_y);

  py::class_<SmoothnessProfile>(m, "SmoothnessProfile")
      .def_readonly("L", &SmoothnessProfile::L)
      .def_readonly("mu", &SmoothnessProfile::mu)
      .def_readonly("kappa", &SmoothnessProfile::kappa);

  py::class_<MinimaxProblem>(m, "MinimaxProblem")
      .def_property_readonly("dims", &MinimaxProblem::dims)
      .def_property_readonly("smoothness", &MinimaxProblem::smoothness)
      .def("value", &MinimaxProblem::value)
      .def("grad",
           [](const MinimaxProblem& p, int i, const Eigen::VectorXd& x,
              const Eigen::VectorXd& y) {
             GradPair g = p.grad(i, x, y);
             return py::make_tuple(g.gx, g.gy);
           })
      .def("stoch_grad",
           [](const MinimaxProblem& p, int i, const Eigen::VectorXd& x,
              const Eigen::VectorXd& y, std::uint64_t seed,
              std::uint64_t draw) {
             RngStream stream(seed, StreamPurpose::kTest, i, draw);
             GradPair g = p.stoch_grad(i, x, y, stream);
             return py::make_tuple(g.gx, g.gy);
           },
           py::arg("i"), py::arg("x"), py::arg("y"), py::arg("seed"),
           py::arg("draw") = 0)
      .def("best_response_y", &MinimaxProblem::best_response_y, py::arg("x"),
           py::arg("tol") = 1e-10)
      .def("primal_value_and_grad", &MinimaxProblem::primal_value_and_grad,
           py::arg("x"), py::arg("tol") = 1e-10)
      .def("saddle_x", &MinimaxProblem::saddle_x)
      .def("phi_star", &MinimaxProblem::phi_star);

  m.def("make_quadratic_suite",
        [](int n, int d_x, int d_y, double heterogeneity, double target_kappa,
           std::uint64_t seed, double sigma) {
          return make_quadratic_suite(ProblemDims{n, d_x, d_y}, heterogeneity,
                                      target_kappa, seed, sigma);
        },
        py::arg("n"), py::arg("d_x"), py::arg("d_y"), py::arg("heterogeneity"),
        py::arg("target_kappa"), py::arg("seed"), py::arg("sigma") = 0.0);
  m.def("make_regression_suite",
        [](int n, int d_x, int d_y, double heterogeneity, std::uint64_t seed,
           double mu, double sigma) {
          return make_regression_suite(ProblemDims{n, d_x, d_y}, heterogeneity,
                                       seed, mu, sigma);
        },
        py::arg("n"), py::arg("d_x"), py::arg("d_y"), py::arg("heterogeneity"),
        py::arg("seed"), py::arg("mu") = 1.0, py::arg("sigma") = 0.0);

  py::class_<MixingMatrix>(m, "MixingMatrix")
      .def_readonly("W", &MixingMatrix::W)
      .def_readonly("p", &MixingMatrix::p);

  m.def("build_mixing",
        [](const std::string& kind, int n, std::uint64_t seed,
           double er_prob) {
          return metropolis_weights(
              build_graph(graph_kind_from_string(kind), n, seed, er_prob));
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 0,
        py::arg("er_prob") = 0.5);
  m.def("spectral_gap", &spectral_gap, py::arg("W"));
  m.def("mixing_from_matrix", &mixing_from_matrix, py::arg("W"));

  py::class_<StepSizes>(m, "StepSizes")
      .def(py::init([](double eta_c_x, double eta_c_y, double eta_s_x,
                       double eta_s_y) {
             StepSizes s{eta_c_x, eta_c_y, eta_s_x, eta_s_y};
             s.validate();
             return s;
           }),
           py::arg("eta_c_x"), py::arg("eta_c_y"), py::arg("eta_s_x"),
           py::arg("eta_s_y"))
      .def_readonly("eta_c_x", &StepSizes::eta_c_x)
      .def_readonly("eta_c_y", &StepSizes::eta_c_y)
      .def_readonly("eta_s_x", &StepSizes::eta_s_x)
      .def_readonly("eta_s_y", &StepSizes::eta_s_y)
      .def_property_readonly("eta_x", &StepSizes::eta_x)
      .def_property_readonly("eta_y", &StepSizes::eta_y);

  m.def("theorem_stepsizes",
        [](const MinimaxProblem& problem, double p, int K, double v) {
          return theorem_stepsizes(problem.smoothness(), p, K, v);
        },
        py::arg("problem"), py::arg("p"), py::arg("K"), py::arg("v") = 1.0);

  py::class_<DiagnosticsRecord>(m, "DiagnosticsRecord")
      .def_readonly("t", &DiagnosticsRecord::t)
      .def_readonly("grad_phi_sq", &DiagnosticsRecord::grad_phi_sq)
      .def_readonly("xi_x", &DiagnosticsRecord::xi_x)
      .def_readonly("xi_y", &DiagnosticsRecord::xi_y)
      .def_readonly("drift_x", &DiagnosticsRecord::drift_x)
      .def_readonly("drift_y", &DiagnosticsRecord::drift_y)
      .def_readonly("gamma_x", &DiagnosticsRecord::gamma_x)
      .def_readonly("gamma_y", &DiagnosticsRecord::gamma_y)
      .def_readonly("eps_consensus", &DiagnosticsRecord::eps_consensus)
      .def_readonly("lyapunov", &DiagnosticsRecord::lyapunov)
      .def_readonly("phi_gap", &DiagnosticsRecord::phi_gap);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("x_out", &RunResult::x_out)
      .def_readonly("tau", &RunResult::tau)
      .def_readonly("trajectory", &RunResult::trajectory)
      .def_readonly("xbar_history", &RunResult::xbar_history);

  const auto empty = Eigen::VectorXd();
  m.def("run",
        [empty](const MinimaxProblem& problem, const MixingMatrix& mixing,
                int T, int K, const StepSizes& steps, std::uint64_t seed,
                int diag_every, const std::string& output_selection,
                const Eigen::VectorXd& x0, const Eigen::VectorXd& y0) {
          return run(problem, mixing,
                     make_run_config(T, K, steps, seed, diag_every,
                                     output_selection, x0, y0));
        },
        py::arg("problem"), py::arg("mixing"), py::arg("T"), py::arg("K"),
        py::arg("steps"), py::arg("seed") = 0, py::arg("diag_every") = 1,
        py::arg("output_selection") = "randomized_tau", py::arg("x0") = empty,
        py::arg("y0") = empty);
  m.def("run_local_sgda_baseline",
        [empty](const MinimaxProblem& problem, const MixingMatrix& mixing,
                int T, int K, const StepSizes& steps, std::uint64_t seed,
                int diag_every, const std::string& output_selection,
                const Eigen::VectorXd& x0, const Eigen::VectorXd& y0) {
          return run_local_sgda_baseline(
              problem, mixing,
              make_run_config(T, K, steps, seed, diag_every, output_selection,
                              x0, y0));
        },
        py::arg("problem"), py::arg("mixing"), py::arg("T"), py::arg("K"),
        py::arg("steps"), py::arg("seed") = 0, py::arg("diag_every") = 1,
        py::arg("output_selection") = "randomized_tau", py::arg("x0") = empty,
        py::arg("y0") = empty);
  m.def("run_centralized_gda_baseline",
        [empty](const MinimaxProblem& problem, int T, int K,
                const StepSizes& steps, std::uint64_t seed, int diag_every,
                const std::string& output_selection, const Eigen::VectorXd& x0,
                const Eigen::VectorXd& y0) {
          return run_centralized_gda_baseline(
              problem, make_run_config(T, K, steps, seed, diag_every,
                                       output_selection, x0, y0));
        },
        py::arg("problem"), py::arg("T"), py::arg("K"), py::arg("steps"),
        py::arg("seed") = 0, py::arg("diag_every") = 1,
        py::arg("output_selection") = "randomized_tau", py::arg("x0") = empty,
        py::arg("y0") = empty);
}
