#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgtmm/state.hpp"

namespace kgtmm {

// Flat key-value config text: one `section.key = value` per line, `#`
// comments, UTF-8. Matrices are row-major nested arrays: [[1,2],[3,4]].
class ConfigMap {
 public:
  static ConfigMap parse(const std::string& text);
  static ConfigMap load(const std::string& path);

  bool has(const std::string& key) const;
  const std::vector<std::string>& keys() const { return order_; }

  std::string require(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  int require_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  void set(const std::string& key, const std::string& value);
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& field);

std::string format_vector(const Eigen::VectorXd& v);
std::string format_matrix(const Eigen::MatrixXd& m);
Eigen::VectorXd parse_vector(const std::string& text, const std::string& field);
Eigen::MatrixXd parse_matrix(const std::string& text, const std::string& field);

enum class ProblemFamily { kQuadratic, kRegression, kExplicitQuadratic };
enum class StepMode { kTheorem, kManual };

struct ProblemSpec {
  ProblemFamily family = ProblemFamily::kQuadratic;
  int n = 1;
  int d_x = 1;
  int d_y = 1;
  double heterogeneity = 0.0;
  double target_kappa = 1.0;
  double mu = 1.0;  // regression family
  double sigma = 0.0;
  std::uint64_t seed = 0;
  // Explicit quadratic clients (family == kExplicitQuadratic).
  struct ExplicitClient {
    Eigen::MatrixXd A, B, C;
    Eigen::VectorXd a, b;
  };
  std::vector<ExplicitClient> clients;
};

struct TopologySpec {
  std::string kind = "complete";
  std::uint64_t seed = 0;
  double er_prob = 0.5;
  std::optional<Eigen::MatrixXd> explicit_W;
};

struct RunSpec {
  int T = 1;
  int K = 1;
  StepMode step_mode = StepMode::kTheorem;
  double v = 1.0;
  StepSizes manual_steps;
  std::uint64_t master_seed = 0;
  int diag_every = 1;
  OutputSelection output_selection = OutputSelection::kRandomizedTau;
  Eigen::VectorXd x0;  // optional, empty = seeded draw
  Eigen::VectorXd y0;
};

struct IoSpec {
  std::string out_dir = ".";
  std::string label = "run";
};

struct ExperimentConfig {
  ProblemSpec problem;
  TopologySpec topology;
  RunSpec run;
  IoSpec io;

  static ExperimentConfig from_map(const ConfigMap& map);
  ConfigMap to_map() const;
  void validate() const;
};

enum class SweepAxis { kN, kK, kSigma, kTopology, kSeed };

struct SweepSpec {
  ExperimentConfig base;
  SweepAxis axis = SweepAxis::kSeed;
  std::vector<std::string> values;  // parsed per-axis
  int repeats = 1;

  static SweepSpec from_map(const ConfigMap& map);
};

}  // namespace kgtmm
