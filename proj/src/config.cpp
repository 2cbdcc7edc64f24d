#include "kgtmm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "kgtmm/errors.hpp"

namespace kgtmm {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    map.set(key, value);
  }
  return map;
}

ConfigMap ConfigMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string ConfigMap::require(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config field: " + key);
  return it->second;
}

std::string ConfigMap::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::require_double(const std::string& key) const {
  return parse_double(require(key), key);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

int ConfigMap::require_int(const std::string& key) const {
  const std::string v = require(key);
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config field " + key + ": not an integer: " + v);
  return out;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  return has(key) ? require_int(key) : fallback;
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = require(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config field " + key + ": not an unsigned integer: " + v);
  return out;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

std::string ConfigMap::serialize() const {
  std::ostringstream out;
  for (const auto& key : order_) out << key << " = " << values_.at(key) << "\n";
  return out.str();
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  double out = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size())
    throw ConfigError("config field " + field + ": not a number: " + t);
  return out;
}

std::string format_vector(const Eigen::VectorXd& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ",";
    out += "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
    out += "]";
  }
  return out + "]";
}

namespace {

std::vector<double> split_numbers(const std::string& body,
                                  const std::string& field) {
  std::vector<double> out;
  std::string token;
  for (char c : body + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!trim(token).empty()) out.push_back(parse_double(token, field));
      token.clear();
    } else {
      token += c;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd parse_vector(const std::string& text,
                             const std::string& field) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError("config field " + field + ": expected [v1,v2,...]");
  auto nums = split_numbers(t.substr(1, t.size() - 2), field);
  Eigen::VectorXd v(nums.size());
  for (size_t i = 0; i < nums.size(); ++i) v[i] = nums[i];
  return v;
}

Eigen::MatrixXd parse_matrix(const std::string& text,
                             const std::string& field) {
  std::string t = trim(text);
  if (t.size() < 4 || t.front() != '[' || t.back() != ']')
    throw ConfigError("config field " + field + ": expected [[...],[...]]");
  t = t.substr(1, t.size() - 2);
  std::vector<std::vector<double>> rows;
  size_t pos = 0;
  while (pos < t.size()) {
    size_t open = t.find('[', pos);
    if (open == std::string::npos) break;
    size_t close = t.find(']', open);
    if (close == std::string::npos)
      throw ConfigError("config field " + field + ": unbalanced brackets");
    rows.push_back(split_numbers(t.substr(open + 1, close - open - 1), field));
    pos = close + 1;
  }
  if (rows.empty())
    throw ConfigError("config field " + field + ": empty matrix");
  const size_t cols = rows[0].size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw ConfigError("config field " + field + ": ragged matrix rows");
    for (size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

ProblemFamily family_from_string(const std::string& s) {
  if (s == "quadratic") return ProblemFamily::kQuadratic;
  if (s == "regression") return ProblemFamily::kRegression;
  if (s == "explicit_quadratic") return ProblemFamily::kExplicitQuadratic;
  throw ConfigError("problem.family: unknown family: " + s);
}

std::string family_to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::kQuadratic: return "quadratic";
    case ProblemFamily::kRegression: return "regression";
    case ProblemFamily::kExplicitQuadratic: return "explicit_quadratic";
  }
  return "?";
}

OutputSelection output_from_string(const std::string& s) {
  if (s == "randomized_tau") return OutputSelection::kRandomizedTau;
  if (s == "final") return OutputSelection::kFinal;
  if (s == "best_grad") return OutputSelection::kBestGrad;
  throw ConfigError("run.output_selection: unknown mode: " + s);
}

std::string output_to_string(OutputSelection s) {
  switch (s) {
    case OutputSelection::kRandomizedTau: return "randomized_tau";
    case OutputSelection::kFinal: return "final";
    case OutputSelection::kBestGrad: return "best_grad";
  }
  return "?";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& map) {
  ExperimentConfig cfg;
  cfg.problem.family = family_from_string(map.get("problem.family", "quadratic"));
  cfg.problem.n = map.get_int("problem.n", 1);
  cfg.problem.d_x = map.get_int("problem.d_x", 1);
  cfg.problem.d_y = map.get_int("problem.d_y", 1);
  cfg.problem.heterogeneity = map.get_double("problem.heterogeneity", 0.0);
  cfg.problem.target_kappa = map.get_double("problem.target_kappa", 1.0);
  cfg.problem.mu = map.get_double("problem.mu", 1.0);
  cfg.problem.sigma = map.get_double("problem.sigma", 0.0);
  cfg.problem.seed = map.get_u64("problem.seed", 0);
  if (cfg.problem.family == ProblemFamily::kExplicitQuadratic) {
    for (int i = 0; i < cfg.problem.n; ++i) {
      const std::string base = "problem.client." + std::to_string(i) + ".";
      ProblemSpec::ExplicitClient c;
      c.A = parse_matrix(map.require(base + "A"), base + "A");
      c.B = parse_matrix(map.require(base + "B"), base + "B");
      c.C = parse_matrix(map.require(base + "C"), base + "C");
      c.a = parse_vector(map.require(base + "a"), base + "a");
      c.b = parse_vector(map.require(base + "b"), base + "b");
      cfg.problem.clients.push_back(std::move(c));
    }
  }

  cfg.topology.kind = map.get("topology.kind", "complete");
  cfg.topology.seed = map.get_u64("topology.seed", 0);
  cfg.topology.er_prob = map.get_double("topology.er_prob", 0.5);
  if (map.has("topology.W"))
    cfg.topology.explicit_W = parse_matrix(map.require("topology.W"),
                                           "topology.W");

  cfg.run.T = map.get_int("run.T", 1);
  cfg.run.K = map.get_int("run.K", 1);
  const std::string mode = map.get("run.step_mode", "theorem");
  if (mode == "theorem") {
    cfg.run.step_mode = StepMode::kTheorem;
    cfg.run.v = map.get_double("run.v", 1.0);
  } else if (mode == "manual") {
    cfg.run.step_mode = StepMode::kManual;
    cfg.run.manual_steps.eta_c_x = map.require_double("run.eta_c_x");
    cfg.run.manual_steps.eta_c_y = map.require_double("run.eta_c_y");
    cfg.run.manual_steps.eta_s_x = map.require_double("run.eta_s_x");
    cfg.run.manual_steps.eta_s_y = map.require_double("run.eta_s_y");
  } else {
    throw ConfigError("run.step_mode: expected theorem or manual, got " + mode);
  }
  cfg.run.master_seed = map.get_u64("run.seed", 0);
  cfg.run.diag_every = map.get_int("run.diag_every", 1);
  cfg.run.output_selection =
      output_from_string(map.get("run.output_selection", "randomized_tau"));
  if (map.has("run.x0"))
    cfg.run.x0 = parse_vector(map.require("run.x0"), "run.x0");
  if (map.has("run.y0"))
    cfg.run.y0 = parse_vector(map.require("run.y0"), "run.y0");

  cfg.io.out_dir = map.get("io.out_dir", ".");
  cfg.io.label = map.get("io.label", "run");
  cfg.validate();
  return cfg;
}

ConfigMap ExperimentConfig::to_map() const {
  ConfigMap map;
  map.set("problem.family", family_to_string(problem.family));
  map.set("problem.n", std::to_string(problem.n));
  map.set("problem.d_x", std::to_string(problem.d_x));
  map.set("problem.d_y", std::to_string(problem.d_y));
  map.set("problem.heterogeneity", format_double(problem.heterogeneity));
  map.set("problem.target_kappa", format_double(problem.target_kappa));
  map.set("problem.mu", format_double(problem.mu));
  map.set("problem.sigma", format_double(problem.sigma));
  map.set("problem.seed", std::to_string(problem.seed));
  for (size_t i = 0; i < problem.clients.size(); ++i) {
    const std::string base = "problem.client." + std::to_string(i) + ".";
    const auto& c = problem.clients[i];
    map.set(base + "A", format_matrix(c.A));
    map.set(base + "B", format_matrix(c.B));
    map.set(base + "C", format_matrix(c.C));
    map.set(base + "a", format_vector(c.a));
    map.set(base + "b", format_vector(c.b));
  }
  map.set("topology.kind", topology.kind);
  map.set("topology.seed", std::to_string(topology.seed));
  map.set("topology.er_prob", format_double(topology.er_prob));
  if (topology.explicit_W) map.set("topology.W", format_matrix(*topology.explicit_W));
  map.set("run.T", std::to_string(run.T));
  map.set("run.K", std::to_string(run.K));
  map.set("run.step_mode",
          run.step_mode == StepMode::kTheorem ? "theorem" : "manual");
  if (run.step_mode == StepMode::kTheorem) {
    map.set("run.v", format_double(run.v));
  } else {
    map.set("run.eta_c_x", format_double(run.manual_steps.eta_c_x));
    map.set("run.eta_c_y", format_double(run.manual_steps.eta_c_y));
    map.set("run.eta_s_x", format_double(run.manual_steps.eta_s_x));
    map.set("run.eta_s_y", format_double(run.manual_steps.eta_s_y));
  }
  map.set("run.seed", std::to_string(run.master_seed));
  map.set("run.diag_every", std::to_string(run.diag_every));
  map.set("run.output_selection", output_to_string(run.output_selection));
  if (run.x0.size()) map.set("run.x0", format_vector(run.x0));
  if (run.y0.size()) map.set("run.y0", format_vector(run.y0));
  map.set("io.out_dir", io.out_dir);
  map.set("io.label", io.label);
  return map;
}

void ExperimentConfig::validate() const {
  if (problem.n < 1 || problem.d_x < 1 || problem.d_y < 1)
    throw ConfigError("problem: n, d_x, d_y must be >= 1");
  if (problem.sigma < 0.0) throw ConfigError("problem.sigma must be >= 0");
  if (problem.heterogeneity < 0.0)
    throw ConfigError("problem.heterogeneity must be >= 0");
  if (problem.family == ProblemFamily::kQuadratic && problem.target_kappa < 1.0)
    throw ConfigError("problem.target_kappa must be >= 1");
  if (problem.family == ProblemFamily::kExplicitQuadratic &&
      static_cast<int>(problem.clients.size()) != problem.n)
    throw ConfigError("problem: explicit client count must equal problem.n");
  if (run.T < 1 || run.K < 1 || run.diag_every < 1)
    throw ConfigError("run: T, K, diag_every must be >= 1");
  if (run.step_mode == StepMode::kManual) run.manual_steps.validate();
  if (run.step_mode == StepMode::kTheorem && run.v < 1.0)
    throw ConfigError("run.v must be >= 1");
  if (topology.explicit_W && topology.explicit_W->rows() != problem.n)
    throw ConfigError("topology.W size must equal problem.n");
  if (io.label.empty()) throw ConfigError("io.label must be nonempty");
}

SweepSpec SweepSpec::from_map(const ConfigMap& map) {
  SweepSpec sweep;
  sweep.base = ExperimentConfig::from_map(map);
  const std::string axis = map.require("sweep.axis");
  if (axis == "n") sweep.axis = SweepAxis::kN;
  else if (axis == "K") sweep.axis = SweepAxis::kK;
  else if (axis == "sigma") sweep.axis = SweepAxis::kSigma;
  else if (axis == "topology") sweep.axis = SweepAxis::kTopology;
  else if (axis == "seed") sweep.axis = SweepAxis::kSeed;
  else throw ConfigError("sweep.axis: expected n|K|sigma|topology|seed");

  std::string values = map.require("sweep.values");
  if (!values.empty() && values.front() == '[') {
    if (values.back() != ']')
      throw ConfigError("sweep.values: unbalanced brackets");
    values = values.substr(1, values.size() - 2);
  }
  std::string token;
  for (char c : values + ",") {
    if (c == ',' || c == ' ') {
      token = trim(token);
      if (!token.empty()) sweep.values.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (sweep.values.empty()) throw ConfigError("sweep.values must be nonempty");
  sweep.repeats = map.get_int("sweep.repeats", 1);
  if (sweep.repeats < 1) throw ConfigError("sweep.repeats must be >= 1");
  return sweep;
}

}  // namespace kgtmm
