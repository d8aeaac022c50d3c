#include "coopreg/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "coopreg/error.hpp"

namespace coopreg {

using nlohmann::json;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::kInvalidInput, std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kInvalidInput, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

json controller_to_json(const ControllerConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  if (c.mode == ControlMode::kContinuous) {
    j["L"] = matrix_to_json(c.gain);
  } else {
    j["K"] = matrix_to_json(c.gain);
    j["T"] = c.period;
    j["trigger"] = trigger_to_json(c.trigger);
  }
  return j;
}

ControllerConfig controller_from_json(const json& j) {
  ControllerConfig c;
  const std::string mode = field(j, "mode").get<std::string>();
  if (mode == "continuous") {
    c.mode = ControlMode::kContinuous;
    c.gain = matrix_from_json(field(j, "L"), "L");
  } else if (mode == "periodic_event") {
    c.mode = ControlMode::kPeriodicEvent;
    c.gain = matrix_from_json(field(j, "K"), "K");
    c.period = number(j, "T");
    c.trigger = j.contains("trigger") ? trigger_from_json(j.at("trigger"))
                                      : TriggerFunction::every_step();
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown controller mode '" + mode + "'");
  }
  return c;
}

}  // namespace

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " must be an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " has a non-numeric entry");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::kInvalidInput, std::string(what) + " has a non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json trigger_to_json(const TriggerFunction& f) {
  json j;
  j["kind"] = to_string(f.kind());
  if (f.kind() != TriggerKind::kEveryStep) {
    j["sigma"] = f.sigma();
    j["alpha"] = f.alpha();
  }
  return j;
}

TriggerFunction trigger_from_json(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  const auto k = trigger_kind_from_string(kind.c_str());
  if (!k) throw Error(ErrorCode::kInvalidInput, "unknown trigger kind '" + kind + "'");
  switch (*k) {
    case TriggerKind::kEveryStep:
      return TriggerFunction::every_step();
    case TriggerKind::kExponential:
      return TriggerFunction::exponential(number(j, "sigma"), number(j, "alpha"));
    case TriggerKind::kRational:
      return TriggerFunction::rational(number(j, "sigma"), number(j, "alpha"));
    case TriggerKind::kLogExp:
      return TriggerFunction::log_exp(number(j, "sigma"), number(j, "alpha"));
  }
  return TriggerFunction::every_step();
}

std::vector<Vector> Scenario::initial_estimates() const {
  if (!eta0.empty()) return eta0;
  return std::vector<Vector>(static_cast<std::size_t>(follower_count), Vector::Zero(s.rows()));
}

void Scenario::validate() const {
  (void)graph();
  require_square(s, "S");
  require_finite(s, "S");
  if (s.rows() == 0) throw Error(ErrorCode::kInvalidInput, "S must be non-empty");
  if (v0.size() != s.rows()) throw Error(ErrorCode::kDimensionMismatch, "v0 must match S");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::kInvalidInput, "h must be positive");
  if (mu && (!(*mu > 0.0) || !std::isfinite(*mu))) {
    throw Error(ErrorCode::kInvalidInput, "mu must be positive");
  }
  if (!eta0.empty()) {
    if (static_cast<int>(eta0.size()) != follower_count) {
      throw Error(ErrorCode::kDimensionMismatch, "eta0 needs one vector per follower");
    }
    for (const auto& e : eta0) {
      if (e.size() != s.rows()) throw Error(ErrorCode::kDimensionMismatch, "eta0 entries must match S");
    }
  }
  if (observer_triggers.size() != 1 &&
      static_cast<int>(observer_triggers.size()) != follower_count) {
    throw Error(ErrorCode::kDimensionMismatch, "need one observer trigger or one per follower");
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kInvalidInput, "horizon must be non-negative");
  }
  if (output_stride < 1) throw Error(ErrorCode::kInvalidInput, "output_stride must be >= 1");
  if (!followers.empty()) {
    if (static_cast<int>(followers.size()) != follower_count) {
      throw Error(ErrorCode::kDimensionMismatch, "need a model for every follower");
    }
    for (const auto& f : followers) {
      f.model.validate(dim());
      if (f.x0.size() != f.model.a.rows()) {
        throw Error(ErrorCode::kDimensionMismatch, "x0 must match A");
      }
      validate_controller(f.model, f.controller);
    }
  }
}

double resolve_gain(const Scenario& sc) {
  const Digraph g = sc.graph();
  if (!check_spanning_tree(g).has_root_spanning_tree) {
    throw Error(ErrorCode::kAssumptionViolated,
                "the leader does not root a spanning tree of the digraph");
  }
  if (sc.mu) return *sc.mu;
  const FeasibilityReport r = feasibility(make_observer_system(sc.s, g), sc.h);
  if (!r.feasible || !r.suggested_mu) {
    throw Error(ErrorCode::kInfeasibleDesign,
                "no observer gain stabilizes the sampled error dynamics at h = " +
                    std::to_string(sc.h));
  }
  return *r.suggested_mu;
}

json to_json(const Scenario& sc) {
  json j;
  j["schema"] = kScenarioSchema;
  j["name"] = sc.name;
  json edges = json::array();
  for (const auto& [from, to] : sc.edges) edges.push_back({from, to});
  j["graph"] = {{"followers", sc.follower_count}, {"edges", edges}};
  j["leader"] = {{"S", matrix_to_json(sc.s)}, {"v0", vector_to_json(sc.v0)}};
  json obs;
  obs["h"] = sc.h;
  if (sc.mu) {
    obs["mu"] = *sc.mu;
  } else {
    obs["mu"] = "auto";
  }
  if (!sc.eta0.empty()) {
    json e = json::array();
    for (const auto& v : sc.eta0) e.push_back(vector_to_json(v));
    obs["eta0"] = e;
  }
  if (sc.observer_triggers.size() == 1) {
    obs["trigger"] = trigger_to_json(sc.observer_triggers.front());
  } else {
    json t = json::array();
    for (const auto& f : sc.observer_triggers) t.push_back(trigger_to_json(f));
    obs["trigger"] = t;
  }
  j["observer"] = obs;
  if (!sc.followers.empty()) {
    json fs = json::array();
    for (const auto& f : sc.followers) {
      fs.push_back({{"A", matrix_to_json(f.model.a)},
                    {"B", matrix_to_json(f.model.b)},
                    {"C", matrix_to_json(f.model.c)},
                    {"D", matrix_to_json(f.model.d)},
                    {"P", matrix_to_json(f.model.p)},
                    {"F", matrix_to_json(f.model.f)},
                    {"x0", vector_to_json(f.x0)},
                    {"controller", controller_to_json(f.controller)}});
    }
    j["followers"] = fs;
  }
  j["horizon"] = sc.horizon;
  j["output_stride"] = sc.output_stride;
  j["thresholds"] = {{"eps_conv", sc.eps_conv}, {"eps_reg", sc.eps_reg}};
  return j;
}

Scenario scenario_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::kInvalidInput, "scenario must be a JSON object");
    const std::string schema = j.value("schema", std::string(kScenarioSchema));
    if (schema != kScenarioSchema) {
      throw Error(ErrorCode::kInvalidInput, "unsupported scenario schema '" + schema + "'");
    }
    Scenario sc;
    sc.name = j.value("name", std::string());
    const json& g = field(j, "graph");
    sc.follower_count = field(g, "followers").get<int>();
    for (const auto& e : field(g, "edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorCode::kInvalidInput, "edges must be [from, to] pairs");
      }
      sc.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    const json& leader = field(j, "leader");
    sc.s = matrix_from_json(field(leader, "S"), "S");
    sc.v0 = vector_from_json(field(leader, "v0"), "v0");
    const int n = sc.dim();

    const json& obs = field(j, "observer");
    sc.h = number(obs, "h");
    const json& mu = field(obs, "mu");
    if (mu.is_string()) {
      if (mu.get<std::string>() != "auto") {
        throw Error(ErrorCode::kInvalidInput, "mu must be a number or \"auto\"");
      }
    } else {
      sc.mu = mu.get<double>();
    }
    if (obs.contains("eta0")) {
      for (const auto& e : obs.at("eta0")) sc.eta0.push_back(vector_from_json(e, "eta0"));
    }
    if (obs.contains("trigger")) {
      const json& t = obs.at("trigger");
      sc.observer_triggers.clear();
      if (t.is_array()) {
        for (const auto& f : t) sc.observer_triggers.push_back(trigger_from_json(f));
      } else {
        sc.observer_triggers.push_back(trigger_from_json(t));
      }
    }

    if (j.contains("followers")) {
      for (const auto& f : j.at("followers")) {
        FollowerSpec spec;
        spec.model.a = matrix_from_json(field(f, "A"), "A");
        spec.model.b = matrix_from_json(field(f, "B"), "B");
        spec.model.c = matrix_from_json(field(f, "C"), "C");
        const auto ni = spec.model.a.rows();
        const auto mi = spec.model.b.cols();
        const auto li = spec.model.c.rows();
        spec.model.d = f.contains("D") ? matrix_from_json(f.at("D"), "D") : Matrix::Zero(li, mi);
        spec.model.p = f.contains("P") ? matrix_from_json(f.at("P"), "P") : Matrix::Zero(ni, n);
        spec.model.f = f.contains("F") ? matrix_from_json(f.at("F"), "F") : Matrix::Zero(li, n);
        spec.x0 = f.contains("x0") ? vector_from_json(f.at("x0"), "x0") : Vector::Zero(ni);
        spec.controller = controller_from_json(field(f, "controller"));
        sc.followers.push_back(std::move(spec));
      }
    }
    sc.horizon = number(j, "horizon");
    sc.output_stride = j.value("output_stride", 1L);
    if (j.contains("thresholds")) {
      const json& t = j.at("thresholds");
      sc.eps_conv = t.value("eps_conv", sc.eps_conv);
      sc.eps_reg = t.value("eps_reg", sc.eps_reg);
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, path + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << to_json(sc).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

BoundAnalysis analyze_bounds(const Scenario& sc, long k_cap) {
  sc.validate();
  const double mu = resolve_gain(sc);

  const TriggerFunction& first = sc.observer_triggers.front();
  auto env = first.envelope();
  if (!env) {
    throw Error(ErrorCode::kUnsupportedEnvelope,
                std::string("inter-event bounds need exponential triggers, got ") +
                    to_string(first.kind()));
  }
  for (const auto& f : sc.observer_triggers) {
    const auto e = f.envelope();
    if (!e || e->alpha != env->alpha) {
      throw Error(ErrorCode::kUnsupportedEnvelope,
                  "inter-event bounds need exponential triggers with a common alpha");
    }
    env->sigma_min = std::min(env->sigma_min, e->sigma_min);
    env->sigma_max = std::max(env->sigma_max, e->sigma_max);
  }

  const Matrix h_matrix = build_laplacian_and_h(sc.graph()).h;
  ErrorDynamics dyn = build_error_dynamics(sc.s, h_matrix, mu, sc.h);
  const ContractionEstimate c = contraction(dyn.f, k_cap);

  const auto estimates = sc.initial_estimates();
  double err2 = 0.0;
  for (const auto& e : estimates) err2 += (e - sc.v0).squaredNorm();

  BoundInputs in = make_bound_inputs(sc.s, h_matrix, mu, sc.h, first, std::sqrt(err2), c, dyn.g);
  in.envelope = *env;
  return BoundAnalysis{mu, std::move(dyn), c, BoundProblem(in)};
}

Scenario example1(double h, std::optional<double> mu) {
  Scenario sc;
  sc.name = "example1";
  sc.follower_count = 3;
  sc.edges = {{0, 1}, {3, 2}, {1, 3}, {2, 1}, {2, 3}};
  sc.s = rows({{0.0, 100.0}, {-100.0, 0.0}});
  sc.v0 = vec({1.0, 0.0});
  sc.h = h;
  sc.mu = mu;
  sc.observer_triggers = {TriggerFunction::every_step()};
  sc.horizon = 20.0;
  sc.output_stride = 1;
  sc.eps_conv = 1e-3;
  return sc;
}

Scenario example2(double alpha) {
  Scenario sc;
  sc.name = "example2";
  sc.follower_count = 4;
  sc.edges = {{0, 2}, {0, 1}, {4, 1}, {1, 2}, {4, 3}, {3, 4}, {3, 2}, {2, 3}, {2, 4}};
  sc.s = rows({{0.0, 1.0}, {-1.0, 0.0}});
  sc.v0 = vec({1.0, 0.0});
  sc.h = 0.001;
  sc.mu = 1.5;
  sc.observer_triggers = {TriggerFunction::exponential(1.0, alpha)};
  sc.horizon = 20.0;
  sc.output_stride = 10;
  sc.eps_conv = 1e-3;
  return sc;
}

Scenario example3() {
  Scenario sc;
  sc.name = "example3";
  sc.follower_count = 7;
  sc.edges = {{0, 6}, {6, 1}, {6, 4}, {4, 5}, {1, 7}, {4, 2}, {1, 3}, {0, 2}, {0, 3}};
  const Matrix i2 = Matrix::Identity(2, 2);
  sc.s = kron(rows({{0.0, 1.0}, {0.0, 0.0}}), i2);
  sc.v0 = vec({11.0, 11.0, 5.0, 5.0});
  sc.h = 0.01;
  sc.mu = 10.0;
  sc.observer_triggers = {TriggerFunction::exponential(30.0, 0.8)};

  FollowerModel m;
  m.a = kron(rows({{0.0, 1.0}, {0.0, 0.0}}), i2);
  m.b = kron(rows({{0.0}, {1.0}}), i2);
  m.c = kron(rows({{1.0, 0.0}}), i2);
  m.d = Matrix::Zero(2, 2);
  m.p = Matrix::Zero(4, 4);
  m.f = kron(rows({{-1.0, 0.0}}), i2);
  ControllerConfig ctl;
  ctl.mode = ControlMode::kPeriodicEvent;
  ctl.gain = kron(rows({{-4.0, -2.0}}), i2);
  ctl.period = 0.05;
  ctl.trigger = TriggerFunction::log_exp(35.0, 0.4);
  const std::vector<Vector> x0 = {vec({-5, 18, 0, 0}), vec({3, -14, 0, 0}), vec({-2, -9, 0, 0}),
                                  vec({0, 5, 0, 0}),   vec({9, 4, 0, 0}),   vec({21, 26, 0, 0}),
                                  vec({-16, -9, 0, 0})};
  for (const auto& x : x0) sc.followers.push_back({m, x, ctl});
  sc.horizon = 30.0;
  sc.output_stride = 5;
  sc.eps_conv = 1e-3;
  sc.eps_reg = 0.1;
  return sc;
}

}  // namespace coopreg
