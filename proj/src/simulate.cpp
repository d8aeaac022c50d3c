#include "coopreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "coopreg/error.hpp"

namespace coopreg {

using nlohmann::json;

namespace {

struct GridPoint {
  double t = 0.0;
  long k = -1;                                 // observer sampling index, if any
  std::vector<std::pair<int, long>> controls;  // (follower, m)
};

long last_index(double horizon, double period) {
  return static_cast<long>(std::floor(horizon / period + 1e-9));
}

std::vector<GridPoint> merged_grid(const Scenario& sc) {
  struct Instant {
    double t;
    long k;
    int follower;
    long m;
  };
  std::vector<Instant> all;
  const long k_last = last_index(sc.horizon, sc.h);
  for (long k = 0; k <= k_last; ++k) all.push_back({static_cast<double>(k) * sc.h, k, 0, 0});
  for (std::size_t i = 0; i < sc.followers.size(); ++i) {
    const ControllerConfig& c = sc.followers[i].controller;
    if (c.mode != ControlMode::kPeriodicEvent) continue;
    const long m_last = last_index(sc.horizon, c.period);
    for (long m = 0; m <= m_last; ++m) {
      all.push_back({static_cast<double>(m) * c.period, -1, static_cast<int>(i) + 1, m});
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Instant& a, const Instant& b) { return a.t < b.t; });
  const double tol = 1e-12 * sc.h;
  std::vector<GridPoint> grid;
  for (const Instant& in : all) {
    if (grid.empty() || in.t - grid.back().t > tol) grid.push_back({in.t, -1, {}});
    GridPoint& g = grid.back();
    if (in.k >= 0) {
      g.k = in.k;
      g.t = in.t;  // the observer clock defines merged instants
    } else {
      g.controls.emplace_back(in.follower, in.m);
    }
  }
  return grid;
}

// Follower i with state [x; eta; v] and held inputs [w; delta_hat].
struct Agent {
  Matrix m;  // generator
  Matrix n;  // input map
  std::map<double, Discretized> cache;
  RegulatorSolution reg;
  Vector x;
  Vector delta_hat;
  long controller_events = 0;

  const Discretized& segment(double tau) {
    auto it = cache.find(tau);
    if (it == cache.end()) it = cache.emplace(tau, discretize(m, n, tau)).first;
    return it->second;
  }
};

Agent make_agent(const FollowerSpec& f, const Matrix& s) {
  const FollowerModel& fm = f.model;
  const auto ni = fm.a.rows();
  const auto n = s.rows();
  const auto mi = fm.b.cols();
  Agent a;
  a.reg = solve_regulator(fm, s);
  a.x = f.x0;
  a.delta_hat = Vector::Zero(ni);
  const auto dim = ni + 2 * n;
  a.m = Matrix::Zero(dim, dim);
  a.m.block(ni, ni, n, n) = s;
  a.m.block(ni + n, ni + n, n, n) = s;
  a.m.block(0, ni + n, ni, n) = fm.p;
  if (f.controller.mode == ControlMode::kContinuous) {
    const Matrix& l = f.controller.gain;
    a.m.block(0, 0, ni, ni) = fm.a + fm.b * l;
    a.m.block(0, ni, ni, n) = fm.b * (a.reg.u - l * a.reg.x);
    a.n = Matrix::Zero(dim, n);
    a.n.block(ni, 0, n, n).setIdentity();
  } else {
    a.m.block(0, 0, ni, ni) = fm.a;
    a.m.block(0, ni, ni, n) = fm.b * a.reg.u;
    a.n = Matrix::Zero(dim, n + ni);
    a.n.block(ni, 0, n, n).setIdentity();
    a.n.block(0, n, ni, ni) = fm.b * f.controller.gain;
  }
  (void)mi;
  return a;
}

Vector control_input(const FollowerSpec& f, const Agent& a, const Vector& eta) {
  if (f.controller.mode == ControlMode::kContinuous) {
    return continuous_control(a.x, eta, f.controller.gain, a.reg);
  }
  return periodic_event_input(a.delta_hat, eta, f.controller.gain, a.reg);
}

}  // namespace

double Trace::final_estimation_error() const {
  if (samples.empty()) return 0.0;
  const auto& e = samples.back().eta_error;
  return e.empty() ? 0.0 : *std::max_element(e.begin(), e.end());
}

double Trace::final_regulation_error() const {
  if (samples.empty()) return 0.0;
  double worst = 0.0;
  for (const auto& e : samples.back().e) worst = std::max(worst, e.norm());
  return worst;
}

Trace run(const Scenario& sc) {
  sc.validate();
  const double mu = resolve_gain(sc);
  const Digraph g = sc.graph();
  const int n_f = sc.follower_count;

  Trace tr;
  tr.scenario = sc.name;
  tr.h = sc.h;
  tr.mu = mu;
  tr.followers = n_f;
  tr.dim = sc.dim();
  if (sc.horizon == 0.0) return tr;

  ObserverBank bank(g, sc.s, mu, sc.h, sc.initial_estimates(), sc.observer_triggers);
  std::vector<Agent> agents;
  for (const auto& f : sc.followers) agents.push_back(make_agent(f, sc.s));
  const bool with_models = !agents.empty();
  const auto n = sc.s.rows();

  Vector v = sc.v0;
  std::map<double, Matrix> leader_cache;
  double t_prev = 0.0;

  for (const GridPoint& gp : merged_grid(sc)) {
    const double tau = gp.t - t_prev;
    if (tau > 0.0) {
      if (with_models) {
        for (int i = 1; i <= n_f; ++i) {
          Agent& a = agents[static_cast<std::size_t>(i - 1)];
          const auto ni = a.x.size();
          Vector z(ni + 2 * n);
          z << a.x, bank.estimate(i), v;
          Vector held(a.n.cols());
          held.head(n) = bank.correction(i);
          if (held.size() > n) held.tail(ni) = a.delta_hat;
          const Discretized& d = a.segment(tau);
          const Vector next = d.phi * z + d.gamma * held;
          a.x = next.head(ni);
          bank.set_estimate(i, next.segment(ni, n));
        }
      } else {
        bank.advance(tau);
      }
      auto it = leader_cache.find(tau);
      if (it == leader_cache.end()) it = leader_cache.emplace(tau, expm(sc.s * tau)).first;
      v = it->second * v;
    }
    t_prev = gp.t;

    if (gp.k >= 0) bank.sample(gp.k, v);
    for (const auto& [i, m] : gp.controls) {
      Agent& a = agents[static_cast<std::size_t>(i - 1)];
      const FollowerSpec& f = sc.followers[static_cast<std::size_t>(i - 1)];
      const PeriodicDecision d =
          periodic_event_update(a.x, bank.estimate(i), gp.t, f.controller, a.reg, a.delta_hat);
      if (d.triggered) tr.controller_events.push_back({i, a.controller_events++, m, gp.t});
    }

    if (gp.k >= 0 && gp.k % sc.output_stride == 0) {
      TraceSample s;
      s.t = gp.t;
      s.v = v;
      for (int i = 1; i <= n_f; ++i) {
        const Vector& eta = bank.estimate(i);
        s.eta.push_back(eta);
        s.eta_error.push_back((eta - v).norm());
        if (with_models) {
          const Agent& a = agents[static_cast<std::size_t>(i - 1)];
          const FollowerSpec& f = sc.followers[static_cast<std::size_t>(i - 1)];
          s.x.push_back(a.x);
          s.e.push_back(f.model.c * a.x + f.model.d * control_input(f, a, eta) + f.model.f * v);
        }
      }
      tr.samples.push_back(std::move(s));
    }
  }
  tr.observer_events = bank.events();
  return tr;
}

// ---- export ----------------------------------------------------------------

namespace {

void put(std::ostream& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << buf;
}

}  // namespace

void write_trace_csv(const Trace& tr, std::ostream& out) {
  const bool models = !tr.samples.empty() && !tr.samples.front().x.empty();
  out << "t";
  for (int c = 0; c < tr.dim; ++c) out << ",v_" << c;
  for (int i = 1; i <= tr.followers; ++i) {
    for (int c = 0; c < tr.dim; ++c) out << ",eta" << i << '_' << c;
    out << ",eta_err" << i;
    if (models) {
      const auto& s0 = tr.samples.front();
      for (Eigen::Index c = 0; c < s0.x[static_cast<std::size_t>(i - 1)].size(); ++c) {
        out << ",x" << i << '_' << c;
      }
      for (Eigen::Index c = 0; c < s0.e[static_cast<std::size_t>(i - 1)].size(); ++c) {
        out << ",e" << i << '_' << c;
      }
      out << ",e_norm" << i;
    }
  }
  out << '\n';
  for (const auto& s : tr.samples) {
    put(out, s.t);
    for (Eigen::Index c = 0; c < s.v.size(); ++c) {
      out << ',';
      put(out, s.v(c));
    }
    for (std::size_t i = 0; i < s.eta.size(); ++i) {
      for (Eigen::Index c = 0; c < s.eta[i].size(); ++c) {
        out << ',';
        put(out, s.eta[i](c));
      }
      out << ',';
      put(out, s.eta_error[i]);
      if (models) {
        for (Eigen::Index c = 0; c < s.x[i].size(); ++c) {
          out << ',';
          put(out, s.x[i](c));
        }
        for (Eigen::Index c = 0; c < s.e[i].size(); ++c) {
          out << ',';
          put(out, s.e[i](c));
        }
        out << ',';
        put(out, s.e[i].norm());
      }
    }
    out << '\n';
  }
}

void write_observer_events_csv(const Trace& tr, std::ostream& out) {
  out << "follower,l,k,t_l,s_l\n";
  for (const auto& e : tr.observer_events) {
    out << e.follower << ',' << e.index << ',' << e.sample << ',';
    put(out, e.time);
    out << ',' << e.steps << '\n';
  }
}

void write_controller_events_csv(const Trace& tr, std::ostream& out) {
  out << "follower,l,m,t_l\n";
  for (const auto& e : tr.controller_events) {
    out << e.follower << ',' << e.index << ',' << e.sample << ',';
    put(out, e.time);
    out << '\n';
  }
}

json trace_to_json(const Trace& tr) {
  json j;
  j["schema"] = kTraceSchema;
  j["scenario"] = tr.scenario;
  j["h"] = tr.h;
  j["mu"] = tr.mu;
  j["followers"] = tr.followers;
  j["dim"] = tr.dim;
  json samples = json::array();
  for (const auto& s : tr.samples) {
    json js;
    js["t"] = s.t;
    js["v"] = vector_to_json(s.v);
    json eta = json::array();
    for (const auto& e : s.eta) eta.push_back(vector_to_json(e));
    js["eta"] = eta;
    js["eta_err"] = s.eta_error;
    json x = json::array();
    for (const auto& e : s.x) x.push_back(vector_to_json(e));
    js["x"] = x;
    json e = json::array();
    for (const auto& r : s.e) e.push_back(vector_to_json(r));
    js["e"] = e;
    samples.push_back(std::move(js));
  }
  j["samples"] = std::move(samples);
  json oe = json::array();
  for (const auto& e : tr.observer_events) {
    oe.push_back({{"follower", e.follower}, {"l", e.index}, {"k", e.sample}, {"t", e.time},
                  {"s", e.steps}});
  }
  j["observer_events"] = std::move(oe);
  json ce = json::array();
  for (const auto& e : tr.controller_events) {
    ce.push_back({{"follower", e.follower}, {"l", e.index}, {"m", e.sample}, {"t", e.time}});
  }
  j["controller_events"] = std::move(ce);
  return j;
}

Trace trace_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kTraceSchema) {
      throw Error(ErrorCode::kInvalidInput, "unsupported trace schema");
    }
    Trace tr;
    tr.scenario = j.at("scenario").get<std::string>();
    tr.h = j.at("h").get<double>();
    tr.mu = j.at("mu").get<double>();
    tr.followers = j.at("followers").get<int>();
    tr.dim = j.at("dim").get<int>();
    for (const auto& js : j.at("samples")) {
      TraceSample s;
      s.t = js.at("t").get<double>();
      s.v = vector_from_json(js.at("v"), "v");
      for (const auto& e : js.at("eta")) s.eta.push_back(vector_from_json(e, "eta"));
      s.eta_error = js.at("eta_err").get<std::vector<double>>();
      for (const auto& e : js.at("x")) s.x.push_back(vector_from_json(e, "x"));
      for (const auto& e : js.at("e")) s.e.push_back(vector_from_json(e, "e"));
      tr.samples.push_back(std::move(s));
    }
    for (const auto& e : j.at("observer_events")) {
      tr.observer_events.push_back({e.at("follower").get<int>(), e.at("l").get<long>(),
                                    e.at("k").get<long>(), e.at("t").get<double>(),
                                    e.at("s").get<long>()});
    }
    for (const auto& e : j.at("controller_events")) {
      tr.controller_events.push_back({e.at("follower").get<int>(), e.at("l").get<long>(),
                                      e.at("m").get<long>(), e.at("t").get<double>()});
    }
    return tr;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, std::string("malformed trace: ") + e.what());
  }
}

void export_trace(const Trace& tr, const std::string& dir, const std::string& format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  if (format == "csv") {
    auto f = open("trace.csv");
    write_trace_csv(tr, f);
  } else if (format == "json") {
    auto f = open("trace.json");
    f << trace_to_json(tr).dump() << '\n';
  } else {
    throw Error(ErrorCode::kInvalidInput, "unknown format '" + format + "'");
  }
  {
    auto f = open("observer_events.csv");
    write_observer_events_csv(tr, f);
  }
  auto f = open("controller_events.csv");
  write_controller_events_csv(tr, f);
}

}  // namespace coopreg
