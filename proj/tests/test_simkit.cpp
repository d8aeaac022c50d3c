#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "coopreg/error.hpp"
#include "coopreg/scenario.hpp"
#include "coopreg/simulate.hpp"
#include "support.hpp"

using namespace coopreg;

namespace {

template <class F>
ErrorCode code_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::kIo;
}

Matrix rotation(double w) {
  Matrix s(2, 2);
  s << 0, w, -w, 0;
  return s;
}

/// Double integrator whose position tracks the first leader coordinate.
FollowerModel tracker() {
  FollowerModel m;
  m.a.resize(2, 2);
  m.a << 0, 1, 0, 0;
  m.b.resize(2, 1);
  m.b << 0, 1;
  m.c.resize(1, 2);
  m.c << 1, 0;
  m.d = Matrix::Zero(1, 1);
  m.p = Matrix::Zero(2, 2);
  m.f.resize(1, 2);
  m.f << -1, 0;
  return m;
}

/// Two followers: one with continuous feedback, one with a sampled
/// controller whose period is not a multiple of h.
Scenario mixed_scenario() {
  Scenario sc;
  sc.name = "mixed";
  sc.follower_count = 2;
  sc.edges = {{0, 1}, {1, 2}, {2, 1}};
  sc.s = rotation(1.0);
  sc.v0 = Vector::Ones(2);
  sc.h = 0.1;
  sc.mu = 1.0;
  sc.eta0 = {Vector::Zero(2), Vector::Constant(2, -0.5)};
  Matrix l(1, 2), k(1, 2);
  l << -2, -3;
  k << -4, -2;
  Vector x1(2), x2(2);
  x1 << 0.5, 0;
  x2 << -1, 1;
  sc.followers = {
      FollowerSpec{tracker(), x1,
                   ControllerConfig{ControlMode::kContinuous, l, 0.0, TriggerFunction::every_step()}},
      FollowerSpec{tracker(), x2,
                   ControllerConfig{ControlMode::kPeriodicEvent, k, 0.15,
                                    TriggerFunction::every_step()}}};
  sc.horizon = 3.0;
  sc.output_stride = 1;
  return sc;
}

struct OracleState {
  Vector v;
  std::vector<Vector> eta;
  std::vector<Vector> x;
};

/// RK4 integration of the coupled system with every-step observer updates
/// and every-period controller updates, on an independently merged grid.
std::vector<OracleState> rk4_oracle(const Scenario& sc, const std::vector<double>& sample_times) {
  const int nf = sc.follower_count;
  const Digraph g = sc.graph();
  std::vector<RegulatorSolution> reg;
  for (const auto& f : sc.followers) reg.push_back(solve_regulator(f.model, sc.s));

  std::vector<double> instants;
  for (long k = 0; k * sc.h <= sc.horizon + 1e-9; ++k) instants.push_back(k * sc.h);
  for (const auto& f : sc.followers) {
    if (f.controller.mode != ControlMode::kPeriodicEvent) continue;
    for (long m = 0; m * f.controller.period <= sc.horizon + 1e-9; ++m) {
      instants.push_back(m * f.controller.period);
    }
  }
  std::sort(instants.begin(), instants.end());
  instants.erase(std::unique(instants.begin(), instants.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 instants.end());

  OracleState st{sc.v0, sc.initial_estimates(), {}};
  for (const auto& f : sc.followers) st.x.push_back(f.x0);
  std::vector<Vector> w(static_cast<std::size_t>(nf));
  std::vector<Vector> delta_hat(static_cast<std::size_t>(nf), Vector::Zero(2));
  std::vector<OracleState> out;
  auto is_multiple = [](double t, double p) {
    return std::abs(t / p - std::round(t / p)) < 1e-9;
  };

  using State = std::vector<Vector>;  // [v, eta_1..eta_N, x_1..x_N]
  auto deriv = [&](const State& z) {
    State dz(z.size());
    dz[0] = sc.s * z[0];
    for (int i = 0; i < nf; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const Vector& eta = z[1 + ii];
      const Vector& x = z[1 + nf + ii];
      dz[1 + ii] = sc.s * eta + w[ii];
      const FollowerSpec& f = sc.followers[ii];
      Vector u;
      if (f.controller.mode == ControlMode::kContinuous) {
        u = f.controller.gain * x + (reg[ii].u - f.controller.gain * reg[ii].x) * eta;
      } else {
        u = f.controller.gain * delta_hat[ii] + reg[ii].u * eta;
      }
      dz[1 + nf + ii] = f.model.a * x + f.model.b * u + f.model.p * z[0];
    }
    return dz;
  };
  auto axpy = [](const State& z, double a, const State& dz) {
    State r = z;
    for (std::size_t j = 0; j < z.size(); ++j) r[j] += a * dz[j];
    return r;
  };

  std::size_t next_sample = 0;
  for (std::size_t p = 0; p < instants.size(); ++p) {
    const double t = instants[p];
    if (is_multiple(t, sc.h)) {
      for (int i = 1; i <= nf; ++i) {
        Vector acc = Vector::Zero(2);
        for (int j : g.neighbors(i)) {
          acc += (j == 0 ? st.v : st.eta[static_cast<std::size_t>(j - 1)]) -
                 st.eta[static_cast<std::size_t>(i - 1)];
        }
        w[static_cast<std::size_t>(i - 1)] = *sc.mu * acc;
      }
    }
    for (int i = 0; i < nf; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const ControllerConfig& c = sc.followers[ii].controller;
      if (c.mode == ControlMode::kPeriodicEvent && is_multiple(t, c.period)) {
        delta_hat[ii] = st.x[ii] - reg[ii].x * st.eta[ii];
      }
    }
    if (next_sample < sample_times.size() && std::abs(sample_times[next_sample] - t) < 1e-9) {
      out.push_back(st);
      ++next_sample;
    }
    if (p + 1 == instants.size()) break;
    const int steps = 400;
    const double dt = (instants[p + 1] - t) / steps;
    State z{st.v};
    for (const auto& e : st.eta) z.push_back(e);
    for (const auto& x : st.x) z.push_back(x);
    for (int s = 0; s < steps; ++s) {
      const State k1 = deriv(z);
      const State k2 = deriv(axpy(z, dt / 2, k1));
      const State k3 = deriv(axpy(z, dt / 2, k2));
      const State k4 = deriv(axpy(z, dt, k3));
      for (std::size_t j = 0; j < z.size(); ++j) {
        z[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
    }
    st.v = z[0];
    for (int i = 0; i < nf; ++i) {
      st.eta[static_cast<std::size_t>(i)] = z[1 + static_cast<std::size_t>(i)];
      st.x[static_cast<std::size_t>(i)] = z[1 + static_cast<std::size_t>(nf + i)];
    }
  }
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("coopreg_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("builtin scenarios") {
  TEST_CASE("transcribed parameters") {
    const Scenario e1 = example1();
    CHECK(e1.s == rotation(100.0));
    CHECK(e1.h == 0.2);
    CHECK(e1.mu == 25.0);
    CHECK(e1.follower_count == 3);

    const Scenario e2 = example2();
    CHECK(e2.mu == 1.5);
    CHECK(e2.h == 0.001);
    REQUIRE(e2.observer_triggers.size() == 1);
    CHECK(e2.observer_triggers[0] == TriggerFunction::exponential(1.0, 0.25));
    CHECK(example2(2.0).observer_triggers[0].alpha() == 2.0);

    const Scenario e3 = example3();
    Vector v0(4);
    v0 << 11, 11, 5, 5;
    CHECK(e3.v0 == v0);
    CHECK(e3.mu == 10.0);
    CHECK(e3.h == 0.01);
    REQUIRE(e3.followers.size() == 7);
    for (const auto& f : e3.followers) {
      CHECK(f.controller.period == 0.05);
      CHECK(f.controller.trigger == TriggerFunction::log_exp(35.0, 0.4));
    }
    for (const Scenario& sc : {e1, e2, e3}) CHECK_NOTHROW(sc.validate());
  }
}

TEST_SUITE("engine") {
  TEST_CASE("runs are deterministic") {
    const Scenario sc = mixed_scenario();
    CHECK(run(sc) == run(sc));
    Scenario e1 = example1();
    e1.horizon = 2.0;
    CHECK(run(e1) == run(e1));
  }

  TEST_CASE("output stride only selects samples") {
    Scenario a = mixed_scenario();
    Scenario b = a;
    b.output_stride = 3;
    const Trace ta = run(a);
    const Trace tb = run(b);
    REQUIRE(tb.samples.size() == (ta.samples.size() + 2) / 3);
    for (std::size_t j = 0; j < tb.samples.size(); ++j) CHECK(tb.samples[j] == ta.samples[3 * j]);
    CHECK(ta.observer_events == tb.observer_events);
    CHECK(ta.controller_events == tb.controller_events);
  }

  TEST_CASE("exact propagation agrees with an RK4 integration of the coupled loop") {
    const Scenario sc = mixed_scenario();
    const Trace tr = run(sc);
    std::vector<double> times;
    for (const auto& s : tr.samples) times.push_back(s.t);
    const std::vector<OracleState> ref = rk4_oracle(sc, times);
    REQUIRE(ref.size() == tr.samples.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < ref.size(); ++j) {
      const TraceSample& s = tr.samples[j];
      worst = std::max(worst, (s.v - ref[j].v).norm());
      for (std::size_t i = 0; i < 2; ++i) {
        worst = std::max(worst, (s.eta[i] - ref[j].eta[i]).norm());
        worst = std::max(worst, (s.x[i] - ref[j].x[i]).norm());
      }
    }
    CHECK(worst < 1e-6);
    // Controller instants at m * 0.15 fall between observer instants.
    CHECK(tr.controller_events.size() == 21);
  }

  TEST_CASE("starting on the regulator manifold keeps the output error at zero") {
    Scenario sc = example3();
    sc.eta0.assign(7, sc.v0);
    for (auto& f : sc.followers) f.x0 = sc.v0;
    sc.horizon = 10.0;
    const Trace tr = run(sc);
    for (const TraceSample& s : tr.samples) {
      for (const Vector& e : s.e) CHECK(e.norm() < 1e-10);
      for (double err : s.eta_error) CHECK(err < 1e-10);
    }
    CHECK(tr.controller_events.empty());
    CHECK(tr.observer_events.size() == 7);
  }

  TEST_CASE("design and assumption failures stop the run") {
    const Scenario pathological = example1(2.0 * std::numbers::pi / 100.0, std::nullopt);
    CHECK(code_of([&] { run(pathological); }) == ErrorCode::kInfeasibleDesign);
    Scenario orphan = example1();
    orphan.edges = {{0, 1}, {1, 2}};
    CHECK(code_of([&] { run(orphan); }) == ErrorCode::kAssumptionViolated);
    Scenario bad = example1();
    bad.h = 0.0;
    CHECK(code_of([&] { run(bad); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("automatic gain uses the design suggestion") {
    Scenario sc = example1(0.2, std::nullopt);
    sc.horizon = 20.0;
    const Trace tr = run(sc);
    CHECK(tr.mu == doctest::Approx(50.2333 / 2).epsilon(1e-3));
  }

  TEST_CASE("pathological period does not converge under forced gains") {
    for (double mu : {1.0, 10.0, 25.0}) {
      const Trace tr = run(example1(0.0265, mu));
      CHECK(tr.final_estimation_error() > 0.1);
    }
  }

  TEST_CASE("trigger regimes of the second example") {
    const Trace slow = run(example2(0.25));
    long multi = 0;
    for (const auto& e : slow.observer_events) multi += e.steps > 1;
    CHECK(multi > 0);

    const Trace fast = run(example2(2.0));
    const long k_end = std::lround(20.0 / 0.001);
    for (const auto& e : fast.observer_events) {
      if (e.sample > k_end - 5000) CHECK(e.steps == 1);
    }
    CHECK(fast.observer_events.size() > slow.observer_events.size());
  }
}

TEST_SUITE("export") {
  TEST_CASE("empty horizon gives a header-only CSV") {
    Scenario sc = example1();
    sc.horizon = 0.0;
    const Trace tr = run(sc);
    CHECK(tr.samples.empty());
    std::ostringstream out;
    write_trace_csv(tr, out);
    CHECK(out.str() == "t,v_0,v_1,eta1_0,eta1_1,eta_err1,eta2_0,eta2_1,eta_err2,eta3_0,eta3_1,"
                       "eta_err3\n");
    std::ostringstream ev;
    write_observer_events_csv(tr, ev);
    CHECK(ev.str() == "follower,l,k,t_l,s_l\n");
    std::ostringstream cev;
    write_controller_events_csv(tr, cev);
    CHECK(cev.str() == "follower,l,m,t_l\n");
  }

  TEST_CASE("CSV rows carry every column") {
    const Trace tr = run(mixed_scenario());
    std::ostringstream out;
    write_trace_csv(tr, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "t,v_0,v_1,eta1_0,eta1_1,eta_err1,x1_0,x1_1,e1_0,e_norm1,eta2_0,eta2_1,eta_err2,x2_0,"
          "x2_1,e2_0,e_norm2");
    const auto columns = std::count(header.begin(), header.end(), ',') + 1;
    std::string row;
    long rows = 0;
    while (std::getline(in, row)) {
      CHECK(std::count(row.begin(), row.end(), ',') + 1 == columns);
      ++rows;
    }
    CHECK(rows == static_cast<long>(tr.samples.size()));
  }

  TEST_CASE("JSON trace round-trip is bit-exact") {
    for (const Trace& tr : {run(mixed_scenario()), run(example2(0.25))}) {
      const Trace back = trace_from_json(nlohmann::json::parse(trace_to_json(tr).dump()));
      CHECK(back == tr);
    }
    CHECK(code_of([] { trace_from_json(nlohmann::json{{"schema", "other"}}); }) ==
          ErrorCode::kInvalidInput);
  }

  TEST_CASE("files are written to the output directory") {
    const auto dir = scratch_dir("export");
    const Trace tr = run(mixed_scenario());
    export_trace(tr, dir.string(), "json");
    CHECK(trace_from_json(nlohmann::json::parse(slurp(dir / "trace.json"))) == tr);
    CHECK(std::filesystem::exists(dir / "observer_events.csv"));
    CHECK(std::filesystem::exists(dir / "controller_events.csv"));
    export_trace(tr, dir.string(), "csv");
    std::ostringstream expect;
    write_trace_csv(tr, expect);
    CHECK(slurp(dir / "trace.csv") == expect.str());
    CHECK(code_of([&] { export_trace(tr, dir.string(), "xml"); }) == ErrorCode::kInvalidInput);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("scenario files") {
  TEST_CASE("JSON round-trip preserves every builtin") {
    for (const Scenario& sc : {example1(), example1(0.2, std::nullopt), example2(), example3(),
                               mixed_scenario()}) {
      const nlohmann::json j = to_json(sc);
      const Scenario back = scenario_from_json(nlohmann::json::parse(j.dump()));
      CHECK(to_json(back) == j);
      CHECK(back.mu == sc.mu);
      CHECK(back.s == sc.s);
      CHECK(back.edges == sc.edges);
    }
    Scenario a = mixed_scenario();
    CHECK(run(scenario_from_json(to_json(a))) == run(a));
  }

  TEST_CASE("save and load") {
    const auto dir = scratch_dir("scenario");
    std::filesystem::create_directories(dir);
    const auto path = (dir / "s.json").string();
    save_scenario(example3(), path);
    CHECK(to_json(load_scenario(path)) == to_json(example3()));
    CHECK(code_of([&] { load_scenario((dir / "missing.json").string()); }) == ErrorCode::kIo);
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(code_of([&] { load_scenario((dir / "broken.json").string()); }) ==
          ErrorCode::kInvalidInput);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("malformed documents are rejected") {
    nlohmann::json j = to_json(example1());
    j["schema"] = "coopreg.scenario/99";
    CHECK(code_of([&] { scenario_from_json(j); }) == ErrorCode::kInvalidInput);
    j = to_json(example1());
    j["leader"]["S"] = nlohmann::json::array({{1, 2}, {3}});
    CHECK(code_of([&] { scenario_from_json(j); }) == ErrorCode::kDimensionMismatch);
    j = to_json(example1());
    j["observer"]["mu"] = "sometimes";
    CHECK(code_of([&] { scenario_from_json(j); }) == ErrorCode::kInvalidInput);
    j = to_json(example1());
    j["observer"]["trigger"] = {{"kind", "never"}};
    CHECK(code_of([&] { scenario_from_json(j); }) == ErrorCode::kInvalidInput);
  }

  TEST_CASE("scenario validation") {
    Scenario sc = example3();
    sc.followers[2].x0 = Vector::Zero(3);
    CHECK(code_of([&] { sc.validate(); }) == ErrorCode::kDimensionMismatch);
    sc = example3();
    sc.followers[0].controller.gain = Matrix::Zero(2, 4);
    CHECK(code_of([&] { sc.validate(); }) == ErrorCode::kInvalidInput);
    sc = example1();
    sc.horizon = -1.0;
    CHECK(code_of([&] { sc.validate(); }) == ErrorCode::kInvalidInput);
    sc = example1();
    sc.output_stride = 0;
    CHECK(code_of([&] { sc.validate(); }) == ErrorCode::kInvalidInput);
  }
}
