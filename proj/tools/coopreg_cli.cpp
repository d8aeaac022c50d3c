// Command-line front end: design analysis, simulation and bounds.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "coopreg/design.hpp"
#include "coopreg/error.hpp"
#include "coopreg/interevent.hpp"
#include "coopreg/regulation.hpp"
#include "coopreg/scenario.hpp"
#include "coopreg/simulate.hpp"

namespace {

using namespace coopreg;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;

Scenario resolve_scenario(const std::string& ref) {
  if (ref == "example1") return example1();
  if (ref == "example2") return example2();
  if (ref == "example3") return example3();
  return load_scenario(ref);
}

std::string fmt(double x, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string interval_text(const std::optional<OpenInterval>& iv) {
  if (!iv) return "empty";
  return "(" + fmt(iv->lo) + ", " + fmt(iv->hi) + ")";
}

json interval_json(const std::optional<OpenInterval>& iv) {
  if (!iv) return nullptr;
  return {{"lo", iv->lo}, {"hi", iv->hi}};
}

void print_matrix(const char* name, const Matrix& m) {
  std::cout << name << " =\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::printf(" %13.6g", m(i, j));
    std::cout << '\n';
  }
}

int report_run(const Scenario& sc, const std::string& out_dir, const std::string& format,
               bool as_json) {
  const Trace tr = run(sc);
  if (!out_dir.empty()) export_trace(tr, out_dir, format);
  const bool models = !sc.followers.empty();
  if (as_json) {
    json j{{"scenario", tr.scenario},
           {"mu", tr.mu},
           {"h", tr.h},
           {"samples", tr.samples.size()},
           {"observer_events", tr.observer_events.size()},
           {"controller_events", tr.controller_events.size()},
           {"final_estimation_error", tr.final_estimation_error()},
           {"converged", tr.final_estimation_error() < sc.eps_conv}};
    if (models) {
      j["final_regulation_error"] = tr.final_regulation_error();
      j["regulated"] = tr.final_regulation_error() < sc.eps_reg;
    }
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }
  std::printf("scenario            %s\n", tr.scenario.c_str());
  std::printf("mu                  %.10g\n", tr.mu);
  std::printf("h                   %.10g\n", tr.h);
  std::printf("samples             %zu\n", tr.samples.size());
  std::printf("observer events     %zu\n", tr.observer_events.size());
  std::printf("controller events   %zu\n", tr.controller_events.size());
  std::printf("max ||eta_i - v||   %.6e  (%s eps_conv = %g)\n", tr.final_estimation_error(),
              tr.final_estimation_error() < sc.eps_conv ? "below" : "NOT below", sc.eps_conv);
  if (models) {
    std::printf("max ||e_i||         %.6e  (%s eps_reg = %g)\n", tr.final_regulation_error(),
                tr.final_regulation_error() < sc.eps_reg ? "below" : "NOT below", sc.eps_reg);
  }
  if (!out_dir.empty()) std::printf("written to          %s\n", out_dir.c_str());
  return kExitOk;
}

int cmd_design(const Scenario& sc, std::optional<double> h_opt, bool as_json) {
  const double h = h_opt.value_or(sc.h);
  const ObserverSystem sys = make_observer_system(sc.s, sc.graph());
  const FeasibilityReport r = feasibility(sys, h);
  if (as_json) {
    json pairs = json::array();
    for (const auto& p : r.pairs) {
      pairs.push_back({{"i", p.coeffs.i},
                       {"q", p.coeffs.q},
                       {"class", to_string(p.label)},
                       {"alpha", p.coeffs.alpha},
                       {"beta", p.coeffs.beta},
                       {"gamma", p.coeffs.gamma},
                       {"psi", p.psi ? json(*p.psi) : json(nullptr)},
                       {"phase", to_string(p.phase)},
                       {"magnitude", to_string(p.magnitude)},
                       {"spectral_mapping", to_string(p.spectral_mapping)},
                       {"interval", interval_json(p.interval)}});
    }
    json j{{"h", h},
           {"feasible", r.feasible},
           {"conditions_hold", r.conditions_hold},
           {"intersection", interval_json(r.intersection)},
           {"suggested_mu", r.suggested_mu ? json(*r.suggested_mu) : json(nullptr)},
           {"pairs", pairs}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("leader spectrum\n");
    for (const auto& e : sys.leader.eigenvalues) {
      std::printf("  %s  %+.6f %+.6fi\n", to_string(e.label), e.value.real(), e.value.imag());
    }
    std::printf("spectrum of H\n");
    for (const auto& e : sys.graph) {
      std::printf("  %+.6f %+.6fi  theta = %+.6f\n", e.value.real(), e.value.imag(), e.theta);
    }
    std::printf("\n%3s %3s %4s %14s %14s %14s %10s %9s %9s %9s  %s\n", "i", "q", "cls", "alpha",
                "beta", "gamma", "psi", "phase", "magn", "mapping", "interval");
    for (const auto& p : r.pairs) {
      std::printf("%3d %3d %4s %14.6g %14.6g %14.6g %10s %9s %9s %9s  %s\n", p.coeffs.i + 1,
                  p.coeffs.q + 1, to_string(p.label), p.coeffs.alpha, p.coeffs.beta,
                  p.coeffs.gamma, p.psi ? fmt(*p.psi, "%.5f").c_str() : "degen",
                  to_string(p.phase), to_string(p.magnitude), to_string(p.spectral_mapping),
                  interval_text(p.interval).c_str());
    }
    std::printf("\nh = %.10g  %s  mu in %s", h, r.feasible ? "FEASIBLE" : "INFEASIBLE",
                interval_text(r.intersection).c_str());
    if (r.suggested_mu) std::printf("  suggested mu = %.10g", *r.suggested_mu);
    std::printf("\n");
  }
  return r.feasible ? kExitOk : kExitInfeasible;
}

int cmd_mu_interval(const Scenario& sc, std::optional<double> h_opt, bool as_json) {
  const double h = h_opt.value_or(sc.h);
  const FeasibilityReport r = feasibility(make_observer_system(sc.s, sc.graph()), h);
  const std::optional<OpenInterval> iv =
      r.feasible ? r.intersection : std::optional<OpenInterval>{};
  if (as_json) {
    std::cout << json{{"h", h}, {"feasible", r.feasible}, {"interval", interval_json(iv)}}.dump(2)
              << '\n';
  } else {
    std::printf("%s\n", interval_text(iv).c_str());
  }
  return r.feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const Scenario& sc, double from, double to, double step, bool as_json) {
  const auto rows = sweep_h(make_observer_system(sc.s, sc.graph()), make_grid(from, to, step));
  if (as_json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"h", r.h}, {"feasible", r.feasible}, {"interval", interval_json(r.interval)}});
    }
    std::cout << arr.dump(2) << '\n';
  } else {
    std::printf("h,feasible,mu_lo,mu_hi\n");
    for (const auto& r : rows) {
      std::printf("%.10g,%d,%s,%s\n", r.h, r.feasible ? 1 : 0,
                  r.interval ? fmt(r.interval->lo).c_str() : "",
                  r.interval ? fmt(r.interval->hi).c_str() : "");
    }
  }
  return kExitOk;
}

int cmd_bounds(Scenario sc, std::optional<double> alpha, long k_max, long k_step, long power_cap) {
  if (alpha) {
    for (auto& f : sc.observer_triggers) {
      if (f.kind() != TriggerKind::kExponential) {
        throw Error(ErrorCode::kUnsupportedEnvelope, "--alpha needs exponential triggers");
      }
      f = TriggerFunction::exponential(f.sigma(), *alpha);
    }
  }
  const BoundAnalysis a = analyze_bounds(sc, power_cap);
  const double s_star = solve_asymptotic(a.problem);
  const TimeBounds tb0 = solve_time_bounds(a.problem, 0);
  std::printf("# mu = %.10g, h = %.10g\n", a.mu, sc.h);
  std::printf("# gamma = %.10g, beta = %.10g (k_max %ld%s)\n", a.contraction.gamma,
              a.contraction.beta, a.contraction.k_max,
              a.contraction.converged ? "" : ", not settled");
  std::printf("# gamma*e^(alpha h) = %.10g (%s)\n", a.problem.chi.rho(),
              a.problem.chi.contractive() ? "contractive" : "non-contractive");
  std::printf("# chi1 = %.10g%s\n", a.problem.chi.chi1(),
              a.problem.chi.chi2() ? (", chi2 = " + fmt(*a.problem.chi.chi2())).c_str() : "");
  std::printf("# s* = %.10g, tau* = %.10g\n", s_star, tb0.tau_star);
  std::printf("k,s,tau\n");
  for (long k = 0; k <= k_max; k += k_step) {
    const double s = solve_bound(a.problem, k);
    const TimeBounds tb = solve_time_bounds(a.problem, k);
    std::printf("%ld,%.12g,%.12g\n", k, s, tb.tau);
  }
  return kExitOk;
}

int cmd_regulator(const Scenario& sc, bool as_json) {
  if (sc.followers.empty()) {
    throw Error(ErrorCode::kInvalidInput, "scenario has no follower models");
  }
  json arr = json::array();
  for (std::size_t i = 0; i < sc.followers.size(); ++i) {
    const RegulatorSolution r = solve_regulator(sc.followers[i].model, sc.s);
    if (as_json) {
      arr.push_back({{"follower", i + 1},
                     {"X", matrix_to_json(r.x)},
                     {"U", matrix_to_json(r.u)},
                     {"residual_state", r.residual_state},
                     {"residual_output", r.residual_output}});
      continue;
    }
    std::printf("follower %zu\n", i + 1);
    print_matrix("X", r.x);
    print_matrix("U", r.u);
    std::printf("residuals  state %.3e  output %.3e\n\n", r.residual_state, r.residual_output);
  }
  if (as_json) std::cout << arr.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampled-data distributed observers and cooperative output regulation"};
  app.require_subcommand(1);

  std::string scenario_ref;
  std::string out_dir;
  std::string format = "csv";
  bool as_json = false;
  std::optional<double> h_opt;

  auto add_scenario = [&](CLI::App* c) {
    c->add_option("--scenario,-s", scenario_ref,
                  "Scenario JSON file, or example1|example2|example3")
        ->required();
  };

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and export its trace");
  add_scenario(simulate);
  simulate->add_option("--out,-o", out_dir, "Output directory");
  simulate->add_option("--format,-f", format, "Trace format")
      ->check(CLI::IsMember({"csv", "json"}));
  simulate->add_flag("--json", as_json, "Print the summary as JSON");

  auto* design = app.add_subcommand("design", "Sampling/gain feasibility report");
  add_scenario(design);
  design->add_option("--period,-p", h_opt, "Sampling period (defaults to the scenario's)");
  design->add_flag("--json", as_json, "JSON output");

  auto* mu = app.add_subcommand("mu-interval", "Admissible observer gains for one period");
  add_scenario(mu);
  mu->add_option("--period,-p", h_opt, "Sampling period (defaults to the scenario's)");
  mu->add_flag("--json", as_json, "JSON output");

  double from = 0.001;
  double to = 0.1;
  double step = 0.001;
  auto* sweep = app.add_subcommand("sweep-h", "Feasibility over a grid of sampling periods");
  add_scenario(sweep);
  sweep->add_option("--from", from, "First period")->capture_default_str();
  sweep->add_option("--to", to, "Last period")->capture_default_str();
  sweep->add_option("--step", step, "Grid step")->capture_default_str();
  sweep->add_flag("--json", as_json, "JSON output");

  std::optional<double> alpha;
  long k_max = 1000;
  long k_step = 100;
  long power_cap = kDefaultPowerCap;
  auto* bounds = app.add_subcommand("bounds", "Inter-event step and time bounds");
  add_scenario(bounds);
  bounds->add_option("--alpha", alpha, "Override the trigger decay rate");
  bounds->add_option("--k-max", k_max, "Last sampling index")->capture_default_str();
  bounds->add_option("--k-step", k_step, "Index stride")->capture_default_str()->check(
      CLI::PositiveNumber);
  bounds->add_option("--power-cap", power_cap, "Largest power of F used to estimate beta")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* regulator = app.add_subcommand("regulator", "Solve the regulator equations");
  add_scenario(regulator);
  regulator->add_flag("--json", as_json, "JSON output");

  int example_id = 1;
  auto* example = app.add_subcommand("example", "Run a built-in example");
  example->add_option("id", example_id, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  example->add_option("--period,-p", h_opt, "Example 1: sampling period");
  std::optional<double> mu_opt;
  example->add_option("--mu", mu_opt, "Example 1: observer gain");
  example->add_flag("--auto-mu", "Example 1: pick the gain from the design");
  example->add_option("--alpha", alpha, "Example 2: trigger decay rate");
  example->add_option("--out,-o", out_dir, "Output directory");
  example->add_option("--format,-f", format, "Trace format")
      ->check(CLI::IsMember({"csv", "json"}));
  example->add_flag("--json", as_json, "Print the summary as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests succeed; every other parse failure is an input error.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*simulate) return report_run(resolve_scenario(scenario_ref), out_dir, format, as_json);
    if (*design) return cmd_design(resolve_scenario(scenario_ref), h_opt, as_json);
    if (*mu) return cmd_mu_interval(resolve_scenario(scenario_ref), h_opt, as_json);
    if (*sweep) return cmd_sweep(resolve_scenario(scenario_ref), from, to, step, as_json);
    if (*bounds) return cmd_bounds(resolve_scenario(scenario_ref), alpha, k_max, k_step, power_cap);
    if (*regulator) return cmd_regulator(resolve_scenario(scenario_ref), as_json);
    if (*example) {
      Scenario sc;
      if (example_id == 1) {
        std::optional<double> m = example->count("--auto-mu") ? std::nullopt
                                                               : std::optional(mu_opt.value_or(25.0));
        sc = example1(h_opt.value_or(0.2), m);
      } else if (example_id == 2) {
        sc = example2(alpha.value_or(0.25));
      } else {
        sc = example3();
      }
      return report_run(sc, out_dir, format, as_json);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kInfeasibleDesign ? kExitInfeasible : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitOk;
}
