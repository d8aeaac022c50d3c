#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopreg/design.hpp"
#include "coopreg/interevent.hpp"
#include "coopreg/netgraph.hpp"
#include "coopreg/observer.hpp"
#include "coopreg/regulation.hpp"

namespace coopreg {

inline constexpr const char* kScenarioSchema = "coopreg.scenario/1";

struct FollowerSpec {
  FollowerModel model;
  Vector x0;
  ControllerConfig controller;
};

struct Scenario {
  std::string name;
  int follower_count = 1;
  std::vector<Digraph::Edge> edges;
  Matrix s;
  Vector v0;
  double h = 0.0;
  std::optional<double> mu;  // empty: pick the design midpoint
  std::vector<Vector> eta0;  // empty: zeros
  std::vector<TriggerFunction> observer_triggers{TriggerFunction::every_step()};
  std::vector<FollowerSpec> followers;  // empty: observers only
  double horizon = 0.0;
  long output_stride = 1;  // in observer sampling periods
  double eps_conv = 1e-3;
  double eps_reg = 1e-1;

  Digraph graph() const { return Digraph(follower_count, edges); }
  int dim() const { return static_cast<int>(s.rows()); }
  /// Initial estimates with the empty default expanded.
  std::vector<Vector> initial_estimates() const;
  /// Throws kDimensionMismatch / kInvalidInput on inconsistent fields.
  void validate() const;
};

/// The gain that run() will use: the explicit one, or the midpoint of the
/// admissible interval. Throws kInfeasibleDesign when AUTO has no interval
/// and kAssumptionViolated without a rooted spanning tree.
double resolve_gain(const Scenario& sc);

nlohmann::json to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j, const char* what);
nlohmann::json trigger_to_json(const TriggerFunction& f);
TriggerFunction trigger_from_json(const nlohmann::json& j);

/// Scenario-level inter-event analysis: error dynamics at the resolved gain,
/// contraction constants and the bound problem for the observer triggers.
struct BoundAnalysis {
  double mu = 0.0;
  ErrorDynamics dynamics;
  ContractionEstimate contraction;
  BoundProblem problem;
};

/// Needs exponential observer triggers sharing one alpha (kUnsupportedEnvelope
/// otherwise); sigma_m and sigma_M are the smallest and largest sigma.
BoundAnalysis analyze_bounds(const Scenario& sc, long k_cap = kDefaultPowerCap);

/// Scenarios transcribed from the worked examples.
Scenario example1(double h = 0.2, std::optional<double> mu = 25.0);
Scenario example2(double alpha = 0.25);
Scenario example3();

}  // namespace coopreg
