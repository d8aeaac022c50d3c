#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coopreg/observer.hpp"
#include "coopreg/scenario.hpp"

namespace coopreg {

struct TraceSample {
  double t = 0.0;
  Vector v;
  std::vector<Vector> eta;
  std::vector<double> eta_error;  // ||eta_i - v||
  std::vector<Vector> x;          // empty for observer-only scenarios
  std::vector<Vector> e;

  bool operator==(const TraceSample&) const = default;
};

struct ControllerEvent {
  int follower = 0;
  long index = 0;   // l, counts controller broadcasts from 0
  long sample = 0;  // m with t = m T
  double time = 0.0;

  bool operator==(const ControllerEvent&) const = default;
};

inline constexpr const char* kTraceSchema = "coopreg.trace/1";

struct Trace {
  std::string scenario;
  double h = 0.0;
  double mu = 0.0;
  int followers = 0;
  int dim = 0;
  std::vector<TraceSample> samples;
  std::vector<ObserverEvent> observer_events;
  std::vector<ControllerEvent> controller_events;

  bool operator==(const Trace&) const = default;

  /// max_i ||eta_i - v|| at the last sample; 0 for an empty trace.
  double final_estimation_error() const;
  /// max_i ||e_i|| at the last sample; 0 without follower models.
  double final_regulation_error() const;
};

/// Exact simulation on the merged grid of observer instants k h and
/// controller instants m T_i up to the horizon. Samples are recorded at
/// every output_stride-th observer instant.
Trace run(const Scenario& sc);

/// One row per sample: t, v_*, then per follower eta<i>_*, eta_err<i>,
/// x<i>_*, e<i>_*, e_norm<i>.
void write_trace_csv(const Trace& tr, std::ostream& out);
/// Columns follower, l, k, t_l, s_l.
void write_observer_events_csv(const Trace& tr, std::ostream& out);
/// Columns follower, l, m, t_l.
void write_controller_events_csv(const Trace& tr, std::ostream& out);

nlohmann::json trace_to_json(const Trace& tr);
Trace trace_from_json(const nlohmann::json& j);

/// Writes trace.{csv|json}, observer_events.csv and controller_events.csv into dir.
void export_trace(const Trace& tr, const std::string& dir, const std::string& format);

}  // namespace coopreg
