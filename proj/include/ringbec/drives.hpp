#pragma once

// Coupling schedules K(t). Times are in units of 1/omega_R, frequencies in
// units of omega_R (angular).
//
// A schedule is an immutable rule. Open-loop rules depend on time only.
// Feedback rules additionally carry a discrete ControlState that the
// integrator advances when the rule's Monitor fires; given (t, control) the
// couplings are still a pure function.

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbec/model.hpp"

namespace ringbec {

struct ControlState {
  int segment = 0;
  bool armed = false;
  double segment_start = 0.0;
};

/// Watch `direction * J_link`; once it exceeds `floor` the monitor is armed
/// and the first crossing to <= 0 ends the current segment.
struct Monitor {
  int link = 0;
  int direction = 1;
  double floor = 0.0;    // atoms per unit physical time
  double timeout = 0.0;  // 1/omega_R; segment must end within this
};

class ScheduleRule {
 public:
  virtual ~ScheduleRule() = default;
  virtual int n_wells() const = 0;
  virtual void couplings(double t, const ControlState& control,
                         std::span<double> out) const = 0;
  virtual std::vector<double> discontinuities() const { return {}; }
  virtual std::optional<Monitor> monitor(const ControlState&) const {
    return std::nullopt;
  }
  virtual nlohmann::json describe() const = 0;
};

class CouplingSchedule {
 public:
  CouplingSchedule() = default;
  explicit CouplingSchedule(std::shared_ptr<const ScheduleRule> rule,
                            std::vector<std::string> warnings = {});

  int n_wells() const { return rule_->n_wells(); }
  std::vector<double> at(double t, const ControlState& control = {}) const;
  void at(double t, const ControlState& control, std::span<double> out) const;

  /// Sorted, finite, strictly positive times where K jumps.
  std::vector<double> discontinuities() const;
  std::optional<Monitor> monitor(const ControlState& control) const {
    return rule_->monitor(control);
  }
  bool is_feedback() const { return rule_->monitor(ControlState{}).has_value(); }

  /// Name + parameter map; round-trips through schedule_from_json.
  nlohmann::json describe() const { return rule_->describe(); }
  std::string description() const { return describe().dump(); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::shared_ptr<const ScheduleRule>& rule() const { return rule_; }

 private:
  std::shared_ptr<const ScheduleRule> rule_;
  std::vector<std::string> warnings_;
};

CouplingSchedule constant_schedule(int n_wells, double k_tilde);
inline CouplingSchedule constant_schedule(const ModelParams& p) {
  return constant_schedule(p.n_wells, p.k_tilde);
}

/// K_i = K~ (1 + (-1)^i depth sin(w t + phi)) with i = 1..n. `frequency`
/// is w in units of omega_R. Requires an even ring so the sign pattern
/// closes on itself.
CouplingSchedule resonant_modulation(const ModelParams& params, double depth,
                                     double frequency, double phi);

/// Closed-form small-amplitude resonance sqrt(3 U N_T K~ + 2 K~^2), returned
/// in units of omega_R. Only defined for four wells.
double resonance_frequency(const ModelParams& params);

/// Bogoliubov frequency (units of omega_R) of the plane-wave mode with
/// wavenumber q on top of the uniform in-phase state, constant K = K~:
/// sqrt(e_q (e_q + 2 U N_T / n)), e_q = 2 K~ (1 - cos q).
double bogoliubov_frequency(const ModelParams& params, double q);

/// Drive frequency that parametrically amplifies the q = +-pi/2 pair under
/// the alternating modulation: twice the Bogoliubov frequency at q = pi/2.
/// Requires n_wells divisible by 4.
double parametric_resonance_frequency(const ModelParams& params);

/// Base schedule until `tau`, constant `k_tilde` on every link afterwards.
CouplingSchedule stop_modulation(const CouplingSchedule& base, double tau,
                                 double k_tilde);

/// Link `link` (0-based, joins wells link and link+1) carries the base
/// value for t < t_cut and zero from t_cut on.
CouplingSchedule cut_link(const CouplingSchedule& base, int link, double t_cut);

CouplingSchedule bottleneck(const CouplingSchedule& base, int link, double factor);

struct OpenLoop {
  std::vector<double> durations;  // one per transfer, 1/omega_R
};

struct Feedback {
  double floor_fraction = 1e-3;  // arming floor, units of N_T omega_R
  double timeout = 200.0;        // per transfer, 1/omega_R
};

struct ConveyorOptions {
  double k_low = 0.0;
  double k_high = 0.0;
  int start_well = 0;  // 0-based
  int direction = 1;   // +1: i -> i+1
  int n_turns = 1;
  std::variant<OpenLoop, Feedback> mode = Feedback{};
};

/// One link at K_high at a time (from the currently full well to its
/// successor), every other link at K_low; after n_turns * n_wells transfers
/// all links rest at K_low.
CouplingSchedule conveyor_schedule(const ModelParams& params,
                                   const ConveyorOptions& options);

/// Active link index of transfer `segment` for a conveyor.
int conveyor_link(int n_wells, int start_well, int direction, int segment);

/// Rebuilds a schedule from its describe() output.
CouplingSchedule schedule_from_json(const nlohmann::json& j, const ModelParams& params);

}  // namespace ringbec
