#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbec/drives.hpp"
#include "ringbec/model.hpp"

namespace ringbec {

enum class Method { Rk4, DormandPrince45 };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct IntegratorOptions {
  Method method = Method::DormandPrince45;
  double dt = 1e-3;  // fixed-step size, 1/omega_R
  // Adaptive tolerances act on amplitudes normalized by sqrt(N_T).
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double sample_interval = 0.01;  // 1/omega_R
  double max_time = 10.0;         // 1/omega_R
  double min_step = 1e-12;        // adaptive step floor, 1/omega_R
  // With a feedback schedule: end this long after its last segment switch
  // (rounded up to a sample time) instead of at max_time.
  std::optional<double> settle_time;

  void validate() const;
  nlohmann::json to_json() const;
  static IntegratorOptions from_json(const nlohmann::json& j);
};

struct Sample {
  double time = 0.0;  // 1/omega_R
  std::vector<Complex> amplitudes;
  std::vector<double> populations;
  std::vector<double> phases;    // unwrapped along the trajectory
  std::vector<double> couplings;  // K at this time
  std::vector<double> currents;  // physical units (atoms per unit time)
  double energy = 0.0;
  std::optional<int> winding;

  RingState state() const { return {amplitudes, time}; }
};

/// A segment switch of a feedback schedule.
struct SwitchEvent {
  double time = 0.0;
  int segment = 0;  // segment that just ended
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<SwitchEvent> switches;
  ModelParams params;
  nlohmann::json schedule;
  IntegratorOptions options;
  std::vector<Complex> initial;
  std::string version;
  double max_norm_drift = 0.0;  // max |sum N - N_T| / N_T over samples
  long accepted_steps = 0;
  long rejected_steps = 0;

  bool empty() const { return samples.empty(); }
  std::vector<double> times() const;
  std::vector<double> population(int well) const;
  nlohmann::json metadata() const;
};

using Rhs = std::function<void(double t, std::span<const Complex> y, std::span<Complex> dy)>;

/// One classical fourth-order Runge-Kutta step of dy/dt = rhs(t, y).
std::vector<Complex> step_rk4(std::span<const Complex> y, double t, double dt, const Rhs& rhs);

/// Norm drift beyond this fraction of N_T fails trajectory validation.
inline constexpr double kNormDriftLimit = 1e-7;

Trajectory integrate(const RingState& state0, const ModelParams& params,
                     const CouplingSchedule& schedule, const IntegratorOptions& options);

/// Throws Error if the trajectory violates its invariants (time order,
/// finite states, norm drift <= kNormDriftLimit).
void validate_trajectory(const Trajectory& trajectory);

}  // namespace ringbec
