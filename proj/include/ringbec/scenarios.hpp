#pragma once

// Packaged experiment runners. Each returns the trajectory it integrated
// together with a report of the quantities measured on it.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbec/analysis.hpp"
#include "ringbec/drives.hpp"
#include "ringbec/integrator.hpp"
#include "ringbec/model.hpp"

namespace ringbec {

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string unit;       // "" for dimensionless
  std::string criterion;  // how the number was obtained
};

struct ScanReport {
  std::string scenario;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<Measurement> measurements;
  nlohmann::json labels = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();

  void add(std::string name, double value, std::string unit, std::string criterion);
  bool has(const std::string& name) const;
  const Measurement& at(const std::string& name) const;
  double value(const std::string& name) const { return at(name).value; }
  nlohmann::json to_json() const;
};

struct ScenarioResult {
  Trajectory trajectory;
  ScanReport report;
};

// ---- self-trapping ------------------------------------------------------

/// n = (4 N1 / N_T - 1) / 3: imbalance of well 1 against the mean of the
/// other three, in units of N_T.
double imbalance_from_population(double n1, double total_atoms);
double population_from_imbalance(double n, double total_atoms);

/// (2/(3n)) tan(-3 sqrt(3) / (4 Lambda n)) + 1. Positive means the
/// imbalance is predicted to stay trapped. Throws FormulaDomainError for
/// n == 0 and OutOfDomain once the tangent argument reaches pi/2.
double selfconfine_residual(double n, double lambda);

struct AnalyticThresholds {
  double n_star = 0.0;
  double n_upper = 0.0;  // atoms in well 1, confined branch
  double n_lower = 0.0;  // atoms in well 1, depleted branch
};

/// Root of selfconfine_residual by bisection to |dn| < 1e-8.
AnalyticThresholds critical_imbalance_analytic(double lambda, double total_atoms);

struct ThresholdBranch {
  bool found = false;
  bool monotonic = true;
  double value = 0.0;  // boundary estimate (bracket midpoint)
  double lo = 0.0;     // bracket holding the boundary
  double hi = 0.0;
};

struct SimulatedThresholds {
  ThresholdBranch confined;  // smallest N1 above N_T/4 that stays trapped
  ThresholdBranch depleted;  // largest N1 below N_T/4 that stays trapped
  double horizon = 0.0;
  double resolution = 0.0;  // atoms
  int evaluations = 0;
};

struct ThresholdScanOptions {
  double horizon = 20.0;       // 1/omega_R
  double grid_fraction = 0.01;  // coarse grid step, fraction of N_T
  double tolerance = 0.005;    // final bracket width, fraction of N_T
  IntegratorOptions integrator{};
};

/// True when N1 - N2 keeps its initial sign over the horizon for the
/// state (N1, (N_T-N1)/3, ...) with all phases equal.
bool stays_trapped(const ModelParams& params, double n1, const ThresholdScanOptions& options);

/// Coarse grid scan of each branch followed by bisection of the
/// outermost transition. A branch whose classification flips more than
/// once is reported as a bracket spanning every flip.
SimulatedThresholds critical_imbalance_simulated(const ModelParams& params,
                                                 const ThresholdScanOptions& options = {});

ScanReport threshold_report(const ModelParams& params, const ThresholdScanOptions& options = {});

// ---- small-amplitude driving --------------------------------------------

struct SmallAmplitudeOptions {
  double seed_fraction = 1e-3;  // excess in well 1, fraction of N_T
  double depth = 0.2;
  std::optional<double> frequency;  // omega_R units; parametric resonance if absent
  double phi = 1.5707963267948966;
  std::optional<double> tau_stop;  // 1/omega_R
  double max_time = 12.0;
  IntegratorOptions integrator{};
};

/// Drive frequency used when none is given.
double default_drive_frequency(const ModelParams& params);

/// sqrt(2/n sum_i (N_i - N_T/n)^2): the amplitude of a travelling wave.
std::vector<double> deviation_envelope(const Trajectory& trajectory);

/// Growth, post-stop envelope or beats, and circulation direction of a
/// driven trajectory. `tau_stop` is when the drive was switched off.
ScanReport analyze_small_amplitude(const Trajectory& trajectory,
                                   std::optional<double> tau_stop = std::nullopt);

ScenarioResult run_small_amplitude(const ModelParams& params,
                                   const SmallAmplitudeOptions& options = {});

/// Runs the drive at phi in {0, pi/2, pi, 3pi/2} and records the
/// circulation direction each one produces.
ScanReport scan_drive_phase(const ModelParams& params, const SmallAmplitudeOptions& options);

// ---- persistent current -------------------------------------------------

struct PersistentCurrentOptions {
  int winding = 1;
  std::optional<double> t_cut;  // 1/omega_R
  int cut_link = 3;              // 0-based link (i, i+1)
  std::optional<double> bottleneck_factor;
  int bottleneck_link = 0;
  double max_time = 10.0;
  IntegratorOptions integrator{};
};

struct CurrentAnalysis {
  int winding = 1;
  std::optional<double> t_cut;
  int cut_link = 3;
  bool bottleneck = false;
};

ScanReport analyze_persistent_current(const Trajectory& trajectory,
                                      const CurrentAnalysis& analysis);

ScenarioResult run_persistent_current(const ModelParams& params,
                                      const PersistentCurrentOptions& options = {});

// ---- conveyor -----------------------------------------------------------

// K_high / K~ for the conveyor at Lambda = 100: the middle of the window
// where feedback transfers stay above 94% for any initial phases.
inline constexpr double kConveyorHighRatio = 62.0;

struct ConveyorRunOptions {
  double initial_fraction = 0.97;
  int n_turns = 2;
  std::optional<double> k_low;   // defaults to K~
  std::optional<double> k_high;  // defaults to kConveyorHighRatio K~
  int start_well = 0;
  int direction = 1;
  std::variant<OpenLoop, Feedback> mode = Feedback{};
  std::vector<double> phases;  // empty: all zero
  double hold_time = 20.0;     // observation after the last transfer, 1/omega_R
  IntegratorOptions integrator{};
};

/// Phases drawn uniformly from [0, 2 pi) by a seeded Mersenne twister.
std::vector<double> random_phases(int n_wells, unsigned seed);

struct ConveyorAnalysis {
  int start_well = 0;
  int direction = 1;
  double hold_time = 20.0;
  std::vector<double> switch_times;  // open-loop switches; feedback ones come from the trajectory
};

ScanReport analyze_conveyor(const Trajectory& trajectory, const ConveyorAnalysis& analysis);

ScenarioResult run_conveyor(const ModelParams& params, const ConveyorRunOptions& options = {});

/// Repeats the conveyor for each seed's random phase vector and reports
/// the spread of the per-transfer fidelities.
ScanReport conveyor_phase_study(const ModelParams& params, const ConveyorRunOptions& options,
                                const std::vector<unsigned>& seeds);

// ---- linear response ----------------------------------------------------

struct ResonanceOptions {
  double perturbation = 1e-4;  // fraction of N_T moved into well 1
  double duration = 50.0;      // 1/omega_R
  IntegratorOptions integrator{};
};

/// Dominant frequency (omega_R units) of N_1 - N_T/n after a small
/// single-well perturbation of the uniform state.
SpectralEstimate linearized_resonance_measured(const ModelParams& params,
                                               const ResonanceOptions& options = {});

ScanReport resonance_report(const ModelParams& params, const ResonanceOptions& options = {});

}  // namespace ringbec
