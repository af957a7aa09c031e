#include "ringbec/scenarios.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>

#include "ringbec/errors.hpp"

namespace ringbec {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

json params_json(const ModelParams& p) {
  return {{"n_wells", p.n_wells},     {"total_atoms", p.total_atoms},
          {"k_tilde", p.k_tilde},     {"lambda", p.lambda},
          {"interaction", p.interaction}, {"offsets", p.offsets}};
}

std::vector<double> deviation(const Trajectory& tr, int well) {
  auto v = tr.population(well);
  const double mean = tr.params.total_atoms / tr.params.n_wells;
  for (double& x : v) x -= mean;
  return v;
}

// Sample indices with time in [a, b].
std::pair<std::size_t, std::size_t> window(const std::vector<double>& t, double a, double b) {
  const double eps = 1e-9;
  const auto lo = std::lower_bound(t.begin(), t.end(), a - eps) - t.begin();
  const auto hi = std::upper_bound(t.begin(), t.end(), b + eps) - t.begin();
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

template <class T>
std::span<const T> slice(const std::vector<T>& v, std::pair<std::size_t, std::size_t> w) {
  return std::span<const T>(v).subspan(w.first, w.second - w.first);
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double half_peak_to_peak(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return 0.5 * (*hi - *lo);
}

void add_integration_stats(ScanReport& r, const Trajectory& tr) {
  r.add("norm_drift", tr.max_norm_drift, "", "max |sum N - N_T| / N_T over samples");
  r.add("accepted_steps", static_cast<double>(tr.accepted_steps), "", "integrator counter");
}

IntegratorOptions with_horizon(IntegratorOptions o, double max_time) {
  o.max_time = max_time;
  return o;
}

}  // namespace

// ---- report -------------------------------------------------------------

void ScanReport::add(std::string name, double value, std::string unit, std::string criterion) {
  for (auto& m : measurements) {
    if (m.name == name) {
      m = {std::move(name), value, std::move(unit), std::move(criterion)};
      return;
    }
  }
  measurements.push_back({std::move(name), value, std::move(unit), std::move(criterion)});
}

bool ScanReport::has(const std::string& name) const {
  return std::any_of(measurements.begin(), measurements.end(),
                     [&](const Measurement& m) { return m.name == name; });
}

const Measurement& ScanReport::at(const std::string& name) const {
  for (const auto& m : measurements) {
    if (m.name == name) return m;
  }
  throw MeasurementError("report has no measurement '" + name + "'");
}

json ScanReport::to_json() const {
  json ms = json::array();
  for (const auto& m : measurements) {
    json v = std::isfinite(m.value) ? json(m.value) : json(nullptr);
    ms.push_back({{"name", m.name}, {"value", v}, {"unit", m.unit}, {"criterion", m.criterion}});
  }
  return {{"scenario", scenario},
          {"inputs", inputs},
          {"measurements", ms},
          {"labels", labels},
          {"details", details}};
}

// ---- self-trapping ------------------------------------------------------

double imbalance_from_population(double n1, double total_atoms) {
  return (4.0 * n1 / total_atoms - 1.0) / 3.0;
}

double population_from_imbalance(double n, double total_atoms) {
  return total_atoms * (1.0 + 3.0 * n) / 4.0;
}

double selfconfine_residual(double n, double lambda) {
  if (n == 0.0) throw FormulaDomainError("self-confinement residual undefined at n = 0");
  if (!(lambda > 0.0)) throw InvalidParameter("Lambda must be positive");
  const double arg = 3.0 * std::sqrt(3.0) / (4.0 * lambda * std::abs(n));
  if (!(arg < kPi / 2.0)) {
    throw OutOfDomain("tangent argument " + std::to_string(arg) + " is not below pi/2");
  }
  return 2.0 / (3.0 * n) * std::tan(-3.0 * std::sqrt(3.0) / (4.0 * lambda * n)) + 1.0;
}

AnalyticThresholds critical_imbalance_analytic(double lambda, double total_atoms) {
  if (!(lambda > 0.0)) throw InvalidParameter("Lambda must be positive");
  // The residual diverges to -inf where the tangent argument reaches pi/2.
  const double n_edge = 3.0 * std::sqrt(3.0) / (2.0 * kPi * lambda);
  double lo = n_edge * (1.0 + 1e-12);
  double hi = 1.0;
  if (!(lo < hi)) throw RootNotFound("no admissible imbalance for this Lambda");
  double f_lo = selfconfine_residual(lo, lambda);
  const double f_hi = selfconfine_residual(hi, lambda);
  if (f_lo * f_hi > 0.0) throw RootNotFound("residual does not change sign on the bracket");
  while (hi - lo >= 1e-8) {
    const double mid = 0.5 * (lo + hi);
    const double f = selfconfine_residual(mid, lambda);
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  AnalyticThresholds a;
  a.n_star = 0.5 * (lo + hi);
  a.n_upper = total_atoms * (1.0 + 3.0 * a.n_star) / 4.0;
  a.n_lower = total_atoms * (1.0 - 3.0 * a.n_star) / 4.0;
  return a;
}

bool stays_trapped(const ModelParams& params, double n1, const ThresholdScanOptions& options) {
  const double rest = (params.total_atoms - n1) / (params.n_wells - 1);
  std::vector<double> pops(static_cast<std::size_t>(params.n_wells), rest);
  pops[0] = n1;
  const auto tr = integrate(populations_state(pops, {}), params, constant_schedule(params),
                            with_horizon(options.integrator, options.horizon));
  const double s0 = n1 - rest;
  if (s0 == 0.0) return false;
  for (const auto& s : tr.samples) {
    if ((s.populations[0] - s.populations[1]) * s0 <= 0.0) return false;
  }
  return true;
}

namespace {

// Classification over an increasing grid; `trapped_high` says on which side
// of the boundary the trapped points lie.
ThresholdBranch scan_branch(const std::function<bool(double)>& trapped,
                            std::vector<double> grid, bool trapped_high, double tolerance,
                            int& evaluations) {
  ThresholdBranch b;
  if (!trapped_high) std::reverse(grid.begin(), grid.end());
  // grid now runs from the untrapped side towards the trapped edge.
  std::vector<bool> cls;
  for (double x : grid) {
    cls.push_back(trapped(x));
    ++evaluations;
  }
  if (!cls.back()) return b;  // trapped region never reached
  // Last untrapped point before the trapped tail.
  std::size_t tail = cls.size() - 1;
  while (tail > 0 && cls[tail - 1]) --tail;
  if (tail == 0) {
    // Every grid point trapped: boundary lies before the first point.
    b.found = true;
    b.lo = b.hi = b.value = grid.front();
    return b;
  }
  double u = grid[tail - 1];
  double c = grid[tail];
  while (std::abs(c - u) > tolerance) {
    const double m = 0.5 * (u + c);
    ++evaluations;
    if (trapped(m)) {
      c = m;
    } else {
      u = m;
    }
  }
  b.found = true;
  const bool early = std::find(cls.begin(), cls.begin() + static_cast<long>(tail), true) !=
                     cls.begin() + static_cast<long>(tail);
  b.monotonic = !early;
  double far = u;
  if (early) {
    // Widest consistent bracket: from the untrapped point preceding the
    // first trapped grid point to the start of the trapped tail.
    const auto first = static_cast<std::size_t>(
        std::find(cls.begin(), cls.end(), true) - cls.begin());
    far = first > 0 ? grid[first - 1] : grid[first];
  }
  b.lo = std::min(far, c);
  b.hi = std::max(far, c);
  b.value = 0.5 * (b.lo + b.hi);
  return b;
}

}  // namespace

SimulatedThresholds critical_imbalance_simulated(const ModelParams& params,
                                                 const ThresholdScanOptions& options) {
  if (!(options.horizon >= 10.0)) throw InvalidParameter("threshold horizon must be >= 10/omega_R");
  if (!(options.grid_fraction > 0.0) || !(options.tolerance > 0.0)) {
    throw InvalidParameter("grid step and tolerance must be positive");
  }
  const double nt = params.total_atoms;
  const double mid = nt / params.n_wells;
  const double step = options.grid_fraction * nt;
  std::vector<double> upper;
  std::vector<double> lower;
  for (int k = 1;; ++k) {
    const double x = k * step;
    if (x >= nt - 0.5 * step) break;
    if (std::abs(x - mid) < 0.5 * step) continue;
    (x < mid ? lower : upper).push_back(x);
  }
  SimulatedThresholds r;
  r.horizon = options.horizon;
  r.resolution = options.tolerance * nt;
  auto trapped = [&](double n1) { return stays_trapped(params, n1, options); };
  r.confined = scan_branch(trapped, upper, true, r.resolution, r.evaluations);
  r.depleted = scan_branch(trapped, lower, false, r.resolution, r.evaluations);
  return r;
}

ScanReport threshold_report(const ModelParams& params, const ThresholdScanOptions& options) {
  ScanReport r;
  r.scenario = "scan-threshold";
  r.inputs = {{"params", params_json(params)},
              {"horizon", options.horizon},
              {"grid_fraction", options.grid_fraction},
              {"tolerance", options.tolerance},
              {"integrator", options.integrator.to_json()}};
  const double nt = params.total_atoms;
  std::optional<AnalyticThresholds> a;
  try {
    a = critical_imbalance_analytic(params.lambda, nt);
    const std::string root = "bisection of the self-confinement residual to |dn| < 1e-8";
    r.add("n_star", a->n_star, "", root);
    r.add("N_upper", a->n_upper, "atoms", root);
    r.add("N_lower", a->n_lower, "atoms", root);
  } catch (const RootNotFound&) {
    r.labels["analytic"] = "root-not-found";
  }

  const auto s = critical_imbalance_simulated(params, options);
  const std::string crit = "sign persistence of N1 - N2 over " + std::to_string(options.horizon) +
                           "/omega_R, grid " + std::to_string(options.grid_fraction) +
                           " N_T, bisection to " + std::to_string(options.tolerance) + " N_T";
  auto branch = [&](const std::string& name, const ThresholdBranch& b) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.add(name, b.found ? b.value : nan, "atoms", crit);
    r.add(name + "_lo", b.found ? b.lo : nan, "atoms", crit);
    r.add(name + "_hi", b.found ? b.hi : nan, "atoms", crit);
    r.labels[name] = !b.found ? "not-found" : (b.monotonic ? "point" : "non-monotonic-bracket");
    if (b.found) {
      const double n = imbalance_from_population(b.value, nt);
      if (n != 0.0) {
        try {
          r.add(name + "_residual", selfconfine_residual(n, params.lambda), "",
                "self-confinement residual at the simulated boundary");
        } catch (const Error&) {
          r.labels[name + "_residual"] = "out-of-domain";
        }
      }
    }
  };
  branch("N_conf", s.confined);
  branch("N_depl", s.depleted);
  r.add("evaluations", s.evaluations, "", "integrations performed");
  if (a && s.confined.found && s.depleted.found) {
    const bool ordered = s.depleted.value < a->n_lower && a->n_lower < nt / 4 &&
                         nt / 4 < a->n_upper && a->n_upper < s.confined.value;
    r.labels["ordering"] = ordered ? "holds" : "violated";
  }
  return r;
}

// ---- small-amplitude driving --------------------------------------------

double default_drive_frequency(const ModelParams& params) {
  return parametric_resonance_frequency(params);
}

std::vector<double> deviation_envelope(const Trajectory& tr) {
  const int n = tr.params.n_wells;
  const double mean = tr.params.total_atoms / n;
  std::vector<double> a;
  a.reserve(tr.samples.size());
  for (const auto& s : tr.samples) {
    double sum = 0.0;
    for (double x : s.populations) sum += (x - mean) * (x - mean);
    a.push_back(std::sqrt(2.0 * sum / n));
  }
  return a;
}

namespace {

struct Circulation {
  double period = 0.0;
  std::vector<int> lags;  // samples, pairs (i, i+1)
  std::vector<double> lag_fractions;
  int direction = 0;
};

Circulation measure_circulation(const Trajectory& tr, double t0, double t1) {
  const auto t = tr.times();
  const auto w = window(t, t0, t1);
  Circulation c;
  const auto d0 = deviation(tr, 0);
  const auto est = dominant_frequency(slice(t, w), slice(d0, w));
  c.period = 2.0 * kPi / est.frequency;
  const double dt = tr.options.sample_interval;
  const int max_lag = std::max(1, static_cast<int>(std::floor(0.5 * c.period / dt)));
  const int n = tr.params.n_wells;
  for (int i = 0; i < n; ++i) {
    const auto a = deviation(tr, i);
    const auto b = deviation(tr, (i + 1) % n);
    const int lag = crosscorr_lag(slice(a, w), slice(b, w), max_lag);
    c.lags.push_back(lag);
    c.lag_fractions.push_back(lag * dt / c.period);
  }
  // Lags near 0 or half a period belong to standing waves.
  const double f = c.lag_fractions[0];
  c.direction = (f > 0.05 && f < 0.45) ? 1 : ((f < -0.05 && f > -0.45) ? -1 : 0);
  return c;
}

}  // namespace

ScanReport analyze_small_amplitude(const Trajectory& tr, std::optional<double> tau_stop) {
  const auto& params = tr.params;
  ScanReport r;
  r.scenario = "small-amplitude";
  add_integration_stats(r, tr);

  const auto t = tr.times();
  const double max_time = t.back();
  const auto env = deviation_envelope(tr);
  const double drive_end = tau_stop ? std::min(*tau_stop, max_time) : max_time;
  const auto wd = window(t, 0.0, drive_end);
  r.add("growth_factor", max_abs(slice(env, wd)) / env.front(), "",
        "max envelope while driven over envelope at t = 0; envelope sqrt(2/n sum dev^2)");
  double peak = 0.0;
  for (int i = 0; i < params.n_wells; ++i) peak = std::max(peak, max_abs(deviation(tr, i)));
  r.add("peak_deviation", peak, "atoms", "max_i,t |N_i - N_T/n|");

  double c0 = 0.0;
  double c1 = max_time;
  if (tau_stop && *tau_stop < max_time) {
    const double tau = *tau_stop;
    c0 = tau;
    c1 = std::min(3.0 * tau, max_time);
    const auto wi = window(t, tau, tau);
    const double a_tau = env[wi.first];
    const auto ws = window(t, tau, c1);
    double spread = 0.0;
    for (double a : slice(env, ws)) spread = std::max(spread, std::abs(a / a_tau - 1.0));
    r.add("envelope_at_stop", a_tau, "atoms", "envelope sample at tau");
    r.add("post_stop_stability", spread, "",
          "max |A(t)/A(tau) - 1| for t in [tau, 3 tau]");
  } else {
    const auto beats = dominant_frequency(t, env);
    r.add("beat_amplitude", peak, "atoms", "max_i,t |N_i - N_T/n| over the run");
    r.add("beat_period", 2.0 * kPi / beats.frequency, "1/omega_R",
          "2 pi / dominant frequency of the envelope (Hann, parabolic peak)");
  }
  const auto circ = measure_circulation(tr, c0, c1);
  r.add("oscillation_period", circ.period, "1/omega_R",
        "2 pi / dominant frequency of N_1 - N_T/n on the analysis window");
  for (std::size_t i = 0; i < circ.lags.size(); ++i) {
    r.add("lag_" + std::to_string(i + 1) + "_" + std::to_string((i + 1) % circ.lags.size() + 1),
          circ.lag_fractions[i], "periods",
          "cross-correlation lag between adjacent deviations, |lag| <= half a period");
  }
  r.add("direction", circ.direction, "",
        "sign of the lag from well 1 to well 2; 0 when within 0.05 periods of 0 or 1/2");
  r.details["analysis_window"] = {c0, c1};
  return r;
}

ScenarioResult run_small_amplitude(const ModelParams& params, const SmallAmplitudeOptions& o) {
  const double w = o.frequency.value_or(default_drive_frequency(params));
  auto schedule = resonant_modulation(params, o.depth, w, o.phi);
  if (o.tau_stop) schedule = stop_modulation(schedule, *o.tau_stop, params.k_tilde);

  ScenarioResult res;
  res.trajectory = integrate(seed_imbalance_state(params, o.seed_fraction), params, schedule,
                             with_horizon(o.integrator, o.max_time));
  res.report = analyze_small_amplitude(res.trajectory, o.tau_stop);
  res.report.inputs = {{"params", params_json(params)},
                       {"seed_fraction", o.seed_fraction},
                       {"depth", o.depth},
                       {"frequency", w},
                       {"phi", o.phi},
                       {"tau_stop", o.tau_stop ? json(*o.tau_stop) : json(nullptr)},
                       {"max_time", o.max_time},
                       {"integrator", o.integrator.to_json()}};
  return res;
}

ScanReport scan_drive_phase(const ModelParams& params, const SmallAmplitudeOptions& options) {
  ScanReport r;
  r.scenario = "drive-phase-scan";
  r.inputs = {{"params", params_json(params)},
              {"depth", options.depth},
              {"frequency", options.frequency.value_or(default_drive_frequency(params))},
              {"tau_stop", options.tau_stop ? json(*options.tau_stop) : json(nullptr)}};
  json runs = json::array();
  const char* names[] = {"0", "pi/2", "pi", "3pi/2"};
  for (int k = 0; k < 4; ++k) {
    auto o = options;
    o.phi = k * kPi / 2.0;
    const auto res = run_small_amplitude(params, o);
    const auto& m = res.report;
    const std::string tag = "phi_" + std::to_string(k);
    r.add(tag + "_direction", m.value("direction"), "", "sign of the lag from well 1 to well 2");
    r.add(tag + "_lag_1_2", m.value("lag_1_2"), "periods", m.at("lag_1_2").criterion);
    r.add(tag + "_growth", m.value("growth_factor"), "", m.at("growth_factor").criterion);
    runs.push_back({{"phi", names[k]}, {"report", m.to_json()}});
  }
  r.details["runs"] = runs;
  return r;
}

// ---- persistent current -------------------------------------------------

ScanReport analyze_persistent_current(const Trajectory& tr, const CurrentAnalysis& o) {
  const auto& params = tr.params;
  ScanReport r;
  r.scenario = "persistent-current";
  add_integration_stats(r, tr);

  const int n = params.n_wells;
  const double mean = params.total_atoms / n;
  const auto t = tr.times();
  const double max_time = t.back();
  const double flat_end = o.t_cut ? *o.t_cut : max_time;
  double flat = 0.0;
  for (const auto& s : tr.samples) {
    if (s.time >= flat_end) break;
    for (double x : s.populations) flat = std::max(flat, std::abs(x - mean) / mean);
  }
  r.add("flatness", flat, "", "max |N_i - N_T/n| / (N_T/n) before the cut");
  bool winding_kept = true;
  for (const auto& s : tr.samples) {
    if (s.time >= flat_end) break;
    if (!s.winding || *s.winding != o.winding) winding_kept = false;
  }
  r.labels["winding_conserved"] = winding_kept;

  if (o.t_cut && *o.t_cut < max_time) {
    const double tc = *o.t_cut;
    const auto w = window(t, tc, max_time);
    // The well that starts filling first after the cut.
    int filling = 0;
    for (std::size_t k = w.first + 1; k < w.second; ++k) {
      double gain = 0.0;
      for (int i = 0; i < n; ++i) {
        const double g = tr.samples[k].populations[i] - tr.samples[w.first].populations[i];
        if (g > gain) {
          gain = g;
          filling = i;
        }
      }
      if (gain > 1e-6 * params.total_atoms) break;
    }
    const auto p = tr.population(filling);
    std::size_t k = w.first;
    while (k + 1 < w.second && p[k + 1] >= p[k]) ++k;
    const bool falls = k + 1 < w.second;
    r.add("filling_well", filling + 1, "", "well (1-based) with the largest gain after the cut");
    r.add("peak_time", t[k], "1/omega_R", "end of the monotonic rise after the cut");
    r.add("peak_population", p[k], "atoms", "population at the end of the rise");
    r.labels["falls_after_peak"] = falls;
    const int upstream = o.cut_link;  // well i feeds link i
    r.labels["filling_is_upstream"] = filling == upstream;
  }
  if (o.bottleneck) {
    double amp = 0.0;
    for (int i = 0; i < n; ++i) amp = std::max(amp, half_peak_to_peak(tr.population(i)));
    r.add("oscillation_amplitude", amp, "atoms", "max_i half peak-to-peak of N_i over the run");
    try {
      const auto est = dominant_frequency(t, tr.population(0));
      r.add("oscillation_period", 2.0 * kPi / est.frequency, "1/omega_R",
            "2 pi / dominant frequency of N_1 over the run");
    } catch (const MeasurementError&) {
      r.labels["oscillation_period"] = "no-peak";
    }
  }
  return r;
}

ScenarioResult run_persistent_current(const ModelParams& params,
                                      const PersistentCurrentOptions& o) {
  auto schedule = constant_schedule(params);
  if (o.bottleneck_factor) schedule = bottleneck(schedule, o.bottleneck_link, *o.bottleneck_factor);
  if (o.t_cut) schedule = cut_link(schedule, o.cut_link, *o.t_cut);

  ScenarioResult res;
  res.trajectory = integrate(winding_state(params, o.winding), params, schedule,
                             with_horizon(o.integrator, o.max_time));
  res.report = analyze_persistent_current(
      res.trajectory, {o.winding, o.t_cut, o.cut_link, o.bottleneck_factor.has_value()});
  res.report.inputs = {
      {"params", params_json(params)},
      {"winding", o.winding},
      {"t_cut", o.t_cut ? json(*o.t_cut) : json(nullptr)},
      {"cut_link", o.cut_link},
      {"bottleneck_factor", o.bottleneck_factor ? json(*o.bottleneck_factor) : json(nullptr)},
      {"bottleneck_link", o.bottleneck_link},
      {"max_time", o.max_time},
      {"integrator", o.integrator.to_json()}};
  return res;
}

// ---- conveyor -----------------------------------------------------------

std::vector<double> random_phases(int n_wells, unsigned seed) {
  std::mt19937 gen(seed);
  std::vector<double> p(static_cast<std::size_t>(n_wells));
  // Raw 32-bit draws keep the sequence identical across standard libraries.
  for (double& x : p) x = 2.0 * kPi * (static_cast<double>(gen()) / 4294967296.0);
  return p;
}

ScenarioResult run_conveyor(const ModelParams& params, const ConveyorRunOptions& o) {
  const int n = params.n_wells;
  if (!(o.initial_fraction >= 0.9 && o.initial_fraction <= 1.0)) {
    throw InvalidParameter("conveyor initial fraction must lie in [0.9, 1]");
  }
  if (!(o.hold_time >= 0.0)) throw InvalidParameter("hold time must be nonnegative");
  ConveyorOptions c;
  c.k_low = o.k_low.value_or(params.k_tilde);
  c.k_high = o.k_high.value_or(kConveyorHighRatio * params.k_tilde);
  c.start_well = o.start_well;
  c.direction = o.direction;
  c.n_turns = o.n_turns;
  c.mode = o.mode;
  const auto schedule = conveyor_schedule(params, c);

  std::vector<double> pops(static_cast<std::size_t>(n),
                           (1.0 - o.initial_fraction) * params.total_atoms / (n - 1));
  pops[static_cast<std::size_t>(o.start_well)] = o.initial_fraction * params.total_atoms;
  const auto state = populations_state(pops, o.phases);
  const int transfers = o.n_turns * n;

  // Feedback switch times are only known after integration, so the run
  // stops once the last switch plus the hold time has elapsed.
  double end = o.hold_time;
  std::vector<double> switch_times;
  if (const auto* ol = std::get_if<OpenLoop>(&o.mode)) {
    double acc = 0.0;
    for (int s = 0; s < transfers; ++s) {
      acc += ol->durations.size() == 1 ? ol->durations[0] : ol->durations[static_cast<std::size_t>(s)];
      switch_times.push_back(acc);
    }
    end += acc;
  } else {
    end += transfers * std::get<Feedback>(o.mode).timeout;
  }

  ScenarioResult res;
  auto opts = with_horizon(o.integrator, end);
  if (std::holds_alternative<Feedback>(o.mode) && transfers > 0) opts.settle_time = o.hold_time;
  res.trajectory = integrate(state, params, schedule, opts);
  res.report = analyze_conveyor(res.trajectory,
                                {o.start_well, o.direction, o.hold_time, switch_times});
  res.report.inputs = {{"params", params_json(params)},
                       {"initial_fraction", o.initial_fraction},
                       {"n_turns", o.n_turns},
                       {"k_low", c.k_low},
                       {"k_high", c.k_high},
                       {"start_well", o.start_well},
                       {"direction", o.direction},
                       {"phases", state.phases()},
                       {"hold_time", o.hold_time},
                       {"schedule", schedule.describe()},
                       {"integrator", o.integrator.to_json()}};
  return res;
}

ScanReport analyze_conveyor(const Trajectory& tr, const ConveyorAnalysis& o) {
  const auto& params = tr.params;
  const int n = params.n_wells;
  ScanReport r;
  r.scenario = "conveyor";
  add_integration_stats(r, tr);
  auto switch_times = o.switch_times;
  for (const auto& e : tr.switches) switch_times.push_back(e.time);

  const auto t = tr.times();
  auto nearest = [&](double time) {
    const auto w = window(t, time, time);
    std::size_t k = std::min(w.first, t.size() - 1);
    if (k > 0 && std::abs(t[k - 1] - time) < std::abs(t[k] - time)) --k;
    return k;
  };
  std::vector<double> fid;
  for (std::size_t s = 0; s < switch_times.size(); ++s) {
    if (switch_times[s] > t.back() + 1e-9) break;
    const int dest = conveyor_link(n, o.start_well, o.direction, static_cast<int>(s));
    const int to = o.direction > 0 ? (dest + 1) % n : dest;
    fid.push_back(tr.samples[nearest(switch_times[s])].populations[static_cast<std::size_t>(to)] /
                  params.total_atoms);
  }
  const std::string fcrit = "N_destination / N_T at the switch sample";
  r.details["fidelities"] = fid;
  r.details["switch_times"] = switch_times;
  r.add("transfers", static_cast<double>(fid.size()), "", "segments completed");
  r.add("turns", static_cast<double>(fid.size()) / n, "", "transfers / n_wells");
  if (!fid.empty()) {
    r.add("min_fidelity", *std::min_element(fid.begin(), fid.end()), "", fcrit);
    r.add("mean_fidelity", mean(fid), "", fcrit);
  }

  // Hold phase after the last transfer.
  const double t_stop = switch_times.empty() ? 0.0 : switch_times.back();
  const auto& at_stop = tr.samples[nearest(t_stop)];
  const auto occ = static_cast<int>(std::max_element(at_stop.populations.begin(),
                                                     at_stop.populations.end()) -
                                    at_stop.populations.begin());
  const auto w = window(t, t_stop, t_stop + o.hold_time);
  const auto p = tr.population(occ);
  double dev = 0.0;
  for (double x : slice(p, w)) dev = std::max(dev, std::abs(x / at_stop.populations[static_cast<std::size_t>(occ)] - 1.0));
  r.add("occupied_well", occ + 1, "", "fullest well (1-based) when the modulation stops");
  r.add("hold_deviation", dev, "", "max |N(t)/N(t_stop) - 1| over the hold time");
  r.add("hold_time", std::min(o.hold_time, t.back() - t_stop), "1/omega_R", "observed hold span");
  return r;
}

ScanReport conveyor_phase_study(const ModelParams& params, const ConveyorRunOptions& options,
                                const std::vector<unsigned>& seeds) {
  ScanReport r;
  r.scenario = "conveyor-phase-study";
  r.inputs = {{"params", params_json(params)}, {"seeds", seeds}};
  std::vector<std::vector<double>> fids;
  json runs = json::array();
  double worst_min = 1.0;
  double worst_hold = 0.0;
  for (unsigned s : seeds) {
    auto o = options;
    o.phases = random_phases(params.n_wells, s);
    const auto res = run_conveyor(params, o);
    fids.push_back(res.report.details["fidelities"].get<std::vector<double>>());
    if (res.report.has("min_fidelity")) worst_min = std::min(worst_min, res.report.value("min_fidelity"));
    else worst_min = 0.0;
    worst_hold = std::max(worst_hold, res.report.value("hold_deviation"));
    runs.push_back({{"seed", s}, {"report", res.report.to_json()}});
  }
  std::size_t common = fids.empty() ? 0 : fids.front().size();
  for (const auto& f : fids) common = std::min(common, f.size());
  double spread = 0.0;
  for (std::size_t k = 0; k < common; ++k) {
    double lo = 1e300;
    double hi = -1e300;
    double sum = 0.0;
    for (const auto& f : fids) {
      lo = std::min(lo, f[k]);
      hi = std::max(hi, f[k]);
      sum += f[k];
    }
    spread = std::max(spread, (hi - lo) / (sum / static_cast<double>(fids.size())));
  }
  std::vector<double> means;
  for (const auto& f : fids) means.push_back(f.empty() ? 0.0 : mean(f));
  double mean_spread = 0.0;
  if (!means.empty()) {
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    mean_spread = (*hi - *lo) / mean(means);
  }
  r.add("min_transfers", static_cast<double>(common), "", "fewest transfers over the runs");
  r.add("worst_min_fidelity", worst_min, "", "lowest per-transfer fidelity over the runs");
  r.add("worst_hold_deviation", worst_hold, "", "largest hold deviation over the runs");
  r.add("fidelity_spread", spread, "",
        "max over transfers of (max - min) / mean fidelity across runs");
  r.add("mean_fidelity_spread", mean_spread, "", "(max - min) / mean of per-run mean fidelity");
  r.details["runs"] = runs;
  return r;
}

// ---- linear response ----------------------------------------------------

SpectralEstimate linearized_resonance_measured(const ModelParams& params,
                                               const ResonanceOptions& o) {
  const auto tr = integrate(seed_imbalance_state(params, o.perturbation), params,
                            constant_schedule(params), with_horizon(o.integrator, o.duration));
  return dominant_frequency(tr.times(), deviation(tr, 0));
}

ScanReport resonance_report(const ModelParams& params, const ResonanceOptions& o) {
  ScanReport r;
  r.scenario = "resonance";
  r.inputs = {{"params", params_json(params)},
              {"perturbation", o.perturbation},
              {"duration", o.duration},
              {"integrator", o.integrator.to_json()}};
  const auto est = linearized_resonance_measured(params, o);
  r.add("measured_frequency", est.frequency, "omega_R",
        "Hann-windowed FFT peak of N_1 - N_T/n with parabolic refinement");
  r.add("resolution", est.resolution, "omega_R", "FFT bin spacing");
  try {
    const double w = resonance_frequency(params);
    r.add("closed_form_frequency", w, "omega_R", "sqrt(3 U N_T K~ + 2 K~^2) / omega_R");
    r.add("relative_error", est.frequency / w - 1.0, "", "measured / closed form - 1");
  } catch (const FormulaDomainError&) {
    r.labels["closed_form_frequency"] = "not-applicable";
  }
  const double half = bogoliubov_frequency(params, kPi / 2.0);
  r.add("mode_frequency_quarter", half, "omega_R", "linear mode with wavenumber pi/2");
  r.add("mode_frequency_half", bogoliubov_frequency(params, kPi), "omega_R",
        "linear mode with wavenumber pi");
  if (params.n_wells % 4 == 0) {
    r.add("parametric_frequency", parametric_resonance_frequency(params), "omega_R",
          "twice the wavenumber pi/2 mode");
  }
  return r;
}

}  // namespace ringbec
