#include "ringbec/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "ringbec/analysis.hpp"
#include "ringbec/config.hpp"
#include "ringbec/drives.hpp"
#include "ringbec/errors.hpp"
#include "ringbec/integrator.hpp"
#include "ringbec/model.hpp"

namespace ringbec {
namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

RingState random_state(std::mt19937_64& gen, const ModelParams& p, double floor_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> n(static_cast<std::size_t>(p.n_wells));
  std::vector<double> th(n.size());
  double sum = 0.0;
  for (auto& x : n) {
    x = floor_fraction + u(gen);
    sum += x;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    n[i] *= p.total_atoms / sum;
    th[i] = 2.0 * kPi * u(gen);
  }
  return populations_state(n, th);
}

IntegratorOptions horizon(double t) {
  IntegratorOptions o;
  o.max_time = t;
  return o;
}

// Preset config run for 100/omega_R with the feedback end condition removed.
Trajectory run_preset_long(const std::string& name) {
  auto sections = parse_config(preset_text(name)).sections;
  sections["integrator"]["max_time"] = 100.0;
  sections["integrator"].erase("settle_time");
  const auto cfg = config_from_json(sections);
  const auto p = cfg.params();
  return integrate(cfg.initial_state(p), p, cfg.schedule(p), cfg.integrator());
}

double max_population_gap(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < std::min(a.samples.size(), b.samples.size()); ++k) {
    for (std::size_t i = 0; i < a.samples[k].populations.size(); ++i) {
      d = std::max(d, std::abs(a.samples[k].populations[i] - b.samples[k].populations[i]));
    }
  }
  return d / a.params.total_atoms;
}

CheckResult polar_matches_complex() {
  std::mt19937_64 gen(7);
  const auto p = make_params(4, 1e5, 0.5, Lambda{100});
  const std::vector<double> k{0.5, 0.7, 0.3, 0.9};
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_state(gen, p, 1e-3);
    const auto dpsi = rhs_complex(s, p, k);
    const auto expect = polar_from_complex(s.amplitudes, dpsi);
    const auto got = rhs_polar(to_polar(s), p, k);
    for (std::size_t i = 0; i < 4; ++i) {
      const double scale_n = std::max(std::abs(expect.populations[i]), 1e-300);
      const double scale_t = std::max(std::abs(expect.phases[i]), 1e-300);
      worst = std::max(worst, std::abs(got.populations[i] - expect.populations[i]) / scale_n);
      worst = std::max(worst, std::abs(got.phases[i] - expect.phases[i]) / scale_t);
    }
  }
  return {"polar-matches-complex", worst < 1e-10, "max relative difference " + fmt(worst)};
}

CheckResult norm_conservation() {
  double worst = 0.0;
  std::string at;
  for (const auto& name : preset_names()) {
    const auto tr = run_preset_long(name);
    if (tr.max_norm_drift > worst) {
      worst = tr.max_norm_drift;
      at = name;
    }
  }
  return {"norm-conservation", worst < 1e-9,
          "worst relative norm drift " + fmt(worst) + (at.empty() ? "" : " (" + at + ")")};
}

CheckResult energy_conservation() {
  double worst = 0.0;
  for (const char* name : {"fig3b", "fig4a", "fig4b"}) {
    const auto tr = run_preset_long(name);
    const double e0 = tr.samples.front().energy;
    for (const auto& s : tr.samples) worst = std::max(worst, std::abs(s.energy - e0) / std::abs(e0));
  }
  return {"energy-conservation", worst < 1e-8, "worst relative energy drift " + fmt(worst)};
}

// Roundoff differences grow chaotically in the nonlinear regime, so the
// gauge and reversal checks use short horizons where the global error is
// still of the order of the step tolerance.
CheckResult gauge_invariance() {
  std::mt19937_64 gen(13);
  const auto p = make_params(4, 1e5, 0.5, Lambda{20});
  const auto s = random_state(gen, p, 0.1);
  auto r = s;
  for (auto& a : r.amplitudes) a *= std::polar(1.0, 1.234);
  const auto sch = bottleneck(constant_schedule(p), 0, 1.3);
  const auto o = horizon(5);
  const double d = max_population_gap(integrate(s, p, sch, o), integrate(r, p, sch, o));
  return {"gauge-invariance", d < std::max(o.abs_tol, o.rel_tol),
          "max population difference / N_T " + fmt(d)};
}

CheckResult cyclic_symmetry() {
  std::mt19937_64 gen(11);
  const auto p = make_params(4, 1e5, 0.5, Lambda{50});
  const auto s = random_state(gen, p, 0.1);
  const auto a = integrate(s, p, bottleneck(constant_schedule(p), 0, 1.4), horizon(10));
  RingState r = s;
  std::rotate(r.amplitudes.rbegin(), r.amplitudes.rbegin() + 1, r.amplitudes.rend());
  const auto b = integrate(r, p, bottleneck(constant_schedule(p), 1, 1.4), horizon(10));
  double d = 0.0;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      d = std::max(d, std::abs(a.samples[k].populations[i] - b.samples[k].populations[(i + 1) % 4]));
    }
  }
  d /= p.total_atoms;
  return {"cyclic-symmetry", d < 1e-8, "max population difference / N_T " + fmt(d)};
}

CheckResult time_reversal() {
  std::mt19937_64 gen(13);
  const auto p = make_params(4, 1e5, 0.5, Lambda{20});
  const auto s = random_state(gen, p, 0.1);
  const auto sch = constant_schedule(p);
  const auto o = horizon(1);
  const auto fwd = integrate(s, p, sch, o);
  RingState back = fwd.samples.back().state();
  for (auto& a : back.amplitudes) a = std::conj(a);
  back.time = 0.0;
  const auto rev = integrate(back, p, sch, o);
  double d = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    d = std::max(d, std::abs(std::conj(rev.samples.back().amplitudes[i]) - s.amplitudes[i]));
  }
  d /= std::sqrt(p.total_atoms);
  const double limit = 10.0 * std::max(o.abs_tol, o.rel_tol);
  return {"time-reversal", d < limit, "amplitude mismatch / sqrt(N_T) " + fmt(d)};
}

CheckResult decoupled_pairs() {
  std::mt19937_64 gen(17);
  const auto p = make_params(4, 1e5, 0.5, Lambda{10});
  const auto s = random_state(gen, p, 0.1);
  const auto sch = cut_link(cut_link(constant_schedule(p), 1, 0.0), 3, 0.0);
  const auto tr = integrate(s, p, sch, horizon(20));
  const auto n0 = s.populations();
  double d = 0.0;
  for (const auto& x : tr.samples) {
    d = std::max(d, std::abs(x.populations[0] + x.populations[1] - n0[0] - n0[1]));
    d = std::max(d, std::abs(x.populations[2] + x.populations[3] - n0[2] - n0[3]));
  }
  d /= p.total_atoms;
  return {"decoupled-pairs", d < 1e-9, "max pair-sum change / N_T " + fmt(d)};
}

CheckResult current_telescoping() {
  std::mt19937_64 gen(19);
  const auto p = make_params(5, 1e4, 0.5, Lambda{30});
  const std::vector<double> k{0.5, 0.2, 0.9, 0.4, 0.6};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto j = link_currents(random_state(gen, p, 0.0), p, k);
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < j.size(); ++i) {
      sum += j[(i + j.size() - 1) % j.size()] - j[i];
      scale = std::max(scale, std::abs(j[i]));
    }
    worst = std::max(worst, std::abs(sum) / scale);
  }
  return {"current-telescoping", worst < 1e-13, "max |sum dN| / max |J| " + fmt(worst)};
}

CheckResult winding_conservation() {
  const auto p = make_params(4, 1e5, 0.5, Lambda{100});
  const auto tr = integrate(winding_state(p, 1), p, constant_schedule(p), horizon(50));
  bool kept = true;
  double flat = 0.0;
  for (const auto& s : tr.samples) {
    if (!s.winding || *s.winding != 1) kept = false;
    for (double n : s.populations) flat = std::max(flat, std::abs(n / (p.total_atoms / 4) - 1.0));
  }
  return {"winding-conservation", kept && flat < 1e-3,
          std::string(kept ? "winding 1 throughout" : "winding changed") +
              ", max population deviation " + fmt(flat)};
}

CheckResult schedules_nonnegative() {
  const auto p = make_params(4, 1e5, 0.5, Lambda{100});
  ConveyorOptions c;
  c.k_low = 0.5;
  c.k_high = 31.0;
  c.mode = OpenLoop{{0.1}};
  const std::vector<CouplingSchedule> all = {
      resonant_modulation(p, 1.0, resonance_frequency(p), 0.3),
      stop_modulation(resonant_modulation(p, 1.0, 3.0, 1.0), 2.0, 0.5),
      cut_link(constant_schedule(p), 2, 0.5), bottleneck(constant_schedule(p), 0, 1.6),
      conveyor_schedule(p, c)};
  double lowest = 1e300;
  for (const auto& s : all) {
    for (int k = 0; k <= 4000; ++k) {
      const auto v = s.at(k * 1e-3);
      if (v.size() != 4) return {"schedules-nonnegative", false, "wrong vector length"};
      lowest = std::min(lowest, *std::min_element(v.begin(), v.end()));
    }
  }
  return {"schedules-nonnegative", lowest >= 0.0, "smallest coupling " + fmt(lowest)};
}

CheckResult conveyor_order() {
  bool ok = true;
  for (int dir : {1, -1}) {
    for (int start = 0; start < 4; ++start) {
      int prev = conveyor_link(4, start, dir, 0);
      for (int s = 1; s < 12; ++s) {
        const int l = conveyor_link(4, start, dir, s);
        if (l != ((prev + dir) % 4 + 4) % 4) ok = false;
        prev = l;
      }
    }
  }
  return {"conveyor-order", ok, ok ? "links advance one step per segment" : "order broken"};
}

CheckResult crosscorr_antisymmetry() {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> g;
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(200);
    std::vector<double> b(200);
    for (auto& x : a) x = g(gen);
    for (auto& x : b) x = g(gen);
    if (crosscorr_lag(a, b) != -crosscorr_lag(b, a)) ok = false;
  }
  return {"crosscorr-antisymmetry", ok, ok ? "lag(a,b) = -lag(b,a)" : "asymmetric lag"};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite() {
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
      {"polar-matches-complex", polar_matches_complex},
      {"norm-conservation", norm_conservation},
      {"energy-conservation", energy_conservation},
      {"gauge-invariance", gauge_invariance},
      {"cyclic-symmetry", cyclic_symmetry},
      {"time-reversal", time_reversal},
      {"decoupled-pairs", decoupled_pairs},
      {"current-telescoping", current_telescoping},
      {"winding-conservation", winding_conservation},
      {"schedules-nonnegative", schedules_nonnegative},
      {"conveyor-order", conveyor_order},
      {"crosscorr-antisymmetry", crosscorr_antisymmetry},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace ringbec
