// Acceptance checks. Each criterion prints one line:
//   PASS|FAIL <name>: <measured values>
// Run with no arguments for all of them, or name the ones to run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ringbec/config.hpp"
#include "ringbec/drives.hpp"
#include "ringbec/integrator.hpp"
#include "ringbec/model.hpp"
#include "ringbec/scenarios.hpp"

using namespace ringbec;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = true;
  std::string detail;

  // Records one sub-check; the criterion passes only if all of them do.
  void check(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

ModelParams lam(double l) { return make_params(4, 1e5, 0.5, Lambda{l}); }

RunConfig preset(const std::string& name) { return parse_config(preset_text(name)); }

// ---- criteria -------------------------------------------------------------

Outcome conservation() {
  Outcome o;
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    const auto p = c.params();
    auto opts = c.integrator();
    opts.max_time = 100.0;
    opts.settle_time.reset();
    const auto tr = integrate(c.initial_state(p), p, c.schedule(p), opts);
    double norm = 0.0;
    double e_drift = 0.0;
    const double e0 = tr.samples.front().energy;
    for (const auto& s : tr.samples) {
      double sum = 0.0;
      for (double x : s.populations) sum += x;
      norm = std::max(norm, std::abs(sum - p.total_atoms) / p.total_atoms);
      e_drift = std::max(e_drift, std::abs(s.energy - e0) / std::abs(e0));
    }
    const bool ends = std::abs(tr.samples.back().time - 100.0) < 1e-9;
    o.check(ends && norm < 1e-9, name + " norm " + fmt(norm, 2));
    // Energy is conserved only while the couplings are fixed.
    if (c.schedule_name() == "constant" || c.schedule_name() == "bottleneck") {
      o.check(e_drift < 1e-8, name + " energy " + fmt(e_drift, 2));
    }
  }
  return o;
}

Outcome polar_oracle() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int states = 0;
  while (states < 1000) {
    const auto p = lam(500.0 * u(gen));
    std::vector<double> n(4);
    std::vector<double> th(4);
    std::vector<double> k(4);
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      n[i] = u(gen);
      sum += n[i];
      th[i] = 2 * kPi * u(gen);
      k[i] = 2 * p.k_tilde * u(gen);
    }
    for (auto& x : n) x *= p.total_atoms / sum;
    if (*std::min_element(n.begin(), n.end()) <= 1e-3 * p.total_atoms) continue;
    ++states;
    const auto s = populations_state(n, th);
    const auto expect = polar_from_complex(s.amplitudes, rhs_complex(s, p, k));
    const auto got = rhs_polar(to_polar(s), p, k);
    auto rel = [](const std::vector<double>& a, const std::vector<double>& b) {
      double d = 0.0;
      double m = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
      }
      return d / m;
    };
    worst = std::max({worst, rel(got.populations, expect.populations), rel(got.phases, expect.phases)});
  }
  Outcome o;
  o.check(worst < 1e-10, "1000 states, max relative difference " + fmt(worst, 2));
  return o;
}

Outcome resonance() {
  Outcome o;
  for (double l : {0.0, 100.0, 500.0}) {
    const auto r = resonance_report(lam(l));
    const double err = r.value("relative_error");
    o.check(std::abs(err) < 0.02, "Lambda " + fmt(l) + ": measured " + fmt(r.value("measured_frequency")) +
                                       " vs " + fmt(r.value("closed_form_frequency")) + " (" +
                                       fmt(100 * err, 3) + "%)");
  }
  return o;
}

Outcome fig2_regime() {
  Outcome o;
  const auto p = lam(500);
  SmallAmplitudeOptions opts;
  opts.tau_stop = 4.0;
  opts.max_time = 12.0;
  const auto r = run_small_amplitude(p, opts).report;
  const double stab = r.value("post_stop_stability");
  o.check(stab <= 0.2, "envelope on [tau, 3 tau] within " + fmt(100 * stab, 3) + "% of A(tau)");
  for (const char* name : {"lag_1_2", "lag_2_3", "lag_3_4", "lag_4_1"}) {
    const double lag = std::abs(r.value(name));
    o.check(std::abs(lag / 0.25 - 1.0) <= 0.2, std::string(name) + " " + fmt(lag, 3) + " periods");
  }
  const auto scan = scan_drive_phase(p, opts);
  int nonzero = 0;
  for (int k = 0; k < 2; ++k) {
    const double a = scan.value("phi_" + std::to_string(k) + "_direction");
    const double b = scan.value("phi_" + std::to_string(k + 2) + "_direction");
    if (a != 0.0) ++nonzero;
    o.check(b == -a, "direction at phi " + std::to_string(k) + " pi/2: " + fmt(a) + ", plus pi: " + fmt(b));
  }
  o.check(nonzero > 0, "a circulating phase exists");
  return o;
}

Outcome fig3_regime() {
  Outcome o;
  const auto p = lam(100);
  PersistentCurrentOptions flat;
  flat.max_time = 50;
  const auto rf = run_persistent_current(p, flat).report;
  o.check(rf.value("flatness") < 1e-3, "flatness over 50 " + fmt(rf.value("flatness"), 2));

  PersistentCurrentOptions cut;
  cut.t_cut = 0.5;
  cut.max_time = 10;
  const auto rc = run_persistent_current(p, cut).report;
  const double peak = rc.value("peak_time");
  o.check(rc.labels["filling_is_upstream"] == true && rc.labels["falls_after_peak"] == true,
          "upstream well " + fmt(rc.value("filling_well")) + " rises then falls");
  o.check(std::abs(peak / 2.0 - 1.0) <= 0.5, "peak at " + fmt(peak, 3) + " (2 +- 50%)");

  std::vector<double> amps;
  std::string list;
  for (double f : {1.2, 1.4, 1.6}) {
    PersistentCurrentOptions b;
    b.bottleneck_factor = f;
    b.max_time = 50;
    amps.push_back(run_persistent_current(p, b).report.value("oscillation_amplitude"));
    list += (list.empty() ? "" : "/") + fmt(amps.back());
  }
  o.check(amps[0] < amps[1] && amps[1] < amps[2], "bottleneck amplitudes " + list);
  return o;
}

Outcome thresholds() {
  Outcome o;
  const auto c = preset("fig4a");
  const auto p = c.params();
  const auto r = threshold_report(p, c.threshold_options());
  const double quarter = p.total_atoms / 4;
  const double up = r.value("N_upper");
  const double lo = r.value("N_lower");
  o.check(std::abs(up - 31750) <= 0.02 * quarter, "N_upper " + fmt(up, 6) + " vs 31750");
  o.check(std::abs(lo - 18250) <= 0.02 * quarter, "N_lower " + fmt(lo, 6) + " vs 18250");
  const double conf = r.value("N_conf");
  const double depl = r.value("N_depl");
  o.check(std::abs(conf / 35000 - 1) <= 0.1, "N_conf " + fmt(conf, 6) + " (" + r.labels["N_conf"].get<std::string>() + ")");
  o.check(std::abs(depl / 15000 - 1) <= 0.1, "N_depl " + fmt(depl, 6) + " (" + r.labels["N_depl"].get<std::string>() + ")");
  o.check(depl < lo && lo < quarter && quarter < up && up < conf, "ordering");
  return o;
}

Outcome conveyor() {
  Outcome o;
  const auto c = preset("fig5");
  const auto p = c.params();
  ConveyorRunOptions opts;
  opts.hold_time = 20;
  const auto r = conveyor_phase_study(p, opts, {1, 2, 3, 4});
  o.check(r.value("min_transfers") == 8, "transfers " + fmt(r.value("min_transfers")));
  o.check(r.value("worst_min_fidelity") >= 0.9, "worst fidelity " + fmt(r.value("worst_min_fidelity")));
  double held = 1e300;
  for (const auto& run : r.details["runs"]) {
    for (const auto& m : run["report"]["measurements"]) {
      if (m["name"] == "hold_time") held = std::min(held, m["value"].get<double>());
    }
  }
  o.check(held >= 20 - 1e-9 && r.value("worst_hold_deviation") <= 0.05,
          "hold deviation " + fmt(r.value("worst_hold_deviation"), 3) + " over " + fmt(held));
  o.check(r.value("fidelity_spread") < 0.05, "spread over 4 seeds " + fmt(100 * r.value("fidelity_spread"), 3) + "%");
  return o;
}

Outcome trends() {
  Outcome o;
  std::vector<double> amp;
  std::vector<double> period;
  std::string text;
  for (double l : {500.0, 200.0, 100.0}) {
    SmallAmplitudeOptions s;
    s.max_time = 100;
    const auto r = run_small_amplitude(lam(l), s).report;
    amp.push_back(r.value("beat_amplitude"));
    period.push_back(r.value("beat_period"));
    text += (text.empty() ? "" : ", ") + fmt(l) + ": " + fmt(amp.back()) + "/" + fmt(period.back());
  }
  o.check(amp[0] < amp[1] && amp[1] < amp[2] && period[0] < period[1] && period[1] < period[2],
          "beats (amplitude/period) " + text);

  amp.clear();
  period.clear();
  text.clear();
  for (double l : {50.0, 100.0, 200.0}) {
    PersistentCurrentOptions b;
    b.bottleneck_factor = 1.2;
    b.max_time = 50;
    const auto r = run_persistent_current(lam(l), b).report;
    amp.push_back(r.value("oscillation_amplitude"));
    period.push_back(r.has("oscillation_period") ? r.value("oscillation_period") : std::nan(""));
    text += (text.empty() ? "" : ", ") + fmt(l) + ": " + fmt(amp.back()) + "/" + fmt(period.back());
  }
  o.check(amp[0] < amp[1] && amp[1] < amp[2] && period[0] < period[1] && period[1] < period[2],
          "bottleneck (amplitude/period) " + text);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("ringbec_acceptance_" + std::to_string(std::random_device{}()));
  for (const auto& name : preset_names()) {
    bool same = true;
    for (const char* ext : {"csv", "jsonl"}) {
      std::string first;
      for (int run = 0; run < 2; ++run) {
        const auto dir = root / (std::to_string(run) + ext);
        const std::string cmd = std::string("\"") + RINGBEC_CLI + "\" -q --out-dir \"" + dir.string() +
                                "\" --format " + ext + " simulate " + name;
        if (std::system(cmd.c_str()) != 0) {
          same = false;
          break;
        }
        const auto text = slurp(dir / (name + "." + ext));
        if (run == 0) first = text;
        else same = same && !text.empty() && text == first;
      }
    }
    o.check(same, name);
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion> kCriteria = {
    {"conservation", conservation}, {"polar-oracle", polar_oracle}, {"resonance", resonance},
    {"fig2-regime", fig2_regime},   {"fig3-regime", fig3_regime},   {"thresholds", thresholds},
    {"conveyor", conveyor},         {"trends", trends},             {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail = std::string("error: ") + e.what();
    }
    std::cout << (out.passed ? "PASS " : "FAIL ") << c.name << ": " << out.detail << std::endl;
    if (!out.passed) ++failed;
  }
  for (const auto& w : wanted) {
    if (std::none_of(kCriteria.begin(), kCriteria.end(), [&](const Criterion& c) { return w == c.name; })) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  return failed == 0 ? 0 : 1;
}
