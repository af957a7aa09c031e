#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ringbec/config.hpp"
#include "ringbec/errors.hpp"
#include "ringbec/integrator.hpp"
#include "ringbec/output.hpp"
#include "ringbec/scenarios.hpp"
#include "ringbec/validation.hpp"
#include "ringbec/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ringbec;

namespace {

struct Common {
  std::string config;
  std::string out_dir;
  std::string format;
  std::string name;
  bool quiet = false;
};

// A config file, a trajectory written by `simulate`, or a preset name.
RunConfig load_config(const Common& c) {
  RunConfig cfg;
  const fs::path path(c.config);
  if (!fs::exists(path)) {
    const auto& names = preset_names();
    if (std::find(names.begin(), names.end(), c.config) == names.end()) {
      throw ConfigError("no config file or preset named '" + c.config + "'");
    }
    cfg = parse_config(preset_text(c.config));
  } else if (path.extension() == ".csv" || path.extension() == ".jsonl") {
    cfg = config_from_trajectory_file(path);
  } else {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + c.config);
    std::stringstream ss;
    ss << f.rdbuf();
    cfg = parse_config(ss.str());
  }
  auto sections = cfg.sections;
  if (!c.out_dir.empty()) sections["output"]["dir"] = c.out_dir;
  if (!c.format.empty()) sections["output"]["format"] = c.format;
  if (!c.name.empty()) sections["output"]["name"] = c.name;
  cfg = config_from_json(sections);
  // Surface parameter errors while loading, not halfway through a run.
  const auto p = cfg.params();
  (void)cfg.initial_state(p);
  (void)cfg.schedule(p);
  cfg.integrator().validate();
  return cfg;
}

fs::path output_path(const RunConfig& cfg, const std::string& suffix) {
  return fs::path(cfg.output_dir()) / (cfg.output_name() + suffix);
}

void print_report(const ScanReport& r) {
  std::cout << r.scenario << "\n";
  for (const auto& m : r.measurements) {
    std::cout << "  " << m.name << " = " << m.value << (m.unit.empty() ? "" : " " + m.unit) << "\n";
  }
  for (const auto& [k, v] : r.labels.items()) std::cout << "  " << k << ": " << v.dump() << "\n";
}

std::vector<double> open_loop_switches(const json& sch, int n_wells) {
  std::vector<double> times;
  if (sch.at("mode").get<std::string>() != "open-loop") return times;
  const auto d = sch.at("durations").get<std::vector<double>>();
  double acc = 0.0;
  const int transfers = sch.at("n_turns").get<int>() * n_wells;
  for (int s = 0; s < transfers; ++s) {
    acc += d.size() == 1 ? d[0] : d.at(static_cast<std::size_t>(s));
    times.push_back(acc);
  }
  return times;
}

ScanReport free_evolution_report(const Trajectory& tr) {
  ScanReport r;
  r.scenario = "free-evolution";
  const auto& first = tr.samples.front().populations;
  const double sign0 = first[0] - first[1];
  bool kept = true;
  for (const auto& s : tr.samples) {
    if ((s.populations[0] - s.populations[1]) * sign0 <= 0.0) kept = false;
  }
  const double e0 = tr.samples.front().energy;
  double drift = 0.0;
  for (const auto& s : tr.samples) drift = std::max(drift, std::abs(s.energy - e0) / std::abs(e0));
  r.add("max_norm_drift", tr.max_norm_drift, "", "max |sum N - N_T| / N_T");
  r.add("max_energy_drift", drift, "", "max |E - E(0)| / |E(0)|");
  r.add("initial_imbalance", imbalance_from_population(first[0], tr.params.total_atoms), "",
        "(4 N_1 / N_T - 1) / 3");
  r.labels["stays_trapped"] = kept;
  return r;
}

ScanReport analyze(const RunConfig& cfg, const Trajectory& tr) {
  const auto& s = cfg.section("schedule");
  const std::string name = cfg.schedule_name();
  if (name == "resonant") {
    std::optional<double> stop;
    if (s.contains("stop")) stop = s.at("stop").get<double>();
    return analyze_small_amplitude(tr, stop);
  }
  if (name == "cut" || name == "bottleneck") {
    CurrentAnalysis a;
    a.winding = tr.samples.front().winding.value_or(0);
    if (name == "cut") {
      a.t_cut = s.at("t_cut").get<double>();
      a.cut_link = s.at("link").get<int>() - 1;
    } else {
      a.bottleneck = true;
    }
    return analyze_persistent_current(tr, a);
  }
  if (name == "conveyor") {
    return analyze_conveyor(tr, {s.at("start_well").get<int>() - 1, s.at("direction").get<int>(),
                                 cfg.hold_time(), open_loop_switches(s, tr.params.n_wells)});
  }
  return free_evolution_report(tr);
}

json with_header(const ScanReport& r, const RunConfig& cfg) {
  json j = r.to_json();
  j["version"] = kVersion;
  j["config_hash"] = config_hash(cfg);
  return j;
}

int cmd_simulate(const Common& c) {
  const auto cfg = load_config(c);
  const auto p = cfg.params();
  const auto tr = integrate(cfg.initial_state(p), p, cfg.schedule(p), cfg.integrator());
  const auto ext = cfg.output_format() == OutputFormat::Csv ? ".csv" : ".jsonl";
  write_trajectory(tr, output_path(cfg, ext), cfg.output_format(), make_header(cfg));
  const auto report = analyze(cfg, tr);
  write_json(with_header(report, cfg), output_path(cfg, ".report.json"));
  if (!c.quiet) {
    print_report(report);
    std::cout << "wrote " << output_path(cfg, ext).string() << "\n";
  }
  return 0;
}

int cmd_scan_threshold(const Common& c) {
  const auto cfg = load_config(c);
  const auto report = threshold_report(cfg.params(), cfg.threshold_options());
  write_json(with_header(report, cfg), output_path(cfg, ".thresholds.json"));
  if (!c.quiet) print_report(report);
  return 0;
}

int cmd_resonance(const Common& c) {
  const auto cfg = load_config(c);
  const auto p = cfg.params();
  const auto res = resonance_report(p, cfg.resonance_options());
  json out = {{"resonance", res.to_json()}};
  if (!c.quiet) print_report(res);
  const auto& s = cfg.section("schedule");
  if (cfg.schedule_name() == "resonant" || cfg.section("scan").at("phase_scan").get<bool>()) {
    SmallAmplitudeOptions o;
    const auto init = cfg.initial_state(p).populations();
    o.seed_fraction = (init[0] - p.total_atoms / p.n_wells) / p.total_atoms;
    if (cfg.schedule_name() == "resonant") {
      o.depth = s.at("depth").get<double>();
      o.frequency = cfg.drive_frequency(p);
      if (s.contains("stop")) o.tau_stop = s.at("stop").get<double>();
    }
    o.max_time = cfg.integrator().max_time;
    o.integrator = cfg.integrator();
    const auto scan = scan_drive_phase(p, o);
    out["phase_scan"] = scan.to_json();
    if (!c.quiet) print_report(scan);
  }
  out["version"] = kVersion;
  out["config_hash"] = config_hash(cfg);
  write_json(out, output_path(cfg, ".resonance.json"));
  return 0;
}

int cmd_conveyor(const Common& c) {
  const auto cfg = load_config(c);
  if (cfg.schedule_name() != "conveyor") throw ConfigError("schedule.name must be \"conveyor\"", 0, "schedule.name");
  const auto p = cfg.params();
  const auto tr = integrate(cfg.initial_state(p), p, cfg.schedule(p), cfg.integrator());
  const auto ext = cfg.output_format() == OutputFormat::Csv ? ".csv" : ".jsonl";
  write_trajectory(tr, output_path(cfg, ext), cfg.output_format(), make_header(cfg));
  const auto run = analyze(cfg, tr);

  const auto& s = cfg.section("schedule");
  ConveyorRunOptions o;
  const auto init = tr.samples.front().populations;
  o.start_well = s.at("start_well").get<int>() - 1;
  o.initial_fraction = init[static_cast<std::size_t>(o.start_well)] / p.total_atoms;
  o.n_turns = s.at("n_turns").get<int>();
  o.k_low = s.at("k_low").get<double>();
  o.k_high = s.at("k_high").get<double>();
  o.direction = s.at("direction").get<int>();
  if (s.at("mode").get<std::string>() == "open-loop") {
    o.mode = OpenLoop{s.at("durations").get<std::vector<double>>()};
  } else {
    o.mode = Feedback{s.at("floor_fraction").get<double>(), s.at("timeout").get<double>()};
  }
  o.hold_time = cfg.hold_time();
  o.integrator = cfg.integrator();
  const auto study = conveyor_phase_study(p, o, cfg.seeds());
  write_json({{"run", run.to_json()},
              {"phase_study", study.to_json()},
              {"version", kVersion},
              {"config_hash", config_hash(cfg)}},
             output_path(cfg, ".conveyor.json"));
  if (!c.quiet) {
    print_report(run);
    print_report(study);
  }
  return 0;
}

int cmd_validate(bool quiet) {
  bool ok = true;
  for (const auto& r : run_invariant_suite()) {
    ok = ok && r.passed;
    if (!quiet || !r.passed) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven four-well ring condensate simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common c;
  auto add_common = [&c](CLI::App* sub, const char* what) {
    sub->add_option("config", c.config, what)->required();
    sub->add_option("--name", c.name, "Override [output] name");
  };
  // Global flags; fallthrough lets them follow the subcommand too.
  app.add_option("--out-dir", c.out_dir, "Override [output] dir");
  app.add_option("--format", c.format, "Override [output] format (csv|jsonl)");
  app.add_flag("--quiet,-q", c.quiet, "Print only failures");
  app.fallthrough();
  auto* sim = app.add_subcommand("simulate", "Integrate a config and write the trajectory and its report");
  add_common(sim, "Config file, trajectory file, or preset name");
  auto* thr = app.add_subcommand("scan-threshold", "Self-trapping thresholds, analytic and simulated");
  add_common(thr, "Config file or preset name");
  auto* res = app.add_subcommand("resonance", "Linear resonance and drive-phase scan");
  add_common(res, "Config file or preset name");
  auto* conv = app.add_subcommand("conveyor", "Conveyor run plus the random-phase study");
  add_common(conv, "Config file or preset name");
  app.add_subcommand("validate", "Run the invariant checks on the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(c);
    if (thr->parsed()) return cmd_scan_threshold(c);
    if (res->parsed()) return cmd_resonance(c);
    if (conv->parsed()) return cmd_conveyor(c);
    return cmd_validate(c.quiet);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
