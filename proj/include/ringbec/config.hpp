#pragma once

// Run configuration in a flat sectioned key = value format:
//
//   [params]
//   total_atoms = 1e5
//   lambda = 100        # comment
//
// Values are numbers, "strings", true/false or [lists]. Wells and links
// are numbered from 1 in configuration files.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ringbec/drives.hpp"
#include "ringbec/integrator.hpp"
#include "ringbec/model.hpp"
#include "ringbec/scenarios.hpp"

namespace ringbec {

enum class OutputFormat { Csv, Jsonl };

std::string to_string(OutputFormat f);
OutputFormat format_from_string(const std::string& s);

/// Validated configuration with every default materialized. Each section
/// is a JSON object whose keys follow the documented schema.
struct RunConfig {
  nlohmann::json sections = nlohmann::json::object();

  const nlohmann::json& section(const std::string& name) const { return sections.at(name); }

  ModelParams params() const;
  RingState initial_state(const ModelParams& params) const;
  CouplingSchedule schedule(const ModelParams& params) const;
  std::string schedule_name() const;
  /// Resolved drive frequency of a resonant schedule, omega_R units.
  double drive_frequency(const ModelParams& params) const;
  IntegratorOptions integrator() const;

  std::string output_dir() const;
  std::string output_name() const;
  OutputFormat output_format() const;

  ThresholdScanOptions threshold_options() const;
  ResonanceOptions resonance_options() const;
  std::vector<unsigned> seeds() const;
  double hold_time() const;

  bool operator==(const RunConfig& other) const { return sections == other.sections; }
};

/// Throws ConfigError carrying the offending line and field.
RunConfig parse_config(std::string_view text);

/// Builds a config from already-structured sections (same validation).
RunConfig config_from_json(const nlohmann::json& sections);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Same config with output.dir and output.name reset, so where a run was
/// written does not change what it is.
RunConfig without_location(const RunConfig& config);

/// 64-bit FNV-1a of the canonical text of without_location(config), as 16
/// hex digits.
std::string config_hash(const RunConfig& config);
std::uint64_t fnv1a(std::string_view bytes);

/// Parses "uniform", "winding(m)", "single-well(f)" or "seed-imbalance(e)".
RingState preset_state(const std::string& preset, const ModelParams& params);

/// Built-in scenario presets: fig2a, fig2b, fig3a, fig3b, fig4a, fig4b, fig5.
const std::vector<std::string>& preset_names();
std::string preset_text(const std::string& name);

}  // namespace ringbec
