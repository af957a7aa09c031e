#include "ringbec/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "ringbec/errors.hpp"
#include "presets_data.hpp"

namespace ringbec {

using nlohmann::json;

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "jsonl"; }

OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "jsonl") return OutputFormat::Jsonl;
  throw ConfigError("unknown output format '" + s + "' (csv|jsonl)", 0, "output.format");
}

namespace {

enum class Type { Int, Num, Str, Bool, NumList, IntList, NumOrStr };

struct KeyDef {
  const char* name;
  Type type;
  json fallback;  // null: no default (required or optional per `required`)
  bool required = false;
};

const char* type_name(Type t) {
  switch (t) {
    case Type::Int: return "an integer";
    case Type::Num: return "a number";
    case Type::Str: return "a string";
    case Type::Bool: return "true or false";
    case Type::NumList: return "a list of numbers";
    case Type::IntList: return "a list of integers";
    case Type::NumOrStr: return "a number or a string";
  }
  return "";
}

const std::vector<std::string> kSectionOrder = {"params",     "initial", "schedule",
                                                "integrator", "output",  "scan"};

const std::vector<KeyDef>& schema(const std::string& section, const std::string& schedule) {
  static const std::vector<KeyDef> params = {
      {"n_wells", Type::Int, 4},
      {"total_atoms", Type::Num, nullptr, true},
      {"k_tilde", Type::Num, 0.5},
      {"lambda", Type::Num, nullptr},
      {"interaction", Type::Num, nullptr},
      {"offsets", Type::NumList, nullptr},
  };
  static const std::vector<KeyDef> initial = {
      {"preset", Type::Str, nullptr},
      {"populations", Type::NumList, nullptr},
      {"phases", Type::NumList, nullptr},
  };
  static const std::vector<KeyDef> constant = {{"name", Type::Str, "constant"},
                                               {"k", Type::Num, nullptr}};
  static const std::vector<KeyDef> resonant = {
      {"name", Type::Str, "constant"},     {"depth", Type::Num, 1.0},
      {"frequency", Type::NumOrStr, "closed-form"}, {"phi", Type::Num, 0.0},
      {"stop", Type::Num, nullptr},
  };
  static const std::vector<KeyDef> cut = {{"name", Type::Str, "constant"},
                                          {"link", Type::Int, nullptr},
                                          {"t_cut", Type::Num, 0.5}};
  static const std::vector<KeyDef> neck = {{"name", Type::Str, "constant"},
                                           {"link", Type::Int, 1},
                                           {"factor", Type::Num, nullptr, true}};
  static const std::vector<KeyDef> conveyor = {
      {"name", Type::Str, "constant"},  {"k_low", Type::Num, nullptr},
      {"k_high", Type::Num, nullptr},   {"start_well", Type::Int, 1},
      {"direction", Type::Int, 1},      {"n_turns", Type::Int, 2},
      {"mode", Type::Str, "feedback"},  {"floor_fraction", Type::Num, 1e-3},
      {"timeout", Type::Num, 200.0},    {"durations", Type::NumList, nullptr},
  };
  static const std::vector<KeyDef> integrator = {
      {"method", Type::Str, "dopri45"}, {"dt", Type::Num, 1e-3},
      {"abs_tol", Type::Num, 1e-11},    {"rel_tol", Type::Num, 1e-11},
      {"min_step", Type::Num, 1e-12},   {"max_time", Type::Num, 10.0},
      {"settle_time", Type::Num, nullptr},
  };
  static const std::vector<KeyDef> output = {
      {"dir", Type::Str, "."},
      {"name", Type::Str, "run"},
      {"format", Type::Str, "csv"},
      {"sample_interval", Type::Num, 0.01},
  };
  static const std::vector<KeyDef> scan = {
      {"horizon", Type::Num, 20.0},      {"grid_fraction", Type::Num, 0.01},
      {"tolerance", Type::Num, 0.005},   {"perturbation", Type::Num, 1e-4},
      {"duration", Type::Num, 50.0},     {"seeds", Type::IntList, json::array({1, 2, 3, 4})},
      {"hold_time", Type::Num, 20.0},    {"phase_scan", Type::Bool, false},
  };
  static const std::vector<KeyDef> none;
  if (section == "params") return params;
  if (section == "initial") return initial;
  if (section == "integrator") return integrator;
  if (section == "output") return output;
  if (section == "scan") return scan;
  if (section == "schedule") {
    if (schedule == "constant") return constant;
    if (schedule == "resonant") return resonant;
    if (schedule == "cut") return cut;
    if (schedule == "bottleneck") return neck;
    if (schedule == "conveyor") return conveyor;
  }
  return none;
}

// Line numbers of every key seen by the text parser ("section.key").
using LineMap = std::map<std::string, int>;

[[noreturn]] void fail(const std::string& msg, const LineMap& lines, const std::string& field) {
  const auto it = lines.find(field);
  const int line = it == lines.end() ? 0 : it->second;
  std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw ConfigError(where + field + ": " + msg, line, field);
}

bool is_integral(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15;
}

json coerce(const json& v, Type t, const LineMap& lines, const std::string& field) {
  auto bad = [&]() { fail("expected " + std::string(type_name(t)), lines, field); };
  switch (t) {
    case Type::Int:
      if (!is_integral(v)) bad();
      return static_cast<long long>(v.get<double>());
    case Type::Num:
      if (!v.is_number()) bad();
      return v.get<double>();
    case Type::Str:
      if (!v.is_string()) bad();
      return v;
    case Type::Bool:
      if (!v.is_boolean()) bad();
      return v;
    case Type::NumOrStr:
      if (v.is_string()) return v;
      if (!v.is_number()) bad();
      return v.get<double>();
    case Type::NumList:
    case Type::IntList: {
      if (!v.is_array()) bad();
      json out = json::array();
      for (const auto& e : v) {
        if (t == Type::IntList) {
          if (!is_integral(e)) bad();
          out.push_back(static_cast<long long>(e.get<double>()));
        } else {
          if (!e.is_number()) bad();
          out.push_back(e.get<double>());
        }
      }
      return out;
    }
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_number(const std::string& tok) {
  if (tok.empty()) return std::nullopt;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

json parse_scalar(const std::string& tok, int line, const std::string& field) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) ++i;
      else if (tok[i] == '"') throw ConfigError("line " + std::to_string(line) + ": " + field + ": stray quote", line, field);
      out.push_back(tok[i]);
    }
    return out;
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (auto v = parse_number(tok)) return *v;
  throw ConfigError("line " + std::to_string(line) + ": " + field + ": malformed value '" + tok + "'",
                    line, field);
}

json parse_value(const std::string& raw, int line, const std::string& field) {
  const std::string v = trim(raw);
  if (v.empty()) {
    throw ConfigError("line " + std::to_string(line) + ": " + field + ": missing value", line, field);
  }
  if (v.front() != '[') return parse_scalar(v, line, field);
  if (v.back() != ']') {
    throw ConfigError("line " + std::to_string(line) + ": " + field + ": unterminated list", line,
                      field);
  }
  json out = json::array();
  const std::string body = trim(std::string_view(v).substr(1, v.size() - 2));
  if (body.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = body.find(',', start);
    const std::string item = trim(std::string_view(body).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    out.push_back(parse_scalar(item, line, field));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

std::optional<double> preset_argument(const std::string& preset, const std::string& name) {
  const std::string head = name + "(";
  if (preset.rfind(head, 0) != 0 || preset.back() != ')') return std::nullopt;
  const auto v = parse_number(preset.substr(head.size(), preset.size() - head.size() - 1));
  if (!v) throw InvalidParameter("malformed argument in preset '" + preset + "'");
  return v;
}

RunConfig validate(json raw, const LineMap& lines) {
  if (!raw.is_object()) throw ConfigError("configuration must be a set of sections");
  for (const auto& [name, body] : raw.items()) {
    if (std::find(kSectionOrder.begin(), kSectionOrder.end(), name) == kSectionOrder.end()) {
      fail("unknown section", lines, name);
    }
    if (!body.is_object()) fail("section must hold key = value pairs", lines, name);
  }
  for (const auto& s : kSectionOrder) {
    if (!raw.contains(s)) raw[s] = json::object();
  }
  json& sch = raw["schedule"];
  if (!sch.contains("name")) sch["name"] = "constant";
  if (!sch["name"].is_string()) fail("expected a string", lines, "schedule.name");
  const std::string sname = sch["name"].get<std::string>();
  if (schema("schedule", sname).empty()) {
    fail("unknown schedule '" + sname + "' (constant|resonant|cut|bottleneck|conveyor)", lines,
         "schedule.name");
  }

  RunConfig cfg;
  for (const auto& s : kSectionOrder) {
    const auto& defs = schema(s, sname);
    json out = json::object();
    for (const auto& [key, value] : raw[s].items()) {
      const auto it = std::find_if(defs.begin(), defs.end(),
                                   [&](const KeyDef& d) { return key == d.name; });
      if (it == defs.end()) fail("unknown key", lines, s + "." + key);
      out[key] = coerce(value, it->type, lines, s + "." + key);
    }
    for (const auto& d : defs) {
      if (out.contains(d.name)) continue;
      if (d.required) fail("missing required key", lines, s + "." + d.name);
      if (!d.fallback.is_null()) out[d.name] = d.fallback;
    }
    cfg.sections[s] = out;
  }

  json& p = cfg.sections["params"];
  const bool has_l = p.contains("lambda");
  const bool has_u = p.contains("interaction");
  if (has_l && has_u) {
    const double from_u = p["interaction"].get<double>() * p["total_atoms"].get<double>() /
                          (2.0 * p["k_tilde"].get<double>());
    const double l = p["lambda"].get<double>();
    const std::string why = std::abs(from_u - l) > 1e-12 * std::max(1.0, std::abs(l))
                                ? "inconsistent values (interaction implies lambda = " +
                                      std::to_string(from_u) + ")"
                                : "give only one of them";
    fail("params.lambda and params.interaction conflict: " + why, lines, "params.interaction");
  }
  if (!has_l && !has_u) fail("one of lambda or interaction is required", lines, "params.lambda");
  const auto n = p["n_wells"].get<long long>();
  if (!p.contains("offsets")) p["offsets"] = std::vector<double>(static_cast<std::size_t>(std::max(0LL, n)), 0.0);

  ModelParams mp;
  try {
    mp = cfg.params();
  } catch (const InvalidParameter& e) {
    fail(e.what(), lines, "params");
  }

  json& ini = cfg.sections["initial"];
  const bool has_preset = ini.contains("preset");
  const bool has_pops = ini.contains("populations");
  if (has_preset == has_pops) {
    fail("give exactly one of preset or populations", lines,
         has_preset ? "initial.populations" : "initial.preset");
  }
  if (has_preset && ini.contains("phases")) {
    fail("phases go with populations, not with a preset", lines, "initial.phases");
  }
  if (has_pops && !ini.contains("phases")) {
    ini["phases"] = std::vector<double>(ini["populations"].size(), 0.0);
  }

  json& sc = cfg.sections["schedule"];
  const double kt = mp.k_tilde;
  if (sname == "constant" && !sc.contains("k")) sc["k"] = kt;
  if (sname == "cut" && !sc.contains("link")) sc["link"] = mp.n_wells;
  if (sname == "conveyor") {
    if (!sc.contains("k_low")) sc["k_low"] = kt;
    if (!sc.contains("k_high")) sc["k_high"] = kConveyorHighRatio * kt;
    const auto mode = sc["mode"].get<std::string>();
    if (mode != "feedback" && mode != "open-loop") {
      fail("mode must be feedback or open-loop", lines, "schedule.mode");
    }
    if (mode == "open-loop" && !sc.contains("durations")) {
      fail("open-loop mode needs durations", lines, "schedule.durations");
    }
    if (mode == "feedback" && sc.contains("durations")) {
      fail("durations only apply to open-loop mode", lines, "schedule.durations");
    }
  }
  if (sname == "resonant" && sc["frequency"].is_string()) {
    const auto f = sc["frequency"].get<std::string>();
    if (f != "closed-form" && f != "parametric") {
      fail("frequency must be a number, \"closed-form\" or \"parametric\"", lines,
           "schedule.frequency");
    }
  }

  try {
    (void)cfg.initial_state(mp);
  } catch (const Error& e) {
    fail(e.what(), lines, has_preset ? "initial.preset" : "initial.populations");
  }
  try {
    (void)cfg.schedule(mp);
  } catch (const Error& e) {
    fail(e.what(), lines, "schedule");
  }
  try {
    cfg.integrator().validate();
  } catch (const Error& e) {
    fail(e.what(), lines, "integrator");
  }
  try {
    (void)cfg.output_format();
  } catch (const ConfigError&) {
    fail("unknown output format (csv|jsonl)", lines, "output.format");
  }
  const auto& scan = cfg.sections["scan"];
  for (const char* k : {"horizon", "grid_fraction", "tolerance", "perturbation", "duration"}) {
    if (!(scan[k].get<double>() > 0.0)) fail("must be positive", lines, std::string("scan.") + k);
  }
  if (!(scan["hold_time"].get<double>() >= 0.0)) fail("must be nonnegative", lines, "scan.hold_time");
  for (const auto& s : scan["seeds"]) {
    if (s.get<long long>() < 0) fail("seeds must be nonnegative", lines, "scan.seeds");
  }
  return cfg;
}

// Shortest text that reads back to the same double.
std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_value(const json& v) {
  if (v.is_string()) {
    std::string out = "\"";
    for (char c : v.get<std::string>()) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    return out + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_value(v[i]);
  }
  return out + "]";
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json raw = json::object();
  LineMap lines;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header", lineno, s);
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!valid_identifier(section)) {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section name", lineno, section);
      }
      if (!raw.contains(section)) raw[section] = json::object();
      lines.emplace(section, lineno);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value", lineno, s);
    }
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string field = section + "." + key;
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + key + ": key outside a section",
                        lineno, key);
    }
    if (!valid_identifier(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": malformed key '" + key + "'", lineno, field);
    }
    if (raw[section].contains(key)) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + field + ": duplicate key", lineno, field);
    }
    raw[section][key] = parse_value(s.substr(eq + 1), lineno, field);
    lines[field] = lineno;
  }
  return validate(std::move(raw), lines);
}

RunConfig config_from_json(const json& sections) { return validate(sections, {}); }

std::string serialize_config(const RunConfig& config) {
  std::string out;
  const std::string sname = config.schedule_name();
  for (const auto& s : kSectionOrder) {
    if (!out.empty()) out += "\n";
    out += "[" + s + "]\n";
    const auto& body = config.sections.at(s);
    for (const auto& d : schema(s, sname)) {
      if (body.contains(d.name)) out += std::string(d.name) + " = " + format_value(body.at(d.name)) + "\n";
    }
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig without_location(const RunConfig& config) {
  RunConfig c = config;
  c.sections["output"]["dir"] = ".";
  c.sections["output"]["name"] = "run";
  return c;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_config(without_location(config)))));
  return buf;
}

RingState preset_state(const std::string& preset, const ModelParams& params) {
  if (preset == "uniform") return uniform_state(params);
  if (auto m = preset_argument(preset, "winding")) {
    if (*m != std::floor(*m)) throw InvalidParameter("winding number must be an integer");
    return winding_state(params, static_cast<int>(*m));
  }
  if (auto f = preset_argument(preset, "single-well")) return single_well_state(params, *f);
  if (auto e = preset_argument(preset, "seed-imbalance")) return seed_imbalance_state(params, *e);
  throw InvalidParameter("unknown preset '" + preset +
                         "' (uniform|winding(m)|single-well(f)|seed-imbalance(e))");
}

// ---- typed views ----------------------------------------------------------

ModelParams RunConfig::params() const {
  const auto& p = section("params");
  const Nonlinearity nl = p.contains("lambda")
                              ? Nonlinearity(Lambda{p.at("lambda").get<double>()})
                              : Nonlinearity(Interaction{p.at("interaction").get<double>()});
  return make_params(p.at("n_wells").get<int>(), p.at("total_atoms").get<double>(),
                     p.at("k_tilde").get<double>(), nl,
                     p.at("offsets").get<std::vector<double>>());
}

RingState RunConfig::initial_state(const ModelParams& params) const {
  const auto& ini = section("initial");
  RingState s;
  if (ini.contains("preset")) {
    s = preset_state(ini.at("preset").get<std::string>(), params);
  } else {
    s = populations_state(ini.at("populations").get<std::vector<double>>(),
                          ini.at("phases").get<std::vector<double>>());
  }
  check_state(s, params);
  if (std::abs(s.norm() - params.total_atoms) > 1e-9 * params.total_atoms) {
    throw InvalidParameter("initial populations do not sum to total_atoms");
  }
  return s;
}

double RunConfig::drive_frequency(const ModelParams& params) const {
  const auto& f = section("schedule").at("frequency");
  if (f.is_number()) return f.get<double>();
  if (f.get<std::string>() == "parametric") return parametric_resonance_frequency(params);
  return resonance_frequency(params);
}

std::string RunConfig::schedule_name() const { return section("schedule").at("name").get<std::string>(); }

CouplingSchedule RunConfig::schedule(const ModelParams& params) const {
  const auto& s = section("schedule");
  const std::string name = schedule_name();
  auto link = [&](const char* key) {
    const int l = s.at(key).get<int>();
    if (l < 1 || l > params.n_wells) throw InvalidParameter(std::string(key) + " out of range");
    return l - 1;
  };
  if (name == "constant") return constant_schedule(params.n_wells, s.at("k").get<double>());
  if (name == "resonant") {
    auto sch = resonant_modulation(params, s.at("depth").get<double>(), drive_frequency(params),
                                   s.at("phi").get<double>());
    if (s.contains("stop")) sch = stop_modulation(sch, s.at("stop").get<double>(), params.k_tilde);
    return sch;
  }
  if (name == "cut") return cut_link(constant_schedule(params), link("link"), s.at("t_cut").get<double>());
  if (name == "bottleneck") {
    return bottleneck(constant_schedule(params), link("link"), s.at("factor").get<double>());
  }
  ConveyorOptions o;
  o.k_low = s.at("k_low").get<double>();
  o.k_high = s.at("k_high").get<double>();
  o.start_well = link("start_well");
  o.direction = s.at("direction").get<int>();
  o.n_turns = s.at("n_turns").get<int>();
  if (s.at("mode").get<std::string>() == "open-loop") {
    o.mode = OpenLoop{s.at("durations").get<std::vector<double>>()};
  } else {
    o.mode = Feedback{s.at("floor_fraction").get<double>(), s.at("timeout").get<double>()};
  }
  return conveyor_schedule(params, o);
}

IntegratorOptions RunConfig::integrator() const {
  const auto& s = section("integrator");
  IntegratorOptions o;
  o.method = method_from_string(s.at("method").get<std::string>());
  o.dt = s.at("dt").get<double>();
  o.abs_tol = s.at("abs_tol").get<double>();
  o.rel_tol = s.at("rel_tol").get<double>();
  o.min_step = s.at("min_step").get<double>();
  o.max_time = s.at("max_time").get<double>();
  if (s.contains("settle_time")) o.settle_time = s.at("settle_time").get<double>();
  o.sample_interval = section("output").at("sample_interval").get<double>();
  return o;
}

std::string RunConfig::output_dir() const { return section("output").at("dir").get<std::string>(); }
std::string RunConfig::output_name() const { return section("output").at("name").get<std::string>(); }
OutputFormat RunConfig::output_format() const {
  return format_from_string(section("output").at("format").get<std::string>());
}

ThresholdScanOptions RunConfig::threshold_options() const {
  const auto& s = section("scan");
  ThresholdScanOptions o;
  o.horizon = s.at("horizon").get<double>();
  o.grid_fraction = s.at("grid_fraction").get<double>();
  o.tolerance = s.at("tolerance").get<double>();
  o.integrator = integrator();
  return o;
}

ResonanceOptions RunConfig::resonance_options() const {
  const auto& s = section("scan");
  ResonanceOptions o;
  o.perturbation = s.at("perturbation").get<double>();
  o.duration = s.at("duration").get<double>();
  o.integrator = integrator();
  return o;
}

std::vector<unsigned> RunConfig::seeds() const {
  return section("scan").at("seeds").get<std::vector<unsigned>>();
}

double RunConfig::hold_time() const { return section("scan").at("hold_time").get<double>(); }

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig2a", "fig2b", "fig3a", "fig3b",
                                                 "fig4a", "fig4b", "fig5"};
  return names;
}

std::string preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::kPresetTexts) {
    if (name == n) return std::string(text);
  }
  throw ConfigError("unknown preset '" + name + "'", 0, name);
}

}  // namespace ringbec
