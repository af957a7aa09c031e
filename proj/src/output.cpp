#include "ringbec/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ringbec/errors.hpp"
#include "ringbec/version.hpp"

namespace ringbec {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

json sample_json(const Sample& s) {
  return {{"t_over_omegaR", s.time},
          {"N", s.populations},
          {"theta", s.phases},
          {"J", s.currents},
          {"energy", s.energy},
          {"winding", s.winding ? json(*s.winding) : json(nullptr)}};
}

json metadata_json(const Trajectory& tr, const TrajectoryHeader& h) {
  json m = tr.metadata();
  m["version"] = h.version;
  m["config_hash"] = h.config_hash;
  m["config"] = h.config;
  return m;
}

const std::string kConfigPrefix = "config=";

}  // namespace

std::vector<std::string> trajectory_columns(int n) {
  std::vector<std::string> c{"t_over_omegaR"};
  for (const char* p : {"N_", "theta_", "J_"}) {
    for (int i = 1; i <= n; ++i) c.push_back(p + std::to_string(i));
  }
  c.emplace_back("energy");
  c.emplace_back("winding");
  return c;
}

TrajectoryHeader make_header(const RunConfig& config) {
  // The directory is left out so a copied file reproduces byte for byte.
  auto sections = config.sections;
  sections["output"]["dir"] = ".";
  return {kVersion, config_hash(config), sections};
}

std::string trajectory_csv(const Trajectory& tr, const TrajectoryHeader& h) {
  std::string out = "# ringbec " + h.version + " config_hash=" + h.config_hash + "\n";
  out += "# " + kConfigPrefix + h.config.dump() + "\n";
  const auto cols = trajectory_columns(tr.params.n_wells);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& s : tr.samples) {
    append_number(out, s.time);
    for (const auto* v : {&s.populations, &s.phases, &s.currents}) {
      for (double x : *v) {
        out += ',';
        append_number(out, x);
      }
    }
    out += ',';
    append_number(out, s.energy);
    out += ',';
    if (s.winding) out += std::to_string(*s.winding);
    out += '\n';
  }
  return out;
}

std::string trajectory_jsonl(const Trajectory& tr, const TrajectoryHeader& h) {
  std::string out = json{{"metadata", metadata_json(tr, h)}}.dump() + "\n";
  for (const auto& s : tr.samples) out += sample_json(s).dump() + "\n";
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) throw Error("cannot write " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " to " + path.string());
  }
}

void write_trajectory(const Trajectory& tr, const fs::path& path, OutputFormat format,
                      const TrajectoryHeader& header) {
  write_file_atomic(path, format == OutputFormat::Csv ? trajectory_csv(tr, header)
                                                      : trajectory_jsonl(tr, header));
}

void write_json(const json& value, const fs::path& path) {
  write_file_atomic(path, value.dump(2) + "\n");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size()) throw Error("CSV row has the wrong number of cells");
    std::vector<double> row;
    for (const auto& c : cells) {
      row.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(c));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

RunConfig config_from_trajectory_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("# " + kConfigPrefix, 0) == 0) {
      return config_from_json(json::parse(line.substr(2 + kConfigPrefix.size())));
    }
    if (line.rfind("{\"metadata\"", 0) == 0) {
      return config_from_json(json::parse(line).at("metadata").at("config"));
    }
    if (line.empty() || line[0] != '#') break;
  }
  throw ConfigError("no embedded config in " + path.string());
}

}  // namespace ringbec
