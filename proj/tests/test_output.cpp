#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ringbec/config.hpp"
#include "ringbec/errors.hpp"
#include "ringbec/output.hpp"

using namespace ringbec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ringbec_test_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

RunConfig fig3a() { return parse_config(preset_text("fig3a")); }

Trajectory short_run(const RunConfig& c, double t) {
  const auto p = c.params();
  auto o = c.integrator();
  o.max_time = t;
  return integrate(c.initial_state(p), p, c.schedule(p), o);
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("output") {
  TEST_CASE("column layout") {
    const auto c = trajectory_columns(4);
    REQUIRE(c.size() == 15);
    CHECK(c.front() == "t_over_omegaR");
    CHECK(c[1] == "N_1");
    CHECK(c[4] == "N_4");
    CHECK(c[5] == "theta_1");
    CHECK(c[9] == "J_1");
    CHECK(c[13] == "energy");
    CHECK(c[14] == "winding");
    CHECK(trajectory_columns(6).size() == 3 * 6 + 3);
  }

  TEST_CASE("CSV round trip is exact") {
    const auto c = fig3a();
    const auto tr = short_run(c, 1.0);
    const auto h = make_header(c);
    const auto t = parse_csv(trajectory_csv(tr, h));
    REQUIRE(t.comments.size() == 2);
    CHECK(t.comments[0] == "ringbec " + h.version + " config_hash=" + config_hash(c));
    CHECK(t.columns == trajectory_columns(4));
    REQUIRE(t.rows.size() == tr.samples.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& s = tr.samples[k];
      CHECK(t.rows[k][0] == s.time);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(t.rows[k][1 + i] == s.populations[i]);
        CHECK(t.rows[k][5 + i] == s.phases[i]);
        CHECK(t.rows[k][9 + i] == s.currents[i]);
      }
      CHECK(t.rows[k][13] == s.energy);
      CHECK(t.rows[k][14] == static_cast<double>(*s.winding));
    }
  }

  TEST_CASE("phases are written unwrapped") {
    const auto c = fig3a();
    const auto tr = short_run(c, 1.0);
    const auto t = parse_csv(trajectory_csv(tr, make_header(c)));
    // theta_1 runs down at -U N_T / 4 = -25 per unit time.
    CHECK(t.rows.back()[5] - t.rows.front()[5] < -20.0);
  }

  TEST_CASE("undefined winding leaves the cell empty") {
    auto c = parse_config(preset_text("fig4a"));
    auto s = c.sections;
    s["initial"]["preset"] = "single-well(1)";
    c = config_from_json(s);
    const auto tr = short_run(c, 0.05);
    const auto text = trajectory_csv(tr, make_header(c));
    const auto rows = lines_of(text);
    CHECK(rows[3].back() == ',');
    CHECK(std::isnan(parse_csv(text).rows[0][14]));
  }

  TEST_CASE("empty trajectory gives a header-only file") {
    Trajectory tr;
    tr.params = fig3a().params();
    const auto t = parse_csv(trajectory_csv(tr, make_header(fig3a())));
    CHECK(t.columns.size() == 15);
    CHECK(t.rows.empty());
  }

  TEST_CASE("JSONL has a metadata line then one sample per line") {
    const auto c = fig3a();
    const auto tr = short_run(c, 0.2);
    const auto rows = lines_of(trajectory_jsonl(tr, make_header(c)));
    REQUIRE(rows.size() == tr.samples.size() + 1);
    const auto meta = nlohmann::json::parse(rows[0]).at("metadata");
    CHECK(meta.at("config_hash") == config_hash(c));
    CHECK(config_from_json(meta.at("config")).params().lambda == 100.0);
    const auto s = nlohmann::json::parse(rows[5]);
    for (const char* k : {"t_over_omegaR", "N", "theta", "J", "energy", "winding"}) CHECK(s.contains(k));
    CHECK(s.at("N")[0].get<double>() == tr.samples[4].populations[0]);
    CHECK(s.at("t_over_omegaR").get<double>() == tr.samples[4].time);
  }

  TEST_CASE("files carry enough to rebuild the config") {
    TempDir d;
    const auto c = fig3a();
    const auto tr = short_run(c, 0.2);
    write_trajectory(tr, d.path / "a.csv", OutputFormat::Csv, make_header(c));
    write_trajectory(tr, d.path / "a.jsonl", OutputFormat::Jsonl, make_header(c));
    const auto rc = config_from_trajectory_file(d.path / "a.csv");
    const auto rj = config_from_trajectory_file(d.path / "a.jsonl");
    CHECK(config_hash(rc) == config_hash(c));
    CHECK(rc == rj);
    CHECK(rc.section("output").at("dir") == ".");
    CHECK_FALSE(fs::exists(d.path / "a.csv.tmp"));
    std::ofstream(d.path / "plain.csv") << "t,N_1\n0,1\n";
    CHECK_THROWS_AS(config_from_trajectory_file(d.path / "plain.csv"), ConfigError);
  }

  TEST_CASE("unwritable destination") {
    TempDir d;
    std::ofstream(d.path / "file") << "x";
    CHECK_THROWS_AS(write_file_atomic(d.path / "file" / "sub.csv", "data"), Error);
  }

  TEST_CASE("malformed CSV rows are rejected") {
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), Error);
  }
}
