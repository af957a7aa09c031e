#include <doctest.h>

#include <string>

#include "ringbec/config.hpp"
#include "ringbec/errors.hpp"

using namespace ringbec;

namespace {

const char* kMinimal = R"cfg([params]
total_atoms = 1e5
lambda = 100

[initial]
preset = "winding(1)"

[schedule]
name = "constant"
)cfg";

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a config error");
  return ConfigError("");
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("minimal config gets every default written out") {
    const auto c = parse_config(kMinimal);
    const auto& p = c.section("params");
    CHECK(p.at("n_wells") == 4);
    CHECK(p.at("k_tilde") == 0.5);
    CHECK(p.at("offsets") == nlohmann::json::array({0.0, 0.0, 0.0, 0.0}));
    CHECK(c.section("schedule").at("k") == 0.5);
    CHECK(c.section("integrator").at("method") == "dopri45");
    CHECK(c.section("integrator").at("abs_tol") == 1e-11);
    CHECK(c.section("output").at("format") == "csv");
    CHECK(c.section("scan").at("seeds") == nlohmann::json::array({1, 2, 3, 4}));
    const auto mp = c.params();
    CHECK(mp.interaction == doctest::Approx(1e-3));
    CHECK(winding_number(c.initial_state(mp)) == 1);
    CHECK(c.schedule(mp).at(3.0) == std::vector<double>(4, 0.5));
    CHECK(c.integrator().max_time == 10.0);
  }

  TEST_CASE("comments, blank lines and spacing are ignored") {
    const auto a = parse_config(kMinimal);
    const auto b = parse_config("# header\n[params]   # trailing\n  total_atoms=1e5\nlambda =   100 # x\n\n"
                                "[initial]\npreset = \"winding(1)\"\n[schedule]\nname=\"constant\"\n");
    CHECK(a == b);
  }

  TEST_CASE("lambda and interaction conflict") {
    const auto e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 100\ninteraction = 1e-3\n[initial]\npreset=\"uniform\"\n");
    const std::string what = e.what();
    CHECK(what.find("lambda") != std::string::npos);
    CHECK(what.find("interaction") != std::string::npos);
    CHECK(e.line() == 4);
    const auto e2 = error_of("[params]\ntotal_atoms = 1e5\nlambda = 100\ninteraction = 3e-3\n[initial]\npreset=\"uniform\"\n");
    CHECK(std::string(e2.what()).find("inconsistent") != std::string::npos);
  }

  TEST_CASE("interaction alone is accepted") {
    const auto c = parse_config("[params]\ntotal_atoms = 1e5\ninteraction = 1e-3\n[initial]\npreset=\"uniform\"\n");
    CHECK(c.params().lambda == doctest::Approx(100));
  }

  TEST_CASE("errors carry line and field") {
    auto e = error_of(std::string(kMinimal) + "bogus = 3\n");
    CHECK(e.field() == "schedule.bogus");
    CHECK(e.line() == 10);
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);

    e = error_of("[params]\ntotal_atoms = 1e5x\n");
    CHECK(e.field() == "params.total_atoms");
    CHECK(e.line() == 2);

    e = error_of("[params]\nlambda = 100\n[initial]\npreset=\"uniform\"\n");
    CHECK(e.field() == "params.total_atoms");

    e = error_of("[nonsense]\nx = 1\n");
    CHECK(e.field() == "nonsense");

    e = error_of("total_atoms = 1\n");
    CHECK(e.line() == 1);

    e = error_of("[params]\ntotal_atoms = 1e5\ntotal_atoms = 2e5\n");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);

    e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 10\noffsets = [1, 2,\n");
    CHECK(e.line() == 4);

    e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 10\nn_wells = 4.5\n");
    CHECK(e.field() == "params.n_wells");
  }

  TEST_CASE("initial state needs exactly one form") {
    auto e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 10\n");
    CHECK(e.field() == "initial.preset");
    e = error_of("[params]\ntotal_atoms = 4\nlambda = 10\n[initial]\npreset=\"uniform\"\npopulations=[1,1,1,1]\n");
    CHECK(e.field() == "initial.populations");
    e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 10\n[initial]\npreset=\"uniform\"\nphases=[0,0,0,0]\n");
    CHECK(e.field() == "initial.phases");
    e = error_of("[params]\ntotal_atoms = 1e5\nlambda = 10\n[initial]\npopulations=[1,1,1,1]\n");
    CHECK(e.field() == "initial.populations");
    const auto c = parse_config("[params]\ntotal_atoms = 10\nlambda = 10\n[initial]\npopulations=[1,2,3,4]\n");
    CHECK(c.section("initial").at("phases") == nlohmann::json::array({0.0, 0.0, 0.0, 0.0}));
  }

  TEST_CASE("single-well preset") {
    const auto c = parse_config("[params]\ntotal_atoms = 1e5\nlambda = 100\n[initial]\npreset = \"single-well(0.97)\"\n");
    const auto n = c.initial_state(c.params()).populations();
    CHECK(n[0] == doctest::Approx(97000));
    for (int i = 1; i < 4; ++i) CHECK(n[static_cast<std::size_t>(i)] == doctest::Approx(1000));
  }

  TEST_CASE("preset strings") {
    const auto p = make_params(4, 1e5, 0.5, Lambda{10});
    CHECK(winding_number(preset_state("winding(-1)", p)) == -1);
    CHECK(preset_state("seed-imbalance(0.001)", p).populations()[0] == doctest::Approx(25100));
    CHECK(preset_state("uniform", p).populations()[2] == doctest::Approx(25000));
    CHECK_THROWS_AS(preset_state("winding(1.5)", p), InvalidParameter);
    CHECK_THROWS_AS(preset_state("vortex", p), InvalidParameter);
  }

  TEST_CASE("schedule sections") {
    const std::string head = "[params]\ntotal_atoms = 1e5\nlambda = 100\n[initial]\npreset=\"uniform\"\n[schedule]\n";
    auto c = parse_config(head + "name = \"cut\"\n");
    CHECK(c.section("schedule").at("link") == 4);
    CHECK(c.schedule(c.params()).at(1.0) == std::vector<double>{0.5, 0.5, 0.5, 0.0});

    c = parse_config(head + "name = \"bottleneck\"\nfactor = 1.2\n");
    CHECK(c.schedule(c.params()).at(1.0)[0] == doctest::Approx(0.6));
    CHECK(error_of(head + "name = \"bottleneck\"\n").field() == "schedule.factor");

    c = parse_config(head + "name = \"resonant\"\nfrequency = \"parametric\"\n");
    CHECK(c.section("schedule").at("depth") == 1.0);
    CHECK(c.drive_frequency(c.params()) == doctest::Approx(2 * std::sqrt(51.0)));
    c = parse_config(head + "name = \"resonant\"\n");
    CHECK(c.drive_frequency(c.params()) == doctest::Approx(0.5 * std::sqrt(602.0)));
    CHECK(error_of(head + "name = \"resonant\"\nfrequency = \"fast\"\n").field() == "schedule.frequency");
    CHECK(error_of(head + "name = \"resonant\"\ndepth = 2\n").field() == "schedule");

    c = parse_config(head + "name = \"conveyor\"\n");
    CHECK(c.section("schedule").at("k_high") == doctest::Approx(kConveyorHighRatio * 0.5));
    CHECK(c.schedule(c.params()).is_feedback());
    CHECK(error_of(head + "name = \"conveyor\"\nmode = \"open-loop\"\n").field() == "schedule.durations");
    c = parse_config(head + "name = \"conveyor\"\nmode = \"open-loop\"\ndurations = [1.5]\n");
    CHECK(c.schedule(c.params()).discontinuities().size() == 8);

    CHECK(error_of(head + "name = \"warp\"\n").field() == "schedule.name");
    CHECK(error_of(head + "name = \"cut\"\nfactor = 2\n").field() == "schedule.factor");
  }

  TEST_CASE("other sections are validated") {
    const std::string head = "[params]\ntotal_atoms = 1e5\nlambda = 100\n[initial]\npreset=\"uniform\"\n";
    CHECK(error_of(head + "[output]\nformat = \"xml\"\n").field() == "output.format");
    CHECK(error_of(head + "[integrator]\nmethod = \"euler\"\n").field() == "integrator");
    CHECK(error_of(head + "[scan]\nhorizon = -1\n").field() == "scan.horizon");
    CHECK(error_of(head + "[scan]\nseeds = [1, -2]\n").field() == "scan.seeds");
    const auto c = parse_config(head + "[integrator]\nsettle_time = 3\n[output]\nformat = \"jsonl\"\n");
    CHECK(c.integrator().settle_time == 3.0);
    CHECK(c.output_format() == OutputFormat::Jsonl);
  }

  TEST_CASE("serialization round-trips") {
    for (const auto& name : preset_names()) {
      const auto c = parse_config(preset_text(name));
      const auto text = serialize_config(c);
      CHECK(parse_config(text) == c);
      CHECK(serialize_config(parse_config(text)) == text);
      CHECK(config_from_json(c.sections) == c);
    }
    auto sections = parse_config(kMinimal).sections;
    sections["params"]["lambda"] = 0.1 + 0.2;
    const auto c = config_from_json(sections);
    CHECK(parse_config(serialize_config(c)).section("params").at("lambda").get<double>() == 0.1 + 0.2);
  }

  TEST_CASE("hash ignores where the output goes") {
    const auto a = parse_config(kMinimal);
    auto s = a.sections;
    s["output"]["dir"] = "/tmp/elsewhere";
    s["output"]["name"] = "other";
    CHECK(config_hash(config_from_json(s)) == config_hash(a));
    s["params"]["lambda"] = 101.0;
    CHECK(config_hash(config_from_json(s)) != config_hash(a));
    CHECK(config_hash(a).size() == 16);
    // Reference FNV-1a 64 values.
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("presets are complete configs") {
    CHECK(preset_names().size() == 7);
    for (const auto& name : preset_names()) {
      const auto c = parse_config(preset_text(name));
      CHECK(c.output_name() == name);
      const auto p = c.params();
      CHECK_NOTHROW(c.initial_state(p));
      CHECK_NOTHROW(c.schedule(p));
    }
    CHECK_THROWS_AS(preset_text("fig9"), ConfigError);
  }
}
