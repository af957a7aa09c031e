#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "ringbec/drives.hpp"
#include "ringbec/errors.hpp"

using namespace ringbec;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams lam(double l) { return make_params(4, 1e5, 0.5, Lambda{l}); }

void check_vec(const std::vector<double>& got, const std::vector<double>& want, double tol = 1e-14) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}

}  // namespace

TEST_SUITE("drives") {
  TEST_CASE("constant schedule") {
    const auto s = constant_schedule(4, 0.5);
    check_vec(s.at(0.0), {0.5, 0.5, 0.5, 0.5});
    CHECK(s.at(3.7) == s.at(123.0));
    CHECK(s.discontinuities().empty());
    check_vec(constant_schedule(4, 0.0).at(1.0), {0, 0, 0, 0});
    CHECK_THROWS_AS(constant_schedule(4, -0.1), InvalidParameter);
    CHECK_FALSE(s.is_feedback());
  }

  TEST_CASE("alternating modulation values") {
    const auto p = lam(100);
    check_vec(resonant_modulation(p, 1.0, 3.0, 0.0).at(0.0), {0.5, 0.5, 0.5, 0.5});
    // K_i = K~ (1 + (-1)^i) at phi = pi/2 with wells numbered 1..4.
    check_vec(resonant_modulation(p, 1.0, 3.0, kPi / 2).at(0.0), {0.0, 1.0, 0.0, 1.0});
    const double t = 0.37;
    const double s = std::sin(2.5 * t + 0.3);
    check_vec(resonant_modulation(p, 0.4, 2.5, 0.3).at(t),
              {0.5 * (1 - 0.4 * s), 0.5 * (1 + 0.4 * s), 0.5 * (1 - 0.4 * s), 0.5 * (1 + 0.4 * s)});
    CHECK_THROWS_AS(resonant_modulation(p, 1.2, 3.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(resonant_modulation(make_params(5, 1e5, 0.5, Lambda{1}), 0.5, 3.0, 0.0), InvalidParameter);
  }

  TEST_CASE("zero depth is exactly the constant schedule") {
    const auto p = lam(100);
    const auto m = resonant_modulation(p, 0.0, 7.0, 1.1);
    const auto c = constant_schedule(p);
    for (int k = 0; k < 500; ++k) CHECK(m.at(k * 0.013) == c.at(k * 0.013));
  }

  TEST_CASE("stopping the modulation") {
    const auto p = lam(100);
    const auto s = stop_modulation(resonant_modulation(p, 1.0, 3.0, kPi / 2), 4.0, 0.5);
    check_vec(s.at(0.0), {0.0, 1.0, 0.0, 1.0});
    check_vec(s.at(4.0), {0.5, 0.5, 0.5, 0.5});
    check_vec(s.at(9.0), {0.5, 0.5, 0.5, 0.5});
    CHECK(s.discontinuities() == std::vector<double>{4.0});
  }

  TEST_CASE("closed-form resonance frequency") {
    // (omega_R / 2) sqrt(6 Lambda + 2) with omega_R = 1.
    CHECK(resonance_frequency(lam(500)) == doctest::Approx(0.5 * std::sqrt(3002.0)).epsilon(1e-14));
    CHECK(resonance_frequency(lam(500)) == doctest::Approx(27.40).epsilon(1e-3));
    CHECK(resonance_frequency(lam(0)) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
    CHECK(resonance_frequency(lam(100)) == doctest::Approx(12.27).epsilon(1e-3));
    CHECK_THROWS_AS(resonance_frequency(make_params(6, 1e5, 0.5, Lambda{10})), FormulaDomainError);
  }

  TEST_CASE("Bogoliubov mode frequencies") {
    for (double l : {0.0, 20.0, 500.0}) {
      const auto p = lam(l);
      for (double q : {kPi / 2, kPi}) {
        const double e = 2 * 0.5 * (1 - std::cos(q));
        const double un = 2 * l * 0.5;  // U N_T
        CHECK(bogoliubov_frequency(p, q) == doctest::Approx(std::sqrt(e * (e + 2 * un / 4))).epsilon(1e-13));
      }
      CHECK(parametric_resonance_frequency(p) == doctest::Approx(2 * bogoliubov_frequency(p, kPi / 2)));
    }
    CHECK_THROWS_AS(parametric_resonance_frequency(make_params(6, 1e5, 0.5, Lambda{10})), FormulaDomainError);
  }

  TEST_CASE("link cut") {
    const auto p = lam(100);
    const auto c = cut_link(constant_schedule(p), 3, 0.5);
    check_vec(c.at(0.49), {0.5, 0.5, 0.5, 0.5});
    check_vec(c.at(0.5), {0.5, 0.5, 0.5, 0.0});
    check_vec(c.at(8.0), {0.5, 0.5, 0.5, 0.0});
    CHECK(c.discontinuities() == std::vector<double>{0.5});
    const auto never = cut_link(constant_schedule(p), 3, std::numeric_limits<double>::infinity());
    CHECK(never.at(100.0) == constant_schedule(p).at(100.0));
    const auto twice = cut_link(c, 3, 0.5);
    for (double t : {0.1, 0.5, 0.9, 5.0}) CHECK(twice.at(t) == c.at(t));
    CHECK_THROWS_AS(cut_link(constant_schedule(p), 4, 0.5), InvalidParameter);
  }

  TEST_CASE("bottleneck") {
    const auto p = lam(100);
    check_vec(bottleneck(constant_schedule(p), 0, 1.2).at(3.0), {0.6, 0.5, 0.5, 0.5});
    CHECK(bottleneck(constant_schedule(p), 0, 1.0).at(3.0) == constant_schedule(p).at(3.0));
    CHECK_THROWS_AS(bottleneck(constant_schedule(p), 0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(bottleneck(constant_schedule(p), 0, -1.0), InvalidParameter);
  }

  TEST_CASE("open-loop conveyor runs eight segments then rests") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 0.5;
    o.k_high = 31.0;
    o.n_turns = 2;
    o.mode = OpenLoop{{1.5}};
    const auto s = conveyor_schedule(p, o);
    REQUIRE(s.discontinuities().size() == 8);
    CHECK(s.discontinuities().back() == doctest::Approx(12.0));
    for (int seg = 0; seg < 8; ++seg) {
      const auto k = s.at(1.5 * seg + 0.75);
      std::vector<double> want(4, 0.5);
      want[static_cast<std::size_t>(seg % 4)] = 31.0;
      check_vec(k, want);
    }
    check_vec(s.at(12.5), {0.5, 0.5, 0.5, 0.5});
    CHECK(s.warnings().empty());
  }

  TEST_CASE("feedback conveyor follows the control segment") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 0.5;
    o.k_high = 31.0;
    o.n_turns = 1;
    o.start_well = 2;
    o.direction = -1;
    const auto s = conveyor_schedule(p, o);
    CHECK(s.is_feedback());
    ControlState c;
    c.segment = 0;
    // From well 3 backwards: link (2,3) is index 1.
    check_vec(s.at(0.0, c), {0.5, 31.0, 0.5, 0.5});
    const auto m = s.monitor(c);
    REQUIRE(m.has_value());
    CHECK(m->link == 1);
    CHECK(m->direction == -1);
    CHECK(m->floor == doctest::Approx(1e-3 * 1e5));
    c.segment = 4;
    check_vec(s.at(0.0, c), {0.5, 0.5, 0.5, 0.5});
    CHECK_FALSE(s.monitor(c).has_value());
  }

  TEST_CASE("degenerate conveyor warns") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 0.5;
    o.k_high = 0.5;
    o.mode = OpenLoop{{1.0}};
    const auto s = conveyor_schedule(p, o);
    CHECK(s.warnings().size() == 1);
    check_vec(s.at(0.3), {0.5, 0.5, 0.5, 0.5});
  }

  TEST_CASE("conveyor option errors") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 1.0;
    o.k_high = 0.5;
    CHECK_THROWS_AS(conveyor_schedule(p, o), InvalidParameter);
    o.k_high = 2.0;
    o.direction = 0;
    CHECK_THROWS_AS(conveyor_schedule(p, o), InvalidParameter);
    o.direction = 1;
    o.mode = OpenLoop{{1.0, 2.0}};
    CHECK_THROWS_AS(conveyor_schedule(p, o), InvalidParameter);
  }

  TEST_CASE("conveyor link order is a pure rotation") {
    for (int n : {3, 4, 6}) {
      for (int dir : {1, -1}) {
        for (int start = 0; start < n; ++start) {
          for (int seg = 0; seg < 3 * n; ++seg) {
            const int a = conveyor_link(n, start, dir, seg);
            const int b = conveyor_link(n, start, dir, seg + 1);
            CHECK(b == ((a + dir) % n + n) % n);
          }
        }
      }
    }
  }

  TEST_CASE("every schedule stays nonnegative and has the ring's length") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 0.0;
    o.k_high = 10.0;
    o.mode = OpenLoop{{0.7}};
    const std::vector<CouplingSchedule> all = {
        constant_schedule(p), resonant_modulation(p, 1.0, 12.3, 0.7),
        stop_modulation(resonant_modulation(p, 1.0, 2.0, 0.0), 1.0, 0.5),
        cut_link(constant_schedule(p), 1, 0.2), bottleneck(constant_schedule(p), 2, 1.6),
        conveyor_schedule(p, o)};
    for (const auto& s : all) {
      for (int k = 0; k <= 2000; ++k) {
        const auto v = s.at(k * 0.005);
        REQUIRE(v.size() == 4);
        for (double x : v) CHECK(x >= 0.0);
      }
    }
  }

  TEST_CASE("schedules rebuild from their description") {
    const auto p = lam(100);
    ConveyorOptions o;
    o.k_low = 0.5;
    o.k_high = 31.0;
    o.mode = OpenLoop{{0.9}};
    const std::vector<CouplingSchedule> all = {
        stop_modulation(resonant_modulation(p, 0.2, 31.7, kPi / 2), 4.0, 0.5),
        cut_link(bottleneck(constant_schedule(p), 0, 1.4), 3, 0.5), conveyor_schedule(p, o)};
    for (const auto& s : all) {
      const auto r = schedule_from_json(s.describe(), p);
      CHECK(r.describe() == s.describe());
      for (int k = 0; k < 300; ++k) CHECK(r.at(k * 0.031) == s.at(k * 0.031));
    }
  }
}
