#include "ringbec/drives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringbec/errors.hpp"

namespace ringbec {
namespace {

using nlohmann::json;

class ConstantRule final : public ScheduleRule {
 public:
  ConstantRule(int n, double k) : n_(n), k_(k) {}
  int n_wells() const override { return n_; }
  void couplings(double, const ControlState&, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), k_);
  }
  json describe() const override {
    return {{"name", "constant"}, {"k", k_}};
  }

 private:
  int n_;
  double k_;
};

class ResonantRule final : public ScheduleRule {
 public:
  ResonantRule(int n, double k, double depth, double w, double phi)
      : n_(n), k_(k), depth_(depth), w_(w), phi_(phi) {}
  int n_wells() const override { return n_; }
  void couplings(double t, const ControlState&, std::span<double> out) const override {
    const double s = depth_ * std::sin(w_ * t + phi_);
    // i is 1-based in the alternating sign: link 1 gets (-1)^1.
    for (int i = 0; i < n_; ++i) {
      out[static_cast<std::size_t>(i)] = k_ * (1.0 + ((i % 2 == 0) ? -s : s));
    }
  }
  json describe() const override {
    return {{"name", "resonant"}, {"k", k_},   {"depth", depth_},
            {"frequency", w_},    {"phi", phi_}};
  }

 private:
  int n_;
  double k_, depth_, w_, phi_;
};

class StopRule final : public ScheduleRule {
 public:
  StopRule(CouplingSchedule base, double tau, double k)
      : base_(std::move(base)), tau_(tau), k_(k) {}
  int n_wells() const override { return base_.n_wells(); }
  void couplings(double t, const ControlState& c, std::span<double> out) const override {
    if (t < tau_) {
      base_.at(t, c, out);
    } else {
      std::fill(out.begin(), out.end(), k_);
    }
  }
  std::vector<double> discontinuities() const override {
    auto d = base_.discontinuities();
    std::erase_if(d, [&](double x) { return x >= tau_; });
    d.push_back(tau_);
    return d;
  }
  std::optional<Monitor> monitor(const ControlState& c) const override {
    return base_.monitor(c);
  }
  json describe() const override {
    return {{"name", "stop"}, {"tau", tau_}, {"k", k_}, {"base", base_.describe()}};
  }

 private:
  CouplingSchedule base_;
  double tau_, k_;
};

class CutRule final : public ScheduleRule {
 public:
  CutRule(CouplingSchedule base, int link, double t_cut)
      : base_(std::move(base)), link_(link), t_cut_(t_cut) {}
  int n_wells() const override { return base_.n_wells(); }
  void couplings(double t, const ControlState& c, std::span<double> out) const override {
    base_.at(t, c, out);
    if (t >= t_cut_) out[static_cast<std::size_t>(link_)] = 0.0;
  }
  std::vector<double> discontinuities() const override {
    auto d = base_.discontinuities();
    d.push_back(t_cut_);
    return d;
  }
  std::optional<Monitor> monitor(const ControlState& c) const override {
    return base_.monitor(c);
  }
  json describe() const override {
    return {{"name", "cut"}, {"link", link_}, {"t_cut", t_cut_}, {"base", base_.describe()}};
  }

 private:
  CouplingSchedule base_;
  int link_;
  double t_cut_;
};

class BottleneckRule final : public ScheduleRule {
 public:
  BottleneckRule(CouplingSchedule base, int link, double factor)
      : base_(std::move(base)), link_(link), factor_(factor) {}
  int n_wells() const override { return base_.n_wells(); }
  void couplings(double t, const ControlState& c, std::span<double> out) const override {
    base_.at(t, c, out);
    out[static_cast<std::size_t>(link_)] *= factor_;
  }
  std::vector<double> discontinuities() const override { return base_.discontinuities(); }
  std::optional<Monitor> monitor(const ControlState& c) const override {
    return base_.monitor(c);
  }
  json describe() const override {
    return {{"name", "bottleneck"},
            {"link", link_},
            {"factor", factor_},
            {"base", base_.describe()}};
  }

 private:
  CouplingSchedule base_;
  int link_;
  double factor_;
};

class ConveyorRule final : public ScheduleRule {
 public:
  ConveyorRule(int n, double total_atoms, double omega_r, ConveyorOptions o)
      : n_(n), total_atoms_(total_atoms), omega_r_(omega_r), o_(std::move(o)) {
    n_transfers_ = o_.n_turns * n_;
    if (const auto* ol = std::get_if<OpenLoop>(&o_.mode)) {
      double t = 0.0;
      for (int s = 0; s < n_transfers_; ++s) {
        const auto& d = ol->durations;
        t += d.size() == 1 ? d.front() : d[static_cast<std::size_t>(s)];
        ends_.push_back(t);
      }
    }
  }
  int n_wells() const override { return n_; }

  void couplings(double t, const ControlState& c, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), o_.k_low);
    const int s = segment(t, c);
    if (s < n_transfers_) {
      out[static_cast<std::size_t>(conveyor_link(n_, o_.start_well, o_.direction, s))] =
          o_.k_high;
    }
  }

  std::vector<double> discontinuities() const override { return ends_; }

  std::optional<Monitor> monitor(const ControlState& c) const override {
    const auto* fb = std::get_if<Feedback>(&o_.mode);
    if (fb == nullptr || c.segment >= n_transfers_) return std::nullopt;
    return Monitor{conveyor_link(n_, o_.start_well, o_.direction, c.segment),
                   o_.direction, fb->floor_fraction * total_atoms_ * omega_r_,
                   fb->timeout};
  }

  json describe() const override {
    json j = {{"name", "conveyor"},       {"k_low", o_.k_low},
              {"k_high", o_.k_high},      {"start_well", o_.start_well},
              {"direction", o_.direction}, {"n_turns", o_.n_turns}};
    if (const auto* ol = std::get_if<OpenLoop>(&o_.mode)) {
      j["mode"] = "open-loop";
      j["durations"] = ol->durations;
    } else {
      const auto& fb = std::get<Feedback>(o_.mode);
      j["mode"] = "feedback";
      j["floor_fraction"] = fb.floor_fraction;
      j["timeout"] = fb.timeout;
    }
    return j;
  }

 private:
  int segment(double t, const ControlState& c) const {
    if (std::holds_alternative<Feedback>(o_.mode)) return c.segment;
    return static_cast<int>(std::upper_bound(ends_.begin(), ends_.end(), t) - ends_.begin());
  }

  int n_;
  double total_atoms_, omega_r_;
  ConveyorOptions o_;
  int n_transfers_ = 0;
  std::vector<double> ends_;
};

void check_link(const CouplingSchedule& base, int link) {
  if (link < 0 || link >= base.n_wells()) {
    throw InvalidParameter("link index " + std::to_string(link) + " out of range");
  }
}

}  // namespace

CouplingSchedule::CouplingSchedule(std::shared_ptr<const ScheduleRule> rule,
                                   std::vector<std::string> warnings)
    : rule_(std::move(rule)), warnings_(std::move(warnings)) {}

std::vector<double> CouplingSchedule::at(double t, const ControlState& control) const {
  std::vector<double> k(static_cast<std::size_t>(n_wells()));
  at(t, control, k);
  return k;
}

void CouplingSchedule::at(double t, const ControlState& control,
                          std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(n_wells())) {
    throw DimensionError("coupling buffer length does not match the ring");
  }
  rule_->couplings(t, control, out);
}

std::vector<double> CouplingSchedule::discontinuities() const {
  auto d = rule_->discontinuities();
  std::erase_if(d, [](double x) { return !std::isfinite(x) || x <= 0.0; });
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

CouplingSchedule constant_schedule(int n_wells, double k_tilde) {
  if (n_wells < 3) throw RingTooSmall("a ring needs at least 3 wells");
  if (!(k_tilde >= 0.0) || !std::isfinite(k_tilde)) {
    throw InvalidParameter("constant coupling must be nonnegative and finite");
  }
  return CouplingSchedule(std::make_shared<ConstantRule>(n_wells, k_tilde));
}

CouplingSchedule resonant_modulation(const ModelParams& params, double depth,
                                     double frequency, double phi) {
  if (!(depth >= 0.0 && depth <= 1.0)) {
    throw InvalidParameter("modulation depth must lie in [0, 1]");
  }
  if (params.n_wells % 2 != 0) {
    throw InvalidParameter("alternating modulation needs an even number of wells");
  }
  if (depth == 0.0) return constant_schedule(params);
  return CouplingSchedule(std::make_shared<ResonantRule>(
      params.n_wells, params.k_tilde, depth, frequency, phi));
}

double resonance_frequency(const ModelParams& params) {
  if (params.n_wells != 4) {
    throw FormulaDomainError(
        "closed-form resonance holds for 4 wells only; use "
        "bogoliubov_frequency or a measured linearization");
  }
  const double k = params.k_tilde;
  const double w = std::sqrt(3.0 * params.interaction * params.total_atoms * k + 2.0 * k * k);
  return w / params.omega_r();
}

double bogoliubov_frequency(const ModelParams& params, double q) {
  const double eq = 2.0 * params.k_tilde * (1.0 - std::cos(q));
  const double mu = 2.0 * params.interaction * params.total_atoms / params.n_wells;
  return std::sqrt(eq * (eq + mu)) / params.omega_r();
}

double parametric_resonance_frequency(const ModelParams& params) {
  if (params.n_wells % 4 != 0) {
    throw FormulaDomainError("the q = pi/2 mode exists only when n_wells is a multiple of 4");
  }
  return 2.0 * bogoliubov_frequency(params, std::numbers::pi / 2.0);
}

CouplingSchedule stop_modulation(const CouplingSchedule& base, double tau, double k_tilde) {
  if (!(k_tilde >= 0.0)) throw InvalidParameter("K~ must be nonnegative");
  if (std::isinf(tau) && tau > 0) return base;
  return CouplingSchedule(std::make_shared<StopRule>(base, tau, k_tilde), base.warnings());
}

CouplingSchedule cut_link(const CouplingSchedule& base, int link, double t_cut) {
  check_link(base, link);
  if (std::isinf(t_cut) && t_cut > 0) return base;
  return CouplingSchedule(std::make_shared<CutRule>(base, link, t_cut), base.warnings());
}

CouplingSchedule bottleneck(const CouplingSchedule& base, int link, double factor) {
  check_link(base, link);
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidParameter("bottleneck factor must be positive");
  }
  if (factor == 1.0) return base;
  return CouplingSchedule(std::make_shared<BottleneckRule>(base, link, factor),
                          base.warnings());
}

int conveyor_link(int n_wells, int start_well, int direction, int segment) {
  // Forward transfer j -> j+1 uses link j; backward j -> j-1 uses link j-1.
  const int well = ((start_well + direction * segment) % n_wells + n_wells) % n_wells;
  return direction > 0 ? well : (well + n_wells - 1) % n_wells;
}

CouplingSchedule conveyor_schedule(const ModelParams& params,
                                   const ConveyorOptions& options) {
  if (!(options.k_low >= 0.0)) throw InvalidParameter("K_low must be nonnegative");
  if (options.k_high < options.k_low) {
    throw InvalidParameter("K_high must not be below K_low");
  }
  if (options.direction != 1 && options.direction != -1) {
    throw InvalidParameter("conveyor direction must be +1 or -1");
  }
  if (options.n_turns < 0) throw InvalidParameter("n_turns must be nonnegative");
  if (options.start_well < 0 || options.start_well >= params.n_wells) {
    throw InvalidParameter("start well out of range");
  }
  if (const auto* ol = std::get_if<OpenLoop>(&options.mode)) {
    const auto n_transfers = static_cast<std::size_t>(options.n_turns * params.n_wells);
    if (n_transfers > 0 && ol->durations.size() != 1 &&
        ol->durations.size() != n_transfers) {
      throw InvalidParameter("open-loop conveyor needs one duration or one per transfer");
    }
    for (double d : ol->durations) {
      if (!(d > 0.0)) throw InvalidParameter("transfer durations must be positive");
    }
  } else {
    const auto& fb = std::get<Feedback>(options.mode);
    if (!(fb.floor_fraction > 0.0) || !(fb.timeout > 0.0)) {
      throw InvalidParameter("feedback floor and timeout must be positive");
    }
  }
  std::vector<std::string> warnings;
  if (options.k_high == options.k_low) {
    warnings.emplace_back("K_high equals K_low: conveyor degenerates to a constant schedule");
  }
  return CouplingSchedule(
      std::make_shared<ConveyorRule>(params.n_wells, params.total_atoms,
                                     params.omega_r(), options),
      std::move(warnings));
}

CouplingSchedule schedule_from_json(const json& j, const ModelParams& params) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "constant") return constant_schedule(params.n_wells, j.at("k").get<double>());
  if (name == "resonant") {
    auto p = params;
    p.k_tilde = j.at("k").get<double>();
    auto s = resonant_modulation(p, j.at("depth").get<double>(),
                                 j.at("frequency").get<double>(), j.at("phi").get<double>());
    return s;
  }
  if (name == "stop") {
    return stop_modulation(schedule_from_json(j.at("base"), params),
                           j.at("tau").get<double>(), j.at("k").get<double>());
  }
  if (name == "cut") {
    return cut_link(schedule_from_json(j.at("base"), params), j.at("link").get<int>(),
                    j.at("t_cut").get<double>());
  }
  if (name == "bottleneck") {
    return bottleneck(schedule_from_json(j.at("base"), params), j.at("link").get<int>(),
                      j.at("factor").get<double>());
  }
  if (name == "conveyor") {
    ConveyorOptions o;
    o.k_low = j.at("k_low").get<double>();
    o.k_high = j.at("k_high").get<double>();
    o.start_well = j.at("start_well").get<int>();
    o.direction = j.at("direction").get<int>();
    o.n_turns = j.at("n_turns").get<int>();
    if (j.at("mode").get<std::string>() == "open-loop") {
      o.mode = OpenLoop{j.at("durations").get<std::vector<double>>()};
    } else {
      o.mode = Feedback{j.at("floor_fraction").get<double>(), j.at("timeout").get<double>()};
    }
    return conveyor_schedule(params, o);
  }
  throw InvalidParameter("unknown schedule '" + name + "'");
}

}  // namespace ringbec
