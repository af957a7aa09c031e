#include "ringbec/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ringbec/errors.hpp"
#include "ringbec/version.hpp"

namespace ringbec {
namespace {

using Vec = std::vector<Complex>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

bool all_finite(std::span<const Complex> y) {
  return std::all_of(y.begin(), y.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

// Right-hand side in units of 1/omega_R with the schedule's control state.
class System {
 public:
  System(const ModelParams& params, const CouplingSchedule& schedule)
      : params_(params),
        schedule_(schedule),
        inv_omega_(1.0 / params.omega_r()),
        k_(static_cast<std::size_t>(params.n_wells)) {}

  void operator()(double t, std::span<const Complex> y, std::span<Complex> dy) {
    schedule_.at(t, control, k_);
    rhs_complex_into(y, params_, k_, dy);
    for (auto& d : dy) d *= inv_omega_;
  }

  // On-site rotation rates in units of omega_R.
  void onsite(std::span<const Complex> y, std::span<double> w) const {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = params_.offsets.empty() ? 0.0 : params_.offsets[i];
      w[i] = (e + params_.interaction * std::norm(y[i])) * inv_omega_;
    }
  }

  std::span<const double> couplings(double t) {
    schedule_.at(t, control, k_);
    return k_;
  }

  ControlState control;

 private:
  const ModelParams& params_;
  const CouplingSchedule& schedule_;
  double inv_omega_;
  std::vector<double> k_;
};

struct Stepper {
  explicit Stepper(std::size_t n)
      : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n), z1(n), ys(n), dy(n),
        rot(n), w(n) {}

  // Stage times equal to the step end use `t_end_eval`, which the caller
  // nudges below a discontinuity so the whole step sees one piece of K.
  void rk4(System& f, double t, std::span<const Complex> y, double h, double t_end_eval) {
    const std::size_t n = y.size();
    f(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    f(t_end_eval, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y1[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }

  // Lawson (integrating-factor) Dormand-Prince step. The on-site rotation
  // rate w_i = E0_i + U N_i is frozen at the step start and factored out,
  // z_i(s) = exp(i w_i s) y_i(t + s); the embedded pair then integrates z,
  // whose dynamics only carry the tunnelling and the change in N_i.
  // Returns the scaled error norm of the embedded estimate.
  double dopri(System& f, double t, std::span<const Complex> y, double h, double t_end_eval,
               double atol, double rtol) {
    const std::size_t n = y.size();
    f.onsite(y, w);
    auto stage = [&](double c, double t_eval, std::span<const Complex> z, std::span<Complex> dz) {
      for (std::size_t i = 0; i < n; ++i) {
        rot[i] = std::polar(1.0, -w[i] * c * h);
        ys[i] = z[i] * rot[i];
      }
      f(t_eval, ys, dy);
      for (std::size_t i = 0; i < n; ++i) {
        dz[i] = (dy[i] + Complex(0.0, w[i]) * ys[i]) * std::conj(rot[i]);
      }
    };
    stage(0.0, t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    stage(c2, t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    stage(c3, t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    stage(c4, t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    stage(c5, t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    stage(1.0, t_end_eval, tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      z1[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    stage(1.0, t_end_eval, z1, k7);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y1[i] = z1[i] * std::polar(1.0, -w[i] * h);
      const Complex err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                               e6 * k6[i] + e7 * k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      acc += std::norm(err) / (sc * sc);
    }
    return std::sqrt(acc / static_cast<double>(n));
  }

  Vec k1, k2, k3, k4, k5, k6, k7, tmp, y1, z1, ys, dy, rot;
  std::vector<double> w;
};

class Recorder {
 public:
  Recorder(Trajectory& traj, const ModelParams& params) : traj_(traj), params_(params) {}

  void record(double t, std::span<const Complex> y, std::span<const double> k) {
    Sample s;
    s.time = t;
    s.amplitudes.assign(y.begin(), y.end());
    const RingState st{s.amplitudes, t};
    s.populations = st.populations();
    s.phases = st.phases();
    if (!last_phases_.empty()) {
      for (std::size_t i = 0; i < s.phases.size(); ++i) {
        s.phases[i] = last_phases_[i] + principal_angle(s.phases[i] - last_phases_[i]);
      }
    }
    last_phases_ = s.phases;
    s.couplings.assign(k.begin(), k.end());
    s.currents = link_currents(st, params_, k);
    s.energy = energy(st, params_, k);
    if (std::all_of(s.populations.begin(), s.populations.end(),
                    [](double v) { return v > 0.0; })) {
      s.winding = winding_number(st);
    }
    double total = 0.0;
    for (double v : s.populations) total += v;
    traj_.max_norm_drift = std::max(
        traj_.max_norm_drift, std::abs(total - params_.total_atoms) / params_.total_atoms);
    traj_.samples.push_back(std::move(s));
  }

 private:
  Trajectory& traj_;
  const ModelParams& params_;
  std::vector<double> last_phases_;
};

}  // namespace

std::string to_string(Method m) {
  return m == Method::Rk4 ? "rk4" : "dopri45";
}

Method method_from_string(const std::string& s) {
  if (s == "rk4") return Method::Rk4;
  if (s == "dopri45") return Method::DormandPrince45;
  throw InvalidParameter("unknown integrator method '" + s + "' (rk4|dopri45)");
}

void IntegratorOptions::validate() const {
  if (method == Method::Rk4 && !(dt > 0.0)) {
    throw InvalidParameter("fixed-step dt must be positive");
  }
  if (method == Method::DormandPrince45) {
    if (!(abs_tol > 0.0 && abs_tol < 1e-2) || !(rel_tol > 0.0 && rel_tol < 1e-2)) {
      throw InvalidParameter("adaptive tolerances must lie in (0, 1e-2)");
    }
    if (!(min_step > 0.0)) throw InvalidParameter("min_step must be positive");
  }
  if (settle_time && !(*settle_time >= 0.0)) {
    throw InvalidParameter("settle_time must be nonnegative");
  }
  if (!(max_time >= 0.0) || !std::isfinite(max_time)) {
    throw InvalidParameter("max_time must be finite and nonnegative");
  }
  const double floor = method == Method::Rk4 ? 0.0 : min_step;
  if (!(sample_interval > floor)) {
    throw InvalidParameter("sample_interval must exceed the step floor");
  }
}

nlohmann::json IntegratorOptions::to_json() const {
  return {{"method", to_string(method)}, {"dt", dt},
          {"abs_tol", abs_tol},          {"rel_tol", rel_tol},
          {"sample_interval", sample_interval}, {"max_time", max_time},
          {"min_step", min_step},
          {"settle_time", settle_time ? nlohmann::json(*settle_time) : nlohmann::json(nullptr)}};
}

IntegratorOptions IntegratorOptions::from_json(const nlohmann::json& j) {
  IntegratorOptions o;
  o.method = method_from_string(j.at("method").get<std::string>());
  o.dt = j.at("dt").get<double>();
  o.abs_tol = j.at("abs_tol").get<double>();
  o.rel_tol = j.at("rel_tol").get<double>();
  o.sample_interval = j.at("sample_interval").get<double>();
  o.max_time = j.at("max_time").get<double>();
  o.min_step = j.at("min_step").get<double>();
  if (j.contains("settle_time") && !j.at("settle_time").is_null()) {
    o.settle_time = j.at("settle_time").get<double>();
  }
  return o;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.time);
  return t;
}

std::vector<double> Trajectory::population(int well) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.populations.at(static_cast<std::size_t>(well)));
  return out;
}

nlohmann::json Trajectory::metadata() const {
  nlohmann::json init = nlohmann::json::array();
  for (const auto& a : initial) init.push_back({a.real(), a.imag()});
  return {{"version", version},
          {"params",
           {{"n_wells", params.n_wells},
            {"total_atoms", params.total_atoms},
            {"k_tilde", params.k_tilde},
            {"lambda", params.lambda},
            {"interaction", params.interaction},
            {"offsets", params.offsets}}},
          {"schedule", schedule},
          {"integrator", options.to_json()},
          {"initial", init},
          {"max_norm_drift", max_norm_drift},
          {"accepted_steps", accepted_steps},
          {"rejected_steps", rejected_steps}};
}

std::vector<Complex> step_rk4(std::span<const Complex> y, double t, double dt, const Rhs& rhs) {
  const std::size_t n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), tmp(n), out(n);
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  rhs(t + 0.5 * dt, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  rhs(t + 0.5 * dt, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  rhs(t + dt, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

Trajectory integrate(const RingState& state0, const ModelParams& params,
                     const CouplingSchedule& schedule, const IntegratorOptions& options) {
  options.validate();
  check_state(state0, params);
  if (schedule.n_wells() != params.n_wells) {
    throw DimensionError("schedule and params disagree on the number of wells");
  }
  if (std::abs(state0.norm() - params.total_atoms) > 1e-9 * params.total_atoms) {
    throw InvalidParameter("initial norm differs from N_T by more than 1e-9 relative");
  }

  Trajectory traj;
  traj.params = params;
  traj.schedule = schedule.describe();
  traj.options = options;
  traj.initial = state0.amplitudes;
  traj.version = kVersion;

  const std::size_t n = state0.amplitudes.size();
  System f(params, schedule);
  Stepper st(n);
  Recorder rec(traj, params);
  Vec y = state0.amplitudes;
  double t = 0.0;

  const auto disc = schedule.discontinuities();
  std::size_t next_disc = 0;
  long next_sample = 1;
  double t_end = options.max_time;
  const double atol = options.abs_tol * std::sqrt(params.total_atoms);
  const bool adaptive = options.method == Method::DormandPrince45;
  double h = adaptive ? std::min(options.sample_interval, 1e-3) : options.dt;
  double g_prev = 0.0;

  rec.record(t, y, f.couplings(t));

  auto sample_time = [&](long k) { return static_cast<double>(k) * options.sample_interval; };
  auto monitor_value = [&](const Monitor& m, std::span<const Complex> yy, double tt) {
    const auto k = f.couplings(tt);
    const RingState s{Vec(yy.begin(), yy.end()), tt};
    return m.direction * link_current(s, params, k, m.link);
  };

  while (t < t_end) {
    double stop = std::min(t_end, sample_time(next_sample));
    bool stop_is_disc = false;
    if (next_disc < disc.size() && disc[next_disc] <= stop) {
      stop = disc[next_disc];
      stop_is_disc = true;
    }

    double h_try = adaptive ? h : options.dt;
    bool clipped = false;
    if (t + h_try >= stop || stop - (t + h_try) < 1e-9 * h_try) {
      h_try = stop - t;
      clipped = true;
    }
    const double t_end_eval =
        (clipped && stop_is_disc) ? std::nextafter(stop, t) : t + h_try;

    if (adaptive) {
      const double err = st.dopri(f, t, y, h_try, t_end_eval, atol, options.rel_tol);
      const double fac =
          err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (!(err <= 1.0)) {
        ++traj.rejected_steps;
        h = h_try * std::min(1.0, fac);
        if (!std::isfinite(err)) h = h_try * 0.2;
        if (h < options.min_step) {
          throw StiffnessError("adaptive step fell below " + std::to_string(options.min_step) +
                               " at t = " + std::to_string(t));
        }
        continue;
      }
      h = clipped ? std::max(h, h_try * fac) : h_try * fac;
    } else {
      st.rk4(f, t, y, h_try, t_end_eval);
    }

    if (!all_finite(st.y1)) {
      throw DivergenceError("non-finite amplitude after t = " + std::to_string(t), t);
    }

    double t_new = clipped ? stop : t + h_try;
    bool event = false;
    if (auto m = schedule.monitor(f.control)) {
      if (t_new - f.control.segment_start > m->timeout) {
        throw StalledTransfer("transfer " + std::to_string(f.control.segment) +
                              " did not complete within " + std::to_string(m->timeout) +
                              " / omega_R");
      }
      const double g_new = monitor_value(*m, st.y1, t_new);
      if (f.control.armed && g_prev > 0.0 && g_new <= 0.0) {
        // Bisect on the step length for the first zero of the current.
        Vec y0 = y;
        double lo = 0.0;
        double hi = h_try;
        Vec y_hi = st.y1;
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max(1.0, t + hi);
             ++it) {
          const double mid = 0.5 * (lo + hi);
          if (adaptive) {
            st.dopri(f, t, y0, mid, t + mid, atol, options.rel_tol);
          } else {
            st.rk4(f, t, y0, mid, t + mid);
          }
          if (monitor_value(*m, st.y1, t + mid) <= 0.0) {
            hi = mid;
            y_hi = st.y1;
          } else {
            lo = mid;
          }
        }
        st.y1 = y_hi;
        t_new = t + hi;
        clipped = false;
        event = true;
      } else {
        if (!f.control.armed && g_new > m->floor) f.control.armed = true;
        g_prev = g_new;
      }
    }

    y = st.y1;
    ++traj.accepted_steps;
    t = t_new;

    if (event) {
      traj.switches.push_back({t, f.control.segment});
      f.control.segment += 1;
      f.control.armed = false;
      f.control.segment_start = t;
      if (auto m = schedule.monitor(f.control)) {
        g_prev = monitor_value(*m, y, t);
        if (g_prev > m->floor) f.control.armed = true;
      } else if (options.settle_time) {
        const auto k = static_cast<long>(std::ceil((t + *options.settle_time) /
                                                   options.sample_interval - 1e-9));
        t_end = std::min(t_end, std::max(sample_time(k), sample_time(next_sample)));
      }
    }
    if (clipped && stop_is_disc) ++next_disc;
    const double ts = sample_time(next_sample);
    if (clipped && (t == ts || (t == t_end && ts - t_end < 1e-9 * options.sample_interval))) {
      rec.record(t, y, f.couplings(t));
      ++next_sample;
    }
  }
  return traj;
}

void validate_trajectory(const Trajectory& trajectory) {
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& s : trajectory.samples) {
    if (!(s.time > last)) throw Error("trajectory times are not strictly increasing");
    last = s.time;
    check_state(s.state(), trajectory.params);
  }
  if (trajectory.max_norm_drift > kNormDriftLimit) {
    throw Error("norm drift " + std::to_string(trajectory.max_norm_drift) +
                " exceeds the 1e-7 relative limit");
  }
}

}  // namespace ringbec
