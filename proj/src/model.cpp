#include "ringbec/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ringbec/errors.hpp"

namespace ringbec {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t next(std::size_t i, std::size_t n) { return (i + 1) % n; }
std::size_t prev(std::size_t i, std::size_t n) { return (i + n - 1) % n; }

void check_couplings(std::size_t n, std::span<const double> couplings) {
  if (couplings.size() != n) {
    throw DimensionError("coupling vector has " +
                         std::to_string(couplings.size()) + " entries, ring has " +
                         std::to_string(n) + " wells");
  }
}

double offset(const ModelParams& p, std::size_t i) {
  return p.offsets.empty() ? 0.0 : p.offsets[i];
}

}  // namespace

ModelParams make_params(int n_wells, double total_atoms, double k_tilde,
                        Nonlinearity nonlinearity, std::vector<double> offsets) {
  if (n_wells < 3) {
    throw RingTooSmall("a ring needs at least 3 wells, got " +
                       std::to_string(n_wells));
  }
  if (!(k_tilde > 0.0) || !std::isfinite(k_tilde)) {
    throw InvalidParameter("K~ must be positive and finite");
  }
  if (!(total_atoms > 0.0) || !std::isfinite(total_atoms)) {
    throw InvalidParameter("N_T must be positive and finite");
  }
  if (offsets.empty()) offsets.assign(static_cast<std::size_t>(n_wells), 0.0);
  if (offsets.size() != static_cast<std::size_t>(n_wells)) {
    throw DimensionError("E0 has " + std::to_string(offsets.size()) +
                         " entries, ring has " + std::to_string(n_wells) + " wells");
  }
  for (double e : offsets) {
    if (!std::isfinite(e)) throw InvalidParameter("E0 entries must be finite");
  }

  ModelParams p;
  p.n_wells = n_wells;
  p.total_atoms = total_atoms;
  p.k_tilde = k_tilde;
  p.offsets = std::move(offsets);
  if (const auto* lam = std::get_if<Lambda>(&nonlinearity)) {
    if (!std::isfinite(lam->value)) throw InvalidParameter("Lambda must be finite");
    p.lambda = lam->value;
    p.interaction = 2.0 * lam->value * k_tilde / total_atoms;
  } else {
    const double u = std::get<Interaction>(nonlinearity).value;
    if (!std::isfinite(u)) throw InvalidParameter("U must be finite");
    p.interaction = u;
    p.lambda = u * total_atoms / (2.0 * k_tilde);
  }
  p.low_atom_warning = total_atoms < kMinCoherentAtoms;
  return p;
}

double RingState::norm() const noexcept {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

std::vector<double> RingState::populations() const {
  std::vector<double> out;
  out.reserve(amplitudes.size());
  for (const auto& a : amplitudes) out.push_back(std::norm(a));
  return out;
}

std::vector<double> RingState::phases() const {
  std::vector<double> out;
  out.reserve(amplitudes.size());
  for (const auto& a : amplitudes) out.push_back(std::arg(a));
  return out;
}

void check_state(const RingState& state, const ModelParams& params) {
  if (state.amplitudes.size() != static_cast<std::size_t>(params.n_wells)) {
    throw DimensionError("state has " + std::to_string(state.amplitudes.size()) +
                         " wells, params expect " + std::to_string(params.n_wells));
  }
  for (const auto& a : state.amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw InvalidParameter("state contains a non-finite amplitude");
    }
  }
  const double n = state.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidParameter("state norm must be positive and finite");
  }
}

PolarState to_polar(const RingState& state) {
  return {state.populations(), state.phases()};
}

RingState to_ring(const PolarState& polar, double time) {
  if (polar.populations.size() != polar.phases.size()) {
    throw DimensionError("populations and phases differ in length");
  }
  RingState s;
  s.time = time;
  s.amplitudes.reserve(polar.populations.size());
  for (std::size_t i = 0; i < polar.populations.size(); ++i) {
    if (polar.populations[i] < 0.0) {
      throw InvalidParameter("populations must be nonnegative");
    }
    s.amplitudes.push_back(std::polar(std::sqrt(polar.populations[i]), polar.phases[i]));
  }
  return s;
}

void rhs_complex_into(std::span<const Complex> psi, const ModelParams& params,
                      std::span<const double> couplings, std::span<Complex> out) {
  const std::size_t n = psi.size();
  const double u = params.interaction;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = next(i, n);
    const std::size_t im = prev(i, n);
    const Complex h = (offset(params, i) + u * std::norm(psi[i])) * psi[i] -
                      couplings[i] * psi[ip] - couplings[im] * psi[im];
    out[i] = Complex(h.imag(), -h.real());  // -i * h
  }
}

std::vector<Complex> rhs_complex(const RingState& state, const ModelParams& params,
                                 std::span<const double> couplings) {
  const std::size_t n = state.amplitudes.size();
  if (n != static_cast<std::size_t>(params.n_wells)) {
    throw DimensionError("state length does not match n_wells");
  }
  check_couplings(n, couplings);
  std::vector<Complex> out(n);
  rhs_complex_into(state.amplitudes, params, couplings, out);
  return out;
}

PolarDerivative rhs_polar(const PolarState& state, const ModelParams& params,
                          std::span<const double> couplings) {
  const std::size_t n = state.populations.size();
  if (n != static_cast<std::size_t>(params.n_wells) || state.phases.size() != n) {
    throw DimensionError("polar state length does not match n_wells");
  }
  check_couplings(n, couplings);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(state.populations[i] > 0.0)) {
      throw PolarSingularity("well " + std::to_string(i + 1) +
                             " is empty; use the amplitude form");
    }
  }

  const auto& N = state.populations;
  const auto& th = state.phases;
  PolarDerivative d{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = next(i, n);
    const std::size_t im = prev(i, n);
    const double k_out = couplings[i];
    const double k_in = couplings[im];
    const double d_fwd = th[ip] - th[i];
    const double d_bwd = th[i] - th[im];
    // Population exchange is twice the bare overlap term: it is the
    // derivative of |psi_i|^2, not of psi_i.
    d.populations[i] = -2.0 * k_out * std::sqrt(N[i] * N[ip]) * std::sin(d_fwd) +
                       2.0 * k_in * std::sqrt(N[im] * N[i]) * std::sin(d_bwd);
#ifdef RINGBEC_MUTATE_POLAR
    const double sign = -1.0;
#else
    const double sign = 1.0;
#endif
    d.phases[i] = sign * k_out * std::sqrt(N[ip] / N[i]) * std::cos(d_fwd) +
                  k_in * std::sqrt(N[im] / N[i]) * std::cos(d_bwd) -
                  params.interaction * N[i] - offset(params, i);
  }
  return d;
}

PolarDerivative polar_from_complex(std::span<const Complex> psi,
                                   std::span<const Complex> dpsi) {
  const std::size_t n = psi.size();
  PolarDerivative d{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double nn = std::norm(psi[i]);
    // dN = 2 Re(conj(psi) dpsi), dtheta = Im(conj(psi) dpsi) / N
    const Complex c = std::conj(psi[i]) * dpsi[i];
    d.populations[i] = 2.0 * c.real();
    d.phases[i] = c.imag() / nn;
  }
  return d;
}

double energy(const RingState& state, const ModelParams& params,
              std::span<const double> couplings) {
  const std::size_t n = state.amplitudes.size();
  check_couplings(n, couplings);
  const auto& psi = state.amplitudes;
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ni = std::norm(psi[i]);
    h += offset(params, i) * ni + 0.5 * params.interaction * ni * ni;
    h -= 2.0 * couplings[i] * (std::conj(psi[i]) * psi[next(i, n)]).real();
  }
  return h;
}

double link_current(const RingState& state, const ModelParams& params,
                    std::span<const double> couplings, int link) {
  const std::size_t n = state.amplitudes.size();
  check_couplings(n, couplings);
  (void)params;
  if (link < 0 || static_cast<std::size_t>(link) >= n) {
    throw InvalidParameter("link index out of range");
  }
  const auto i = static_cast<std::size_t>(link);
  // 2 K Im(conj(psi_i) psi_{i+1}) == 2 K sqrt(N_i N_{i+1}) sin(theta_{i+1}-theta_i)
  return 2.0 * couplings[i] *
         (std::conj(state.amplitudes[i]) * state.amplitudes[next(i, n)]).imag();
}

std::vector<double> link_currents(const RingState& state, const ModelParams& params,
                                  std::span<const double> couplings) {
  const std::size_t n = state.amplitudes.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = link_current(state, params, couplings, static_cast<int>(i));
  }
  return out;
}

double principal_angle(double angle) noexcept {
  double r = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

int winding_number(const RingState& state) {
  const std::size_t n = state.amplitudes.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::norm(state.amplitudes[i]) > 0.0)) {
      throw UndefinedWinding("well " + std::to_string(i + 1) +
                             " is empty; winding number undefined");
    }
    sum += principal_angle(std::arg(state.amplitudes[next(i, n)]) -
                           std::arg(state.amplitudes[i]));
  }
  return static_cast<int>(std::lround(sum / kTwoPi));
}

Observables observe(const RingState& state, const ModelParams& params,
                    std::span<const double> couplings) {
  const std::size_t n = state.amplitudes.size();
  Observables o;
  o.populations = state.populations();
  o.relative_phases.resize(n);
  const auto th = state.phases();
  bool occupied = true;
  for (std::size_t i = 0; i < n; ++i) {
    o.relative_phases[i] = principal_angle(th[next(i, n)] - th[i]);
    occupied = occupied && o.populations[i] > 0.0;
  }
  o.currents = link_currents(state, params, couplings);
  o.energy = energy(state, params, couplings);
  if (occupied) o.winding = winding_number(state);
  return o;
}

RingState populations_state(std::span<const double> populations,
                            std::span<const double> phases) {
  if (!phases.empty() && phases.size() != populations.size()) {
    throw DimensionError("populations and phases differ in length");
  }
  RingState s;
  s.amplitudes.reserve(populations.size());
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (!(populations[i] >= 0.0) || !std::isfinite(populations[i])) {
      throw InvalidParameter("populations must be finite and nonnegative");
    }
    const double theta = phases.empty() ? 0.0 : phases[i];
    if (!std::isfinite(theta)) throw InvalidParameter("phases must be finite");
    s.amplitudes.push_back(std::polar(std::sqrt(populations[i]), theta));
  }
  return s;
}

RingState uniform_state(const ModelParams& params) {
  const std::vector<double> n(static_cast<std::size_t>(params.n_wells),
                              params.total_atoms / params.n_wells);
  return populations_state(n, {});
}

RingState winding_state(const ModelParams& params, int m) {
  const std::vector<double> n(static_cast<std::size_t>(params.n_wells),
                              params.total_atoms / params.n_wells);
  std::vector<double> theta(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    theta[i] = 2.0 * std::numbers::pi * m * static_cast<double>(i + 1) / params.n_wells;
  }
  return populations_state(n, theta);
}

RingState single_well_state(const ModelParams& params, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidParameter("single-well fraction must lie in [0, 1]");
  }
  std::vector<double> n(static_cast<std::size_t>(params.n_wells),
                        (1.0 - fraction) * params.total_atoms / (params.n_wells - 1));
  n[0] = fraction * params.total_atoms;
  return populations_state(n, {});
}

RingState seed_imbalance_state(const ModelParams& params, double epsilon) {
  const double mean = params.total_atoms / params.n_wells;
  const double excess = epsilon * params.total_atoms;
  if (!(std::abs(excess) <= mean)) throw InvalidParameter("seed imbalance too large");
  std::vector<double> n(static_cast<std::size_t>(params.n_wells),
                        mean - excess / (params.n_wells - 1));
  n[0] = mean + excess;
  return populations_state(n, {});
}

}  // namespace ringbec
