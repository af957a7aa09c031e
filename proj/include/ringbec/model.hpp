#pragma once

// Mean-field tunnelling model for a condensate on a ring of potential wells.
//
// Units: hbar = 1 and K~ (the mean coupling) sets the energy scale, so the
// characteristic frequency is omega_R = 2 K~. Right-hand sides are returned
// as derivatives with respect to physical time; everything that carries a
// time coordinate (RingState::time, schedules, trajectories) is expressed in
// units of 1/omega_R.
//
// Coupling convention: K[i] joins well i and well i+1 (indices mod n).

#include <complex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace ringbec {

using Complex = std::complex<double>;

/// Dimensionless nonlinearity Lambda = U N_T / (2 K~).
struct Lambda {
  double value;
};

/// On-site interaction energy U.
struct Interaction {
  double value;
};

using Nonlinearity = std::variant<Lambda, Interaction>;

struct ModelParams {
  int n_wells = 4;
  double total_atoms = 0.0;  // N_T
  double k_tilde = 0.0;
  double lambda = 0.0;
  double interaction = 0.0;  // U
  std::vector<double> offsets;  // E0, one per well
  // Set when N_T is below the ~1e3 atoms needed for a coherent phase.
  bool low_atom_warning = false;

  double omega_r() const noexcept { return 2.0 * k_tilde; }
};

inline constexpr double kMinCoherentAtoms = 1e3;

/// Derives U from Lambda (or the reverse) and checks the basic invariants.
/// An empty `offsets` means all E0 = 0.
ModelParams make_params(int n_wells, double total_atoms, double k_tilde,
                        Nonlinearity nonlinearity,
                        std::vector<double> offsets = {});

struct RingState {
  std::vector<Complex> amplitudes;  // |psi_i|^2 = N_i
  double time = 0.0;                // units of 1/omega_R

  double norm() const noexcept;
  std::vector<double> populations() const;
  std::vector<double> phases() const;
};

struct PolarState {
  std::vector<double> populations;
  std::vector<double> phases;
};

struct PolarDerivative {
  std::vector<double> populations;
  std::vector<double> phases;
};

/// Throws InvalidParameter when the state has the wrong length, a
/// non-finite component or a zero norm.
void check_state(const RingState& state, const ModelParams& params);

PolarState to_polar(const RingState& state);
RingState to_ring(const PolarState& polar, double time = 0.0);

/// d psi_i/dt = -i [ (E0_i + U |psi_i|^2) psi_i - K_i psi_{i+1} - K_{i-1} psi_{i-1} ]
std::vector<Complex> rhs_complex(const RingState& state,
                                 const ModelParams& params,
                                 std::span<const double> couplings);

/// Allocation-free kernel used by the integrator. No validation.
void rhs_complex_into(std::span<const Complex> psi, const ModelParams& params,
                      std::span<const double> couplings, std::span<Complex> out);

/// Real (population, phase) form of the same dynamics. Requires N_i > 0.
PolarDerivative rhs_polar(const PolarState& state, const ModelParams& params,
                          std::span<const double> couplings);

/// Chain-rule image of a complex derivative in (N, theta) coordinates.
PolarDerivative polar_from_complex(std::span<const Complex> psi,
                                   std::span<const Complex> dpsi);

/// H = sum_i [E0_i N_i + U N_i^2 / 2] - sum_i K_i 2 Re(conj(psi_i) psi_{i+1}).
double energy(const RingState& state, const ModelParams& params,
              std::span<const double> couplings);

/// Atoms per unit (physical) time flowing from well i into well i+1:
/// J_i = 2 K_i sqrt(N_i N_{i+1}) sin(theta_{i+1} - theta_i).
/// dN_i/dt = J_{i-1} - J_i.
double link_current(const RingState& state, const ModelParams& params,
                    std::span<const double> couplings, int link);
std::vector<double> link_currents(const RingState& state,
                                  const ModelParams& params,
                                  std::span<const double> couplings);

/// Principal value in (-pi, pi].
double principal_angle(double angle) noexcept;

/// (1/2pi) sum_i pv(theta_{i+1} - theta_i), rounded. Throws
/// UndefinedWinding if any well is empty.
int winding_number(const RingState& state);

struct Observables {
  std::vector<double> populations;
  std::vector<double> relative_phases;  // pv(theta_{i+1} - theta_i)
  std::vector<double> currents;         // J_i, physical units
  double energy = 0.0;
  std::optional<int> winding;
};

Observables observe(const RingState& state, const ModelParams& params,
                    std::span<const double> couplings);

// Initial-state presets. Wells are filled with real nonnegative
// amplitudes unless stated otherwise.

/// N_T / n in every well, equal phases.
RingState uniform_state(const ModelParams& params);

/// Uniform populations with theta_i = 2 pi m i / n (i = 1..n).
RingState winding_state(const ModelParams& params, int m);

/// fraction * N_T in well 1, the rest split evenly.
RingState single_well_state(const ModelParams& params, double fraction);

/// Uniform state with epsilon * N_T moved into well 1 from the others.
RingState seed_imbalance_state(const ModelParams& params, double epsilon);

/// Per-well populations and phases.
RingState populations_state(std::span<const double> populations,
                            std::span<const double> phases);

}  // namespace ringbec
