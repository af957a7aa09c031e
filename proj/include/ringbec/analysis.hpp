#pragma once

// Signal utilities for sampled trajectories. Frequencies are angular and
// share the unit of the time axis they were measured on (omega_R for
// trajectory times in 1/omega_R).

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ringbec {

enum class Window { Rectangular, Hann };

struct SpectralEstimate {
  double frequency = 0.0;   // interpolated peak, angular
  double amplitude = 0.0;   // spectral magnitude at the peak bin
  double resolution = 0.0;  // bin spacing 2 pi / T, angular
  Window window = Window::Hann;
};

std::string to_string(Window w);

/// FFT magnitude peak of the mean-removed series, refined by a 3-point
/// parabola through the peak bin and its neighbours. Needs >= 64 uniformly
/// spaced samples; throws ResampleRequired or MeasurementError.
SpectralEstimate dominant_frequency(std::span<const double> times,
                                    std::span<const double> series,
                                    Window window = Window::Hann);

struct SignChangeOptions {
  // When set, the crossing must be downward and only counts after the
  // series has first exceeded this level.
  std::optional<double> arm_floor;
};

/// First zero crossing, linearly interpolated between samples.
std::optional<double> detect_sign_change(std::span<const double> series,
                                         std::span<const double> times,
                                         const SignChangeOptions& options = {});

/// Lag (in samples) maximizing the mean-removed cross-correlation
/// sum_j a[j] b[j + lag] / overlap. Positive when b trails a.
int crosscorr_lag(std::span<const double> a, std::span<const double> b, int max_lag = -1);

double mean(std::span<const double> x);

}  // namespace ringbec
