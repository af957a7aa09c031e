#include "ringbec/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <numeric>

#include "ringbec/errors.hpp"

namespace ringbec {
namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// |FFT| of a real series, bins 0..n/2.
std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int nc = n / 2 + 1;
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc)));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE));
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());
  std::vector<double> mag(static_cast<std::size_t>(nc));
  for (int k = 0; k < nc; ++k) mag[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  return mag;
}

}  // namespace

std::string to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

SpectralEstimate dominant_frequency(std::span<const double> times,
                                    std::span<const double> series, Window window) {
  const std::size_t n = series.size();
  if (times.size() != n) throw DimensionError("time axis and series differ in length");
  if (n < 64) throw MeasurementError("need at least 64 samples for a spectral estimate");
  const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw ResampleRequired("time axis is not increasing");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt) {
      throw ResampleRequired("series is not uniformly sampled");
    }
  }

  const double m = mean(series);
  std::vector<double> x(n);
  double rms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = series[i] - m;
    rms += x[i] * x[i];
  }
  rms = std::sqrt(rms / static_cast<double>(n));
  if (rms <= 1e-12 * std::max(1.0, std::abs(m))) {
    throw MeasurementError("series has no oscillating component above the noise floor");
  }
  if (window == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1)));
    }
  }

  const auto mag = magnitude_spectrum(x);
  const auto peak = std::max_element(mag.begin() + 1, mag.end());
  const auto k = static_cast<std::size_t>(peak - mag.begin());
  double offset = 0.0;
  if (k + 1 < mag.size()) {
    const double y0 = mag[k - 1];
    const double y1 = mag[k];
    const double y2 = mag[k + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom != 0.0) offset = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
  }
  const double resolution = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  return {(static_cast<double>(k) + offset) * resolution, *peak, resolution, window};
}

std::optional<double> detect_sign_change(std::span<const double> series,
                                         std::span<const double> times,
                                         const SignChangeOptions& options) {
  if (times.size() != series.size()) {
    throw DimensionError("time axis and series differ in length");
  }
  bool armed = !options.arm_floor.has_value();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double v = series[i];
    if (!armed) {
      if (v > *options.arm_floor) armed = true;
      continue;
    }
    if (i == 0) {
      if (v == 0.0 && !options.arm_floor) return times[0];
      continue;
    }
    const double u = series[i - 1];
    const bool down = u > 0.0 && v <= 0.0;
    const bool up = u < 0.0 && v >= 0.0;
    if (down || (up && !options.arm_floor)) {
      return times[i - 1] + (times[i] - times[i - 1]) * (u / (u - v));
    }
  }
  return std::nullopt;
}

int crosscorr_lag(std::span<const double> a, std::span<const double> b, int max_lag) {
  const int n = static_cast<int>(a.size());
  if (b.size() != a.size()) throw DimensionError("cross-correlation needs equal lengths");
  if (n < 2) throw MeasurementError("cross-correlation needs at least two samples");
  if (max_lag < 0) max_lag = n / 4;
  max_lag = std::min(max_lag, n - 1);

  const double ma = mean(a);
  const double mb = mean(b);
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  double va = 0.0;
  double vb = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] -= ma;
    y[i] -= mb;
    va += x[i] * x[i];
    vb += y[i] * y[i];
  }
  if (va == 0.0 || vb == 0.0) throw MeasurementError("cross-correlation of a flat series");

  // Summation runs over the index of `a`'s sample in ascending order so
  // that swapping the arguments reproduces the same sums bit for bit.
  auto corr = [&](int lag) {
    double s = 0.0;
    if (lag >= 0) {
      for (int j = 0; j + lag < n; ++j) s += x[j] * y[j + lag];
    } else {
      for (int j = -lag; j < n; ++j) s += y[j + lag] * x[j];
    }
    return s / static_cast<double>(n - std::abs(lag));
  };
  int best = 0;
  double best_val = corr(0);
  for (int d = 1; d <= max_lag; ++d) {
    for (int lag : {d, -d}) {
      const double c = corr(lag);
      if (c > best_val) {
        best_val = c;
        best = lag;
      }
    }
  }
  return best;
}

}  // namespace ringbec
