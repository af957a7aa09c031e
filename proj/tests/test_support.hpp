#pragma once

#include <numbers>
#include <random>
#include <vector>

#include "ringbec/model.hpp"

namespace ringbec::test {

// Random populations (each at least floor_fraction of the mean weight) and
// uniform random phases, normalized to N_T.
inline RingState random_state(std::mt19937_64& gen, const ModelParams& p, double floor_fraction) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> n(static_cast<std::size_t>(p.n_wells));
  std::vector<double> th(n.size());
  double sum = 0.0;
  for (auto& x : n) {
    x = floor_fraction + u(gen);
    sum += x;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    n[i] *= p.total_atoms / sum;
    th[i] = 2.0 * std::numbers::pi * u(gen);
  }
  return populations_state(n, th);
}

}  // namespace ringbec::test
