#pragma once

#include <airsel/channel.hpp>
#include <airsel/rng.hpp>
#include <airsel/types.hpp>

namespace airsel::testing {

inline cmat random_cmat(int rows, int cols, Rng& rng) {
  cmat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.complex_gaussian();
  return a;
}

inline cvec random_cvec(int n, Rng& rng) { return random_cmat(n, 1, rng).col(0); }

inline rvec random_unit_box(int n, Rng& rng) {
  rvec s(n);
  for (int i = 0; i < n; ++i) s(i) = rng.uniform();
  return s;
}

inline rvec random_weights(int k, Rng& rng) {
  rvec w(k);
  for (int i = 0; i < k; ++i) w(i) = 0.1 + rng.uniform();
  return w / w.sum();
}

/// Unit-scale i.i.d. instance with random weights and noise.
inline ProblemInstance random_instance(int n, int k, std::uint64_t seed, double power = 1.0) {
  Rng rng(seed);
  cmat h = random_cmat(n, k, rng);
  rvec w = random_weights(k, rng);
  const double s2 = 0.05 + 0.5 * rng.uniform();
  return ProblemInstance(SystemDims(n, k, 1), ChannelMatrix(std::move(h)), AggregationWeights(std::move(w)),
                         NoiseModel(s2), power);
}

/// Instance from the physical channel model at the given size.
inline ProblemInstance network_instance(int n, int k, int l, double snr_db, std::uint64_t seed) {
  NetworkConfig net;
  net.dims = SystemDims(n, k, l);
  net.snr_db = snr_db;
  return sample_network(net, seed);
}

}  // namespace airsel::testing
