#pragma once

// Channel generation: ring-shaped cell, power-law path loss and a
// Gaussian-angular-spread correlation model for a half-wavelength ULA.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include <airsel/rng.hpp>
#include <airsel/types.hpp>

namespace airsel {

enum class CorrelationMode { iid, correlated };

struct ChannelConfig {
  double r_inner = 10.0;            // m
  double r_outer = 100.0;           // m
  double pathloss_exponent = 3.0;
  double ref_distance = 10.0;       // m
  double ref_gain = 1.0;
  double antenna_spacing = 0.5;     // wavelengths
  double angular_spread_lo = 12.0;  // degrees
  double angular_spread_hi = 15.0;  // degrees
  CorrelationMode correlation = CorrelationMode::correlated;

  void validate() const {
    detail::require(r_inner > 0.0 && r_inner <= r_outer, "ChannelConfig: need 0 < r_inner <= r_outer");
    detail::require(pathloss_exponent > 0.0, "ChannelConfig: pathloss_exponent must be > 0");
    detail::require(ref_distance > 0.0 && ref_gain > 0.0, "ChannelConfig: reference distance/gain must be > 0");
    detail::require(angular_spread_lo <= angular_spread_hi, "ChannelConfig: angular spread range is inverted");
  }
};

struct DevicePlacement {
  std::vector<double> distance;     // m
  std::vector<double> aoa;          // rad
  std::vector<double> angular_std;  // rad
};

/// Positions uniform over the annulus area; AoA uniform on [0, 2pi).
inline DevicePlacement place_devices(int k, const ChannelConfig& cfg, std::uint64_t seed) {
  detail::require(k >= 1, "place_devices: K must be >= 1");
  cfg.validate();
  Rng rng(seed);
  DevicePlacement out;
  const double r2_in = cfg.r_inner * cfg.r_inner;
  const double r2_out = cfg.r_outer * cfg.r_outer;
  constexpr double deg = std::numbers::pi / 180.0;
  for (int i = 0; i < k; ++i) {
    const double u = rng.uniform();
    const double d = std::sqrt(u * (r2_out - r2_in) + r2_in);
    out.distance.push_back(std::clamp(d, cfg.r_inner, cfg.r_outer));
    out.aoa.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
    out.angular_std.push_back(rng.uniform(cfg.angular_spread_lo, cfg.angular_spread_hi) * deg);
  }
  return out;
}

inline double path_loss(double d, const ChannelConfig& cfg) {
  if (!(d > 0.0)) throw domain_error("path_loss: distance must be > 0");
  return cfg.ref_gain * std::pow(d / cfg.ref_distance, -cfg.pathloss_exponent);
}

inline cmat correlation_matrix(double kappa, double theta_std, const ChannelConfig& cfg, int n) {
  detail::require(n >= 1, "correlation_matrix: N must be >= 1");
  const double zeta = cfg.antenna_spacing;
  const double phase = 2.0 * std::numbers::pi * zeta * std::sin(kappa);
  const double spread = std::numbers::pi * zeta * std::cos(kappa);
  cmat r(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double lag = i - j;
      const double xi = std::exp(-2.0 * theta_std * theta_std * (spread * lag) * (spread * lag));
      r(i, j) = std::polar(xi, phase * lag);
    }
  }
  return r;
}

struct ChannelFactor {
  cmat factor;            ///< F with F F^H = R after clipping
  double clipped = 0.0;   ///< magnitude of the most negative eigenvalue removed
};

/// Hermitian square root of R with negative eigenvalues clipped to zero.
inline ChannelFactor correlation_factor(const cmat& r) {
  detail::require_dims(r.rows() == r.cols(), "correlation_factor: R must be square");
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw dimension_error("correlation_factor: R is not Hermitian");
  Eigen::SelfAdjointEigenSolver<cmat> eig(r);
  if (eig.info() != Eigen::Success) throw numerical_error("correlation_factor: eigendecomposition failed");
  rvec lam = eig.eigenvalues();
  ChannelFactor out;
  out.clipped = std::max(0.0, -lam.minCoeff());
  lam = lam.cwiseMax(0.0).cwiseSqrt();
  out.factor = eig.eigenvectors() * lam.cast<cd>().asDiagonal() * eig.eigenvectors().adjoint();
  return out;
}

inline cvec sample_channel_with_factor(const cmat& factor, double large_scale, Rng& rng) {
  detail::require(large_scale >= 0.0, "sample_channel: large-scale gain must be >= 0");
  const auto n = factor.rows();
  cvec w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.complex_gaussian();
  return std::sqrt(large_scale) * (factor * w);
}

/// h = sqrt(large_scale) R^{1/2} w, w ~ CN(0, I).
inline cvec sample_channel(const cmat& r, double large_scale, std::uint64_t seed) {
  Rng rng(seed);
  return sample_channel_with_factor(correlation_factor(r).factor, large_scale, rng);
}

struct NetworkConfig {
  SystemDims dims{128, 50, 16};
  ChannelConfig channel;
  double snr_db = 10.0;
  double power_limit = 1.0;
};

/// Assembled instance plus the geometry that produced it.
struct SampledNetwork {
  ProblemInstance instance;
  DevicePlacement placement;
  double max_clipped_eigenvalue = 0.0;
};

inline SampledNetwork sample_network_detailed(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.channel.validate();
  const int n = cfg.dims.n_antennas;
  const int k = cfg.dims.n_devices;
  SampledNetwork out;
  out.placement = place_devices(k, cfg.channel, derive_seed(seed, 0));
  cmat h(n, k);
  const cmat eye = cmat::Identity(n, n);
  for (int i = 0; i < k; ++i) {
    const double beta = path_loss(out.placement.distance[i], cfg.channel);
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(i)));
    if (cfg.channel.correlation == CorrelationMode::iid) {
      h.col(i) = sample_channel_with_factor(eye, beta, rng);
    } else {
      const auto f = correlation_factor(correlation_matrix(
          out.placement.aoa[i], out.placement.angular_std[i], cfg.channel, n));
      out.max_clipped_eigenvalue = std::max(out.max_clipped_eigenvalue, f.clipped);
      h.col(i) = sample_channel_with_factor(f.factor, beta, rng);
    }
  }
  out.instance = ProblemInstance(cfg.dims, ChannelMatrix(std::move(h)), AggregationWeights::uniform(k),
                                 NoiseModel::from_snr_db(cfg.snr_db, cfg.power_limit), cfg.power_limit);
  return out;
}

inline ProblemInstance sample_network(const NetworkConfig& cfg, std::uint64_t seed) {
  return sample_network_detailed(cfg, seed).instance;
}

}  // namespace airsel
