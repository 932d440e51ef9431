#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <airsel/channel.hpp>

using namespace airsel;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

TEST(Rng, SeededStreamsAreReproducible) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(Rng, ComplexGaussianMoments) {
  Rng rng(7);
  const int n = 200000;
  cd mean(0.0, 0.0);
  double power = 0.0;
  cd pseudo(0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    const cd z = rng.complex_gaussian();
    mean += z;
    power += std::norm(z);
    pseudo += z * z;
  }
  EXPECT_LT(std::abs(mean / double(n)), 0.01);
  EXPECT_NEAR(power / n, 1.0, 0.01);
  EXPECT_LT(std::abs(pseudo / double(n)), 0.01);  // circular symmetry
}

TEST(PlaceDevices, AreaUniformSecondMoment) {
  ChannelConfig cfg;
  const auto p = place_devices(100000, cfg, 5);
  double m2 = 0.0;
  for (double d : p.distance) {
    EXPECT_GE(d, cfg.r_inner);
    EXPECT_LE(d, cfg.r_outer);
    m2 += d * d;
  }
  m2 /= 100000.0;
  const double expected = 0.5 * (cfg.r_inner * cfg.r_inner + cfg.r_outer * cfg.r_outer);
  EXPECT_NEAR(m2, expected, 0.02 * expected);
  for (std::size_t i = 0; i < p.aoa.size(); ++i) {
    EXPECT_GE(p.aoa[i], 0.0);
    EXPECT_LT(p.aoa[i], 2.0 * std::numbers::pi);
    EXPECT_GE(p.angular_std[i], cfg.angular_spread_lo * kDeg - 1e-15);
    EXPECT_LE(p.angular_std[i], cfg.angular_spread_hi * kDeg + 1e-15);
  }
}

TEST(PlaceDevices, DegenerateAnnulus) {
  ChannelConfig cfg;
  cfg.r_inner = cfg.r_outer = 50.0;
  for (double d : place_devices(20, cfg, 1).distance) EXPECT_DOUBLE_EQ(d, 50.0);
}

TEST(PlaceDevices, Deterministic) {
  ChannelConfig cfg;
  const auto a = place_devices(30, cfg, 77);
  const auto b = place_devices(30, cfg, 77);
  EXPECT_EQ(a.distance, b.distance);
  EXPECT_EQ(a.aoa, b.aoa);
  EXPECT_EQ(a.angular_std, b.angular_std);
}

TEST(ChannelConfig, Validation) {
  ChannelConfig cfg;
  cfg.r_inner = 120.0;
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg = {};
  cfg.pathloss_exponent = 0.0;
  EXPECT_THROW(cfg.validate(), validation_error);
  cfg = {};
  cfg.angular_spread_lo = 20.0;
  EXPECT_THROW(cfg.validate(), validation_error);
}

TEST(PathLoss, Examples) {
  ChannelConfig cfg;
  EXPECT_DOUBLE_EQ(path_loss(cfg.ref_distance, cfg), cfg.ref_gain);
  cfg.pathloss_exponent = 2.0;
  EXPECT_NEAR(path_loss(100.0, cfg), 0.01, 1e-15);
  cfg.pathloss_exponent = 3.8;
  EXPECT_NEAR(path_loss(37.0, cfg), std::pow(3.7, -3.8), 1e-12);
  EXPECT_THROW(path_loss(0.0, cfg), domain_error);
  EXPECT_THROW(path_loss(-1.0, cfg), domain_error);
}

TEST(PathLoss, StrictlyDecreasing) {
  ChannelConfig cfg;
  double prev = path_loss(1.0, cfg);
  for (double d = 2.0; d < 200.0; d += 1.0) {
    const double v = path_loss(d, cfg);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(CorrelationMatrix, UnitDiagonalAndHermitian) {
  ChannelConfig cfg;
  const cmat r = correlation_matrix(1.1, 14.0 * kDeg, cfg, 16);
  for (int i = 0; i < 16; ++i) EXPECT_NEAR(std::abs(r(i, i) - cd(1.0, 0.0)), 0.0, 1e-15);
  EXPECT_LE((r - r.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CorrelationMatrix, ZeroSpreadIsPhaseRamp) {
  ChannelConfig cfg;
  const cmat r = correlation_matrix(0.4, 0.0, cfg, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_NEAR(std::abs(r(i, j)), 1.0, 1e-14);
}

TEST(CorrelationMatrix, EigenvaluesNonNegative) {
  ChannelConfig cfg;
  const cmat r = correlation_matrix(0.7, 13.0 * kDeg, cfg, 8);
  Eigen::SelfAdjointEigenSolver<cmat> es(r);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
}

TEST(CorrelationFactor, ReproducesPsdMatrix) {
  ChannelConfig cfg;
  for (int n : {4, 8, 32}) {
    const cmat r = correlation_matrix(2.3, 12.5 * kDeg, cfg, n);
    const auto f = correlation_factor(r);
    EXPECT_LE((f.factor * f.factor.adjoint() - r).norm(), 1e-6 * n);
  }
}

TEST(CorrelationFactor, ClipsNegativeEigenvalues) {
  cmat r(2, 2);
  r << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  const auto f = correlation_factor(r);
  EXPECT_NEAR(f.clipped, 1.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<cmat> es(f.factor * f.factor.adjoint());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(SampleChannel, NonHermitianRejected) {
  cmat r = cmat::Identity(3, 3);
  r(0, 1) = 0.5;
  EXPECT_THROW(sample_channel(r, 1.0, 1), dimension_error);
}

TEST(SampleChannel, ZeroLargeScale) {
  EXPECT_EQ(sample_channel(cmat::Identity(4, 4), 0.0, 3).norm(), 0.0);
}

TEST(SampleChannel, IdentityCovarianceUnitVariance) {
  const int n = 4;
  const int draws = 100000;
  const cmat eye = cmat::Identity(n, n);
  Rng rng(99);
  rvec var = rvec::Zero(n);
  for (int i = 0; i < draws; ++i) var += sample_channel_with_factor(eye, 1.0, rng).cwiseAbs2();
  var /= draws;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(var(i), 1.0, 0.02);
}

TEST(SampleChannel, EmpiricalCovarianceMatchesR) {
  ChannelConfig cfg;
  const int n = 8;
  const cmat r = correlation_matrix(0.9, 13.0 * kDeg, cfg, n);
  const auto f = correlation_factor(r);
  Rng rng(1234);
  const int draws = 100000;
  const double beta = 2.5;
  cmat cov = cmat::Zero(n, n);
  for (int i = 0; i < draws; ++i) {
    const cvec h = sample_channel_with_factor(f.factor, beta, rng);
    cov += h * h.adjoint();
  }
  cov /= draws * beta;
  EXPECT_LE((cov - r).norm(), 0.03 * r.norm());
}

TEST(SampleChannel, SeedDeterminism) {
  ChannelConfig cfg;
  const cmat r = correlation_matrix(0.3, 0.25, cfg, 6);
  EXPECT_EQ(sample_channel(r, 1.0, 5), sample_channel(r, 1.0, 5));
  EXPECT_NE(sample_channel(r, 1.0, 5), sample_channel(r, 1.0, 6));
}

TEST(SampleNetwork, NoiseFromSnr) {
  NetworkConfig net;
  net.dims = SystemDims(8, 3, 2);
  net.snr_db = 0.0;
  EXPECT_NEAR(sample_network(net, 1).sigma2(), 1.0, 1e-15);
  net.snr_db = 20.0;
  EXPECT_NEAR(sample_network(net, 1).sigma2(), 0.01, 1e-15);
}

TEST(SampleNetwork, BitIdenticalPerSeed) {
  for (auto mode : {CorrelationMode::iid, CorrelationMode::correlated}) {
    NetworkConfig net;
    net.dims = SystemDims(16, 4, 2);
    net.channel.correlation = mode;
    const auto a = sample_network(net, 2024);
    const auto b = sample_network(net, 2024);
    const auto c = sample_network(net, 2025);
    EXPECT_EQ(a.H(), b.H());
    EXPECT_NE(a.H(), c.H());
    EXPECT_NEAR(a.phi().sum(), 1.0, 1e-12);
  }
}

TEST(SampleNetwork, ColumnPowerFollowsPathLoss) {
  // Unit-diagonal R gives E||h_k||^2 = N beta_k; averaged over many draws of
  // the same placement the ratio approaches one.
  NetworkConfig net;
  net.dims = SystemDims(32, 3, 2);
  const auto detailed = sample_network_detailed(net, 8);
  const auto& h = detailed.instance.H();
  for (int k = 0; k < 3; ++k) {
    const double beta = path_loss(detailed.placement.distance[k], net.channel);
    const double ratio = h.col(k).squaredNorm() / (32.0 * beta);
    EXPECT_GT(ratio, 0.05);
    EXPECT_LT(ratio, 5.0);
  }
}
