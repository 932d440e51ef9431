#include <gtest/gtest.h>

#include <cmath>

#include <airsel/fl.hpp>

#include "helpers.hpp"

using namespace airsel;
using airsel::testing::random_cmat;

namespace {

/// Square instance with a zero-forcing design m^H H B = phi^T and negligible noise.
std::pair<ProblemInstance, OtaDesign> zero_forcing(int k, std::uint64_t seed, double sigma2 = 1e-30) {
  Rng rng(seed);
  const cmat h = random_cmat(k, k, rng);
  ProblemInstance inst(SystemDims(k, k, k), ChannelMatrix(h), AggregationWeights::uniform(k), NoiseModel(sigma2),
                       1.0);
  OtaDesign d;
  d.s = rvec::Ones(k);
  d.b = cvec::Ones(k);
  d.m = h.adjoint().fullPivLu().solve(inst.phi().cast<cd>());
  return {inst, d};
}

double gap_after_fixed_step(const SyntheticTask& task, rvec omega, double gamma, int steps) {
  const rmat step = rmat::Identity(task.dim(), task.dim()) - gamma * task.hessian;
  for (int i = 0; i < steps; ++i) omega = task.omega_star + step * (omega - task.omega_star);
  const rvec e = omega - task.omega_star;
  return 0.5 * e.dot(task.hessian * e);
}

}  // namespace

TEST(SyntheticTask, SingleDeviceIsotropic) {
  const auto task = make_synthetic_task(1, 3, 2.0, 2.0, 4);
  EXPECT_LE((task.omega_star - task.center[0]).norm(), 1e-12);
  EXPECT_LE((task.curvature[0] - 2.0 * rmat::Identity(3, 3)).norm(), 1e-12);
}

TEST(SyntheticTask, SpectrumMatchesRequest) {
  for (double spread : {0.0, 0.5}) {
    SyntheticTaskOptions o;
    o.curvature_spread = spread;
    const auto task = make_synthetic_task(5, 4, 0.5, 3.5, 8, o);
    rmat weighted = rmat::Zero(4, 4);
    for (int k = 0; k < 5; ++k) weighted += task.phi(k) * task.curvature[k];
    rvec ev = Eigen::SelfAdjointEigenSolver<rmat>(weighted).eigenvalues();
    const rvec want = (rvec(4) << 0.5, 1.5, 2.5, 3.5).finished();
    EXPECT_LE((ev - want).cwiseAbs().maxCoeff(), 1e-8);
    for (const auto& p : task.curvature) EXPECT_GE(Eigen::SelfAdjointEigenSolver<rmat>(p).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(SyntheticTask, GradientAndMinimizer) {
  const auto task = make_synthetic_task(5, 6, 1.0, 4.0, 9);
  EXPECT_LE(task.gradient(task.omega_star).norm(), 1e-10);
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    rvec w(6);
    for (int i = 0; i < 6; ++i) w(i) = 3.0 * rng.gaussian();
    const rvec g = task.gradient(w);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      rvec wp = w, wm = w;
      wp(i) += h;
      wm(i) -= h;
      const double fd = (task.loss(wp) - task.loss(wm)) / (2 * h);
      EXPECT_NEAR(fd, g(i), 1e-6 * std::max(1.0, std::abs(g(i))));
    }
    EXPECT_GE(task.gap(w), -1e-12);
  }
}

TEST(SyntheticTask, GradientVarianceNormalized) {
  SyntheticTaskOptions o;
  o.gradient_variance = 2.5;
  const auto task = make_synthetic_task(6, 5, 1.0, 3.0, 11, o);
  rvec mean = rvec::Zero(5);
  for (int k = 0; k < 6; ++k) mean += task.device_gradient(k, task.omega_star) / 6.0;
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += (task.device_gradient(k, task.omega_star) - mean).squaredNorm() / 6.0;
  EXPECT_NEAR(v, 2.5, 1e-9);
}

TEST(SyntheticTask, Validation) {
  EXPECT_THROW(make_synthetic_task(3, 4, 2.0, 1.0, 1), validation_error);
  EXPECT_THROW(make_synthetic_task(0, 4, 1.0, 2.0, 1), validation_error);
}

TEST(OtaRound, ZeroForcingNoiselessIsGradientDescent) {
  const auto task = make_synthetic_task(5, 8, 1.0, 4.0, 12);
  const auto [inst, design] = zero_forcing(5, 13);
  EXPECT_LE(aggregation_error(design.m, design.s, design.b, inst), 1e-20);
  Rng rng(14);
  rvec omega = task.omega_star;
  for (int i = 0; i < 8; ++i) omega(i) += rng.gaussian();
  const double gamma = 1.0 / task.l_lip;
  for (int t = 0; t < 10; ++t) {
    const auto r = ota_round(omega, design, inst, task, gamma, derive_seed(15, t), t);
    const rvec exact = omega - gamma * task.gradient(omega);
    EXPECT_LE((r.omega - exact).cwiseAbs().maxCoeff(), 1e-8);
    omega = r.omega;
  }
}

TEST(OtaRound, StandardizationRoundTripExact) {
  const auto task = make_synthetic_task(4, 3, 1.0, 2.0, 16);
  const auto [inst, design] = zero_forcing(4, 17);
  Rng rng(18);
  rvec omega(3);
  for (int i = 0; i < 3; ++i) omega(i) = rng.gaussian();
  Rng noise(19);
  const rvec est = ota_aggregate(omega, design, inst, task, noise);
  EXPECT_LE((est - task.gradient(omega)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(OtaRound, ZeroReceiverGivesClosedFormIteration) {
  // m = 0: every standardized coordinate is estimated as 0, so the de-standardized
  // estimate is the cross-device mean, i.e. the exact gradient under uniform phi.
  const auto task = make_synthetic_task(5, 4, 1.0, 3.0, 20);
  NetworkConfig net;
  net.dims = SystemDims(8, 5, 2);
  const auto inst = sample_network(net, 21);
  OtaDesign zero{cvec::Zero(8), binarize_top_l(rvec::Zero(8), 2), cvec::Ones(5)};
  const double gamma = 0.5 / task.l_lip;
  const rvec omega0 = initial_model(task, 2.0, 22);
  rvec omega = omega0;
  for (int t = 0; t < 15; ++t) {
    const auto r = ota_round(omega, zero, inst, task, gamma, derive_seed(23, t), t);
    EXPECT_NEAR(r.record.agg_error, inst.phi().squaredNorm(), 1e-15);
    omega = r.omega;
    EXPECT_NEAR(task.gap(omega), gap_after_fixed_step(task, omega0, gamma, t + 1), 1e-10);
  }
}

TEST(OtaRound, BoundRhsReevaluation) {
  const auto task = make_synthetic_task(5, 8, 1.0, 4.0, 24);
  NetworkConfig net;
  net.dims = SystemDims(16, 5, 4);
  const auto inst = sample_network(net, 25);
  const auto rep = solve(inst, 4, Algorithm::greedy, {}, 0);
  const OtaDesign d{rep.m, rep.selection, rep.b};
  const auto r = ota_round(initial_model(task, 3.0, 26), d, inst, task, 1.0 / task.l_lip, 27, 0);
  EXPECT_NEAR(r.record.bound_rhs,
              (1.0 - task.mu / task.l_lip) * r.record.gap + r.record.agg_error / (2.0 * task.l_lip), 1e-12);
  EXPECT_NEAR(r.record.agg_error, rep.error, 1e-12);
}

TEST(RunFl, OneStepConvergenceWhenWellConditioned) {
  const auto task = make_synthetic_task(4, 5, 2.0, 2.0, 28);
  const auto zf = zero_forcing(4, 29);
  const auto run = run_fl_with(task, initial_model(task, 3.0, 30), 3, 1.0 / task.l_lip, 1, 31,
                               [&](int) { return zf; });
  // zero up to the rounding of a loss difference
  const double g0 = run.records[0].gap;
  EXPECT_GT(g0, 1.0);
  EXPECT_LE(run.records[0].gap_next, 1e-12 * g0);
  EXPECT_LE(run.records[1].gap, 1e-12 * g0);
}

TEST(RunFl, NoiselessExactAggregationReproducesGradientDescent) {
  const auto task = make_synthetic_task(5, 8, 0.5, 4.0, 32);
  const auto zf = zero_forcing(5, 33);
  const rvec omega0 = initial_model(task, 3.0, 34);
  const double gamma = 1.0 / task.l_lip;
  const auto run = run_fl_with(task, omega0, 30, gamma, 5, 35, [&](int) { return zf; });
  rvec omega = omega0;
  for (const auto& rec : run.records) {
    EXPECT_NEAR(rec.gap, task.gap(omega), 1e-8);
    omega -= gamma * task.gradient(omega);
    EXPECT_NEAR(rec.gap_next, task.gap(omega), 1e-8);
  }
  EXPECT_LE((run.omega_final - omega).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RunFl, GapDecreasesWhileAboveNoiseFloor) {
  // Per run: G[t+1] <= G[t] whenever G[t] > eps[t] / (2 mu).
  FlConfig cfg;
  cfg.network.dims = SystemDims(16, 5, 4);
  cfg.rounds = 30;
  int checked = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto task = make_synthetic_task(5, 8, 1.0, 4.0, derive_seed(36, seed));
    const auto run = run_fl(cfg, task, derive_seed(37, seed));
    for (const auto& r : run.records) {
      if (r.gap > r.agg_error / (2.0 * task.mu)) {
        ++checked;
        EXPECT_LE(r.gap_next, r.gap) << "seed " << seed << " round " << r.t;
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(RunFl, AllAntennaBeatsRandomOnAverage) {
  FlConfig all, rnd;
  all.network.dims = rnd.network.dims = SystemDims(16, 5, 4);
  all.rounds = rnd.rounds = 30;
  all.algorithm = Algorithm::all;
  rnd.algorithm = Algorithm::random;
  double gap_all = 0.0, gap_rnd = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const auto task = make_synthetic_task(5, 8, 1.0, 4.0, derive_seed(38, seed));
    gap_all += run_fl(all, task, derive_seed(39, seed)).records.back().gap_next;
    gap_rnd += run_fl(rnd, task, derive_seed(39, seed)).records.back().gap_next;
  }
  EXPECT_LE(gap_all, gap_rnd);
}

TEST(RunFl, Deterministic) {
  FlConfig cfg;
  cfg.network.dims = SystemDims(16, 5, 4);
  cfg.rounds = 10;
  const auto task = make_synthetic_task(5, 8, 1.0, 4.0, 40);
  const auto a = run_fl(cfg, task, 41);
  const auto b = run_fl(cfg, task, 41);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].gap_next, b.records[i].gap_next);
}
