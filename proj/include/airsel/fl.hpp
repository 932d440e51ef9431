#pragma once

// Synthetic strongly convex federated task trained with over-the-air
// gradient aggregation.
//
// Device k holds F_k(w) = 1/2 (w - c_k)^T P_k (w - c_k); the global loss is
// F = sum_k phi_k F_k with Hessian sum_k phi_k P_k whose spectrum spans
// exactly [mu, L_lip].  One gradient coordinate is aggregated per channel
// use: devices send their entry standardized by the round's cross-device
// mean and standard deviation (shared error-free), the server estimates
// Re{m^H y} and de-standardizes.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <airsel/channel.hpp>
#include <airsel/model.hpp>
#include <airsel/rng.hpp>
#include <airsel/solve.hpp>

namespace airsel {

struct SyntheticTask {
  std::vector<rmat> curvature;  ///< P_k
  std::vector<rvec> center;     ///< c_k
  rvec phi;
  rmat hessian;                 ///< sum_k phi_k P_k
  rvec omega_star;
  double mu = 1.0;
  double l_lip = 1.0;

  int dim() const { return static_cast<int>(omega_star.size()); }
  int devices() const { return static_cast<int>(center.size()); }

  double device_loss(int k, const rvec& w) const {
    const rvec d = w - center[k];
    return 0.5 * d.dot(curvature[k] * d);
  }
  rvec device_gradient(int k, const rvec& w) const { return curvature[k] * (w - center[k]); }

  double loss(const rvec& w) const {
    double f = 0.0;
    for (int k = 0; k < devices(); ++k) f += phi(k) * device_loss(k, w);
    return f;
  }
  rvec gradient(const rvec& w) const {
    rvec g = rvec::Zero(dim());
    for (int k = 0; k < devices(); ++k) g += phi(k) * device_gradient(k, w);
    return g;
  }
  double gap(const rvec& w) const { return loss(w) - loss(omega_star); }
};

struct SyntheticTaskOptions {
  /// Relative size of the per-device curvature perturbation, in [0, 1).
  double curvature_spread = 0.0;
  /// Total cross-device variance sum_j Var_k[grad_kj] at the minimizer.
  double gradient_variance = 1.0;
};

inline rmat random_orthogonal(int dim, Rng& rng) {
  rmat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<rmat> qr(g);
  rmat q = qr.householderQ() * rmat::Identity(dim, dim);
  // fix column signs so the factor is unique given g
  const rmat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

inline SyntheticTask make_synthetic_task(int k, int dim, double mu, double l_lip, std::uint64_t seed,
                                         const SyntheticTaskOptions& opts = {}) {
  detail::require(k >= 1 && dim >= 1, "make_synthetic_task: K and dim must be >= 1");
  detail::require(mu > 0.0 && mu <= l_lip, "make_synthetic_task: need 0 < mu <= L_lip");
  detail::require(dim > 1 || mu == l_lip, "make_synthetic_task: dim = 1 requires mu == L_lip");
  detail::require(opts.curvature_spread >= 0.0 && opts.curvature_spread < 1.0,
                  "make_synthetic_task: curvature_spread must lie in [0, 1)");
  detail::require(opts.gradient_variance >= 0.0, "make_synthetic_task: gradient_variance must be >= 0");
  Rng rng(seed);
  SyntheticTask task;
  task.mu = mu;
  task.l_lip = l_lip;
  task.phi = rvec::Constant(k, 1.0 / k);

  rvec spectrum(dim);
  for (int i = 0; i < dim; ++i) spectrum(i) = dim == 1 ? mu : mu + (l_lip - mu) * i / (dim - 1);
  const rmat u = random_orthogonal(dim, rng);
  task.hessian = u * spectrum.asDiagonal() * u.transpose();

  // Zero-mean (under phi) symmetric perturbations with spectral norm <= spread * mu.
  std::vector<rmat> pert(k, rmat::Zero(dim, dim));
  if (opts.curvature_spread > 0.0 && k > 1) {
    rmat mean = rmat::Zero(dim, dim);
    for (int i = 0; i < k; ++i) {
      rmat e(dim, dim);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) e(a, b) = rng.gaussian();
      e = 0.5 * (e + e.transpose()).eval();
      const double nrm = Eigen::SelfAdjointEigenSolver<rmat>(e).eigenvalues().cwiseAbs().maxCoeff();
      pert[i] = e / std::max(nrm, 1e-300);
      mean += task.phi(i) * pert[i];
    }
    for (auto& p : pert) p = 0.5 * opts.curvature_spread * mu * (p - mean);
  }
  for (int i = 0; i < k; ++i) task.curvature.push_back(task.hessian + pert[i]);

  // Centers: common offset plus a spread rescaled to the requested gradient variance.
  rvec base(dim);
  for (int a = 0; a < dim; ++a) base(a) = rng.gaussian();
  std::vector<rvec> dev(k, rvec(dim));
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < dim; ++a) dev[i](a) = rng.gaussian();
  for (int i = 0; i < k; ++i) task.center.push_back(base + dev[i]);

  auto solve_star = [&] {
    rvec rhs = rvec::Zero(dim);
    for (int i = 0; i < k; ++i) rhs += task.phi(i) * (task.curvature[i] * task.center[i]);
    task.omega_star = task.hessian.ldlt().solve(rhs);
  };
  solve_star();
  if (k > 1) {
    // cross-device gradient variance at the minimizer
    auto variance_at_star = [&] {
      rvec mean = rvec::Zero(dim);
      for (int i = 0; i < k; ++i) mean += task.device_gradient(i, task.omega_star);
      mean /= k;
      double v = 0.0;
      for (int i = 0; i < k; ++i) v += (task.device_gradient(i, task.omega_star) - mean).squaredNorm();
      return v / k;
    };
    const double v0 = variance_at_star();
    if (v0 > 0.0) {
      const double scale = std::sqrt(opts.gradient_variance / v0);
      for (int i = 0; i < k; ++i) task.center[i] = base + scale * dev[i];
      solve_star();
    }
  } else {
    task.center[0] = base;
    solve_star();
  }
  return task;
}

struct RoundRecord {
  int t = 0;
  double gap = 0.0;        ///< G[t] before the update
  double gap_next = 0.0;   ///< G[t+1] after the update
  double agg_error = 0.0;  ///< designed aggregation error of the round's channel
  double bound_rhs = 0.0;  ///< (1 - mu/L) G[t] + eps / (2 L)
};

struct OtaDesign {
  cvec m;
  rvec s;
  cvec b;
};

inline double upper_bound_rhs(double gap, double eps, double mu, double l_lip) {
  return (1.0 - mu / l_lip) * gap + eps / (2.0 * l_lip);
}

/// Over-the-air estimate of the phi-weighted gradient at omega.
inline rvec ota_aggregate(const rvec& omega, const OtaDesign& design, const ProblemInstance& inst,
                          const SyntheticTask& task, Rng& noise_rng) {
  const int k = task.devices();
  const int dim = task.dim();
  detail::require_dims(inst.K() == k, "ota_aggregate: instance K does not match task");
  detail::check_design_shapes(design.m, design.s, design.b, inst);
  rmat grads(k, dim);
  for (int i = 0; i < k; ++i) grads.row(i) = task.device_gradient(i, omega).transpose();

  // m^H S H B as a row, and m^H S for the noise
  const cvec ms = design.m.cwiseProduct(design.s.cast<cd>());
  const cvec gains = effective_gains(design.m, design.s, design.b, inst);
  const double noise_std = std::sqrt(inst.sigma2());
  rvec theta_hat(dim);
  for (int j = 0; j < dim; ++j) {
    const double mean = grads.col(j).mean();
    const double std = std::sqrt((grads.col(j).array() - mean).square().mean());
    const bool constant = !(std > 1e-15 * (1.0 + std::abs(mean)));
    const double scale = constant ? 1.0 : std;
    cd est(0.0, 0.0);
    if (!constant)
      for (int i = 0; i < k; ++i) est += gains(i) * ((grads(i, j) - mean) / std);
    for (int n = 0; n < inst.N(); ++n) est += std::conj(ms(n)) * (noise_std * noise_rng.complex_gaussian());
    theta_hat(j) = scale * est.real() + mean * task.phi.sum();
  }
  return theta_hat;
}

struct OtaRoundResult {
  rvec omega;
  RoundRecord record;
};

inline OtaRoundResult ota_round(const rvec& omega, const OtaDesign& design, const ProblemInstance& inst,
                                const SyntheticTask& task, double gamma, std::uint64_t seed, int t = 0) {
  Rng rng(seed);
  OtaRoundResult out;
  out.record.t = t;
  out.record.gap = task.gap(omega);
  out.record.agg_error = aggregation_error(design.m, design.s, design.b, inst);
  out.record.bound_rhs = upper_bound_rhs(out.record.gap, out.record.agg_error, task.mu, task.l_lip);
  out.omega = omega - gamma * ota_aggregate(omega, design, inst, task, rng);
  out.record.gap_next = task.gap(out.omega);
  return out;
}

struct FlConfig {
  NetworkConfig network;
  Algorithm algorithm = Algorithm::fista;
  AlgorithmOptions options{};
  int rounds = 50;
  double gamma = 0.0;  ///< 0 selects 1 / L_lip
  int coherence_rounds = 5;
  double init_distance = 3.0;  ///< ||omega_0 - omega*||
};

struct FlRun {
  std::vector<RoundRecord> records;
  rvec omega_final;
};

inline rvec initial_model(const SyntheticTask& task, double distance, std::uint64_t seed) {
  Rng rng(seed);
  rvec dir(task.dim());
  for (int i = 0; i < task.dim(); ++i) dir(i) = rng.gaussian();
  return task.omega_star + distance * dir / std::max(dir.norm(), 1e-300);
}

/// Runs the FL loop with `design_for(block)` supplying (instance, design) for
/// each coherence block of `coherence_rounds` rounds.
inline FlRun run_fl_with(const SyntheticTask& task, const rvec& omega0, int rounds, double gamma,
                         int coherence_rounds, std::uint64_t seed,
                         const std::function<std::pair<ProblemInstance, OtaDesign>(int)>& design_for) {
  detail::require(rounds >= 1 && coherence_rounds >= 1, "run_fl: rounds and coherence_rounds must be >= 1");
  FlRun run;
  rvec omega = omega0;
  std::pair<ProblemInstance, OtaDesign> current;
  for (int t = 0; t < rounds; ++t) {
    if (t % coherence_rounds == 0) current = design_for(t / coherence_rounds);
    auto r = ota_round(omega, current.second, current.first, task, gamma,
                       derive_seed(seed, 0x10000 + static_cast<std::uint64_t>(t)), t);
    omega = std::move(r.omega);
    run.records.push_back(r.record);
  }
  run.omega_final = omega;
  return run;
}

/// FL with the channel redrawn and the design re-solved every coherence block.
inline FlRun run_fl(const FlConfig& cfg, const SyntheticTask& task, std::uint64_t seed) {
  detail::require(cfg.network.dims.n_devices == task.devices(), "run_fl: network K does not match task");
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / task.l_lip;
  const int l = cfg.network.dims.n_rf_chains;
  auto design_for = [&](int block) {
    const auto block_seed = derive_seed(seed, 0x100 + static_cast<std::uint64_t>(block));
    auto inst = sample_network(cfg.network, block_seed);
    const auto rep = solve(inst, l, cfg.algorithm, cfg.options, derive_seed(block_seed, 7));
    OtaDesign d{rep.m, rep.selection, rep.b};
    return std::make_pair(std::move(inst), std::move(d));
  };
  return run_fl_with(task, initial_model(task, cfg.init_distance, derive_seed(seed, 1)), cfg.rounds, gamma,
                     cfg.coherence_rounds, seed, design_for);
}

}  // namespace airsel
