#pragma once

// Penalty dual decomposition for joint antenna selection and beamforming.
//
// The binary constraint s in {0,1}^N, 1^T s = L is rewritten with an
// auxiliary vector s_bar as s_bar = s, s .* (1 - s_bar) = 0, 1^T s = L and
// moved into augmented-Lagrangian penalties.  The inner loop is AO over
// (m, b, s_bar, s) on the penalized objective; the outer loop either updates
// the duals or shrinks rho depending on the violation metric.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <airsel/ao.hpp>
#include <airsel/report.hpp>

namespace airsel {

struct DualState {
  double beta = 0.0;
  rvec lambda;
  rvec mu;
  double rho = 1.0;

  static DualState zeros(int n, double rho) {
    detail::require(rho > 0.0, "DualState: rho must be > 0");
    return {0.0, rvec::Zero(n), rvec::Zero(n), rho};
  }
};

struct PddOptions {
  double kappa = 0.8;
  double h_threshold0 = 1.0;
  double rho0 = 1.0;
  AoOptions inner{50, 1e-5, 1e-10, InitPolicy::mmse_warm};
  int max_outer = 60;
  double h_stop = 1e-4;
  AoOptions refine{};

  void validate() const {
    detail::require(kappa > 0.0 && kappa < 1.0, "PddOptions: kappa must lie in (0,1)");
    detail::require(rho0 > 0.0, "PddOptions: rho0 must be > 0");
    detail::require(max_outer >= 1, "PddOptions: max_outer must be >= 1");
    detail::require(h_stop >= 0.0, "PddOptions: h_stop must be >= 0");
    inner.validate();
    refine.validate();
  }
};

/// f_rho + h_rho + g_rho.
inline double penalty_value(const rvec& s, const rvec& s_bar, const DualState& dual, int l) {
  detail::require_dims(s.size() == s_bar.size() && s.size() == dual.lambda.size() &&
                           s.size() == dual.mu.size(),
                       "penalty_value: length mismatch");
  const double rho = dual.rho;
  double f = 0.0;
  double h = 0.0;
  for (Eigen::Index n = 0; n < s.size(); ++n) {
    const double fr = s(n) - s_bar(n) + rho * dual.lambda(n);
    f += fr * fr - rho * rho * dual.lambda(n) * dual.lambda(n);
    const double hr = s(n) * (1.0 - s_bar(n)) + rho * dual.mu(n);
    h += hr * hr - rho * rho * dual.mu(n) * dual.mu(n);
  }
  const double gr = s.sum() - l + rho * dual.beta;
  const double g = gr * gr - rho * rho * dual.beta * dual.beta;
  return (f + h + g) / (2.0 * rho);
}

/// eps(m, s, b) + penalty_value(s, s_bar).
inline double pdd_objective(const DesignState& st, const DualState& dual, const ProblemInstance& inst, int l) {
  return aggregation_error(st.m, st.s, st.b, inst) + penalty_value(st.s, st.s_bar, dual, l);
}

/// Closed-form s_bar minimizer: C_bar / A_bar entrywise.
inline rvec update_auxiliary(const rvec& s, const DualState& dual) {
  detail::require_dims(s.size() == dual.lambda.size() && s.size() == dual.mu.size(),
                       "update_auxiliary: length mismatch");
  rvec out(s.size());
  for (Eigen::Index n = 0; n < s.size(); ++n) {
    const double a_bar = 1.0 + s(n) * s(n);
    const double c_bar = s(n) * s(n) + (1.0 + dual.rho * dual.mu(n)) * s(n) + dual.rho * dual.lambda(n);
    out(n) = c_bar / a_bar;
  }
  return out;
}

/// One Gauss-Seidel sweep n = 0..N-1 of exact coordinate minimization of the
/// penalized objective over s, with (m, b, s_bar) and the duals held fixed.
///
/// Per coordinate J(s_n) = (A_n/2) s_n^2 - C_n s_n + const with
///   A_n = 2 Q_nn + (2 + (1 - s_bar_n)^2) / rho
///   C_n = 2 [ c_n - sum_{n'!=n} Re{Q_{n'n}} s_{n'} ]
///         - (1/rho) [ rho beta - L + sum_{n'!=n} s_{n'} - s_bar_n
///                     + rho lambda_n + rho (1 - s_bar_n) mu_n ]
/// where Q, c are the selection quadratic of eps (see lasso_quadratic).
inline rvec update_selection_pdd(const DesignState& st, const DualState& dual, const ProblemInstance& inst, int l) {
  const int n_ant = inst.N();
  detail::require_dims(st.s.size() == n_ant && st.s_bar.size() == n_ant && st.m.size() == n_ant,
                       "update_selection_pdd: length mismatch");
  const cmat g = per_antenna_gains(st.m, st.b, inst);  // K x N, column n = g_n
  const rvec c = (g.transpose() * inst.phi().cast<cd>()).real();
  DesignState cur = st;
  cvec residual = g * cur.s.cast<cd>();
  double s_sum = cur.s.sum();
  const double rho = dual.rho;
  for (int n = 0; n < n_ant; ++n) {
    const double sn = cur.s(n);
    const double sb = cur.s_bar(n);
    const double gg = g.col(n).squaredNorm();
    const double q_nn = gg + inst.sigma2() * std::norm(cur.m(n));
    const double cross = g.col(n).dot(residual).real() - sn * gg;
    const double rest = s_sum - sn;
    const double a_n = 2.0 * q_nn + (2.0 + (1.0 - sb) * (1.0 - sb)) / rho;
    const double c_n = 2.0 * (c(n) - cross) -
                       (rho * dual.beta - l + rest - sb + rho * dual.lambda(n) + rho * (1.0 - sb) * dual.mu(n)) / rho;
    if (!(a_n > 0.0)) throw numerical_error("update_selection_pdd: non-positive coordinate curvature");
    const double next = c_n / a_n;
    residual += (next - sn) * g.col(n);
    s_sum += next - sn;
    cur.s(n) = next;
  }
  return cur.s;
}

/// max_n { |1^T s - L|, |s_bar_n - s_n|, |s_n (1 - s_bar_n)| }.
inline double violation_metric(const rvec& s, const rvec& s_bar, int l) {
  detail::require_dims(s.size() == s_bar.size(), "violation_metric: length mismatch");
  double h = std::abs(s.sum() - l);
  for (Eigen::Index n = 0; n < s.size(); ++n) {
    h = std::max(h, std::abs(s_bar(n) - s(n)));
    h = std::max(h, std::abs(s(n) * (1.0 - s_bar(n))));
  }
  return h;
}

inline DualState update_duals(const DualState& dual, const rvec& s, const rvec& s_bar, int l) {
  detail::require_dims(s.size() == s_bar.size() && s.size() == dual.lambda.size(),
                       "update_duals: length mismatch");
  DualState out = dual;
  const double step = 1.0 / (2.0 * dual.rho);
  out.beta += (s.sum() - l) * step;
  out.lambda += (s_bar - s) * step;
  out.mu += s.cwiseProduct(rvec::Ones(s.size()) - s_bar) * step;
  return out;
}

inline SolveReport pdd_solve(const ProblemInstance& inst, int l, const PddOptions& opts = {}) {
  opts.validate();
  const int n = inst.N();
  detail::require(l >= 1 && l <= n, "pdd_solve: need 1 <= L <= N");
  Stopwatch clock;
  SolveReport report;
  report.algorithm = "pdd";

  DesignState st;
  st.s = rvec::Constant(n, static_cast<double>(l) / n);
  st.s_bar = st.s;
  st.b = cvec::Constant(inst.K(), cd(std::sqrt(inst.power_limit), 0.0));
  st.m = receiver_step(st.s, st.b, inst, opts.inner.ridge_eps);
  DualState dual = DualState::zeros(n, opts.rho0);
  double threshold = opts.h_threshold0;
  report.converged = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const double ridge = opts.inner.ridge_eps;
    double prev = pdd_objective(st, dual, inst, l) + ridge * st.m.squaredNorm();
    std::vector<double> block{prev};
    int used = 0;
    for (int it = 0; it < opts.inner.max_iters; ++it) {
      st.m = receiver_step(st.s, st.b, inst, opts.inner.ridge_eps);
      st.b = update_transmit_scalars(st.m, st.s, inst);
      st.s_bar = update_auxiliary(st.s, dual);
      st.s = update_selection_pdd(st, dual, inst, l);
      const double obj = pdd_objective(st, dual, inst, l) + ridge * st.m.squaredNorm();
      block.push_back(obj);
      used = it + 1;
      const bool done = detail::converged(prev, obj, opts.inner.rel_tol);
      prev = obj;
      if (done) break;
    }
    report.surrogate_trace.push_back(std::move(block));
    report.inner_iters_per_outer.push_back(used);
    report.iters_inner_total += used;
    report.iters_outer = outer + 1;

    const double h = violation_metric(st.s, st.s_bar, l);
    report.violation_trace.push_back(h);
    report.rho_trace.push_back(dual.rho);
    report.threshold_trace.push_back(threshold);
    if (h <= opts.h_stop) {
      report.converged = true;
      report.dual_updated.push_back(false);
      break;
    }
    if (h < threshold) {
      dual = update_duals(dual, st.s, st.s_bar, l);
      report.dual_updated.push_back(true);
    } else {
      dual.rho *= opts.kappa;
      report.dual_updated.push_back(false);
    }
    threshold = opts.kappa * h;
  }
  finalize_selection(report, inst, st.s, l, opts.refine);
  report.wall_ms = clock.elapsed_ms();
  return report;
}

}  // namespace airsel
