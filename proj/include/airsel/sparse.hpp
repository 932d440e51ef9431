#pragma once

// Sparse-regression solvers: box-constrained l1 relaxation of the selection,
// solved by AO with either an exact box-Lasso subproblem (coordinate descent
// to tolerance) or a single soft-thresholding sweep per AO iteration.
//
// For fixed (m, b) the objective in s is
//
//   J(s) = s^T Q s - 2 s^T c + ||phi||^2 + eta ||s||_1,   s in [0,1]^N,
//
// and the exact coordinate minimizer is
//
//   s_n = clamp( soft(w_n, eta/2) / Q_nn, 0, 1 ),
//   w_n = c_n - sum_{n' != n} Re{Q_{n'n}} s_{n'}.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <airsel/ao.hpp>
#include <airsel/report.hpp>

namespace airsel {

struct SparseOptions {
  /// Absolute regularizer; when unset, 0.1 * max_n Q_nn at the first iterate.
  std::optional<double> eta;
  AoOptions inner{};
  double subproblem_tol = 1e-10;
  int subproblem_max_iters = 10000;
  /// Regularizers relative to max_n Q_nn at the first iterate; when non-empty
  /// the solve is repeated per value and the lowest refined error is kept.
  std::vector<double> eta_grid;
  AoOptions refine{};

  void validate() const {
    if (eta) detail::require(*eta > 0.0, "SparseOptions: eta must be > 0");
    for (double e : eta_grid) detail::require(e > 0.0, "SparseOptions: eta_grid entries must be > 0");
    detail::require(subproblem_tol > 0.0, "SparseOptions: subproblem_tol must be > 0");
    detail::require(subproblem_max_iters >= 1, "SparseOptions: subproblem_max_iters must be >= 1");
    inner.validate();
    refine.validate();
  }
};

inline double soft_threshold(double u, double eta) {
  if (std::abs(u) <= eta) return 0.0;
  return u > 0.0 ? u - eta : u + eta;
}

namespace detail {

inline constexpr double kDeadCurvature = 1e-14;

/// Exact minimizer over [0,1] of q s^2 - 2 w s + eta |s|.
inline double box_coordinate(double q, double w, double eta) {
  if (q <= kDeadCurvature) return q - 2.0 * w + eta < 0.0 ? 1.0 : 0.0;
  return std::clamp(soft_threshold(w, eta / 2.0) / q, 0.0, 1.0);
}

}  // namespace detail

/// s^T Re{Q} s - 2 s^T c + eta ||s||_1 (the box-Lasso objective without the constant).
inline double box_lasso_objective(const cmat& q, const rvec& c, double eta, const rvec& s) {
  return s.dot(q.real() * s) - 2.0 * s.dot(c) + eta * s.lpNorm<1>();
}

struct BoxLassoResult {
  rvec s;
  int sweeps = 0;
};

/// Cyclic coordinate descent on the box-Lasso problem, warm-started from `start`
/// (zeros when empty).  Stops when the largest coordinate change in a sweep is
/// below `tol`.
inline BoxLassoResult box_lasso_solve(const cmat& q, const rvec& c, double eta, double tol, int max_iters,
                                      const rvec& start = {}) {
  const auto n = c.size();
  detail::require_dims(q.rows() == n && q.cols() == n, "box_lasso_subproblem: Q/c shape mismatch");
  detail::require(eta >= 0.0, "box_lasso_subproblem: eta must be >= 0");
  BoxLassoResult out;
  out.s = start.size() == n ? start.cwiseMax(0.0).cwiseMin(1.0).eval() : rvec::Zero(n);
  const rmat qr = q.real();
  // grad_part = Re{Q} s, kept in sync with s
  rvec qs = qr * out.s;
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = c(i) - (qs(i) - qr(i, i) * out.s(i));
      const double next = detail::box_coordinate(qr(i, i), w, eta);
      const double delta = next - out.s(i);
      if (delta != 0.0) {
        qs += delta * qr.col(i);
        out.s(i) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.sweeps = sweep + 1;
    if (max_change < tol) break;
  }
  return out;
}

inline rvec box_lasso_subproblem(const cmat& q, const rvec& c, double eta, double tol, int max_iters) {
  return box_lasso_solve(q, c, eta, tol, max_iters).s;
}

/// One Gauss-Seidel soft-thresholding sweep over all antennas in O(NK).
///
/// z_n = |m_n|^2 (sigma^2 + sum_k |b_k|^2 |h_nk|^2) is the diagonal of the
/// selection quadratic; w_n uses the latest values of the other coordinates.
inline rvec fista_coordinate_sweep(const DesignState& st, const ProblemInstance& inst, double eta) {
  const int n_ant = inst.N();
  detail::require_dims(st.m.size() == n_ant && st.s.size() == n_ant && st.b.size() == inst.K(),
                       "fista_coordinate_sweep: length mismatch");
  const cmat g = per_antenna_gains(st.m, st.b, inst);  // K x N
  const rvec c = (g.transpose() * inst.phi().cast<cd>()).real();
  rvec s = st.s;
  cvec residual = g * s.cast<cd>();
  for (int n = 0; n < n_ant; ++n) {
    const double gg = g.col(n).squaredNorm();
    const double z = gg + inst.sigma2() * std::norm(st.m(n));
    double next = 0.0;
    if (z > detail::kDeadCurvature) {
      const double w = c(n) - (g.col(n).dot(residual).real() - s(n) * gg);
      next = std::clamp(soft_threshold(w, eta / 2.0) / z, 0.0, 1.0);
    }
    if (next != s(n)) {
      residual += (next - s(n)) * g.col(n);
      s(n) = next;
    }
  }
  return s;
}

enum class SparseStep { box_lasso, fista };

namespace detail {

inline SolveReport sparse_solve_once(const ProblemInstance& inst, int l, const SparseOptions& opts,
                                     SparseStep step, std::optional<double> eta_rel) {
  SolveReport report;
  report.algorithm = step == SparseStep::box_lasso ? "lasso" : "fista";
  DesignState st;
  st.s = rvec::Ones(inst.N());
  st.b = initial_transmit(InitPolicy::mmse_warm, inst, nullptr);
  st.m = receiver_step(st.s, st.b, inst, opts.inner.ridge_eps);

  const double scale = std::max((st.m.cwiseAbs2().array() *
                                 (inst.sigma2() + (inst.H().cwiseAbs2() * st.b.cwiseAbs2()).array()))
                                    .maxCoeff(),
                                1e-300);
  const double eta = eta_rel ? *eta_rel * scale : opts.eta.value_or(0.1 * scale);
  report.eta = eta;

  const double ridge = opts.inner.ridge_eps;
  auto surrogate = [&] {
    return aggregation_error(st.m, st.s, st.b, inst) + eta * st.s.lpNorm<1>() + ridge * st.m.squaredNorm();
  };
  double prev = surrogate();
  std::vector<double> block{prev};
  report.converged = false;
  for (int it = 0; it < opts.inner.max_iters; ++it) {
    st.m = receiver_step(st.s, st.b, inst, ridge);
    st.b = update_transmit_scalars(st.m, st.s, inst);
    if (step == SparseStep::box_lasso) {
      const auto quad = lasso_quadratic(st.m, st.b, inst);
      auto res = box_lasso_solve(quad.Q, quad.c, eta, opts.subproblem_tol, opts.subproblem_max_iters, st.s);
      st.s = std::move(res.s);
      report.iters_inner_total += res.sweeps;
    } else {
      st.s = fista_coordinate_sweep(st, inst, eta);
      report.iters_inner_total += 1;
    }
    const double obj = surrogate();
    block.push_back(obj);
    report.iters_outer = it + 1;
    const bool done = converged(prev, obj, opts.inner.rel_tol);
    prev = obj;
    if (done) {
      report.converged = true;
      break;
    }
  }
  report.surrogate_trace.push_back(std::move(block));
  report.inner_iters_per_outer.push_back(report.iters_outer);
  finalize_selection(report, inst, st.s, l, opts.refine);
  return report;
}

inline SolveReport sparse_solve(const ProblemInstance& inst, int l, const SparseOptions& opts, SparseStep step) {
  opts.validate();
  detail::require(l >= 1 && l <= inst.N(), "sparse solve: need 1 <= L <= N");
  Stopwatch clock;
  SolveReport best;
  if (opts.eta_grid.empty()) {
    best = sparse_solve_once(inst, l, opts, step, std::nullopt);
  } else {
    int outer = 0;
    int inner = 0;
    bool first = true;
    for (double rel : opts.eta_grid) {
      auto r = sparse_solve_once(inst, l, opts, step, rel);
      outer += r.iters_outer;
      inner += r.iters_inner_total;
      if (first || r.error < best.error) best = std::move(r);
      first = false;
    }
    best.iters_outer = outer;
    best.iters_inner_total = inner;
  }
  best.wall_ms = clock.elapsed_ms();
  return best;
}

}  // namespace detail

inline SolveReport lasso_solve(const ProblemInstance& inst, int l, const SparseOptions& opts = {}) {
  return detail::sparse_solve(inst, l, opts, SparseStep::box_lasso);
}

inline SolveReport fista_solve(const ProblemInstance& inst, int l, const SparseOptions& opts = {}) {
  return detail::sparse_solve(inst, l, opts, SparseStep::fista);
}

}  // namespace airsel
