#pragma once

// Alternating-optimization kernel shared by every solver: the receiver
// quadratic solve, the closed-form transmit-scalar update and the
// fixed-selection AO used by the baselines, the oracle and the final
// refinement step of the relaxed solvers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include <airsel/model.hpp>

namespace airsel {

enum class InitPolicy { mmse_warm, ones, given };

struct AoOptions {
  int max_iters = 200;
  double rel_tol = 1e-6;
  double ridge_eps = 1e-10;
  InitPolicy init_policy = InitPolicy::mmse_warm;

  void validate() const {
    detail::require(max_iters >= 1, "AoOptions: max_iters must be >= 1");
    detail::require(rel_tol > 0.0, "AoOptions: rel_tol must be > 0");
    detail::require(ridge_eps >= 0.0, "AoOptions: ridge_eps must be >= 0");
  }
};

struct AoTrace {
  std::vector<double> objective_per_iter;
  int iters_used = 0;
};

namespace detail {

inline bool converged(double prev, double cur, double rel_tol) {
  return std::abs(prev - cur) <= rel_tol * std::max(std::abs(prev), 1e-300);
}

}  // namespace detail

/// Minimizer of (1/2) m^H (A + ridge I) m - Re{m^H a}.
///
/// LDL^T factorization followed by iterative refinement until the residual
/// meets 1e-8 (1 + ||a||) or stops improving.
inline cvec solve_receiver(const cmat& a_mat, const cvec& a, double ridge_eps) {
  detail::require_dims(a_mat.rows() == a_mat.cols() && a_mat.rows() == a.size(),
                       "solve_receiver: A must be square and match a");
  detail::require_dims(detail::all_finite(a_mat) && detail::all_finite(a),
                       "solve_receiver: non-finite input");
  detail::require(ridge_eps >= 0.0, "solve_receiver: ridge_eps must be >= 0");
  if (a.squaredNorm() == 0.0) return cvec::Zero(a.size());

  cmat reg = a_mat;
  reg.diagonal().array() += ridge_eps;
  Eigen::LDLT<cmat> ldlt(reg);
  if (ldlt.info() != Eigen::Success) throw numerical_error("solve_receiver: factorization failed");
  cvec m = ldlt.solve(a);
  const double target = 1e-8 * (1.0 + a.norm());
  double res = (reg * m - a).norm();
  for (int it = 0; it < 4 && res > target; ++it) {
    const cvec step = m + ldlt.solve(a - reg * m);
    const double next = (reg * step - a).norm();
    if (!(next < res)) break;
    m = step;
    res = next;
  }
  if (!detail::all_finite(m)) {
    // Singular without ridge: fall back to the minimum-norm least-squares solution.
    m = reg.completeOrthogonalDecomposition().solve(a);
  }
  return m;
}

inline ReceiverVector solve_receiver(const NormalSystem& sys, double ridge_eps) {
  return ReceiverVector(solve_receiver(sys.A, sys.a, ridge_eps));
}

struct TransmitDeltas {
  rvec delta;
  cvec eps_lin;
};

/// Per-device coefficients of eps(b_k) = delta_k |b_k|^2 - 2 Re{conj(b_k) eps_k} + const.
///
/// eps_k = conj(m^H S h_k) phi_k; with this convention the minimizer of the
/// unconstrained scalar problem is eps_k / delta_k.
inline TransmitDeltas transmit_deltas(const cvec& m, const rvec& s, const ProblemInstance& inst) {
  detail::require_dims(m.size() == inst.N() && s.size() == inst.N(), "transmit_deltas: length mismatch");
  // H^H S m = conj(m^H S h_k) per device
  const cvec proj = inst.H().adjoint() * m.cwiseProduct(s.cast<cd>());
  TransmitDeltas out;
  out.delta = proj.cwiseAbs2();
  out.eps_lin = proj.cwiseProduct(inst.phi().cast<cd>());
  return out;
}

inline cd update_transmit_scalar(double delta_k, cd eps_k, double power_limit) {
  detail::require(delta_k >= 0.0, "update_transmit_scalar: delta must be >= 0");
  detail::require(power_limit > 0.0, "update_transmit_scalar: P must be > 0");
  if (delta_k > 0.0) {
    const cd interior = eps_k / delta_k;
    if (std::norm(interior) <= power_limit) return interior;
  }
  const double mag = std::abs(eps_k);
  if (mag <= 0.0) return {0.0, 0.0};
  cd b = eps_k * (std::sqrt(power_limit) / mag);
  // rounding can leave |b|^2 a few ulps above P
  while (std::norm(b) > power_limit) b *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  return b;
}

inline cvec update_transmit_scalars(const cvec& m, const rvec& s, const ProblemInstance& inst) {
  const auto d = transmit_deltas(m, s, inst);
  cvec b(inst.K());
  for (int k = 0; k < inst.K(); ++k) b(k) = update_transmit_scalar(d.delta(k), d.eps_lin(k), inst.power_limit);
  return b;
}

/// Receiver step for a (possibly relaxed) selection.
///
/// Rows and columns of A with s_n = 0 are zero and a_n = 0, so those m_n are
/// zero in the ridge solution; the system is solved on the support only.
inline cvec receiver_step(const rvec& s, const cvec& b, const ProblemInstance& inst, double ridge_eps) {
  detail::require_dims(s.size() == inst.N() && b.size() == inst.K(), "receiver_step: length mismatch");
  std::vector<int> support;
  for (int n = 0; n < inst.N(); ++n)
    if (s(n) != 0.0) support.push_back(n);
  cvec m = cvec::Zero(inst.N());
  if (support.empty()) return m;
  const auto ns = static_cast<Eigen::Index>(support.size());
  // G = S H B restricted to the support rows
  cmat g(ns, inst.K());
  rvec s_sup(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    s_sup(i) = s(support[i]);
    g.row(i) = s_sup(i) * inst.H().row(support[i]).cwiseProduct(b.transpose());
  }
  cmat a_mat = g * g.adjoint();
  a_mat.diagonal() += (inst.sigma2() * s_sup.cwiseAbs2()).cast<cd>();
  const cvec a = g * inst.phi().cast<cd>();
  const cvec m_sup = solve_receiver(a_mat, a, ridge_eps);
  for (Eigen::Index i = 0; i < ns; ++i) m(support[i]) = m_sup(i);
  return m;
}

struct FixedSelectionResult {
  cvec m;
  cvec b;
  double error = 0.0;
  AoTrace trace;
};

inline cvec initial_transmit(InitPolicy policy, const ProblemInstance& inst, const cvec* given_b) {
  switch (policy) {
    case InitPolicy::mmse_warm:
      return cvec::Constant(inst.K(), cd(std::sqrt(inst.power_limit), 0.0));
    case InitPolicy::ones:
      return cvec::Constant(inst.K(), cd(std::min(1.0, std::sqrt(inst.power_limit)), 0.0));
    case InitPolicy::given:
      detail::require(given_b != nullptr && given_b->size() == inst.K(),
                      "init_policy=given requires initial transmit scalars");
      return *given_b;
  }
  return {};
}

/// AO over (m, b) for a fixed selection, m first.
///
/// The recorded objective is eps + ridge_eps ||m||^2, the quantity each
/// marginal step minimizes exactly; `error` is the plain aggregation error.
inline FixedSelectionResult fixed_selection_ao(const ProblemInstance& inst, const rvec& s,
                                               const AoOptions& opts, const cvec* given_b = nullptr) {
  opts.validate();
  detail::require_dims(s.size() == inst.N(), "fixed_selection_ao: selection length mismatch");
  FixedSelectionResult out;
  out.b = initial_transmit(opts.init_policy, inst, given_b);
  if (s.isZero(0.0)) {
    out.m = cvec::Zero(inst.N());
    out.error = inst.phi().squaredNorm();
    out.trace.objective_per_iter.push_back(out.error);
    out.trace.iters_used = 1;
    return out;
  }
  double prev = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    out.m = receiver_step(s, out.b, inst, opts.ridge_eps);
    out.b = update_transmit_scalars(out.m, s, inst);
    const double obj = aggregation_error(out.m, s, out.b, inst) + opts.ridge_eps * out.m.squaredNorm();
    out.trace.objective_per_iter.push_back(obj);
    out.trace.iters_used = it + 1;
    if (it > 0 && detail::converged(prev, obj, opts.rel_tol)) break;
    prev = obj;
  }
  out.error = aggregation_error(out.m, s, out.b, inst);
  return out;
}

inline FixedSelectionResult fixed_selection_ao(const ProblemInstance& inst, const SelectionVector& s,
                                               const AoOptions& opts) {
  detail::require(s.mode() == SelectionMode::binary, "fixed_selection_ao: selection must be binary");
  return fixed_selection_ao(inst, s.vec(), opts);
}

}  // namespace airsel
