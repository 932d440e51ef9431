#pragma once

// Aggregation-error objective and the quadratic forms derived from it.
//
// With S = Diag(s), B = Diag(b) the mean-square error of the linear estimate
// m^H y of sum_k phi_k x_k is
//
//   eps(m, s, b) = || m^H S H B - phi^H ||^2 + sigma^2 || m^H S ||^2.
//
// Every solver in this library consumes one of three restrictions of eps:
// a quadratic in m (receiver_normal_system), a real quadratic in s
// (lasso_quadratic), or K decoupled scalar quadratics in b (see ao.hpp).

#include <airsel/types.hpp>

namespace airsel {

namespace detail {

inline void check_design_shapes(const cvec& m, const rvec& s, const cvec& b,
                                const ProblemInstance& inst) {
  require_dims(m.size() == inst.N(), "receiver length does not match N");
  require_dims(s.size() == inst.N(), "selection length does not match N");
  require_dims(b.size() == inst.K(), "transmit scalar length does not match K");
}

}  // namespace detail

/// Aggregation error for an arbitrary (possibly relaxed) selection s.
inline double aggregation_error(const cvec& m, const rvec& s, const cvec& b,
                                const ProblemInstance& inst) {
  detail::check_design_shapes(m, s, b, inst);
  const cvec ms = m.cwiseProduct(s.cast<cd>());  // S^H m, real s
  // row vector m^H S H B as a column: (H^H S m) .* conj(b)
  const cvec gain = (inst.H().adjoint() * ms).cwiseProduct(b.conjugate());
  // ||gain^* - phi||^2 == ||gain - phi||^2 for real phi.
  const double mismatch = (gain - inst.phi().cast<cd>()).squaredNorm();
  return mismatch + inst.sigma2() * ms.squaredNorm();
}

inline double aggregation_error(const ReceiverVector& m, const SelectionVector& s,
                                const TransmitScalars& b, const ProblemInstance& inst) {
  return aggregation_error(m.vec(), s.vec(), b.vec(), inst);
}

/// End-to-end gains m^H S h_k b_k for every device.
inline cvec effective_gains(const cvec& m, const rvec& s, const cvec& b,
                            const ProblemInstance& inst) {
  detail::check_design_shapes(m, s, b, inst);
  const cvec ms = m.cwiseProduct(s.cast<cd>());
  return (inst.H().adjoint() * ms).conjugate().cwiseProduct(b);
}

/// Max-norm deviation of the end-to-end gains from phi.
inline double zero_forcing_residual(const cvec& m, const rvec& s, const cvec& b,
                                    const ProblemInstance& inst) {
  return (effective_gains(m, s, b, inst) - inst.phi().cast<cd>()).cwiseAbs().maxCoeff();
}

struct NormalSystem {
  cmat A;
  cvec a;
};

/// eps(m) = m^H A m - 2 Re{m^H a} + ||phi||^2 for fixed (s, b).
inline NormalSystem receiver_normal_system(const rvec& s, const cvec& b,
                                           const ProblemInstance& inst) {
  detail::require_dims(s.size() == inst.N(), "selection length does not match N");
  detail::require_dims(b.size() == inst.K(), "transmit scalar length does not match K");
  // G = S H B
  const cmat g = s.cast<cd>().asDiagonal() * inst.H() * b.asDiagonal();
  NormalSystem out;
  out.A = g * g.adjoint();
  out.A.diagonal() += (inst.sigma2() * s.cwiseAbs2()).cast<cd>();
  out.a = g * inst.phi().cast<cd>();
  return out;
}

struct SelectionQuadratic {
  cmat Q;    ///< Hermitian; only the real part enters s^T Q s for real s
  rvec c;
};

/// eps(s) = s^T Q s - 2 s^T c + ||phi||^2 for fixed (m, b), including the noise term.
inline SelectionQuadratic lasso_quadratic(const cvec& m, const cvec& b,
                                          const ProblemInstance& inst) {
  detail::require_dims(m.size() == inst.N(), "receiver length does not match N");
  detail::require_dims(b.size() == inst.K(), "transmit scalar length does not match K");
  // rows of F are the per-antenna contributions m_n^* h_{nk} b_k, F = M^* H B
  const cmat f = m.conjugate().asDiagonal() * inst.H() * b.asDiagonal();
  SelectionQuadratic out;
  out.Q = f * f.adjoint();  // = M^H (H B B^H H^H) M
  out.Q.diagonal() += (inst.sigma2() * m.cwiseAbs2()).cast<cd>();
  out.c = (f * inst.phi().cast<cd>()).real();
  return out;
}

/// diag{H B phi m^H}, i.e. q_n = (H B phi)_n conj(m_n).
inline cvec q_vector(const cvec& m, const cvec& b, const ProblemInstance& inst) {
  detail::require_dims(m.size() == inst.N(), "receiver length does not match N");
  detail::require_dims(b.size() == inst.K(), "transmit scalar length does not match K");
  const cvec hbphi = inst.H() * b.cwiseProduct(inst.phi().cast<cd>());
  return hbphi.cwiseProduct(m.conjugate());
}

/// Rows g_n of the per-antenna gain matrix F = M^* H B, stored transposed (K x N)
/// so that column n holds g_n.  Used by the O(NK) coordinate sweeps.
inline cmat per_antenna_gains(const cvec& m, const cvec& b, const ProblemInstance& inst) {
  return (m.conjugate().asDiagonal() * inst.H() * b.asDiagonal()).transpose();
}

}  // namespace airsel
