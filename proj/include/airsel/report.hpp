#pragma once

#include <algorithm>
#include <chrono>
#include <numeric>
#include <string>
#include <vector>

#include <airsel/ao.hpp>

namespace airsel {

/// Outcome of one joint selection/beamforming solve.
struct SolveReport {
  std::string algorithm;
  rvec selection;          ///< binary, exactly L ones
  cvec m;
  cvec b;
  double error = 0.0;      ///< aggregation error of the refined design
  bool converged = true;

  rvec relaxed_selection;  ///< relaxed iterate before binarization (empty for baselines)
  double eta = 0.0;        ///< regularizer actually used by the sparse solvers

  int iters_outer = 0;
  int iters_inner_total = 0;
  std::vector<int> inner_iters_per_outer;
  /// Surrogate objective (including the receiver ridge term) after every inner
  /// AO iteration, one block per outer round; the first entry of each block is
  /// the value at entry to the round.
  std::vector<std::vector<double>> surrogate_trace;
  std::vector<double> violation_trace;
  std::vector<double> rho_trace;
  std::vector<double> threshold_trace;
  std::vector<bool> dual_updated;
  AoTrace refine_trace;
  double wall_ms = 0.0;
};

/// Exactly L ones at the L largest entries; ties go to the lower index.
inline rvec binarize_top_l(const rvec& s, int l) {
  const int n = static_cast<int>(s.size());
  detail::require(l >= 1 && l <= n, "binarize_top_l: need 1 <= L <= N");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s(a) > s(b); });
  rvec out = rvec::Zero(n);
  for (int i = 0; i < l; ++i) out(order[i]) = 1.0;
  return out;
}

inline SelectionVector binarize_top_l(const SelectionVector& s, int l) {
  return SelectionVector::binary(binarize_top_l(s.vec(), l), l);
}

/// Binary projection plus fixed-selection refinement, shared by all relaxed solvers.
inline void finalize_selection(SolveReport& report, const ProblemInstance& inst, const rvec& relaxed,
                               int l, const AoOptions& refine) {
  report.relaxed_selection = relaxed;
  report.selection = binarize_top_l(relaxed, l);
  auto fixed = fixed_selection_ao(inst, report.selection, refine);
  report.m = std::move(fixed.m);
  report.b = std::move(fixed.b);
  report.error = fixed.error;
  report.refine_trace = std::move(fixed.trace);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace airsel
