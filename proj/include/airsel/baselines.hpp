#pragma once

// Reference selection policies and the exhaustive small-instance oracle.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <airsel/ao.hpp>
#include <airsel/report.hpp>
#include <airsel/rng.hpp>

namespace airsel {

/// Uniform L-subset via a partial Fisher-Yates shuffle.
inline rvec random_selection(int n, int l, std::uint64_t seed) {
  detail::require(l >= 1 && l <= n, "random_selection: need 1 <= L <= N");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < l; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  rvec s = rvec::Zero(n);
  for (int i = 0; i < l; ++i) s(idx[i]) = 1.0;
  return s;
}

/// The L antennas with the largest sum_k |h_nk|^2; ties go to the lower index.
inline rvec greedy_selection(const cmat& h, int l) {
  detail::require(l >= 1 && l <= h.rows(), "greedy_selection: need 1 <= L <= N");
  return binarize_top_l(h.rowwise().squaredNorm().eval(), l);
}

inline rvec all_antenna(int n) {
  detail::require(n >= 1, "all_antenna: N must be >= 1");
  return rvec::Ones(n);
}

enum class Baseline { random, greedy, all };

inline SolveReport baseline_solve(const ProblemInstance& inst, int l, Baseline policy, std::uint64_t seed,
                                  const AoOptions& opts = {}) {
  Stopwatch clock;
  SolveReport report;
  rvec s;
  switch (policy) {
    case Baseline::random:
      report.algorithm = "random";
      s = random_selection(inst.N(), l, seed);
      break;
    case Baseline::greedy:
      report.algorithm = "greedy";
      s = greedy_selection(inst.H(), l);
      break;
    case Baseline::all:
      report.algorithm = "all";
      s = all_antenna(inst.N());
      break;
  }
  auto fixed = fixed_selection_ao(inst, s, opts);
  report.selection = std::move(s);
  report.m = std::move(fixed.m);
  report.b = std::move(fixed.b);
  report.error = fixed.error;
  report.iters_outer = fixed.trace.iters_used;
  report.iters_inner_total = fixed.trace.iters_used;
  report.surrogate_trace.push_back(fixed.trace.objective_per_iter);
  report.refine_trace = std::move(fixed.trace);
  report.wall_ms = clock.elapsed_ms();
  return report;
}

struct SubsetError {
  std::vector<int> subset;
  double error = 0.0;
};

struct OracleReport {
  rvec best_selection;
  double best_error = 0.0;
  std::vector<SubsetError> per_selection_errors;  ///< lexicographic subset order
};

inline constexpr std::uint64_t kOracleSubsetLimit = 20000;

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

/// Calls f(subset) for every size-l subset of {0..n-1} in lexicographic order.
template <typename F>
void for_each_subset(int n, int l, F&& f) {
  std::vector<int> idx(l);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    f(static_cast<const std::vector<int>&>(idx));
    int i = l - 1;
    while (i >= 0 && idx[i] == n - l + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < l; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Exhaustive search over all L-subsets with the shared fixed-selection AO.
///
/// Every relaxed solver finishes with fixed_selection_ao under the same
/// options, so its refined error appears verbatim in per_selection_errors.
inline OracleReport brute_force_oracle(const ProblemInstance& inst, int l, const AoOptions& opts = {}) {
  const int n = inst.N();
  detail::require(l >= 1 && l <= n, "brute_force_oracle: need 1 <= L <= N");
  if (binomial(n, l) > kOracleSubsetLimit)
    throw validation_error("brute_force_oracle: C(N, L) = " + std::to_string(binomial(n, l)) +
                           " exceeds the enumeration bound of " + std::to_string(kOracleSubsetLimit));
  OracleReport out;
  out.per_selection_errors.reserve(binomial(n, l));
  bool first = true;
  for_each_subset(n, l, [&](const std::vector<int>& subset) {
    rvec s = rvec::Zero(n);
    for (int i : subset) s(i) = 1.0;
    const double err = fixed_selection_ao(inst, s, opts).error;
    out.per_selection_errors.push_back({subset, err});
    if (first || err < out.best_error) {
      out.best_error = err;
      out.best_selection = s;
      first = false;
    }
  });
  return out;
}

}  // namespace airsel
