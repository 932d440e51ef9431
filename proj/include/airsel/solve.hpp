#pragma once

// Name-based dispatch over every selection algorithm.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <airsel/baselines.hpp>
#include <airsel/pdd.hpp>
#include <airsel/sparse.hpp>

namespace airsel {

enum class Algorithm { pdd, lasso, fista, random, greedy, all };

inline constexpr std::array<Algorithm, 6> kAllAlgorithms{Algorithm::pdd,    Algorithm::lasso,  Algorithm::fista,
                                                         Algorithm::random, Algorithm::greedy, Algorithm::all};

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::pdd: return "pdd";
    case Algorithm::lasso: return "lasso";
    case Algorithm::fista: return "fista";
    case Algorithm::random: return "random";
    case Algorithm::greedy: return "greedy";
    case Algorithm::all: return "all";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (auto a : kAllAlgorithms)
    if (algorithm_name(a) == name) return a;
  return std::nullopt;
}

struct AlgorithmOptions {
  AoOptions ao{};  ///< baselines, oracle and refinement
  PddOptions pdd{};
  SparseOptions lasso{};
  SparseOptions fista{};
};

/// Solve with the named algorithm; refinement always uses `opts.ao`.
inline SolveReport solve(const ProblemInstance& inst, int l, Algorithm algo, const AlgorithmOptions& opts,
                         std::uint64_t seed) {
  switch (algo) {
    case Algorithm::pdd: {
      auto o = opts.pdd;
      o.refine = opts.ao;
      return pdd_solve(inst, l, o);
    }
    case Algorithm::lasso: {
      auto o = opts.lasso;
      o.refine = opts.ao;
      return lasso_solve(inst, l, o);
    }
    case Algorithm::fista: {
      auto o = opts.fista;
      o.refine = opts.ao;
      return fista_solve(inst, l, o);
    }
    case Algorithm::random: return baseline_solve(inst, l, Baseline::random, seed, opts.ao);
    case Algorithm::greedy: return baseline_solve(inst, l, Baseline::greedy, seed, opts.ao);
    case Algorithm::all: return baseline_solve(inst, inst.N(), Baseline::all, seed, opts.ao);
  }
  throw validation_error("solve: unknown algorithm");
}

}  // namespace airsel
