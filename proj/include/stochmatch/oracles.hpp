#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stochmatch/model.hpp"
#include "stochmatch/rational.hpp"

namespace stochmatch {

struct OracleCaps {
  std::size_t qc_edges = 12;
  std::size_t poi_support = 8;            // Σ_e |support of X_e|
  std::size_t offline_outcomes = 1 << 16;  // Π_e (|support| + 1)
};

/// Optimal adaptive query-commit value by memoized backward induction over
/// the set of edges that can still be queried.
Rational brute_force_opt_qc(const QCInstance& instance, const OracleCaps& caps = {});

/// Optimal adaptive price-of-information utility. Queried edges may be
/// discarded: the model commits to paying, not to matching.
Rational brute_force_opt_poi(const PoIInstance& instance, const OracleCaps& caps = {});

struct WeightedEdge {
  std::size_t left = 0;
  std::size_t right = 0;
  Rational weight;
};

struct MatchingResult {
  std::vector<std::size_t> edges;  // indices into the input list, ascending
  Rational weight;
};

/// Exact maximum-weight matching by dynamic programming over left vertices
/// with the set of used right vertices. Among maximum matchings, at each left
/// vertex in order the unmatched option wins ties over edges, and lower edge
/// indices win ties among edges. Requires at most 24 right vertices.
MatchingResult max_weight_matching(std::size_t left_count, std::size_t right_count,
                                   const std::vector<WeightedEdge>& edges);

/// E[max-weight matching] over all joint realizations, exact.
Rational exact_expected_offline(const QCInstance& instance, const OracleCaps& caps = {});
/// Same under the capped surrogate weights Y_e.
Rational exact_expected_offline(const SurrogateInstance& surrogate, const OracleCaps& caps = {});

/// Exact expected value of the greedy baseline by enumerating realizations.
Rational exact_expected_greedy(const QCInstance& instance, const OracleCaps& caps = {});

}  // namespace stochmatch
