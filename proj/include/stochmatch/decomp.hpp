#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stochmatch/lpcore.hpp"
#include "stochmatch/rational.hpp"

namespace stochmatch {

/// The per-left-vertex polytope P_a: the all-subsets family over δ(a) for QC,
/// the lattice family L(a) over ev(a) for PoI. Points are indexed by the local
/// element list of the family.
class VertexPolytope {
 public:
  VertexPolytope(const ElementModel& model, std::size_t left_vertex, const Caps& caps = {});

  const ElementModel& model() const { return *model_; }
  const VertexFamily& family() const { return family_; }
  std::size_t owner() const { return family_.vertex(); }
  std::size_t dimension() const { return family_.dimension(); }
  /// Global element ids of the coordinates.
  const std::vector<std::size_t>& elements() const { return family_.elements(); }

  /// Restriction of a global vector (indexed by element) to this vertex.
  std::vector<Rational> restrict(std::span<const Rational> global) const;
  bool feasible(std::span<const Rational> point) const;
  /// Non-empty family members with sum equal to the bound at the point.
  std::vector<std::uint64_t> tight_sets(std::span<const Rational> point) const;

  struct Row {
    std::uint64_t mask;
    Rational bound;
  };
  const std::vector<Row>& rows() const { return rows_; }

 private:
  const ElementModel* model_;
  VertexFamily family_;
  std::vector<Row> rows_;
};

/// True iff the tight family constraints and tight nonnegativity constraints
/// have full rank. Throws InvalidInput for an infeasible point.
bool is_extreme(const VertexPolytope& polytope, std::span<const Rational> point);

struct Chain {
  /// S_1 ⊊ S_2 ⊊ ... as sorted global element ids.
  std::vector<std::vector<std::size_t>> sets;
  /// S_i \ S_{i-1}, in decreasing value (ascending element id).
  std::vector<std::vector<std::size_t>> increments;
  /// The single positive-coordinate element of each increment.
  std::vector<std::size_t> positive;
};

/// Recovers the chain of tight sets at an extreme point by enumerating every
/// tight set of the family. Throws InternalError if the tight sets are not
/// nested or an increment does not carry exactly one positive coordinate.
Chain extract_chain(const VertexPolytope& polytope, std::span<const Rational> extreme_point);

struct ConvexAtom {
  Rational coefficient;
  std::vector<Rational> point;
};

/// Exact convex decomposition into extreme points of P_a with at most
/// dimension + 1 atoms.
std::vector<ConvexAtom> caratheodory_decompose(const VertexPolytope& polytope, std::span<const Rational> point);

struct PermutationAtom {
  Rational coefficient;
  std::vector<std::size_t> sigma;  // global element ids in query order
};

struct PermutationDistribution {
  std::size_t owner = 0;
  std::vector<PermutationAtom> atoms;
};

/// D_a from the LP solution restricted to δ(a) (QC) or ev(a) (PoI).
PermutationDistribution build_distribution(const ElementModel& model, const LPSolution& lp, std::size_t left_vertex,
                                           const Caps& caps = {});
PermutationDistribution build_distribution_qc(const ElementModel& model, const LPSolution& lp,
                                              std::size_t left_vertex, const Caps& caps = {});
PermutationDistribution build_distribution_poi(const ElementModel& model, const LPSolution& lp,
                                               std::size_t left_vertex, const Caps& caps = {});
/// One distribution per left vertex, in vertex order.
std::vector<PermutationDistribution> build_all_distributions(const ElementModel& model, const LPSolution& lp,
                                                             const Caps& caps = {});

/// Probability that the single-vertex procedure stops at this element
/// (memoized draws: earlier pairs of the same edge condition later ones).
Rational element_output_probability(const ElementModel& model, const PermutationDistribution& dist,
                                    std::size_t element);
/// Probability that the procedure outputs the edge, with any value.
Rational output_probability(const ElementModel& model, const PermutationDistribution& dist, std::size_t edge);
/// Σ over values v ≥ w of Pr[output (edge, v)]·v. PoI only.
Rational value_tail(const ElementModel& model, const PermutationDistribution& dist, std::size_t edge,
                    const Rational& w);

/// {"owner", "atoms": [{"a", "sigma"}]}; sigma entries are edge ids (QC) or
/// [edge id, value] pairs (PoI).
std::string distributions_json(const ElementModel& model, std::span<const PermutationDistribution> dists);

}  // namespace stochmatch
