#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochmatch/model.hpp"
#include "stochmatch/rational.hpp"

namespace stochmatch {

enum class ModelKind { QueryCommit, PriceOfInformation };

/// One LP coordinate: an edge (query-commit) or an edge-value pair (price of
/// information). `prob` is the probability the edge takes exactly `value`.
struct Element {
  std::size_t edge = 0;
  Rational value;
  Rational prob;
};

/// The common view the LP, decomposition and strategies work on. A QC edge is
/// a single element (w(e), p_e); a surrogate edge contributes one element per
/// support value of Y_e. Elements are numbered edge by edge in canonical edge
/// order and, within an edge, by decreasing value.
class ElementModel {
 public:
  static ElementModel from_qc(const QCInstance& instance);
  static ElementModel from_surrogate(const SurrogateInstance& surrogate);

  ModelKind kind() const { return kind_; }
  const BipartiteGraph& graph() const { return graph_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(std::size_t i) const { return elements_.at(i); }
  std::size_t size() const { return elements_.size(); }
  /// Elements of one edge, by decreasing value.
  const std::vector<std::size_t>& edge_elements(std::size_t edge) const { return by_edge_.at(edge); }
  /// Elements of every edge incident to the vertex, in element order.
  std::vector<std::size_t> vertex_elements(Side side, std::size_t vertex) const;
  /// Edge id for QC; "id@value" for PoI.
  std::string element_key(std::size_t i) const;

 private:
  ModelKind kind_ = ModelKind::QueryCommit;
  BipartiteGraph graph_;
  std::vector<Element> elements_;
  std::vector<std::vector<std::size_t>> by_edge_;
};

/// f(F) = 1 - prod (1 - p) over independent edges.
Rational coverage_prob_qc(std::span<const Rational> probs);
/// f(F) = 1 - prod_e (1 - m_e), where m_e is the included mass of edge e.
/// Throws InvalidInput if some mass is >= 1.
Rational coverage_prob_poi(std::span<const Rational> per_edge_masses);
/// Coverage of an arbitrary element set, grouping elements by edge.
Rational coverage(const ElementModel& model, std::span<const std::size_t> elements);

enum class FamilyMode { AllSubsets, Lattice };

struct Caps {
  /// Largest vertex neighbourhood (elements) enumerated in all-subsets mode.
  std::size_t degree = 20;
  /// Largest lattice family, prod (|V_e| + 1), enumerated per vertex.
  std::uint64_t lattice = std::uint64_t{1} << 16;
};

/// The constraint family of one vertex: all subsets of its elements, or the
/// lattice family of per-edge upward-closed sets. Subsets are bit masks over
/// the local element list.
class VertexFamily {
 public:
  VertexFamily(const ElementModel& model, Side side, std::size_t vertex, FamilyMode mode, const Caps& caps);

  Side side() const { return side_; }
  std::size_t vertex() const { return vertex_; }
  FamilyMode mode() const { return mode_; }
  /// Global element ids; bit i of a mask refers to elements()[i].
  const std::vector<std::size_t>& elements() const { return elements_; }
  std::size_t dimension() const { return elements_.size(); }
  std::uint64_t family_size() const;
  bool contains(std::uint64_t mask) const;
  Rational bound(std::uint64_t mask) const;
  std::vector<std::size_t> to_elements(std::uint64_t mask) const;

  /// Calls visit(mask, f(mask), sum of weights over mask) for every non-empty
  /// member of the family. `weights` is indexed by local element.
  void for_each(std::span<const Rational> weights,
                const std::function<void(std::uint64_t, const Rational&, const Rational&)>& visit) const;

 private:
  const ElementModel* model_;
  Side side_;
  std::size_t vertex_;
  FamilyMode mode_;
  std::vector<std::size_t> elements_;
  std::vector<std::vector<std::size_t>> groups_;  // local indices per edge, decreasing value
};

/// Ordering used for deterministic tie-breaks between equally violated sets:
/// smaller cardinality first, then lexicographic on the element lists.
bool canonical_less(std::uint64_t a, std::uint64_t b);

struct ConstraintRef {
  Side side = Side::Left;
  std::size_t vertex = 0;
  std::vector<std::size_t> elements;  // sorted global ids
  Rational bound;
};

/// Most violated constraint of the vertex's family at x (global element
/// indexing), or nothing when x satisfies the whole family.
std::optional<ConstraintRef> separation_oracle(const ElementModel& model, Side side, std::size_t vertex,
                                               std::span<const Rational> x, FamilyMode mode, const Caps& caps);

/// Every member of the lattice family of a vertex, as sorted global element ids.
std::vector<std::vector<std::size_t>> enumerate_lattice_sets(const ElementModel& model, Side side,
                                                             std::size_t vertex, const Caps& caps);

struct LPSolution {
  ModelKind kind = ModelKind::QueryCommit;
  std::vector<Rational> values;  // x*, indexed by element
  Rational objective;
  std::vector<ConstraintRef> tight;
  std::size_t rounds = 0;
  std::size_t constraints = 0;
};

/// Cutting-plane solve over the all-subsets constraints at every vertex of
/// both sides, seeded with singletons and full neighbourhoods, using the exact
/// simplex. The result is post-checked against the full family.
LPSolution solve_lp(const ElementModel& model, const Caps& caps = {});
LPSolution solve_lp_qc(const QCInstance& instance, const Caps& caps = {});
LPSolution solve_lp_poi(const SurrogateInstance& surrogate, const Caps& caps = {});

/// Independent brute-force check: x >= 0 and every subset constraint at every
/// vertex holds. Does not use VertexFamily.
bool satisfies_all_constraints(const ElementModel& model, std::span<const Rational> x);

/// {"objective", "x", "tight"} with deterministic key order.
std::string lp_solution_json(const ElementModel& model, const LPSolution& solution);

}  // namespace stochmatch
