#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochmatch/rational.hpp"

namespace stochmatch {

enum class Side { Left, Right };

struct Edge {
  std::string id;
  std::size_t left = 0;
  std::size_t right = 0;
};

/// Bipartite graph G = (A, B, E) with named vertices and edges. Edge order is
/// the order of the input document and is the canonical order used for every
/// deterministic tie-break in the library.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(std::vector<std::string> left, std::vector<std::string> right, std::vector<Edge> edges);

  const std::vector<std::string>& left() const { return left_; }
  const std::vector<std::string>& right() const { return right_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }

  /// Edge indices incident to a vertex, in canonical order.
  const std::vector<std::size_t>& incident(Side side, std::size_t vertex) const;
  std::size_t vertex_count(Side side) const { return side == Side::Left ? left_.size() : right_.size(); }
  std::optional<std::size_t> find_edge(std::string_view id) const;

  /// Graph with only the given edges, in the given order.
  BipartiteGraph restrict_to(std::span<const std::size_t> keep) const;

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b);

 private:
  std::vector<std::string> left_;
  std::vector<std::string> right_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> left_adj_;
  std::vector<std::vector<std::size_t>> right_adj_;
};

struct Outcome {
  Rational value;
  Rational prob;
  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Finite weight distribution. Support values are strictly decreasing and
/// strictly positive; probabilities are positive and sum to at most one, the
/// deficit being the mass of "edge absent / value zero".
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  /// Sorts, folds zero values into the absent mass and validates. Throws
  /// InvalidInput on duplicate or negative values, non-positive probabilities,
  /// total mass above one, or an empty support after folding.
  static DiscreteDistribution from_outcomes(std::vector<Outcome> outcomes);
  /// Same, but merges equal values by summing their mass instead of rejecting.
  static DiscreteDistribution merged(std::vector<Outcome> outcomes);

  const std::vector<Outcome>& support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  Rational total_mass() const;
  Rational expectation() const;
  /// E[max(X - tau, 0)], absent mass contributing zero.
  Rational expected_excess(const Rational& tau) const;
  const Rational& top_value() const { return support_.front().value; }

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  static DiscreteDistribution build(std::vector<Outcome> outcomes, bool merge_equal);
  std::vector<Outcome> support_;
};

class QCInstance {
 public:
  QCInstance() = default;
  /// Validates weights >= 0 and probabilities in (0, 1].
  QCInstance(BipartiteGraph graph, std::vector<Rational> weight, std::vector<Rational> prob);

  const BipartiteGraph& graph() const { return graph_; }
  const Rational& weight(std::size_t e) const { return weight_.at(e); }
  const Rational& prob(std::size_t e) const { return prob_.at(e); }
  const std::vector<Rational>& weights() const { return weight_; }
  const std::vector<Rational>& probs() const { return prob_; }
  /// True when every probability is strictly below one.
  bool strictly_probabilistic() const;

  friend bool operator==(const QCInstance& a, const QCInstance& b);

 private:
  BipartiteGraph graph_;
  std::vector<Rational> weight_;
  std::vector<Rational> prob_;
};

class PoIInstance {
 public:
  PoIInstance() = default;
  PoIInstance(BipartiteGraph graph, std::vector<DiscreteDistribution> dist, std::vector<Rational> cost);

  const BipartiteGraph& graph() const { return graph_; }
  const DiscreteDistribution& dist(std::size_t e) const { return dist_.at(e); }
  const Rational& cost(std::size_t e) const { return cost_.at(e); }
  const std::vector<DiscreteDistribution>& dists() const { return dist_; }
  const std::vector<Rational>& costs() const { return cost_; }
  bool strictly_probabilistic() const;

  friend bool operator==(const PoIInstance& a, const PoIInstance& b);

 private:
  BipartiteGraph graph_;
  std::vector<DiscreteDistribution> dist_;
  std::vector<Rational> cost_;
};

using Instance = std::variant<QCInstance, PoIInstance>;

/// The PoI instance reduced to capped surrogate values Y_e = min(X_e, tau_e).
/// Edges that can never be profitably queried are dropped; `base_edge` maps
/// each surviving edge back to the base instance.
class SurrogateInstance {
 public:
  SurrogateInstance() = default;
  SurrogateInstance(PoIInstance base, BipartiteGraph graph, std::vector<std::size_t> base_edge,
                    std::vector<Rational> tau, std::vector<DiscreteDistribution> capped,
                    std::vector<std::string> warnings);

  const PoIInstance& base() const { return base_; }
  const BipartiteGraph& graph() const { return graph_; }
  std::size_t base_edge(std::size_t e) const { return base_edge_.at(e); }
  const Rational& tau(std::size_t e) const { return tau_.at(e); }
  const DiscreteDistribution& capped(std::size_t e) const { return capped_.at(e); }
  const Rational& cost(std::size_t e) const { return base_.cost(base_edge(e)); }
  const DiscreteDistribution& original(std::size_t e) const { return base_.dist(base_edge(e)); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  PoIInstance base_;
  BipartiteGraph graph_;
  std::vector<std::size_t> base_edge_;
  std::vector<Rational> tau_;
  std::vector<DiscreteDistribution> capped_;
  std::vector<std::string> warnings_;
};

/// Parses and validates an instance document (see docs/instance.schema.json).
/// Throws ParseError (syntax, with line and column) or InvalidInput (semantic,
/// naming the offending field).
Instance parse_instance(std::string_view text);
std::string serialize_instance(const Instance& instance);
std::string serialize_instance(const QCInstance& instance);
std::string serialize_instance(const PoIInstance& instance);

/// Replaces every probability p by (1 - gamma) p. Requires 0 < gamma < 1.
QCInstance scale_probabilities(const QCInstance& instance, const Rational& gamma);
PoIInstance scale_probabilities(const PoIInstance& instance, const Rational& gamma);

/// Exact tau with E[max(X - tau, 0)] = cost. Requires 0 <= cost <= E[X];
/// cost = 0 yields the top support value.
Rational compute_threshold(const DiscreteDistribution& dist, const Rational& cost);

/// Builds the surrogate. Edges with cost > E[X_e], or whose capped support is
/// empty, are dropped with a warning.
SurrogateInstance poi_to_surrogate(const PoIInstance& instance);

/// Default auto-scaling parameter, 10^-6.
Rational default_gamma();

}  // namespace stochmatch
