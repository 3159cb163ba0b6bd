#include "stochmatch/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include <json.hpp>

#include "stochmatch/error.hpp"

namespace stochmatch {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// BipartiteGraph

BipartiteGraph::BipartiteGraph(std::vector<std::string> left, std::vector<std::string> right,
                               std::vector<Edge> edges)
    : left_(std::move(left)), right_(std::move(right)), edges_(std::move(edges)) {
  std::set<std::string> names;
  for (const auto& v : left_) {
    if (!names.insert(v).second) throw InvalidInput("duplicate vertex name \"" + v + "\"");
  }
  for (const auto& v : right_) {
    if (!names.insert(v).second) throw InvalidInput("duplicate vertex name \"" + v + "\"");
  }
  left_adj_.assign(left_.size(), {});
  right_adj_.assign(right_.size(), {});
  std::set<std::string> ids;
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.left >= left_.size() || edge.right >= right_.size()) {
      throw InvalidInput("edge \"" + edge.id + "\" has an endpoint outside the graph");
    }
    if (!ids.insert(edge.id).second) throw InvalidInput("duplicate edge id \"" + edge.id + "\"");
    if (!pairs.emplace(edge.left, edge.right).second) {
      throw InvalidInput("duplicate edge between \"" + left_[edge.left] + "\" and \"" +
                         right_[edge.right] + "\"");
    }
    left_adj_[edge.left].push_back(e);
    right_adj_[edge.right].push_back(e);
  }
}

const std::vector<std::size_t>& BipartiteGraph::incident(Side side, std::size_t vertex) const {
  return side == Side::Left ? left_adj_.at(vertex) : right_adj_.at(vertex);
}

std::optional<std::size_t> BipartiteGraph::find_edge(std::string_view id) const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].id == id) return e;
  }
  return std::nullopt;
}

BipartiteGraph BipartiteGraph::restrict_to(std::span<const std::size_t> keep) const {
  std::vector<Edge> kept;
  kept.reserve(keep.size());
  for (std::size_t e : keep) kept.push_back(edges_.at(e));
  return BipartiteGraph(left_, right_, std::move(kept));
}

bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
  if (a.left_ != b.left_ || a.right_ != b.right_ || a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t e = 0; e < a.edges_.size(); ++e) {
    const Edge& x = a.edges_[e];
    const Edge& y = b.edges_[e];
    if (x.id != y.id || x.left != y.left || x.right != y.right) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// DiscreteDistribution

DiscreteDistribution DiscreteDistribution::build(std::vector<Outcome> outcomes, bool merge_equal) {
  std::vector<Outcome> kept;
  for (auto& o : outcomes) {
    if (o.value.is_negative()) throw InvalidInput("negative weight value " + o.value.str());
    if (!o.prob.is_positive()) throw InvalidInput("non-positive outcome probability " + o.prob.str());
    if (o.value.is_zero()) continue;  // folded into the absent mass
    kept.push_back(std::move(o));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Outcome& a, const Outcome& b) { return a.value > b.value; });
  DiscreteDistribution d;
  for (auto& o : kept) {
    if (!d.support_.empty() && d.support_.back().value == o.value) {
      if (!merge_equal) throw InvalidInput("duplicate support value " + o.value.str());
      d.support_.back().prob += o.prob;
      continue;
    }
    d.support_.push_back(std::move(o));
  }
  if (d.support_.empty()) throw InvalidInput("weight distribution has no positive value");
  if (d.total_mass() > Rational(1)) {
    throw InvalidInput("outcome probabilities sum to " + d.total_mass().str() + ", above 1");
  }
  return d;
}

DiscreteDistribution DiscreteDistribution::from_outcomes(std::vector<Outcome> outcomes) {
  return build(std::move(outcomes), false);
}

DiscreteDistribution DiscreteDistribution::merged(std::vector<Outcome> outcomes) {
  return build(std::move(outcomes), true);
}

Rational DiscreteDistribution::total_mass() const {
  Rational total;
  for (const auto& o : support_) total += o.prob;
  return total;
}

Rational DiscreteDistribution::expectation() const {
  Rational total;
  for (const auto& o : support_) total += o.prob * o.value;
  return total;
}

Rational DiscreteDistribution::expected_excess(const Rational& tau) const {
  Rational total;
  for (const auto& o : support_) {
    if (o.value > tau) total += o.prob * (o.value - tau);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Instances

QCInstance::QCInstance(BipartiteGraph graph, std::vector<Rational> weight, std::vector<Rational> prob)
    : graph_(std::move(graph)), weight_(std::move(weight)), prob_(std::move(prob)) {
  if (weight_.size() != graph_.edge_count() || prob_.size() != graph_.edge_count()) {
    throw InvalidInput("edge data does not match the edge count");
  }
  for (std::size_t e = 0; e < graph_.edge_count(); ++e) {
    const std::string& id = graph_.edge(e).id;
    if (weight_[e].is_negative()) throw InvalidInput("edge \"" + id + "\": negative weight");
    if (!prob_[e].is_positive() || prob_[e] > Rational(1)) {
      throw InvalidInput("edge \"" + id + "\": probability " + prob_[e].str() + " outside (0,1]");
    }
  }
}

bool QCInstance::strictly_probabilistic() const {
  return std::all_of(prob_.begin(), prob_.end(), [](const Rational& p) { return p < Rational(1); });
}

bool operator==(const QCInstance& a, const QCInstance& b) {
  return a.graph_ == b.graph_ && a.weight_ == b.weight_ && a.prob_ == b.prob_;
}

PoIInstance::PoIInstance(BipartiteGraph graph, std::vector<DiscreteDistribution> dist, std::vector<Rational> cost)
    : graph_(std::move(graph)), dist_(std::move(dist)), cost_(std::move(cost)) {
  if (dist_.size() != graph_.edge_count() || cost_.size() != graph_.edge_count()) {
    throw InvalidInput("edge data does not match the edge count");
  }
  for (std::size_t e = 0; e < graph_.edge_count(); ++e) {
    if (cost_[e].is_negative()) throw InvalidInput("edge \"" + graph_.edge(e).id + "\": negative query cost");
    if (dist_[e].size() == 0) throw InvalidInput("edge \"" + graph_.edge(e).id + "\": empty distribution");
  }
}

bool PoIInstance::strictly_probabilistic() const {
  return std::all_of(dist_.begin(), dist_.end(),
                     [](const DiscreteDistribution& d) { return d.total_mass() < Rational(1); });
}

bool operator==(const PoIInstance& a, const PoIInstance& b) {
  return a.graph_ == b.graph_ && a.dist_ == b.dist_ && a.cost_ == b.cost_;
}

SurrogateInstance::SurrogateInstance(PoIInstance base, BipartiteGraph graph, std::vector<std::size_t> base_edge,
                                     std::vector<Rational> tau, std::vector<DiscreteDistribution> capped,
                                     std::vector<std::string> warnings)
    : base_(std::move(base)),
      graph_(std::move(graph)),
      base_edge_(std::move(base_edge)),
      tau_(std::move(tau)),
      capped_(std::move(capped)),
      warnings_(std::move(warnings)) {}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw InvalidInput(path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) field_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Rational require_rational(const json& obj, const char* key, const std::string& path) {
  const std::string text = require_string(obj, key, path);
  try {
    return Rational::parse(text);
  } catch (const Error& e) {
    field_error(path + "." + key, e.what());
  }
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) field_error(path, "unknown field \"" + it.key() + "\"");
  }
}

std::vector<std::string> vertex_list(const json& doc, const char* key) {
  const json& arr = require(doc, key, "$");
  if (!arr.is_array()) field_error(std::string("$.") + key, "expected an array of vertex names");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) {
      field_error(std::string("$.") + key + "[" + std::to_string(i) + "]", "expected a string");
    }
    names.push_back(arr[i].get<std::string>());
  }
  return names;
}

std::size_t line_of(std::string_view text, std::size_t byte, std::size_t& column) {
  std::size_t line = 1;
  column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return line;
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t column = 0;
    const std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    const std::size_t line = line_of(text, byte, column);
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": " + e.what());
  }
  if (!doc.is_object()) field_error("$", "expected a JSON object");
  reject_unknown_keys(doc, {"model", "name", "left", "right", "edges"}, "$");

  const std::string model = require_string(doc, "model", "$");
  if (model != "qc" && model != "poi") field_error("$.model", "expected \"qc\" or \"poi\"");
  const bool qc = model == "qc";

  std::vector<std::string> left = vertex_list(doc, "left");
  std::vector<std::string> right = vertex_list(doc, "right");
  std::map<std::string, std::size_t> left_index;
  std::map<std::string, std::size_t> right_index;
  for (std::size_t i = 0; i < left.size(); ++i) left_index.emplace(left[i], i);
  for (std::size_t i = 0; i < right.size(); ++i) right_index.emplace(right[i], i);

  const json& edges = require(doc, "edges", "$");
  if (!edges.is_array()) field_error("$.edges", "expected an array");

  std::vector<Edge> graph_edges;
  std::vector<Rational> weight;
  std::vector<Rational> prob;
  std::vector<DiscreteDistribution> dist;
  std::vector<Rational> cost;
  std::set<std::string> ids;
  std::set<std::pair<std::size_t, std::size_t>> pairs;

  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "$.edges[" + std::to_string(i) + "]";
    const json& obj = edges[i];
    if (!obj.is_object()) field_error(path, "expected an object");
    if (qc) {
      reject_unknown_keys(obj, {"id", "a", "b", "p", "w"}, path);
    } else {
      reject_unknown_keys(obj, {"id", "a", "b", "cost", "dist"}, path);
    }
    Edge edge;
    edge.id = require_string(obj, "id", path);
    if (!ids.insert(edge.id).second) field_error(path + ".id", "duplicate edge id \"" + edge.id + "\"");
    const std::string a = require_string(obj, "a", path);
    const std::string b = require_string(obj, "b", path);
    auto la = left_index.find(a);
    if (la == left_index.end()) field_error(path + ".a", "unknown left vertex \"" + a + "\"");
    auto rb = right_index.find(b);
    if (rb == right_index.end()) field_error(path + ".b", "unknown right vertex \"" + b + "\"");
    edge.left = la->second;
    edge.right = rb->second;
    if (!pairs.emplace(edge.left, edge.right).second) {
      field_error(path, "duplicate edge between \"" + a + "\" and \"" + b + "\"");
    }

    if (qc) {
      Rational p = require_rational(obj, "p", path);
      Rational w = require_rational(obj, "w", path);
      if (!p.is_positive() || p > Rational(1)) field_error(path + ".p", "probability " + p.str() + " outside (0,1]");
      if (w.is_negative()) field_error(path + ".w", "negative weight " + w.str());
      prob.push_back(std::move(p));
      weight.push_back(std::move(w));
    } else {
      Rational c = require_rational(obj, "cost", path);
      if (c.is_negative()) field_error(path + ".cost", "negative query cost " + c.str());
      const json& d = require(obj, "dist", path);
      if (!d.is_array() || d.empty()) field_error(path + ".dist", "expected a non-empty array");
      std::vector<Outcome> outcomes;
      for (std::size_t k = 0; k < d.size(); ++k) {
        const std::string opath = path + ".dist[" + std::to_string(k) + "]";
        if (!d[k].is_object()) field_error(opath, "expected an object");
        reject_unknown_keys(d[k], {"v", "p"}, opath);
        Rational v = require_rational(d[k], "v", opath);
        Rational p = require_rational(d[k], "p", opath);
        if (v.is_negative()) field_error(opath + ".v", "negative value " + v.str());
        if (!p.is_positive() || p > Rational(1)) field_error(opath + ".p", "probability " + p.str() + " outside (0,1]");
        outcomes.push_back({std::move(v), std::move(p)});
      }
      try {
        dist.push_back(DiscreteDistribution::from_outcomes(std::move(outcomes)));
      } catch (const Error& e) {
        field_error(path + ".dist", e.what());
      }
      cost.push_back(std::move(c));
    }
    graph_edges.push_back(std::move(edge));
  }

  BipartiteGraph graph(std::move(left), std::move(right), std::move(graph_edges));
  if (qc) return QCInstance(std::move(graph), std::move(weight), std::move(prob));
  return PoIInstance(std::move(graph), std::move(dist), std::move(cost));
}

namespace {

ordered_json graph_header(const BipartiteGraph& g, const char* model) {
  ordered_json doc;
  doc["model"] = model;
  doc["left"] = g.left();
  doc["right"] = g.right();
  return doc;
}

}  // namespace

std::string serialize_instance(const QCInstance& instance) {
  const BipartiteGraph& g = instance.graph();
  ordered_json doc = graph_header(g, "qc");
  ordered_json edges = ordered_json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    ordered_json obj;
    obj["id"] = g.edge(e).id;
    obj["a"] = g.left()[g.edge(e).left];
    obj["b"] = g.right()[g.edge(e).right];
    obj["p"] = instance.prob(e).str();
    obj["w"] = instance.weight(e).str();
    edges.push_back(std::move(obj));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::string serialize_instance(const PoIInstance& instance) {
  const BipartiteGraph& g = instance.graph();
  ordered_json doc = graph_header(g, "poi");
  ordered_json edges = ordered_json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    ordered_json obj;
    obj["id"] = g.edge(e).id;
    obj["a"] = g.left()[g.edge(e).left];
    obj["b"] = g.right()[g.edge(e).right];
    obj["cost"] = instance.cost(e).str();
    ordered_json d = ordered_json::array();
    for (const Outcome& o : instance.dist(e).support()) {
      ordered_json entry;
      entry["v"] = o.value.str();
      entry["p"] = o.prob.str();
      d.push_back(std::move(entry));
    }
    obj["dist"] = std::move(d);
    edges.push_back(std::move(obj));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::string serialize_instance(const Instance& instance) {
  return std::visit([](const auto& i) { return serialize_instance(i); }, instance);
}

// ---------------------------------------------------------------------------
// Scaling and the surrogate reduction

namespace {

void check_gamma(const Rational& gamma) {
  if (!gamma.is_positive() || gamma >= Rational(1)) {
    throw InvalidInput("scaling parameter gamma = " + gamma.str() + " must lie in (0,1)");
  }
}

}  // namespace

QCInstance scale_probabilities(const QCInstance& instance, const Rational& gamma) {
  check_gamma(gamma);
  const Rational factor = Rational(1) - gamma;
  std::vector<Rational> prob;
  prob.reserve(instance.probs().size());
  for (const Rational& p : instance.probs()) prob.push_back(factor * p);
  return QCInstance(instance.graph(), instance.weights(), std::move(prob));
}

PoIInstance scale_probabilities(const PoIInstance& instance, const Rational& gamma) {
  check_gamma(gamma);
  const Rational factor = Rational(1) - gamma;
  std::vector<DiscreteDistribution> dist;
  for (const DiscreteDistribution& d : instance.dists()) {
    std::vector<Outcome> scaled;
    for (const Outcome& o : d.support()) scaled.push_back({o.value, factor * o.prob});
    dist.push_back(DiscreteDistribution::from_outcomes(std::move(scaled)));
  }
  return PoIInstance(instance.graph(), std::move(dist), instance.costs());
}

Rational compute_threshold(const DiscreteDistribution& dist, const Rational& cost) {
  if (cost.is_negative()) throw InvalidInput("negative query cost " + cost.str());
  const Rational mean = dist.expectation();
  if (cost > mean) {
    throw InvalidInput("query cost " + cost.str() + " exceeds the expected weight " + mean.str());
  }
  const auto& s = dist.support();
  if (cost.is_zero()) return s.front().value;

  // On [s[k+1].value, s[k].value] the excess is sum_{i<=k} p_i (v_i - tau),
  // which is linear and non-increasing; walk segments from the top down.
  Rational mass;
  Rational weighted;
  for (std::size_t k = 0; k < s.size(); ++k) {
    mass += s[k].prob;
    weighted += s[k].prob * s[k].value;
    const Rational lower = k + 1 < s.size() ? s[k + 1].value : Rational(0);
    const Rational excess_at_lower = weighted - mass * lower;
    if (excess_at_lower >= cost) return (weighted - cost) / mass;
  }
  throw InternalError("threshold search fell through");
}

SurrogateInstance poi_to_surrogate(const PoIInstance& instance) {
  const BipartiteGraph& g = instance.graph();
  std::vector<std::size_t> keep;
  std::vector<Rational> tau;
  std::vector<DiscreteDistribution> capped;
  std::vector<std::string> warnings;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const DiscreteDistribution& d = instance.dist(e);
    if (instance.cost(e) > d.expectation()) {
      warnings.push_back("edge \"" + g.edge(e).id + "\" dropped: query cost " + instance.cost(e).str() +
                         " exceeds expected weight " + d.expectation().str());
      continue;
    }
    Rational t = compute_threshold(d, instance.cost(e));
    if (!t.is_positive()) {
      warnings.push_back("edge \"" + g.edge(e).id + "\" dropped: surrogate value is identically zero");
      continue;
    }
    std::vector<Outcome> y;
    for (const Outcome& o : d.support()) y.push_back({min(o.value, t), o.prob});
    keep.push_back(e);
    tau.push_back(std::move(t));
    capped.push_back(DiscreteDistribution::merged(std::move(y)));
  }
  BipartiteGraph kept = g.restrict_to(keep);
  return SurrogateInstance(instance, std::move(kept), std::move(keep), std::move(tau), std::move(capped),
                           std::move(warnings));
}

Rational default_gamma() { return Rational(1, 1000000); }

}  // namespace stochmatch
