#include "stochmatch/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "stochmatch/error.hpp"

namespace stochmatch {

namespace {

std::vector<double> arrival_times(const TrialKey& key, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t a = 0; a < n; ++a) t[a] = CounterRng(key.seed, key.trial, StreamKind::Arrival, a).uniform();
  return t;
}

std::vector<std::size_t> arrival_order(const std::vector<double>& t) {
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return t[x] < t[y]; });
  return order;
}

std::vector<PermutationSampler> make_samplers(const ElementModel& model,
                                              const std::vector<PermutationDistribution>& dists) {
  if (dists.size() != model.graph().left().size()) {
    throw InvalidInput("expected one permutation distribution per left vertex");
  }
  std::vector<PermutationSampler> out;
  for (std::size_t a = 0; a < dists.size(); ++a) {
    if (dists[a].owner != a) throw InvalidInput("permutation distributions are not in left-vertex order");
    out.emplace_back(dists[a]);
  }
  return out;
}

std::vector<double> base_prices(const ElementModel& model, const LPSolution& lp) {
  if (lp.values.size() != model.size()) throw InvalidInput("LP solution does not match the instance");
  std::vector<Rational> c(model.graph().right().size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Element& el = model.element(i);
    c[model.graph().edge(el.edge).right] += lp.values[i] * el.value;
  }
  std::vector<double> out;
  for (const Rational& r : c) out.push_back(r.to_double());
  return out;
}

// Realized surrogate value min(X_e, tau_e) of surrogate edge e, or nullopt.
std::optional<Rational> capped_value(const SurrogateInstance& s, std::size_t e, std::optional<std::size_t> outcome) {
  if (!outcome) return std::nullopt;
  const Rational& x = s.original(e).support().at(*outcome).value;
  return min(x, s.tau(e));
}

}  // namespace

double threshold_factor(double t) { return 1.0 - std::exp(t - 1.0); }

OutcomeSource::OutcomeSource(const QCInstance& instance) {
  for (const Rational& p : instance.probs()) samplers_.emplace_back(std::span<const Rational>(&p, 1));
}

OutcomeSource::OutcomeSource(const PoIInstance& instance) {
  for (const auto& d : instance.dists()) {
    std::vector<Rational> probs;
    for (const Outcome& o : d.support()) probs.push_back(o.prob);
    samplers_.emplace_back(probs);
  }
}

std::optional<std::size_t> OutcomeSource::draw(const TrialKey& key, std::size_t edge) const {
  CounterRng rng(key.seed, key.trial, StreamKind::EdgeOutcome, edge);
  const ExactSampler& s = samplers_.at(edge);
  const std::size_t k = s.sample(rng);
  if (k == s.size()) return std::nullopt;
  return k;
}

Realization Realization::draw(const OutcomeSource& source, const TrialKey& key) {
  std::vector<std::optional<std::size_t>> out(source.edge_count());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = source.draw(key, e);
  return Realization(std::move(out));
}

std::optional<std::size_t> LazyDraws::outcome(std::size_t edge) {
  if (!known_.at(edge)) {
    memo_[edge] = source_->draw(key_, edge);
    known_[edge] = true;
  }
  return memo_[edge];
}

void check_run(const BipartiteGraph& graph, const RunRecord& run) {
  std::vector<bool> left(graph.left().size(), false);
  std::vector<bool> right(graph.right().size(), false);
  for (const auto& [e, value] : run.matching) {
    const Edge& edge = graph.edge(e);
    if (left[edge.left] || right[edge.right]) throw InternalError("matching shares an endpoint at edge " + edge.id);
    left[edge.left] = right[edge.right] = true;
    if (!run.steps.empty()) {
      const bool queried = std::any_of(run.steps.begin(), run.steps.end(),
                                       [&](const QueryStep& s) { return s.edge == e && s.real; });
      if (!queried) throw InternalError("matched edge " + edge.id + " was never queried");
    }
  }
}

std::string run_record_json(const BipartiteGraph& graph, const RunRecord& run, std::uint64_t trial) {
  nlohmann::ordered_json doc;
  doc["trial"] = trial;
  nlohmann::ordered_json arrival = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < run.arrival.size(); ++a) arrival[graph.left()[a]] = run.arrival[a];
  doc["arrival"] = std::move(arrival);
  nlohmann::ordered_json order = nlohmann::ordered_json::array();
  for (std::size_t a : run.order) order.push_back(graph.left()[a]);
  doc["order"] = std::move(order);
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const QueryStep& s : run.steps) {
    steps.push_back({{"vertex", graph.left()[s.vertex]},
                     {"edge", graph.edge(s.edge).id},
                     {"value", s.value.str()},
                     {"real", s.real},
                     {"paid", s.paid},
                     {"success", s.success}});
  }
  doc["steps"] = std::move(steps);
  nlohmann::ordered_json matching = nlohmann::ordered_json::array();
  for (const auto& [e, w] : run.matching) matching.push_back({{"edge", graph.edge(e).id}, {"value", w.str()}});
  doc["matching"] = std::move(matching);
  doc["gross"] = run.gross.str();
  doc["cost"] = run.cost.str();
  doc["net"] = run.net.str();
  doc["free_value"] = run.free_value.str();
  return doc.dump();
}

const std::vector<std::size_t> PermutationSampler::empty_;

PermutationSampler::PermutationSampler(const PermutationDistribution& dist) : dist_(&dist) {
  std::vector<Rational> coef;
  for (const auto& a : dist.atoms) coef.push_back(a.coefficient);
  sampler_ = ExactSampler(coef);
}

const std::vector<std::size_t>& PermutationSampler::sample(CounterRng& rng) const {
  const std::size_t k = sampler_.sample(rng);
  if (k >= dist_->atoms.size()) return empty_;
  return dist_->atoms[k].sigma;
}

std::optional<std::size_t> single_vertex_query_qc(const ElementModel& model, const PermutationSampler& dist,
                                                  Draws& draws, CounterRng& rng) {
  for (std::size_t el : dist.sample(rng)) {
    if (draws.outcome(model.element(el).edge)) return el;
  }
  return std::nullopt;
}

std::optional<std::size_t> single_vertex_query_poi(const ElementModel& model, const SurrogateInstance& surrogate,
                                                   const PermutationSampler& dist, Draws& draws, CounterRng& rng) {
  for (std::size_t el : dist.sample(rng)) {
    const Element& e = model.element(el);
    const auto z = capped_value(surrogate, e.edge, draws.outcome(surrogate.base_edge(e.edge)));
    if (z && *z == e.value) return el;
  }
  return std::nullopt;
}

ApproxQc::ApproxQc(const QCInstance& instance, const ElementModel& model, const LPSolution& lp,
                   const std::vector<PermutationDistribution>& dists)
    : instance_(&instance), model_(&model), samplers_(make_samplers(model, dists)),
      base_price_(base_prices(model, lp)) {
  for (const Rational& w : instance.weights()) weight_.push_back(w.to_double());
}

RunRecord ApproxQc::run(const TrialKey& key, Draws& draws, bool record_steps) const {
  const BipartiteGraph& g = instance_->graph();
  RunRecord rec;
  rec.arrival = arrival_times(key, g.left().size());
  rec.order = arrival_order(rec.arrival);
  std::vector<bool> right_matched(g.right().size(), false);
  for (std::size_t a : rec.order) {
    const double alpha = threshold_factor(rec.arrival[a]);
    CounterRng rng(key.seed, key.trial, StreamKind::Permutation, a);
    for (std::size_t el : samplers_[a].sample(rng)) {
      const std::size_t e = model_->element(el).edge;
      const std::size_t b = g.edge(e).right;
      const bool exists = draws.outcome(e).has_value();
      const bool real = weight_[e] >= alpha * base_price_[b] && !right_matched[b];
      if (record_steps) rec.steps.push_back(QueryStep{a, e, instance_->weight(e), real, false, exists});
      if (!exists) continue;
      if (real) {
        right_matched[b] = true;
        rec.matching.emplace_back(e, instance_->weight(e));
        rec.gross += instance_->weight(e);
      }
      break;
    }
  }
  rec.net = rec.gross;
  rec.free_value = rec.gross;
  return rec;
}

ApproxPoi::ApproxPoi(const SurrogateInstance& surrogate, const ElementModel& model, const LPSolution& lp,
                     const std::vector<PermutationDistribution>& dists)
    : surrogate_(&surrogate), model_(&model), samplers_(make_samplers(model, dists)),
      base_price_(base_prices(model, lp)) {
  if (model.kind() != ModelKind::PriceOfInformation) throw InvalidInput("ApproxPoi needs a PoI element model");
  for (const Element& el : model.elements()) value_.push_back(el.value.to_double());
}

RunRecord ApproxPoi::run(const TrialKey& key, Draws& draws, bool record_steps) const {
  const SurrogateInstance& s = *surrogate_;
  const BipartiteGraph& g = s.graph();
  RunRecord rec;
  rec.arrival = arrival_times(key, g.left().size());
  rec.order = arrival_order(rec.arrival);
  std::vector<bool> right_matched(g.right().size(), false);
  std::vector<bool> paid(g.edge_count(), false);
  for (std::size_t a : rec.order) {
    const double alpha = threshold_factor(rec.arrival[a]);
    CounterRng rng(key.seed, key.trial, StreamKind::Permutation, a);
    for (std::size_t el : samplers_[a].sample(rng)) {
      const Element& pair = model_->element(el);
      const std::size_t e = pair.edge;
      const std::size_t base = s.base_edge(e);
      const std::size_t b = g.edge(e).right;
      const auto outcome = draws.outcome(base);
      const auto z = capped_value(s, e, outcome);
      const bool success = z && *z == pair.value;
      const bool real = value_[el] >= alpha * base_price_[b] && !right_matched[b];
      bool pay = false;
      if (real && !paid[e]) {
        if (pair.value != s.tau(e)) {
          throw InternalError("first query of edge " + g.edge(e).id + " is not at its threshold value");
        }
        paid[e] = pay = true;
        rec.cost += s.cost(e);
      }
      if (record_steps) rec.steps.push_back(QueryStep{a, base, pair.value, real, pay, success});
      if (!success) continue;
      if (real) {
        right_matched[b] = true;
        const Rational& x = s.original(e).support()[*outcome].value;
        rec.matching.emplace_back(base, x);
        rec.gross += x;
        rec.free_value += pair.value;
      }
      break;
    }
  }
  rec.net = rec.gross - rec.cost;
  return rec;
}

std::vector<std::size_t> greedy_order(const QCInstance& instance) {
  std::vector<std::size_t> order(instance.graph().edge_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return instance.weight(x) > instance.weight(y); });
  return order;
}

RunRecord greedy_qc(const QCInstance& instance, Draws& draws, bool record_steps) {
  return greedy_qc(instance, greedy_order(instance), draws, record_steps);
}

RunRecord greedy_qc(const QCInstance& instance, const std::vector<std::size_t>& order, Draws& draws,
                    bool record_steps) {
  const BipartiteGraph& g = instance.graph();
  RunRecord rec;
  std::vector<bool> left(g.left().size(), false);
  std::vector<bool> right(g.right().size(), false);
  for (std::size_t e : order) {
    const Edge& edge = g.edge(e);
    if (left[edge.left] || right[edge.right]) continue;
    const bool exists = draws.outcome(e).has_value();
    if (record_steps) rec.steps.push_back(QueryStep{edge.left, e, instance.weight(e), true, false, exists});
    if (!exists) continue;
    left[edge.left] = right[edge.right] = true;
    rec.matching.emplace_back(e, instance.weight(e));
    rec.gross += instance.weight(e);
  }
  rec.net = rec.gross;
  rec.free_value = rec.gross;
  return rec;
}

}  // namespace stochmatch
