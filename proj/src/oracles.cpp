#include "stochmatch/oracles.hpp"

#include <algorithm>
#include <functional>
#include <optional>

#include "stochmatch/error.hpp"

namespace stochmatch {

namespace {

// One edge of an enumerated realization: outcome weights with their
// probabilities; the absent outcome (weight 0) is appended last.
struct OutcomeTable {
  std::vector<std::vector<Rational>> weight;
  std::vector<std::vector<Rational>> prob;
};

std::vector<std::vector<std::size_t>> all_matchings(const BipartiteGraph& g) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  std::vector<bool> left(g.left().size(), false);
  std::vector<bool> right(g.right().size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t e) {
    if (e == g.edge_count()) {
      out.push_back(current);
      return;
    }
    rec(e + 1);
    const Edge& edge = g.edge(e);
    if (left[edge.left] || right[edge.right]) return;
    left[edge.left] = right[edge.right] = true;
    current.push_back(e);
    rec(e + 1);
    current.pop_back();
    left[edge.left] = right[edge.right] = false;
  };
  rec(0);
  return out;
}

Rational expected_max_matching(const BipartiteGraph& g, const OutcomeTable& t, std::size_t cap) {
  const std::size_t m = g.edge_count();
  std::size_t total = 1;
  for (std::size_t e = 0; e < m; ++e) {
    total *= t.weight[e].size();
    if (total > cap) {
      throw CapExceeded("cap-offline", "offline expectation would enumerate more than " + std::to_string(cap) +
                                           " joint outcomes");
    }
  }
  const auto matchings = all_matchings(g);
  std::vector<std::size_t> digit(m, 0);
  Rational expectation;
  std::vector<Rational> w(m);
  for (std::size_t r = 0; r < total; ++r) {
    Rational p(1);
    for (std::size_t e = 0; e < m; ++e) {
      p *= t.prob[e][digit[e]];
      w[e] = t.weight[e][digit[e]];
    }
    if (!p.is_zero()) {
      Rational best;
      for (const auto& mt : matchings) {
        Rational s;
        for (std::size_t e : mt) s += w[e];
        if (s > best) best = std::move(s);
      }
      expectation += p * best;
    }
    for (std::size_t e = 0; e < m; ++e) {
      if (++digit[e] < t.weight[e].size()) break;
      digit[e] = 0;
    }
  }
  return expectation;
}

}  // namespace

Rational brute_force_opt_qc(const QCInstance& instance, const OracleCaps& caps) {
  const BipartiteGraph& g = instance.graph();
  const std::size_t m = g.edge_count();
  if (m > caps.qc_edges) {
    throw CapExceeded("cap-oracle-edges", "query-commit oracle is limited to " + std::to_string(caps.qc_edges) +
                                              " edges, instance has " + std::to_string(m));
  }
  // conflict[e]: e together with every edge sharing one of its endpoints.
  std::vector<std::uint32_t> conflict(m, 0);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t f = 0; f < m; ++f) {
      if (g.edge(e).left == g.edge(f).left || g.edge(e).right == g.edge(f).right) conflict[e] |= 1U << f;
    }
  }
  std::vector<std::optional<Rational>> memo(std::size_t{1} << m);
  std::function<const Rational&(std::uint32_t)> value = [&](std::uint32_t avail) -> const Rational& {
    auto& slot = memo[avail];
    if (slot) return *slot;
    Rational best;
    for (std::size_t e = 0; e < m; ++e) {
      if (!((avail >> e) & 1U)) continue;
      const Rational& p = instance.prob(e);
      Rational v = p * (instance.weight(e) + value(avail & ~conflict[e]));
      v += (Rational(1) - p) * value(avail & ~(1U << e));
      if (v > best) best = std::move(v);
    }
    slot = std::move(best);
    return *slot;
  };
  return value(static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1));
}

Rational brute_force_opt_poi(const PoIInstance& instance, const OracleCaps& caps) {
  const BipartiteGraph& g = instance.graph();
  const std::size_t m = g.edge_count();
  std::size_t support = 0;
  for (std::size_t e = 0; e < m; ++e) support += instance.dist(e).size();
  if (support > caps.poi_support) {
    throw CapExceeded("cap-poi-support", "price-of-information oracle is limited to total support " +
                                             std::to_string(caps.poi_support) + ", instance has " +
                                             std::to_string(support));
  }
  // Per-edge state digit: 0 unqueried, 1 absent, 2 committed, 3 + k revealed value k.
  std::vector<std::size_t> radix(m), stride(m);
  std::size_t states = 1;
  for (std::size_t e = 0; e < m; ++e) {
    radix[e] = instance.dist(e).size() + 3;
    stride[e] = states;
    states *= radix[e];
  }
  std::vector<std::optional<Rational>> memo(states);
  std::vector<Rational> absent(m);
  for (std::size_t e = 0; e < m; ++e) absent[e] = Rational(1) - instance.dist(e).total_mass();

  std::function<const Rational&(std::size_t)> value = [&](std::size_t code) -> const Rational& {
    auto& slot = memo[code];
    if (slot) return *slot;
    std::vector<std::size_t> digit(m);
    std::vector<bool> left(g.left().size(), false), right(g.right().size(), false);
    for (std::size_t e = 0, c = code; e < m; ++e) {
      digit[e] = c % radix[e];
      c /= radix[e];
      if (digit[e] == 2) left[g.edge(e).left] = right[g.edge(e).right] = true;
    }
    Rational best;  // stop
    for (std::size_t e = 0; e < m; ++e) {
      const Edge& edge = g.edge(e);
      if (left[edge.left] || right[edge.right]) continue;
      const std::size_t base = code - digit[e] * stride[e];
      if (digit[e] == 0) {
        Rational v = -instance.cost(e);
        const auto& sup = instance.dist(e).support();
        for (std::size_t k = 0; k < sup.size(); ++k) v += sup[k].prob * value(base + (3 + k) * stride[e]);
        if (!absent[e].is_zero()) v += absent[e] * value(base + stride[e]);
        if (v > best) best = std::move(v);
      } else if (digit[e] >= 3) {
        Rational v = instance.dist(e).support()[digit[e] - 3].value + value(base + 2 * stride[e]);
        if (v > best) best = std::move(v);
      }
    }
    slot = std::move(best);
    return *slot;
  };
  return value(0);
}

MatchingResult max_weight_matching(std::size_t left_count, std::size_t right_count,
                                   const std::vector<WeightedEdge>& edges) {
  if (right_count > 24) throw CapExceeded("cap-degree", "matching oracle supports at most 24 right vertices");
  for (const auto& e : edges) {
    if (e.left >= left_count || e.right >= right_count) throw InvalidInput("matching edge endpoint out of range");
    if (e.weight.is_negative()) throw InvalidInput("matching weights must be nonnegative");
  }
  std::vector<std::vector<std::size_t>> by_left(left_count);
  for (std::size_t i = 0; i < edges.size(); ++i) by_left[edges[i].left].push_back(i);

  const std::size_t masks = std::size_t{1} << right_count;
  std::vector<std::optional<Rational>> memo((left_count + 1) * masks);
  std::function<const Rational&(std::size_t, std::size_t)> best = [&](std::size_t a,
                                                                       std::size_t used) -> const Rational& {
    auto& slot = memo[a * masks + used];
    if (slot) return *slot;
    Rational v;
    if (a < left_count) {
      v = best(a + 1, used);
      for (std::size_t i : by_left[a]) {
        const std::size_t bit = std::size_t{1} << edges[i].right;
        if (used & bit) continue;
        Rational c = edges[i].weight + best(a + 1, used | bit);
        if (c > v) v = std::move(c);
      }
    }
    slot = std::move(v);
    return *slot;
  };

  MatchingResult out;
  out.weight = best(0, 0);
  std::size_t used = 0;
  for (std::size_t a = 0; a < left_count; ++a) {
    const Rational& target = best(a, used);
    if (best(a + 1, used) == target) continue;
    for (std::size_t i : by_left[a]) {
      const std::size_t bit = std::size_t{1} << edges[i].right;
      if (used & bit) continue;
      if (edges[i].weight + best(a + 1, used | bit) == target) {
        out.edges.push_back(i);
        used |= bit;
        break;
      }
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

Rational exact_expected_offline(const QCInstance& instance, const OracleCaps& caps) {
  OutcomeTable t;
  for (std::size_t e = 0; e < instance.graph().edge_count(); ++e) {
    t.weight.push_back({instance.weight(e), Rational(0)});
    t.prob.push_back({instance.prob(e), Rational(1) - instance.prob(e)});
  }
  return expected_max_matching(instance.graph(), t, caps.offline_outcomes);
}

Rational exact_expected_offline(const SurrogateInstance& surrogate, const OracleCaps& caps) {
  OutcomeTable t;
  for (std::size_t e = 0; e < surrogate.graph().edge_count(); ++e) {
    const DiscreteDistribution& y = surrogate.capped(e);
    std::vector<Rational> w, p;
    for (const Outcome& o : y.support()) {
      w.push_back(o.value);
      p.push_back(o.prob);
    }
    w.emplace_back(0);
    p.push_back(Rational(1) - y.total_mass());
    t.weight.push_back(std::move(w));
    t.prob.push_back(std::move(p));
  }
  return expected_max_matching(surrogate.graph(), t, caps.offline_outcomes);
}

Rational exact_expected_greedy(const QCInstance& instance, const OracleCaps& caps) {
  const BipartiteGraph& g = instance.graph();
  const std::size_t m = g.edge_count();
  if (m > 16 || (std::size_t{1} << m) > caps.offline_outcomes) {
    throw CapExceeded("cap-offline", "greedy expectation enumerates 2^edges realizations, above the cap");
  }
  std::vector<std::size_t> order(m);
  for (std::size_t e = 0; e < m; ++e) order[e] = e;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return instance.weight(x) > instance.weight(y); });
  Rational expectation;
  for (std::uint32_t exists = 0; exists < (1U << m); ++exists) {
    Rational p(1);
    for (std::size_t e = 0; e < m; ++e) p *= ((exists >> e) & 1U) ? instance.prob(e) : Rational(1) - instance.prob(e);
    if (p.is_zero()) continue;
    std::vector<bool> left(g.left().size(), false), right(g.right().size(), false);
    Rational value;
    for (std::size_t e : order) {
      const Edge& edge = g.edge(e);
      if (left[edge.left] || right[edge.right] || !((exists >> e) & 1U)) continue;
      left[edge.left] = right[edge.right] = true;
      value += instance.weight(e);
    }
    expectation += p * value;
  }
  return expectation;
}

}  // namespace stochmatch
