#include "stochmatch/generate.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "stochmatch/error.hpp"
#include "stochmatch/rng.hpp"

namespace stochmatch {

namespace {

std::vector<std::string> names(char prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

long draw_in(CounterRng& rng, long lo, long hi) {
  return lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

BipartiteGraph random_graph(const GenParams& p, CounterRng& rng) {
  if (p.left == 0 || p.right == 0) throw InvalidInput("--left and --right must be positive");
  if (p.edges == 0 || p.edges > p.left * p.right) {
    throw InvalidInput("--edges must be between 1 and left * right = " + std::to_string(p.left * p.right));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < p.left; ++a) {
    for (std::size_t b = 0; b < p.right; ++b) pairs.emplace_back(a, b);
  }
  for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.below(i)]);
  pairs.resize(p.edges);
  std::sort(pairs.begin(), pairs.end());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < pairs.size(); ++i) edges.push_back(Edge{"e" + std::to_string(i), pairs[i].first, pairs[i].second});
  return BipartiteGraph(names('a', p.left), names('b', p.right), std::move(edges));
}

}  // namespace

QCInstance figure1_instance() {
  BipartiteGraph g({"u", "a1"}, {"b2", "b3"}, {{"u-b2", 0, 0}, {"u-b3", 0, 1}, {"a1-b3", 1, 1}});
  return QCInstance(std::move(g), {Rational(1), Rational(2), Rational(3)},
                    {Rational(1, 2), Rational(1, 3), Rational(1, 3)});
}

QCInstance k22_instance() {
  BipartiteGraph g({"a0", "a1"}, {"b0", "b1"}, {{"e0", 0, 0}, {"e1", 0, 1}, {"e2", 1, 0}, {"e3", 1, 1}});
  return QCInstance(std::move(g), std::vector<Rational>(4, Rational(1)), std::vector<Rational>(4, Rational(1, 2)));
}

QCInstance random_qc_instance(const GenParams& params, std::uint64_t seed) {
  if (params.denominator < 2) throw InvalidInput("--den must be at least 2");
  if (params.max_weight < 1) throw InvalidInput("--wmax must be at least 1");
  CounterRng rng(seed, 0, StreamKind::Generator, 0);
  BipartiteGraph g = random_graph(params, rng);
  std::vector<Rational> w, p;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const long k = draw_in(rng, 1, params.denominator - 1);
    p.push_back(e < params.certain ? Rational(1) : Rational(k, params.denominator));
    w.emplace_back(draw_in(rng, 1, params.max_weight));
  }
  return QCInstance(std::move(g), std::move(w), std::move(p));
}

PoIInstance random_poi_instance(const GenParams& params, std::uint64_t seed) {
  if (params.denominator < 2) throw InvalidInput("--den must be at least 2");
  if (params.support < 1) throw InvalidInput("--support must be at least 1");
  if (params.max_value < static_cast<long>(params.support)) throw InvalidInput("--vmax must be at least --support");
  if (params.max_cost_twentieths < 0 || params.max_cost_twentieths > 20) {
    throw InvalidInput("--cost-max must be between 0 and 20 (twentieths of E[X])");
  }
  CounterRng rng(seed, 0, StreamKind::Generator, 1);
  BipartiteGraph g = random_graph(params, rng);
  std::vector<DiscreteDistribution> dists;
  std::vector<Rational> costs;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const std::size_t s = static_cast<std::size_t>(draw_in(rng, 1, static_cast<long>(params.support)));
    std::vector<long> values;
    while (values.size() < s) {
      const long v = draw_in(rng, 1, params.max_value);
      if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
    }
    std::vector<long> weight(s + 1);
    long total = 0;
    for (auto& k : weight) {
      k = draw_in(rng, 1, params.denominator);
      total += k;
    }
    std::vector<Outcome> outcomes;
    for (std::size_t i = 0; i < s; ++i) outcomes.push_back(Outcome{Rational(values[i]), Rational(weight[i], total)});
    DiscreteDistribution d = DiscreteDistribution::from_outcomes(std::move(outcomes));
    const long j = draw_in(rng, 0, params.max_cost_twentieths);
    costs.push_back(d.expectation() * Rational(j, 20));
    dists.push_back(std::move(d));
  }
  return PoIInstance(std::move(g), std::move(dists), std::move(costs));
}

Instance generate_instance(std::string_view family, const GenParams& params, std::uint64_t seed) {
  if (family == "figure1") return figure1_instance();
  if (family == "k22") return k22_instance();
  if (family == "random-qc") return random_qc_instance(params, seed);
  if (family == "random-poi") return random_poi_instance(params, seed);
  throw InvalidInput("unknown family '" + std::string(family) + "' (expected random-qc, random-poi, figure1, k22)");
}

}  // namespace stochmatch
