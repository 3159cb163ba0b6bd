#include <doctest.h>

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include <json.hpp>

#include "stochmatch/error.hpp"
#include "stochmatch/generate.hpp"
#include "stochmatch/lpcore.hpp"
#include "stochmatch/oracles.hpp"
#include "support.hpp"

using namespace stochmatch;
using testsupport::R;

namespace {

ElementModel poi_model(const PoIInstance& inst) { return ElementModel::from_surrogate(poi_to_surrogate(inst)); }

// f of a set of global elements computed from the edge probabilities directly.
Rational direct_f(const ElementModel& m, const std::vector<std::size_t>& els) {
  std::map<std::size_t, Rational> mass;
  for (std::size_t i : els) mass[m.element(i).edge] += m.element(i).prob;
  Rational miss(1);
  for (const auto& [e, q] : mass) miss *= R(1) - q;
  return R(1) - miss;
}

bool upward_closed(const ElementModel& m, const std::vector<std::size_t>& set) {
  const std::set<std::size_t> s(set.begin(), set.end());
  for (std::size_t i : set) {
    for (std::size_t j : m.edge_elements(m.element(i).edge)) {
      if (m.element(j).value > m.element(i).value && !s.count(j)) return false;
    }
  }
  return true;
}

// Smallest f(F) - x(F) over the family by full scan, and the lattice test
// done by closure rather than by per-edge prefixes.
Rational brute_min_slack(const ElementModel& m, Side side, std::size_t v, const std::vector<Rational>& x,
                         bool lattice) {
  const auto els = m.vertex_elements(side, v);
  Rational best(0);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << els.size()); ++mask) {
    std::vector<std::size_t> set;
    Rational sum;
    for (std::size_t k = 0; k < els.size(); ++k) {
      if ((mask >> k) & 1U) {
        set.push_back(els[k]);
        sum += x[els[k]];
      }
    }
    if (lattice && !upward_closed(m, set)) continue;
    best = min(best, direct_f(m, set) - sum);
  }
  return best;
}

PoIInstance random_small_poi(testsupport::TestRng& rng, std::size_t left, std::size_t right, std::size_t edges,
                             long max_support) {
  std::vector<testsupport::PoiEdge> es;
  std::set<std::pair<std::size_t, std::size_t>> used;
  while (es.size() < edges) {
    const std::size_t a = static_cast<std::size_t>(rng.in(0, static_cast<long>(left) - 1));
    const std::size_t b = static_cast<std::size_t>(rng.in(0, static_cast<long>(right) - 1));
    if (!used.insert({a, b}).second) continue;
    const long k = rng.in(1, max_support);
    std::vector<Outcome> dist;
    for (long i = 0; i < k; ++i) dist.push_back({R(2 * i + rng.in(1, 2)), R(rng.in(1, 3), 12)});
    es.push_back({a, b, dist, R(0)});
  }
  return testsupport::make_poi(left, right, es);
}

}  // namespace

TEST_CASE("coverage of query-commit sets") {
  CHECK(coverage_prob_qc(std::vector<Rational>{}) == R(0));
  CHECK(coverage_prob_qc(std::vector<Rational>{R(1, 2)}) == R(1, 2));
  CHECK(coverage_prob_qc(std::vector<Rational>{R(1, 2), R(1, 3)}) == R(2, 3));
}

TEST_CASE("coverage of edge-value sets") {
  CHECK(coverage_prob_poi(std::vector<Rational>{R(1, 2)}) == R(1, 2));
  CHECK(coverage_prob_poi(std::vector<Rational>{}) == R(0));
  const std::vector<Rational> two{R(1, 2), R(1, 3)};
  CHECK(coverage_prob_poi(two) == R(2, 3));
  CHECK(coverage_prob_poi(two) == coverage_prob_qc(two));
  CHECK_THROWS_AS(coverage_prob_poi(std::vector<Rational>{R(1)}), InvalidInput);
}

TEST_CASE("element model ordering") {
  const PoIInstance inst = testsupport::make_poi(
      1, 2, {{0, 0, {{R(1), R(1, 4)}, {R(2), R(1, 4)}}, R(0)}, {0, 1, {{R(5), R(1, 3)}}, R(0)}});
  const ElementModel m = poi_model(inst);
  REQUIRE(m.size() == 3);
  CHECK(m.element(0).value == R(2));
  CHECK(m.element(1).value == R(1));
  CHECK(m.element(2).edge == 1);
  CHECK(m.element_key(0) == "e0@2");
  const ElementModel q = ElementModel::from_qc(figure1_instance());
  CHECK(q.element_key(1) == "u-b3");
}

TEST_CASE("separation at the figure1 LP point") {
  const QCInstance f1 = figure1_instance();
  const ElementModel m = ElementModel::from_qc(f1);
  const std::vector<Rational> x{R(4, 9), R(2, 9), R(1, 3)};
  CHECK_FALSE(separation_oracle(m, Side::Left, 0, x, FamilyMode::AllSubsets, {}).has_value());
}

TEST_CASE("separation finds a violated singleton") {
  const ElementModel m = ElementModel::from_qc(testsupport::make_qc(1, 1, {{0, 0, R(1, 2), R(1)}}));
  const auto c = separation_oracle(m, Side::Left, 0, std::vector<Rational>{R(3, 4)}, FamilyMode::AllSubsets, {});
  REQUIRE(c.has_value());
  CHECK(c->elements == std::vector<std::size_t>{0});
  CHECK(c->bound == R(1, 2));
}

TEST_CASE("separation agrees with a full scan") {
  testsupport::TestRng rng(21);
  for (int round = 0; round < 150; ++round) {
    const bool poi = round % 2 == 1;
    Instance inst;
    if (poi) {
      inst = random_small_poi(rng, 2, 2, 3, 3);
    } else {
      GenParams g;
      g.left = 2;
      g.right = 3;
      g.edges = 5;
      inst = random_qc_instance(g, static_cast<std::uint64_t>(round));
    }
    const ElementModel m = poi ? poi_model(std::get<PoIInstance>(inst)) : ElementModel::from_qc(std::get<QCInstance>(inst));
    std::vector<Rational> x;
    for (std::size_t i = 0; i < m.size(); ++i) x.push_back(R(rng.in(0, 10), 20));
    for (auto side : {Side::Left, Side::Right}) {
      for (std::size_t v = 0; v < m.graph().vertex_count(side); ++v) {
        for (auto mode : {FamilyMode::AllSubsets, FamilyMode::Lattice}) {
          if (!poi && mode == FamilyMode::Lattice) continue;
          const Rational expect = brute_min_slack(m, side, v, x, mode == FamilyMode::Lattice);
          const auto c = separation_oracle(m, side, v, x, mode, {});
          REQUIRE(c.has_value() == expect.is_negative());
          if (!c) continue;
          Rational sum;
          for (std::size_t i : c->elements) sum += x[i];
          CHECK(c->bound == direct_f(m, c->elements));
          CHECK(c->bound - sum == expect);
          if (mode == FamilyMode::Lattice) CHECK(upward_closed(m, c->elements));
        }
      }
    }
  }
}

TEST_CASE("single-edge LPs") {
  const LPSolution qc = solve_lp_qc(testsupport::make_qc(1, 1, {{0, 0, R(1, 2), R(2)}}));
  CHECK(qc.values == std::vector<Rational>{R(1, 2)});
  CHECK(qc.objective == R(1));

  const PoIInstance poi = testsupport::make_poi(1, 1, {{0, 0, {{R(2), R(1, 2)}}, R(1, 4)}});
  const LPSolution lp = solve_lp_poi(poi_to_surrogate(poi));
  CHECK(lp.values == std::vector<Rational>{R(1, 2)});
  CHECK(lp.objective == R(3, 4));
}

TEST_CASE("K22 LP") {
  const QCInstance k22 = k22_instance();
  const ElementModel m = ElementModel::from_qc(k22);
  const LPSolution lp = solve_lp(m);
  CHECK(lp.objective == R(3, 2));
  const std::vector<Rational> flat(4, R(3, 8));
  CHECK(satisfies_all_constraints(m, flat));
  CHECK(testsupport::vertex_scan_optimum(testsupport::full_lp(m)) == R(3, 2));
}

TEST_CASE("LP optimum matches a vertex scan on small instances") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    GenParams g;
    g.left = 2;
    g.right = 2;
    g.edges = seed % 2 ? 3 : 4;
    const QCInstance inst = random_qc_instance(g, seed);
    const ElementModel m = ElementModel::from_qc(inst);
    const LPSolution lp = solve_lp(m);
    CHECK(satisfies_all_constraints(m, lp.values));
    CHECK(lp.objective == testsupport::vertex_scan_optimum(testsupport::full_lp(m)));
  }
  testsupport::TestRng rng(5);
  for (int round = 0; round < 10; ++round) {
    const PoIInstance inst = random_small_poi(rng, 2, 2, 2, 2);
    const ElementModel m = poi_model(inst);
    if (m.size() > 4) continue;
    const LPSolution lp = solve_lp(m);
    CHECK(satisfies_all_constraints(m, lp.values));
    CHECK(lp.objective == testsupport::vertex_scan_optimum(testsupport::full_lp(m)));
  }
}

TEST_CASE("LP optimality certificate and objective identity") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    GenParams g;
    g.left = 4;
    g.right = 4;
    g.edges = 9;
    const QCInstance inst = random_qc_instance(g, seed);
    const ElementModel m = ElementModel::from_qc(inst);
    const LPSolution lp = solve_lp(m);
    Rational obj;
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK_FALSE(lp.values[i].is_negative());
      obj += lp.values[i] * m.element(i).value;
    }
    CHECK(obj == lp.objective);
    for (auto side : {Side::Left, Side::Right}) {
      for (std::size_t v = 0; v < m.graph().vertex_count(side); ++v) {
        CHECK_FALSE(separation_oracle(m, side, v, lp.values, FamilyMode::AllSubsets, {}).has_value());
      }
    }
    for (const auto& t : lp.tight) {
      Rational sum;
      for (std::size_t i : t.elements) sum += lp.values[i];
      CHECK(sum == t.bound);
    }
  }
}

TEST_CASE("PoI with free single-valued edges has the QC LP value") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const QCInstance qc = random_qc_instance(GenParams{}, seed);
    std::vector<testsupport::PoiEdge> es;
    for (std::size_t e = 0; e < qc.graph().edge_count(); ++e) {
      if (qc.weight(e).is_zero()) continue;
      es.push_back({qc.graph().edge(e).left, qc.graph().edge(e).right, {{qc.weight(e), qc.prob(e)}}, R(0)});
    }
    std::vector<testsupport::QcEdge> qe;
    for (const auto& e : es) qe.push_back({e.a, e.b, e.dist[0].prob, e.dist[0].value});
    const QCInstance q2 = testsupport::make_qc(3, 3, qe);
    const PoIInstance poi = testsupport::make_poi(3, 3, es);
    CHECK(solve_lp_poi(poi_to_surrogate(poi)).objective == solve_lp_qc(q2).objective);
  }
}

TEST_CASE("LP bounds the offline expectation") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GenParams g;
    g.edges = 5;
    const PoIInstance inst = random_poi_instance(g, seed);
    const SurrogateInstance s = poi_to_surrogate(inst);
    CHECK(exact_expected_offline(s) <= solve_lp_poi(s).objective);
    const QCInstance qc = random_qc_instance(g, seed);
    CHECK(exact_expected_offline(qc) <= solve_lp_qc(qc).objective);
  }
}

TEST_CASE("lattice families") {
  const ElementModel one = poi_model(testsupport::make_poi(1, 1, {{0, 0, {{R(2), R(1, 4)}, {R(1), R(1, 4)}}, R(0)}}));
  const auto sets = enumerate_lattice_sets(one, Side::Left, 0, {});
  const std::set<std::vector<std::size_t>> got(sets.begin(), sets.end());
  CHECK(got == std::set<std::vector<std::size_t>>{{}, {0}, {0, 1}});

  const ElementModel two = poi_model(
      testsupport::make_poi(1, 2, {{0, 0, {{R(2), R(1, 4)}}, R(0)}, {0, 1, {{R(1), R(1, 4)}}, R(0)}}));
  CHECK(enumerate_lattice_sets(two, Side::Left, 0, {}).size() == 4);

  testsupport::TestRng rng(8);
  for (int round = 0; round < 20; ++round) {
    const ElementModel m = poi_model(random_small_poi(rng, 1, 3, 3, 3));
    const auto all = enumerate_lattice_sets(m, Side::Left, 0, {});
    std::size_t expect = 1;
    for (std::size_t e = 0; e < m.graph().edge_count(); ++e) expect *= m.edge_elements(e).size() + 1;
    CHECK(all.size() == expect);
    const std::set<std::vector<std::size_t>> fam(all.begin(), all.end());
    CHECK(fam.size() == all.size());
    for (const auto& s : all) {
      CHECK(upward_closed(m, s));
      for (const auto& t : all) {
        std::vector<std::size_t> u, i;
        std::set_union(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(u));
        std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(i));
        CHECK(fam.count(u) == 1);
        CHECK(fam.count(i) == 1);
      }
    }
  }
}

TEST_CASE("coverage is strictly submodular and strictly increasing") {
  testsupport::TestRng rng(3);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t n = static_cast<std::size_t>(rng.in(2, 7));
    std::vector<Rational> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back(R(rng.in(1, 19), 20));
    const std::uint64_t a = rng.in(0, (1L << n) - 1), b = rng.in(0, (1L << n) - 1);
    auto f = [&](std::uint64_t mask) {
      std::vector<Rational> q;
      for (std::size_t i = 0; i < n; ++i) {
        if ((mask >> i) & 1U) q.push_back(p[i]);
      }
      return coverage_prob_qc(q);
    };
    if ((a & ~b) != 0 && (b & ~a) != 0) {
      CHECK(f(a) + f(b) > f(a | b) + f(a & b));
      ++checked;
    }
    if (a != b && (a & b) == a) CHECK(f(a) < f(b));
  }
}

TEST_CASE("caps are enforced") {
  GenParams g;
  g.left = 1;
  g.right = 4;
  g.edges = 4;
  const ElementModel m = ElementModel::from_qc(random_qc_instance(g, 1));
  Caps caps;
  caps.degree = 3;
  try {
    solve_lp(m, caps);
    FAIL("expected a cap error");
  } catch (const CapExceeded& e) {
    CHECK(e.cap() == "cap-degree");
  }
  const ElementModel p = poi_model(testsupport::make_poi(
      1, 2, {{0, 0, {{R(2), R(1, 4)}, {R(1), R(1, 4)}}, R(0)}, {0, 1, {{R(2), R(1, 4)}, {R(1), R(1, 4)}}, R(0)}}));
  Caps lat;
  lat.lattice = 8;
  try {
    enumerate_lattice_sets(p, Side::Left, 0, lat);
    FAIL("expected a cap error");
  } catch (const CapExceeded& e) {
    CHECK(e.cap() == "cap-lattice");
  }
}

TEST_CASE("LP JSON") {
  const ElementModel m = ElementModel::from_qc(figure1_instance());
  const LPSolution lp = solve_lp(m);
  const std::string text = lp_solution_json(m, lp);
  CHECK(text == lp_solution_json(m, solve_lp(m)));
  const auto j = nlohmann::json::parse(text);
  CHECK(j["objective"] == "17/9");
  CHECK(j["x"]["u-b2"] == "4/9");
  CHECK(j["x"]["u-b3"] == "2/9");
  CHECK(j["tight"].is_array());
}
