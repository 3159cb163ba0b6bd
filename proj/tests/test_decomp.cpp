#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "stochmatch/decomp.hpp"
#include "stochmatch/error.hpp"
#include "stochmatch/generate.hpp"
#include "support.hpp"

using namespace stochmatch;
using testsupport::R;

namespace {

using Point = std::vector<Rational>;

ElementModel poi_model(const PoIInstance& inst) { return ElementModel::from_surrogate(poi_to_surrogate(inst)); }

// Rows of P_a rebuilt from scratch: every subset (QC) or every member of the
// lattice family (PoI), with f from the element masses.
std::vector<std::pair<std::vector<std::size_t>, Rational>> polytope_rows(const VertexPolytope& poly) {
  const ElementModel& m = poly.model();
  const auto& els = poly.elements();
  std::vector<std::pair<std::vector<std::size_t>, Rational>> rows;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << els.size()); ++mask) {
    std::vector<std::size_t> local;
    std::map<std::size_t, Rational> mass;
    bool closed = true;
    for (std::size_t k = 0; k < els.size(); ++k) {
      if (!((mask >> k) & 1U)) continue;
      local.push_back(k);
      mass[m.element(els[k]).edge] += m.element(els[k]).prob;
    }
    if (m.kind() == ModelKind::PriceOfInformation) {
      for (std::size_t k : local) {
        for (std::size_t j = 0; j < els.size(); ++j) {
          const auto& a = m.element(els[j]);
          const auto& b = m.element(els[k]);
          if (a.edge == b.edge && a.value > b.value && !((mask >> j) & 1U)) closed = false;
        }
      }
    }
    if (!closed) continue;
    Rational miss(1);
    for (const auto& [e, q] : mass) miss *= R(1) - q;
    rows.emplace_back(local, R(1) - miss);
  }
  return rows;
}

bool in_polytope(const VertexPolytope& poly, const Point& y) {
  for (const auto& v : y) {
    if (v.is_negative()) return false;
  }
  for (const auto& [set, bound] : polytope_rows(poly)) {
    Rational s;
    for (std::size_t k : set) s += y[k];
    if (s > bound) return false;
  }
  return true;
}

// A random feasible point: a random direction pushed to the boundary, then
// shrunk by a random factor (sometimes 1, to land on a face).
Point random_point(const VertexPolytope& poly, testsupport::TestRng& rng) {
  Point y(poly.dimension());
  for (auto& v : y) v = rng.in(0, 3) == 0 ? R(0) : R(rng.in(1, 9));
  Rational scale(-1);
  for (const auto& [set, bound] : polytope_rows(poly)) {
    Rational s;
    for (std::size_t k : set) s += y[k];
    if (s.is_positive() && (scale.is_negative() || bound / s < scale)) scale = bound / s;
  }
  if (scale.is_negative()) return y;
  const Rational shrink = rng.in(0, 2) == 0 ? R(1) : R(rng.in(1, 9), 10);
  for (auto& v : y) v *= scale * shrink;
  return y;
}

void check_decomposition(const VertexPolytope& poly, const Point& x) {
  const auto atoms = caratheodory_decompose(poly, x);
  CHECK(atoms.size() <= poly.dimension() + 1);
  Rational total;
  Point sum(poly.dimension());
  for (const auto& a : atoms) {
    CHECK(a.coefficient.is_positive());
    total += a.coefficient;
    CHECK(in_polytope(poly, a.point));
    CHECK(is_extreme(poly, a.point));
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += a.coefficient * a.point[k];
  }
  CHECK(total == R(1));
  CHECK(sum == x);
}

// Exact law of where the single-vertex walk stops for one order, by
// enumerating every joint outcome of the edges involved.
std::map<std::size_t, Rational> walk_law(const ElementModel& m, const std::vector<std::size_t>& sigma) {
  std::vector<std::size_t> edges;
  for (std::size_t i : sigma) {
    if (std::find(edges.begin(), edges.end(), m.element(i).edge) == edges.end()) edges.push_back(m.element(i).edge);
  }
  // outcome k < count: the edge takes its k-th element's value; k == count: absent.
  std::map<std::size_t, Rational> law;
  std::vector<std::size_t> pick(edges.size(), 0);
  while (true) {
    Rational prob(1);
    for (std::size_t j = 0; j < edges.size(); ++j) {
      const auto& els = m.edge_elements(edges[j]);
      if (pick[j] < els.size()) {
        prob *= m.element(els[pick[j]]).prob;
      } else {
        Rational rest(1);
        for (std::size_t i : els) rest -= m.element(i).prob;
        prob *= rest;
      }
    }
    for (std::size_t i : sigma) {
      const std::size_t j = static_cast<std::size_t>(std::find(edges.begin(), edges.end(), m.element(i).edge) - edges.begin());
      const auto& els = m.edge_elements(edges[j]);
      if (pick[j] < els.size() && els[pick[j]] == i) {
        law[i] += prob;
        break;
      }
    }
    std::size_t j = 0;
    while (j < edges.size() && ++pick[j] > m.edge_elements(edges[j]).size()) pick[j++] = 0;
    if (j == edges.size()) break;
  }
  return law;
}

std::map<std::size_t, Rational> distribution_law(const ElementModel& m, const PermutationDistribution& d) {
  std::map<std::size_t, Rational> law;
  for (const auto& atom : d.atoms) {
    for (const auto& [i, p] : walk_law(m, atom.sigma)) law[i] += atom.coefficient * p;
  }
  return law;
}

std::set<std::pair<Rational, std::vector<std::size_t>>> atom_set(const PermutationDistribution& d) {
  std::set<std::pair<Rational, std::vector<std::size_t>>> s;
  for (const auto& a : d.atoms) s.insert({a.coefficient, a.sigma});
  return s;
}

}  // namespace

TEST_CASE("extreme points of the figure1 polytope at u") {
  const ElementModel m = ElementModel::from_qc(figure1_instance());
  const VertexPolytope poly(m, 0);
  REQUIRE(poly.dimension() == 2);
  CHECK(is_extreme(poly, Point{R(1, 2), R(1, 6)}));
  CHECK(is_extreme(poly, Point{R(1, 3), R(1, 3)}));
  CHECK_FALSE(is_extreme(poly, Point{R(4, 9), R(2, 9)}));
  CHECK(is_extreme(poly, Point{R(0), R(0)}));
  CHECK(is_extreme(poly, Point{R(1, 2), R(0)}));
  CHECK_THROWS_AS(is_extreme(poly, Point{R(1), R(1)}), InvalidInput);
}

TEST_CASE("figure1 chains") {
  const ElementModel m = ElementModel::from_qc(figure1_instance());
  const VertexPolytope poly(m, 0);
  const Chain c1 = extract_chain(poly, Point{R(1, 2), R(1, 6)});
  CHECK(c1.sets == std::vector<std::vector<std::size_t>>{{0}, {0, 1}});
  CHECK(c1.positive == std::vector<std::size_t>{0, 1});
  const Chain c2 = extract_chain(poly, Point{R(1, 3), R(1, 3)});
  CHECK(c2.sets == std::vector<std::vector<std::size_t>>{{1}, {0, 1}});
  CHECK(c2.increments == std::vector<std::vector<std::size_t>>{{1}, {0}});
  CHECK(c2.positive == std::vector<std::size_t>{1, 0});
  CHECK(extract_chain(poly, Point{R(0), R(0)}).sets.empty());
}

TEST_CASE("one edge with two values") {
  const Rational p2(1, 4), p1(1, 3);
  const ElementModel m = poi_model(testsupport::make_poi(1, 1, {{0, 0, {{R(2), p2}, {R(1), p1}}, R(0)}}));
  const VertexPolytope poly(m, 0);
  REQUIRE(poly.dimension() == 2);
  // The lattice polytope: x2 <= p2, x2 + x1 <= p2 + p1. Its vertices by hand.
  for (const Point& v : {Point{R(0), R(0)}, Point{p2, R(0)}, Point{p2, p1}, Point{R(0), p2 + p1}}) {
    CHECK(is_extreme(poly, v));
  }
  CHECK_FALSE(is_extreme(poly, Point{R(0), p1}));
  const Chain c = extract_chain(poly, Point{R(0), p2 + p1});
  CHECK(c.sets == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(c.increments == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(c.positive == std::vector<std::size_t>{1});
  // Forbidden in the all-subsets polytope, allowed here: x1 alone may exceed p1.
  CHECK(in_polytope(poly, Point{R(0), p2 + p1}));
}

TEST_CASE("figure1 decomposition") {
  const ElementModel m = ElementModel::from_qc(figure1_instance());
  const VertexPolytope poly(m, 0);
  const Point x{R(4, 9), R(2, 9)};
  check_decomposition(poly, x);
  const auto atoms = caratheodory_decompose(poly, Point{R(1, 2), R(1, 6)});
  REQUIRE(atoms.size() == 1);
  CHECK(atoms[0].coefficient == R(1));
  CHECK(atoms[0].point == Point{R(1, 2), R(1, 6)});
}

TEST_CASE("random feasible points decompose exactly") {
  testsupport::TestRng rng(17);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GenParams g;
    g.left = 2;
    g.right = 4;
    g.edges = 6;
    g.support = 2;
    const bool poi = seed % 2 == 0;
    const ElementModel m = poi ? poi_model(random_poi_instance(g, seed)) : ElementModel::from_qc(random_qc_instance(g, seed));
    for (std::size_t a = 0; a < m.graph().vertex_count(Side::Left); ++a) {
      const VertexPolytope poly(m, a);
      for (int k = 0; k < 3; ++k) {
        const Point x = random_point(poly, rng);
        REQUIRE(in_polytope(poly, x));
        check_decomposition(poly, x);
      }
    }
  }
}

TEST_CASE("figure1 distribution and marginals") {
  const ElementModel m = ElementModel::from_qc(figure1_instance());
  const LPSolution lp = solve_lp(m);
  REQUIRE(lp.values == std::vector<Rational>{R(4, 9), R(2, 9), R(1, 3)});
  const PermutationDistribution d = build_distribution_qc(m, lp, 0);
  CHECK(atom_set(d) == std::set<std::pair<Rational, std::vector<std::size_t>>>{{R(2, 3), {0, 1}}, {R(1, 3), {1, 0}}});
  CHECK(output_probability(m, d, 0) == R(4, 9));
  CHECK(output_probability(m, d, 1) == R(2, 9));
  CHECK_THROWS_AS(output_probability(m, d, 2), InvalidInput);
  CHECK_THROWS_AS(value_tail(m, d, 0, R(0)), InvalidInput);

  const auto j = nlohmann::json::parse(distributions_json(m, build_all_distributions(m, lp)));
  REQUIRE(j.size() == 2);
  CHECK(j[0]["owner"] == "u");
  Rational total;
  for (const auto& atom : j[0]["atoms"]) total += Rational::parse(atom["a"].get<std::string>());
  CHECK(total == R(1));
}

TEST_CASE("trivial distributions") {
  const ElementModel m = ElementModel::from_qc(testsupport::make_qc(1, 1, {{0, 0, R(2, 5), R(3)}}));
  const LPSolution lp = solve_lp(m);
  const PermutationDistribution d = build_distribution_qc(m, lp, 0);
  REQUIRE(d.atoms.size() == 1);
  CHECK(d.atoms[0].coefficient == R(1));
  CHECK(d.atoms[0].sigma == std::vector<std::size_t>{0});

  LPSolution zero = lp;
  zero.values.assign(1, R(0));
  const PermutationDistribution z = build_distribution_qc(m, zero, 0);
  REQUIRE(z.atoms.size() == 1);
  CHECK(z.atoms[0].coefficient == R(1));
  CHECK(z.atoms[0].sigma.empty());
  CHECK(output_probability(m, z, 0) == R(0));
}

TEST_CASE("QC marginals equal the LP solution") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    GenParams g;
    g.left = 3;
    g.right = 4;
    g.edges = 5 + seed % 5;
    const ElementModel m = ElementModel::from_qc(random_qc_instance(g, seed));
    const LPSolution lp = solve_lp(m);
    for (const auto& d : build_all_distributions(m, lp)) {
      const auto law = distribution_law(m, d);
      for (std::size_t e : m.graph().incident(Side::Left, d.owner)) {
        CHECK(output_probability(m, d, e) == lp.values[e]);
        CHECK((law.count(e) ? law.at(e) : R(0)) == lp.values[e]);
      }
    }
  }
}

TEST_CASE("single-valued PoI gives the QC atoms") {
  const QCInstance f1 = figure1_instance();
  std::vector<testsupport::PoiEdge> es;
  for (std::size_t e = 0; e < 3; ++e) {
    es.push_back({f1.graph().edge(e).left, f1.graph().edge(e).right, {{f1.weight(e), f1.prob(e)}}, R(0)});
  }
  const ElementModel pm = poi_model(testsupport::make_poi(2, 2, es));
  const ElementModel qm = ElementModel::from_qc(f1);
  const LPSolution lp = solve_lp(qm);
  CHECK(atom_set(build_distribution_poi(pm, lp, 0)) == atom_set(build_distribution_qc(qm, lp, 0)));
}

TEST_CASE("PoI distributions: order, marginals and tails") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    GenParams g;
    g.left = 2;
    g.right = 3;
    g.edges = 4;
    g.support = 3;
    g.max_cost_twentieths = 15;
    const SurrogateInstance s = poi_to_surrogate(random_poi_instance(g, seed));
    const ElementModel m = ElementModel::from_surrogate(s);
    const LPSolution lp = solve_lp(m);
    for (const auto& d : build_all_distributions(m, lp)) {
      Rational total;
      for (const auto& atom : d.atoms) {
        total += atom.coefficient;
        std::set<std::size_t> seen_edges;
        CHECK(std::set<std::size_t>(atom.sigma.begin(), atom.sigma.end()).size() == atom.sigma.size());
        for (std::size_t k = 0; k < atom.sigma.size(); ++k) {
          const auto& el = m.element(atom.sigma[k]);
          if (seen_edges.insert(el.edge).second) CHECK(el.value == s.tau(el.edge));
          for (std::size_t j = 0; j < k; ++j) {
            const auto& prev = m.element(atom.sigma[j]);
            if (prev.edge == el.edge) CHECK(prev.value > el.value);
          }
        }
      }
      CHECK(total == R(1));
      const auto law = distribution_law(m, d);
      for (std::size_t e : m.graph().incident(Side::Left, d.owner)) {
        Rational out, lp_mass;
        std::set<Rational> grid{R(0)};
        for (std::size_t i : m.edge_elements(e)) {
          const Rational got = law.count(i) ? law.at(i) : R(0);
          CHECK(element_output_probability(m, d, i) == got);
          out += got;
          lp_mass += lp.values[i];
          grid.insert(m.element(i).value);
        }
        CHECK(output_probability(m, d, e) == out);
        CHECK(out == lp_mass);
        grid.insert(m.element(m.edge_elements(e).front()).value + R(1));
        for (const auto& w : grid) {
          Rational tail, lp_tail;
          for (std::size_t i : m.edge_elements(e)) {
            if (m.element(i).value < w) continue;
            tail += (law.count(i) ? law.at(i) : R(0)) * m.element(i).value;
            lp_tail += lp.values[i] * m.element(i).value;
          }
          CHECK(value_tail(m, d, e, w) == tail);
          CHECK(tail >= lp_tail);
        }
      }
    }
  }
}

TEST_CASE("value tail edge cases") {
  const ElementModel m = poi_model(testsupport::make_poi(1, 1, {{0, 0, {{R(5), R(1, 3)}}, R(0)}}));
  const LPSolution lp = solve_lp(m);
  const auto d = build_distribution_poi(m, lp, 0);
  CHECK(value_tail(m, d, 0, R(0)) == output_probability(m, d, 0) * R(5));
  CHECK(value_tail(m, d, 0, R(6)) == R(0));
  CHECK(output_probability(m, d, 0) == R(1, 3));
}
