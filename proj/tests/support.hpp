#pragma once

// Helpers shared by the test binaries: small instance builders and oracles
// written independently of the library code they check.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochmatch/lpcore.hpp"
#include "stochmatch/model.hpp"
#include "stochmatch/rational.hpp"
#include "stochmatch/rng.hpp"

namespace testsupport {

using stochmatch::Rational;

inline Rational R(long n, long d = 1) { return Rational(n, d); }

struct QcEdge {
  std::size_t a, b;
  Rational p, w;
};

inline stochmatch::QCInstance make_qc(std::size_t left, std::size_t right, const std::vector<QcEdge>& edges) {
  std::vector<std::string> l, r;
  for (std::size_t i = 0; i < left; ++i) l.push_back("a" + std::to_string(i));
  for (std::size_t i = 0; i < right; ++i) r.push_back("b" + std::to_string(i));
  std::vector<stochmatch::Edge> es;
  std::vector<Rational> w, p;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    es.push_back({"e" + std::to_string(i), edges[i].a, edges[i].b});
    w.push_back(edges[i].w);
    p.push_back(edges[i].p);
  }
  return stochmatch::QCInstance(stochmatch::BipartiteGraph(l, r, es), w, p);
}

struct PoiEdge {
  std::size_t a, b;
  std::vector<stochmatch::Outcome> dist;
  Rational cost;
};

inline stochmatch::PoIInstance make_poi(std::size_t left, std::size_t right, const std::vector<PoiEdge>& edges) {
  std::vector<std::string> l, r;
  for (std::size_t i = 0; i < left; ++i) l.push_back("a" + std::to_string(i));
  for (std::size_t i = 0; i < right; ++i) r.push_back("b" + std::to_string(i));
  std::vector<stochmatch::Edge> es;
  std::vector<stochmatch::DiscreteDistribution> d;
  std::vector<Rational> c;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    es.push_back({"e" + std::to_string(i), edges[i].a, edges[i].b});
    d.push_back(stochmatch::DiscreteDistribution::from_outcomes(edges[i].dist));
    c.push_back(edges[i].cost);
  }
  return stochmatch::PoIInstance(stochmatch::BipartiteGraph(l, r, es), d, c);
}

// Rows a.x <= b of the full LP, straight from the definition: every subset of
// every vertex's coordinates.
struct DenseLp {
  std::size_t n = 0;
  std::vector<Rational> c;
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
};

inline DenseLp full_lp(const stochmatch::ElementModel& m) {
  DenseLp lp;
  lp.n = m.size();
  for (const auto& el : m.elements()) lp.c.push_back(el.value);
  const auto& g = m.graph();
  for (auto side : {stochmatch::Side::Left, stochmatch::Side::Right}) {
    for (std::size_t v = 0; v < g.vertex_count(side); ++v) {
      std::vector<std::size_t> els;
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& e = g.edge(m.element(i).edge);
        if ((side == stochmatch::Side::Left ? e.left : e.right) == v) els.push_back(i);
      }
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << els.size()); ++mask) {
        std::vector<Rational> row(lp.n);
        std::vector<Rational> mass(g.edge_count());
        for (std::size_t k = 0; k < els.size(); ++k) {
          if ((mask >> k) & 1U) {
            row[els[k]] = R(1);
            mass[m.element(els[k]).edge] += m.element(els[k]).prob;
          }
        }
        Rational miss(1);
        for (const auto& q : mass) miss *= R(1) - q;
        lp.a.push_back(row);
        lp.b.push_back(R(1) - miss);
      }
    }
  }
  for (std::size_t i = 0; i < lp.n; ++i) {
    std::vector<Rational> row(lp.n);
    row[i] = R(-1);
    lp.a.push_back(row);
    lp.b.push_back(R(0));
  }
  return lp;
}

// Solves the square system exactly; nullopt when singular.
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c].is_zero()) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// LP optimum by scanning every basic solution: all n-subsets of rows. Only for
// a handful of variables.
inline Rational vertex_scan_optimum(const DenseLp& lp) {
  const std::size_t rows = lp.a.size();
  std::optional<Rational> best;
  std::vector<std::size_t> pick(lp.n);
  std::vector<std::size_t> idx;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (idx.size() == lp.n) {
      std::vector<std::vector<Rational>> a;
      std::vector<Rational> b;
      for (std::size_t r : idx) {
        a.push_back(lp.a[r]);
        b.push_back(lp.b[r]);
      }
      auto x = solve_square(a, b);
      if (!x) return;
      for (std::size_t r = 0; r < rows; ++r) {
        Rational s;
        for (std::size_t k = 0; k < lp.n; ++k) s += lp.a[r][k] * (*x)[k];
        if (s > lp.b[r]) return;
      }
      Rational obj;
      for (std::size_t k = 0; k < lp.n; ++k) obj += lp.c[k] * (*x)[k];
      if (!best || obj > *best) best = obj;
      return;
    }
    for (std::size_t r = start; r < rows; ++r) {
      idx.push_back(r);
      self(self, r + 1);
      idx.pop_back();
    }
  };
  rec(rec, 0);
  return best.value_or(R(0));
}

// Small deterministic random source for test data.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : rng_(seed, 0, stochmatch::StreamKind::Generator, 99) {}
  long in(long lo, long hi) { return lo + static_cast<long>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }
  double uniform() { return rng_.uniform(); }

 private:
  stochmatch::CounterRng rng_;
};

}  // namespace testsupport
