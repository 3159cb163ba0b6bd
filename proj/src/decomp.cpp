#include "stochmatch/decomp.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>

#include <json.hpp>

#include "stochmatch/error.hpp"

namespace stochmatch {

namespace {

Rational masked_sum(std::uint64_t mask, std::span<const Rational> v) {
  Rational s;
  while (mask != 0) {
    const int i = std::countr_zero(mask);
    s += v[static_cast<std::size_t>(i)];
    mask &= mask - 1;
  }
  return s;
}

struct Reduced {
  std::size_t rank = 0;
  std::optional<std::vector<Rational>> null_direction;
};

// Row reduction over the rationals; when the system is rank deficient, the
// null-space basis vector of the lowest free column is returned.
Reduced reduce(std::vector<std::vector<Rational>> m, std::size_t cols) {
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c].is_zero()) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    const Rational inv = Rational(1) / m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c].is_zero()) continue;
      const Rational factor = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= factor * m[r][j];
    }
    pivot_col.push_back(c);
    ++r;
  }
  Reduced out;
  out.rank = r;
  if (r == cols) return out;
  std::size_t free = 0;
  for (std::size_t k = 0; k < pivot_col.size() && pivot_col[k] == free; ++k) ++free;
  std::vector<Rational> u(cols);
  u[free] = Rational(1);
  for (std::size_t k = 0; k < pivot_col.size(); ++k) u[pivot_col[k]] = -m[k][free];
  out.null_direction = std::move(u);
  return out;
}

Reduced tight_system(const VertexPolytope& poly, std::span<const Rational> y) {
  const std::size_t d = poly.dimension();
  std::vector<std::vector<Rational>> rows;
  for (std::uint64_t mask : poly.tight_sets(y)) {
    std::vector<Rational> row(d);
    for (std::size_t i = 0; i < d; ++i) {
      if ((mask >> i) & 1U) row[i] = Rational(1);
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (y[i].is_zero()) {
      std::vector<Rational> row(d);
      row[i] = Rational(1);
      rows.push_back(std::move(row));
    }
  }
  return reduce(std::move(rows), d);
}

// Largest step along u that stays inside the polytope.
Rational max_step(const VertexPolytope& poly, std::span<const Rational> y, std::span<const Rational> u) {
  std::optional<Rational> best;
  auto consider = [&](Rational t) {
    if (!best || t < *best) best = std::move(t);
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].is_negative()) consider(y[i] / -u[i]);
  }
  for (const auto& row : poly.rows()) {
    const Rational du = masked_sum(row.mask, u);
    if (du.is_positive()) consider((row.bound - masked_sum(row.mask, y)) / du);
  }
  if (!best) throw InternalError("unbounded direction in a bounded polytope");
  return *best;
}

std::vector<Rational> step(std::span<const Rational> y, std::span<const Rational> u, const Rational& t) {
  std::vector<Rational> out(y.begin(), y.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * u[i];
  return out;
}

void check_feasible(const VertexPolytope& poly, std::span<const Rational> point) {
  if (point.size() != poly.dimension()) throw InvalidInput("point has the wrong dimension for this vertex");
  if (!poly.feasible(point)) throw InvalidInput("point lies outside the vertex polytope");
}

const std::string& left_name(const ElementModel& model, std::size_t v) { return model.graph().left().at(v); }

}  // namespace

VertexPolytope::VertexPolytope(const ElementModel& model, std::size_t left_vertex, const Caps& caps)
    : model_(&model),
      family_(model, Side::Left, left_vertex,
              model.kind() == ModelKind::QueryCommit ? FamilyMode::AllSubsets : FamilyMode::Lattice, caps) {
  const std::vector<Rational> zeros(family_.dimension());
  family_.for_each(zeros, [&](std::uint64_t mask, const Rational& f, const Rational&) {
    rows_.push_back(Row{mask, f});
  });
}

std::vector<Rational> VertexPolytope::restrict(std::span<const Rational> global) const {
  std::vector<Rational> out;
  out.reserve(dimension());
  for (std::size_t g : elements()) out.push_back(global[g]);
  return out;
}

bool VertexPolytope::feasible(std::span<const Rational> point) const {
  for (const Rational& v : point) {
    if (v.is_negative()) return false;
  }
  for (const auto& row : rows_) {
    if (masked_sum(row.mask, point) > row.bound) return false;
  }
  return true;
}

std::vector<std::uint64_t> VertexPolytope::tight_sets(std::span<const Rational> point) const {
  std::vector<std::uint64_t> out;
  for (const auto& row : rows_) {
    if (masked_sum(row.mask, point) == row.bound) out.push_back(row.mask);
  }
  return out;
}

bool is_extreme(const VertexPolytope& polytope, std::span<const Rational> point) {
  check_feasible(polytope, point);
  return tight_system(polytope, point).rank == polytope.dimension();
}

Chain extract_chain(const VertexPolytope& polytope, std::span<const Rational> extreme_point) {
  check_feasible(polytope, extreme_point);
  const ElementModel& model = polytope.model();
  const auto& els = polytope.elements();

  std::vector<std::uint64_t> tight = polytope.tight_sets(extreme_point);
  std::sort(tight.begin(), tight.end(), canonical_less);
  std::size_t positives = 0;
  std::uint64_t positive_mask = 0;
  for (std::size_t i = 0; i < extreme_point.size(); ++i) {
    if (extreme_point[i].is_positive()) {
      ++positives;
      positive_mask |= std::uint64_t{1} << i;
    }
  }

  Chain chain;
  std::uint64_t prev = 0;
  for (std::uint64_t cur : tight) {
    if ((prev & ~cur) != 0 || prev == cur) throw InternalError("tight sets are not nested");
    const std::uint64_t inc = cur & ~prev;
    if (std::popcount(inc & positive_mask) != 1) {
      throw InternalError("chain increment does not carry exactly one positive coordinate");
    }
    const std::size_t pos_local = static_cast<std::size_t>(std::countr_zero(inc & positive_mask));
    const Element& pos = model.element(els[pos_local]);
    std::vector<std::size_t> increment;
    for (std::size_t i = 0; i < els.size(); ++i) {
      if (!((inc >> i) & 1U)) continue;
      const Element& el = model.element(els[i]);
      if (el.edge != pos.edge || el.value < pos.value) {
        throw InternalError("chain increment mixes edges or lists a lower value than its positive pair");
      }
      increment.push_back(els[i]);
    }
    chain.sets.push_back(polytope.family().to_elements(cur));
    chain.increments.push_back(std::move(increment));
    chain.positive.push_back(els[pos_local]);
    prev = cur;
  }
  if (chain.sets.size() != positives || (positive_mask & ~prev) != 0) {
    throw InternalError("tight-set chain does not match the positive coordinates");
  }
  return chain;
}

std::vector<ConvexAtom> caratheodory_decompose(const VertexPolytope& polytope, std::span<const Rational> point) {
  check_feasible(polytope, point);
  std::vector<ConvexAtom> atoms;
  std::vector<Rational> x(point.begin(), point.end());
  Rational remaining(1);
  for (;;) {
    Reduced sys = tight_system(polytope, x);
    if (!sys.null_direction) {
      atoms.push_back(ConvexAtom{remaining, x});
      break;
    }
    // Walk to an extreme point v whose tight set contains that of x.
    std::vector<Rational> v = x;
    while (sys.null_direction) {
      const auto& u = *sys.null_direction;
      v = step(v, u, max_step(polytope, v, u));
      sys = tight_system(polytope, v);
    }
    // Extend the segment from v through x to the far boundary point z:
    // x = z / (1 + mu) + v * mu / (1 + mu).
    std::vector<Rational> dir(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dir[i] = x[i] - v[i];
    const Rational mu = max_step(polytope, x, dir);
    const Rational weight_v = mu / (Rational(1) + mu);
    atoms.push_back(ConvexAtom{remaining * weight_v, std::move(v)});
    remaining *= Rational(1) - weight_v;
    x = step(x, dir, mu);
  }

  std::vector<ConvexAtom> merged;
  for (auto& a : atoms) {
    if (a.coefficient.is_zero()) continue;
    auto it = std::find_if(merged.begin(), merged.end(), [&](const ConvexAtom& m) { return m.point == a.point; });
    if (it == merged.end()) {
      merged.push_back(std::move(a));
    } else {
      it->coefficient += a.coefficient;
    }
  }
  return merged;
}

PermutationDistribution build_distribution(const ElementModel& model, const LPSolution& lp, std::size_t left_vertex,
                                           const Caps& caps) {
  const VertexPolytope poly(model, left_vertex, caps);
  const std::vector<Rational> x = poly.restrict(lp.values);
  PermutationDistribution dist;
  dist.owner = left_vertex;
  for (const ConvexAtom& atom : caratheodory_decompose(poly, x)) {
    const Chain chain = extract_chain(poly, atom.point);
    PermutationAtom pa{atom.coefficient, {}};
    if (model.kind() == ModelKind::QueryCommit) {
      pa.sigma = chain.positive;
    } else {
      for (const auto& inc : chain.increments) pa.sigma.insert(pa.sigma.end(), inc.begin(), inc.end());
    }
    auto it = std::find_if(dist.atoms.begin(), dist.atoms.end(),
                           [&](const PermutationAtom& m) { return m.sigma == pa.sigma; });
    if (it == dist.atoms.end()) {
      dist.atoms.push_back(std::move(pa));
    } else {
      it->coefficient += pa.coefficient;
    }
  }
  return dist;
}

PermutationDistribution build_distribution_qc(const ElementModel& model, const LPSolution& lp,
                                              std::size_t left_vertex, const Caps& caps) {
  if (model.kind() != ModelKind::QueryCommit) throw InvalidInput("expected a query-commit model");
  return build_distribution(model, lp, left_vertex, caps);
}

PermutationDistribution build_distribution_poi(const ElementModel& model, const LPSolution& lp,
                                               std::size_t left_vertex, const Caps& caps) {
  if (model.kind() != ModelKind::PriceOfInformation) throw InvalidInput("expected a price-of-information model");
  return build_distribution(model, lp, left_vertex, caps);
}

std::vector<PermutationDistribution> build_all_distributions(const ElementModel& model, const LPSolution& lp,
                                                             const Caps& caps) {
  std::vector<PermutationDistribution> out;
  for (std::size_t a = 0; a < model.graph().left().size(); ++a) out.push_back(build_distribution(model, lp, a, caps));
  return out;
}

Rational element_output_probability(const ElementModel& model, const PermutationDistribution& dist,
                                    std::size_t element) {
  const std::size_t edge = model.element(element).edge;
  const auto& inc = model.graph().incident(Side::Left, dist.owner);
  if (std::find(inc.begin(), inc.end(), edge) == inc.end()) {
    throw InvalidInput("edge '" + model.graph().edge(edge).id + "' is not incident to the distribution owner");
  }
  Rational total;
  for (const PermutationAtom& atom : dist.atoms) {
    std::map<std::size_t, Rational> listed;
    for (std::size_t el : atom.sigma) {
      const Element& cur = model.element(el);
      if (el == element) {
        Rational p = cur.prob;
        for (const auto& [e, m] : listed) {
          if (e != edge) p *= Rational(1) - m;
        }
        total += atom.coefficient * p;
        break;
      }
      listed[cur.edge] += cur.prob;
    }
  }
  return total;
}

Rational output_probability(const ElementModel& model, const PermutationDistribution& dist, std::size_t edge) {
  Rational total;
  for (std::size_t el : model.edge_elements(edge)) total += element_output_probability(model, dist, el);
  return total;
}

Rational value_tail(const ElementModel& model, const PermutationDistribution& dist, std::size_t edge,
                    const Rational& w) {
  if (model.kind() != ModelKind::PriceOfInformation) throw InvalidInput("value_tail is defined for PoI models only");
  Rational total;
  for (std::size_t el : model.edge_elements(edge)) {
    const Element& e = model.element(el);
    if (e.value >= w) total += element_output_probability(model, dist, el) * e.value;
  }
  return total;
}

std::string distributions_json(const ElementModel& model, std::span<const PermutationDistribution> dists) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const PermutationDistribution& d : dists) {
    nlohmann::ordered_json entry;
    entry["owner"] = left_name(model, d.owner);
    nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
    for (const PermutationAtom& a : d.atoms) {
      nlohmann::ordered_json atom;
      atom["a"] = a.coefficient.str();
      nlohmann::ordered_json sigma = nlohmann::ordered_json::array();
      for (std::size_t el : a.sigma) {
        const Element& e = model.element(el);
        const std::string& id = model.graph().edge(e.edge).id;
        if (model.kind() == ModelKind::QueryCommit) {
          sigma.push_back(id);
        } else {
          sigma.push_back(nlohmann::ordered_json::array({id, e.value.str()}));
        }
      }
      atom["sigma"] = std::move(sigma);
      atoms.push_back(std::move(atom));
    }
    entry["atoms"] = std::move(atoms);
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace stochmatch
