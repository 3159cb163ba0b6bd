#include "stochmatch/lpcore.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include <json.hpp>

#include "stochmatch/error.hpp"
#include "stochmatch/simplex.hpp"

namespace stochmatch {

namespace {

constexpr std::size_t kMaxMaskBits = 64;

const char* side_name(Side side) { return side == Side::Left ? "left" : "right"; }

const std::string& vertex_name(const BipartiteGraph& g, Side side, std::size_t v) {
  return side == Side::Left ? g.left().at(v) : g.right().at(v);
}

}  // namespace

ElementModel ElementModel::from_qc(const QCInstance& instance) {
  ElementModel m;
  m.kind_ = ModelKind::QueryCommit;
  m.graph_ = instance.graph();
  m.by_edge_.resize(m.graph_.edge_count());
  for (std::size_t e = 0; e < m.graph_.edge_count(); ++e) {
    m.by_edge_[e].push_back(m.elements_.size());
    m.elements_.push_back(Element{e, instance.weight(e), instance.prob(e)});
  }
  return m;
}

ElementModel ElementModel::from_surrogate(const SurrogateInstance& surrogate) {
  ElementModel m;
  m.kind_ = ModelKind::PriceOfInformation;
  m.graph_ = surrogate.graph();
  m.by_edge_.resize(m.graph_.edge_count());
  for (std::size_t e = 0; e < m.graph_.edge_count(); ++e) {
    for (const Outcome& o : surrogate.capped(e).support()) {
      m.by_edge_[e].push_back(m.elements_.size());
      m.elements_.push_back(Element{e, o.value, o.prob});
    }
  }
  return m;
}

std::vector<std::size_t> ElementModel::vertex_elements(Side side, std::size_t vertex) const {
  std::vector<std::size_t> out;
  for (std::size_t e : graph_.incident(side, vertex)) {
    const auto& els = by_edge_.at(e);
    out.insert(out.end(), els.begin(), els.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string ElementModel::element_key(std::size_t i) const {
  const Element& el = elements_.at(i);
  const std::string& id = graph_.edge(el.edge).id;
  if (kind_ == ModelKind::QueryCommit) return id;
  return id + "@" + el.value.str();
}

Rational coverage_prob_qc(std::span<const Rational> probs) {
  Rational miss(1);
  for (const Rational& p : probs) miss *= Rational(1) - p;
  return Rational(1) - miss;
}

Rational coverage_prob_poi(std::span<const Rational> per_edge_masses) {
  Rational miss(1);
  for (const Rational& m : per_edge_masses) {
    if (m >= Rational(1)) throw InvalidInput("per-edge mass " + m.str() + " is not below one");
    miss *= Rational(1) - m;
  }
  return Rational(1) - miss;
}

Rational coverage(const ElementModel& model, std::span<const std::size_t> elements) {
  std::map<std::size_t, Rational> mass;
  for (std::size_t i : elements) mass[model.element(i).edge] += model.element(i).prob;
  Rational miss(1);
  for (const auto& [edge, m] : mass) miss *= Rational(1) - m;
  return Rational(1) - miss;
}

VertexFamily::VertexFamily(const ElementModel& model, Side side, std::size_t vertex, FamilyMode mode,
                           const Caps& caps)
    : model_(&model), side_(side), vertex_(vertex), mode_(mode), elements_(model.vertex_elements(side, vertex)) {
  const std::string where = std::string(side_name(side)) + " vertex '" + vertex_name(model.graph(), side, vertex) + "'";
  if (elements_.size() > kMaxMaskBits) {
    throw CapExceeded("cap-degree", where + " has " + std::to_string(elements_.size()) +
                                        " LP coordinates; at most 64 are supported");
  }
  for (std::size_t e : model.graph().incident(side, vertex)) {
    std::vector<std::size_t> group;
    for (std::size_t g : model.edge_elements(e)) {
      group.push_back(static_cast<std::size_t>(std::lower_bound(elements_.begin(), elements_.end(), g) -
                                               elements_.begin()));
    }
    if (!group.empty()) groups_.push_back(std::move(group));
  }
  if (mode == FamilyMode::AllSubsets) {
    if (elements_.size() > caps.degree) {
      throw CapExceeded("cap-degree", where + " has " + std::to_string(elements_.size()) +
                                          " LP coordinates, above --cap-degree " + std::to_string(caps.degree));
    }
  } else if (family_size() > caps.lattice) {
    throw CapExceeded("cap-lattice", where + " has a lattice family of " + std::to_string(family_size()) +
                                         " sets, above --cap-lattice " + std::to_string(caps.lattice));
  }
}

std::uint64_t VertexFamily::family_size() const {
  if (mode_ == FamilyMode::AllSubsets) {
    return elements_.size() >= 64 ? UINT64_MAX : (std::uint64_t{1} << elements_.size());
  }
  std::uint64_t n = 1;
  for (const auto& g : groups_) {
    const std::uint64_t k = g.size() + 1;
    if (n > UINT64_MAX / k) return UINT64_MAX;
    n *= k;
  }
  return n;
}

bool VertexFamily::contains(std::uint64_t mask) const {
  const std::uint64_t all = elements_.size() >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << elements_.size()) - 1);
  if ((mask & ~all) != 0) return false;
  if (mode_ == FamilyMode::AllSubsets) return true;
  for (const auto& g : groups_) {
    bool gap = false;
    for (std::size_t local : g) {
      const bool in = (mask >> local) & 1U;
      if (in && gap) return false;
      if (!in) gap = true;
    }
  }
  return true;
}

Rational VertexFamily::bound(std::uint64_t mask) const {
  Rational miss(1);
  for (const auto& g : groups_) {
    Rational m;
    for (std::size_t local : g) {
      if ((mask >> local) & 1U) m += model_->element(elements_[local]).prob;
    }
    if (!m.is_zero()) miss *= Rational(1) - m;
  }
  return Rational(1) - miss;
}

std::vector<std::size_t> VertexFamily::to_elements(std::uint64_t mask) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if ((mask >> i) & 1U) out.push_back(elements_[i]);
  }
  return out;
}

void VertexFamily::for_each(
    std::span<const Rational> weights,
    const std::function<void(std::uint64_t, const Rational&, const Rational&)>& visit) const {
  struct Option {
    std::uint64_t mask;
    Rational keep;  // 1 - mass of the chosen part of the group
    Rational weight;
  };
  std::vector<std::vector<Option>> options(groups_.size());
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    auto add = [&](std::uint64_t m) {
      Rational mass;
      Rational w;
      for (std::size_t local : g) {
        if ((m >> local) & 1U) {
          mass += model_->element(elements_[local]).prob;
          w += weights[local];
        }
      }
      options[gi].push_back(Option{m, Rational(1) - mass, std::move(w)});
    };
    if (mode_ == FamilyMode::AllSubsets) {
      for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << g.size()); ++sub) {
        std::uint64_t m = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
          if ((sub >> k) & 1U) m |= std::uint64_t{1} << g[k];
        }
        add(m);
      }
    } else {
      std::uint64_t m = 0;
      add(m);
      for (std::size_t local : g) {
        m |= std::uint64_t{1} << local;
        add(m);
      }
    }
  }

  std::vector<Rational> keep(groups_.size() + 1, Rational(1));
  std::vector<Rational> wsum(groups_.size() + 1);
  std::vector<std::uint64_t> masks(groups_.size() + 1, 0);
  std::vector<std::size_t> choice(groups_.size(), 0);
  // Iterative depth-first walk over one option per group.
  std::size_t depth = 0;
  for (;;) {
    if (depth == groups_.size()) {
      if (masks[depth] != 0) visit(masks[depth], Rational(1) - keep[depth], wsum[depth]);
      if (depth == 0) return;
      --depth;
      ++choice[depth];
      continue;
    }
    if (choice[depth] == options[depth].size()) {
      choice[depth] = 0;
      if (depth == 0) return;
      --depth;
      ++choice[depth];
      continue;
    }
    const Option& o = options[depth][choice[depth]];
    keep[depth + 1] = keep[depth] * o.keep;
    wsum[depth + 1] = wsum[depth] + o.weight;
    masks[depth + 1] = masks[depth] | o.mask;
    ++depth;
  }
}

bool canonical_less(std::uint64_t a, std::uint64_t b) {
  const int pa = std::popcount(a);
  const int pb = std::popcount(b);
  if (pa != pb) return pa < pb;
  if (a == b) return false;
  const std::uint64_t lowest = (a ^ b) & (~(a ^ b) + 1);
  return (a & lowest) != 0;
}

std::optional<ConstraintRef> separation_oracle(const ElementModel& model, Side side, std::size_t vertex,
                                               std::span<const Rational> x, FamilyMode mode, const Caps& caps) {
  if (x.size() != model.size()) throw InvalidInput("candidate point has the wrong dimension");
  const VertexFamily family(model, side, vertex, mode, caps);
  std::vector<Rational> local;
  local.reserve(family.dimension());
  for (std::size_t g : family.elements()) local.push_back(x[g]);

  std::uint64_t best_mask = 0;
  Rational best_violation;
  family.for_each(local, [&](std::uint64_t mask, const Rational& f, const Rational& sum) {
    Rational violation = sum - f;
    if (!violation.is_positive()) return;
    if (best_mask == 0 || violation > best_violation ||
        (violation == best_violation && canonical_less(mask, best_mask))) {
      best_mask = mask;
      best_violation = std::move(violation);
    }
  });
  if (best_mask == 0) return std::nullopt;
  return ConstraintRef{side, vertex, family.to_elements(best_mask), family.bound(best_mask)};
}

std::vector<std::vector<std::size_t>> enumerate_lattice_sets(const ElementModel& model, Side side,
                                                             std::size_t vertex, const Caps& caps) {
  const VertexFamily family(model, side, vertex, FamilyMode::Lattice, caps);
  std::vector<std::vector<std::size_t>> out;
  out.emplace_back();
  const std::vector<Rational> zeros(family.dimension());
  family.for_each(zeros, [&](std::uint64_t mask, const Rational&, const Rational&) {
    out.push_back(family.to_elements(mask));
  });
  return out;
}

LPSolution solve_lp(const ElementModel& model, const Caps& caps) {
  const BipartiteGraph& g = model.graph();
  LinearProgram lp;
  lp.columns = model.size();
  for (const Element& el : model.elements()) lp.objective.push_back(el.value);

  std::set<std::vector<std::size_t>> seen;
  std::vector<ConstraintRef> generated;
  auto add = [&](ConstraintRef c) {
    if (!seen.insert(c.elements).second) return false;
    std::vector<std::pair<std::size_t, Rational>> row;
    for (std::size_t i : c.elements) row.emplace_back(i, Rational(1));
    lp.rows.push_back(std::move(row));
    lp.rhs.push_back(c.bound);
    generated.push_back(std::move(c));
    return true;
  };

  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t v = 0; v < g.vertex_count(side); ++v) {
      const VertexFamily family(model, side, v, FamilyMode::AllSubsets, caps);
      const auto& els = family.elements();
      if (els.empty()) continue;
      for (std::size_t i : els) {
        std::vector<std::size_t> single{i};
        add(ConstraintRef{side, v, single, coverage(model, single)});
      }
      add(ConstraintRef{side, v, els, coverage(model, els)});
    }
  }

  LPSolution sol;
  sol.kind = model.kind();
  SimplexResult res;
  for (;;) {
    ++sol.rounds;
    res = solve_simplex(lp);
    bool added = false;
    for (Side side : {Side::Left, Side::Right}) {
      for (std::size_t v = 0; v < g.vertex_count(side); ++v) {
        if (auto c = separation_oracle(model, side, v, res.x, FamilyMode::AllSubsets, caps)) {
          if (!add(std::move(*c))) throw InternalError("separation returned an already generated constraint");
          added = true;
        }
      }
    }
    if (!added) break;
  }

  if (!satisfies_all_constraints(model, res.x)) {
    throw InternalError("cutting-plane solution fails the exhaustive feasibility post-check");
  }
  sol.values = std::move(res.x);
  sol.objective = std::move(res.objective);
  sol.constraints = generated.size();
  for (std::size_t r = 0; r < generated.size(); ++r) {
    if (res.slack[r].is_zero()) sol.tight.push_back(generated[r]);
  }
  return sol;
}

LPSolution solve_lp_qc(const QCInstance& instance, const Caps& caps) {
  return solve_lp(ElementModel::from_qc(instance), caps);
}

LPSolution solve_lp_poi(const SurrogateInstance& surrogate, const Caps& caps) {
  return solve_lp(ElementModel::from_surrogate(surrogate), caps);
}

bool satisfies_all_constraints(const ElementModel& model, std::span<const Rational> x) {
  if (x.size() != model.size()) return false;
  for (const Rational& v : x) {
    if (v.is_negative()) return false;
  }
  const BipartiteGraph& g = model.graph();
  for (Side side : {Side::Left, Side::Right}) {
    for (std::size_t v = 0; v < g.vertex_count(side); ++v) {
      std::vector<std::size_t> els;
      for (std::size_t e : g.incident(side, v)) {
        for (std::size_t i = 0; i < model.size(); ++i) {
          if (model.element(i).edge == e) els.push_back(i);
        }
      }
      if (els.size() > 24) {
        throw CapExceeded("cap-degree", "exhaustive feasibility check limited to 24 coordinates per vertex");
      }
      for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << els.size()); ++mask) {
        std::map<std::size_t, Rational> mass;
        Rational sum;
        for (std::size_t k = 0; k < els.size(); ++k) {
          if ((mask >> k) & 1U) {
            mass[model.element(els[k]).edge] += model.element(els[k]).prob;
            sum += x[els[k]];
          }
        }
        Rational miss(1);
        for (const auto& [edge, m] : mass) miss *= Rational(1) - m;
        if (sum > Rational(1) - miss) return false;
      }
    }
  }
  return true;
}

std::string lp_solution_json(const ElementModel& model, const LPSolution& solution) {
  nlohmann::ordered_json doc;
  doc["objective"] = solution.objective.str();
  nlohmann::ordered_json x = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < model.size(); ++i) x[model.element_key(i)] = solution.values.at(i).str();
  doc["x"] = std::move(x);
  nlohmann::ordered_json tight = nlohmann::ordered_json::array();
  for (const ConstraintRef& c : solution.tight) {
    nlohmann::ordered_json entry;
    entry["side"] = side_name(c.side);
    entry["vertex"] = vertex_name(model.graph(), c.side, c.vertex);
    nlohmann::ordered_json subset = nlohmann::ordered_json::array();
    for (std::size_t i : c.elements) subset.push_back(model.element_key(i));
    entry["subset"] = std::move(subset);
    entry["bound"] = c.bound.str();
    tight.push_back(std::move(entry));
  }
  doc["tight"] = std::move(tight);
  return doc.dump(2) + "\n";
}

}  // namespace stochmatch
