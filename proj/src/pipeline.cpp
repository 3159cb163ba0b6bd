#include "stochmatch/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "stochmatch/error.hpp"

#ifndef STOCHMATCH_VERSION
#define STOCHMATCH_VERSION "0.0.0"
#endif

namespace stochmatch {

namespace {

using ojson = nlohmann::ordered_json;

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(name) + ": ";
  try {
    return f();
  } catch (const CapExceeded& e) {
    throw CapExceeded(e.cap(), prefix + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), prefix + e.what());
  } catch (const std::exception& e) {
    throw InternalError(prefix + e.what());
  }
}

ojson header(std::uint64_t seed) {
  ojson doc;
  doc["tool_version"] = tool_version();
  doc["seed"] = seed;
  return doc;
}

bool needs_scaling(const Instance& inst) {
  if (const auto* qc = std::get_if<QCInstance>(&inst)) return !qc->strictly_probabilistic();
  return !std::get<PoIInstance>(inst).strictly_probabilistic();
}

template <class F>
std::optional<Rational> within_caps(F&& f) {
  try {
    return f();
  } catch (const CapExceeded&) {
    return std::nullopt;
  }
}

const double kOneMinusInvE = 1.0 - std::exp(-1.0);

}  // namespace

std::string tool_version() { return STOCHMATCH_VERSION; }

Prepared::Prepared(const Instance& input, const PipelineOptions& options)
    : options_(options), input_(input), working_(input) {
  stage("scale", [&] {
    if (!needs_scaling(input_)) return;
    const Rational gamma = options_.gamma.value_or(default_gamma());
    if (gamma.is_zero()) {
      notices_.push_back("some probability equals one and scaling is disabled");
      return;
    }
    if (const auto* qc = std::get_if<QCInstance>(&input_)) {
      working_ = scale_probabilities(*qc, gamma);
    } else {
      working_ = scale_probabilities(std::get<PoIInstance>(input_), gamma);
    }
    gamma_applied_ = gamma;
    notices_.push_back("scaled every probability by 1 - gamma with gamma = " + gamma.str());
  });

  if (const auto* poi = std::get_if<PoIInstance>(&working_)) {
    stage("surrogate", [&] {
      surrogate_ = poi_to_surrogate(*poi);
      for (const auto& w : surrogate_->warnings()) notices_.push_back(w);
    });
    model_ = ElementModel::from_surrogate(*surrogate_);
  } else {
    model_ = ElementModel::from_qc(std::get<QCInstance>(working_));
  }

  lp_ = stage("lp", [&] { return solve_lp(model_, options_.caps); });
  dists_ = stage("decompose", [&] { return build_all_distributions(model_, lp_, options_.caps); });

  stage("oracle", [&] {
    if (const auto* qc = this->qc()) {
      outcomes_ = OutcomeSource(*qc);
      approx_qc_ = std::make_unique<ApproxQc>(*qc, model_, lp_, dists_);
      oracle_opt_ = within_caps([&] { return brute_force_opt_qc(*qc, options_.oracle_caps); });
      offline_ = within_caps([&] { return exact_expected_offline(*qc, options_.oracle_caps); });
    } else {
      outcomes_ = OutcomeSource(*poi());
      approx_poi_ = std::make_unique<ApproxPoi>(*surrogate_, model_, lp_, dists_);
      oracle_opt_ = within_caps([&] { return brute_force_opt_poi(*poi(), options_.oracle_caps); });
      offline_ = within_caps([&] { return exact_expected_offline(*surrogate_, options_.oracle_caps); });
    }
  });
}

std::string Prepared::lp_json(std::uint64_t seed) const {
  ojson doc = header(seed);
  doc["gamma"] = gamma_applied_ ? ojson(gamma_applied_->str()) : ojson(nullptr);
  doc["lp"] = ojson::parse(lp_solution_json(model_, lp_));
  return doc.dump(2) + "\n";
}

std::string Prepared::distributions_json(std::uint64_t seed) const {
  ojson doc = header(seed);
  doc["distributions"] = ojson::parse(stochmatch::distributions_json(model_, dists_));
  return doc.dump(2) + "\n";
}

std::string Prepared::surrogate_json(std::uint64_t seed) const {
  ojson doc = header(seed);
  ojson edges = ojson::array();
  if (surrogate_) {
    const SurrogateInstance& s = *surrogate_;
    for (std::size_t e = 0; e < s.graph().edge_count(); ++e) {
      ojson entry;
      entry["id"] = s.graph().edge(e).id;
      entry["tau"] = s.tau(e).str();
      entry["cost"] = s.cost(e).str();
      ojson capped = ojson::array();
      for (const Outcome& o : s.capped(e).support()) capped.push_back({{"v", o.value.str()}, {"p", o.prob.str()}});
      entry["capped"] = std::move(capped);
      edges.push_back(std::move(entry));
    }
  }
  doc["edges"] = std::move(edges);
  doc["warnings"] = surrogate_ ? ojson(surrogate_->warnings()) : ojson::array();
  return doc.dump(2) + "\n";
}

SimulationReport simulate_strategy(const Prepared& prepared, const std::string& strategy, std::size_t trials,
                                   std::uint64_t seed, std::ostream* trace) {
  const BipartiteGraph& graph = prepared.qc() ? prepared.qc()->graph() : prepared.poi()->graph();
  const bool record = trace != nullptr;
  std::function<RunRecord(const TrialKey&)> run;
  if (strategy == "approx") {
    if (const ApproxQc* s = prepared.approx_qc()) {
      run = [&, s](const TrialKey& key) {
        LazyDraws draws(prepared.outcomes(), key);
        return s->run(key, draws, record);
      };
    } else {
      const ApproxPoi* p = prepared.approx_poi();
      run = [&, p](const TrialKey& key) {
        LazyDraws draws(prepared.outcomes(), key);
        return p->run(key, draws, record);
      };
    }
  } else if (strategy == "greedy") {
    const QCInstance* qc = prepared.qc();
    if (!qc) throw InvalidInput("the greedy baseline is defined for query-commit instances only");
    run = [&, qc, order = greedy_order(*qc)](const TrialKey& key) {
      LazyDraws draws(prepared.outcomes(), key);
      return greedy_qc(*qc, order, draws, record);
    };
  } else if (strategy == "never") {
    run = [](const TrialKey&) { return RunRecord{}; };
  } else {
    throw InvalidInput("unknown strategy '" + strategy + "' (expected approx, greedy, never)");
  }

  const TrialFunction fn = [&](std::uint64_t t) {
    const RunRecord rec = run(TrialKey{seed, t});
    check_run(graph, rec);
    if (trace) *trace << run_record_json(graph, rec, t) << '\n';
    return rec.net.to_double();
  };
  SimulationReport r = simulate(prepared.name(), strategy, trials, seed, fn, trace ? 1 : prepared.options().threads);
  r.lp_bound = prepared.lp().objective;
  r.oracle = prepared.oracle_opt();
  return r;
}

CoupledReport coupled_free_info(const Prepared& prepared, std::size_t trials, std::uint64_t seed) {
  if (!prepared.approx_poi()) throw InvalidInput("the free-information coupling needs a PoI instance");
  return coupled_free_info(*prepared.approx_poi(), prepared.outcomes(), trials, seed, prepared.options().threads);
}

bool VerifyResult::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string VerifyResult::json(std::uint64_t seed) const {
  ojson doc = header(seed);
  doc["ok"] = ok();
  ojson list = ojson::array();
  for (const auto& c : checks) list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  doc["checks"] = std::move(list);
  return doc.dump(2) + "\n";
}

namespace {

void exact_checks(const Prepared& p, VerifyResult& out) {
  const ElementModel& m = p.model();
  const LPSolution& lp = p.lp();

  out.checks.push_back({"lp_feasible", satisfies_all_constraints(m, lp.values), "every subset constraint at every vertex"});

  Rational obj;
  for (std::size_t i = 0; i < m.size(); ++i) obj += lp.values[i] * m.element(i).value;
  out.checks.push_back({"lp_objective", obj == lp.objective, "objective " + lp.objective.str()});

  bool sums = true;
  for (const auto& d : p.distributions()) {
    Rational total;
    for (const auto& a : d.atoms) {
      if (!a.coefficient.is_positive()) sums = false;
      total += a.coefficient;
    }
    if (total != Rational(1)) sums = false;
  }
  out.checks.push_back({"distribution_coefficients", sums, "coefficients positive and summing to one"});

  bool marginals = true;
  std::string detail = m.kind() == ModelKind::QueryCommit ? "output probability equals x* on every edge"
                                                          : "ordering, per-edge mass equality and value tails";
  const BipartiteGraph& g = m.graph();
  for (const auto& d : p.distributions()) {
    for (std::size_t e : g.incident(Side::Left, d.owner)) {
      const auto& els = m.edge_elements(e);
      if (m.kind() == ModelKind::QueryCommit) {
        if (output_probability(m, d, e) != lp.values[els.front()]) {
          marginals = false;
          detail = "edge " + g.edge(e).id + ": output probability differs from x*";
        }
        continue;
      }
      Rational x_mass;
      for (std::size_t el : els) x_mass += lp.values[el];
      if (output_probability(m, d, e) != x_mass) {
        marginals = false;
        detail = "edge " + g.edge(e).id + ": output mass differs from the LP mass";
      }
      std::vector<Rational> grid{Rational(0)};
      for (std::size_t el : els) grid.push_back(m.element(el).value);
      for (const Rational& w : grid) {
        Rational rhs;
        for (std::size_t el : els) {
          if (m.element(el).value >= w) rhs += lp.values[el] * m.element(el).value;
        }
        if (value_tail(m, d, e, w) < rhs) {
          marginals = false;
          detail = "edge " + g.edge(e).id + ": value tail below the LP tail at w = " + w.str();
        }
      }
    }
    if (m.kind() == ModelKind::PriceOfInformation) {
      for (const auto& atom : d.atoms) {
        std::map<std::size_t, Rational> last;
        for (std::size_t el : atom.sigma) {
          const Element& cur = m.element(el);
          auto it = last.find(cur.edge);
          const bool first_ok = it != last.end() || cur.value == p.surrogate()->tau(cur.edge);
          const bool order_ok = it == last.end() || it->second > cur.value;
          if (!first_ok || !order_ok) {
            marginals = false;
            detail = "edge " + g.edge(cur.edge).id + ": pairs out of order in a permutation";
          }
          last[cur.edge] = cur.value;
        }
      }
    }
  }
  out.checks.push_back({"marginal_identities", marginals, detail});

  const auto& opt = p.oracle_opt();
  const auto& off = p.offline_value();
  bool sandwich = true;
  std::string sd;
  if (opt && off) {
    sandwich = *opt <= *off && *off <= lp.objective;
    sd = "opt " + opt->str() + " <= offline " + off->str() + " <= lp " + lp.objective.str();
  } else if (opt) {
    sandwich = *opt <= lp.objective;
    sd = "opt " + opt->str() + " <= lp " + lp.objective.str();
  } else if (off) {
    sandwich = *off <= lp.objective;
    sd = "offline " + off->str() + " <= lp " + lp.objective.str();
  } else {
    sd = "skipped: instance exceeds the oracle caps";
  }
  out.checks.push_back({"oracle_sandwich", sandwich, sd});
}

void statistical_checks(const Prepared& p, const SimulationReport& approx, const CoupledReport* coupled,
                        VerifyResult& out) {
  const double bound = kOneMinusInvE * p.lp().objective.to_double() - 3.0 * approx.ci95;
  out.checks.push_back({"approx_ratio", approx.mean >= bound,
                        "mean " + format_double(approx.mean) + " >= (1 - 1/e) lp - 3 ci95 = " + format_double(bound)});
  if (coupled) {
    const double hw = coupled->difference.half_width(kZ999);
    out.checks.push_back({"free_information_coupling", coupled->contains_zero(kZ999),
                          "mean(Z - Z') " + format_double(coupled->difference.mean) + ", 99.9% half-width " +
                              format_double(hw)});
  }
}

}  // namespace

VerifyResult verify(const Prepared& prepared, std::size_t trials, std::uint64_t seed) {
  VerifyResult out;
  exact_checks(prepared, out);
  const SimulationReport approx = simulate_strategy(prepared, "approx", trials, seed);
  std::optional<CoupledReport> coupled;
  if (prepared.approx_poi()) coupled = coupled_free_info(prepared, trials, seed);
  statistical_checks(prepared, approx, coupled ? &*coupled : nullptr, out);
  return out;
}

PipelineResult run_pipeline(const Instance& input, const PipelineOptions& options, std::size_t trials,
                            std::uint64_t seed) {
  const Prepared prepared(input, options);
  PipelineResult result;
  stage("simulate", [&] {
    result.reports.push_back(simulate_strategy(prepared, "approx", trials, seed));
    if (prepared.qc()) result.reports.push_back(simulate_strategy(prepared, "greedy", trials, seed));
  });
  std::optional<CoupledReport> coupled;
  if (prepared.approx_poi()) coupled = stage("simulate", [&] { return coupled_free_info(prepared, trials, seed); });
  stage("verify", [&] {
    exact_checks(prepared, result.verification);
    statistical_checks(prepared, result.reports.front(), coupled ? &*coupled : nullptr, result.verification);
  });

  ojson summary = header(seed);
  summary["instance"] = prepared.name();
  summary["model"] = prepared.qc() ? "qc" : "poi";
  summary["gamma"] = prepared.gamma_applied() ? ojson(prepared.gamma_applied()->str()) : ojson(nullptr);
  summary["trials"] = trials;
  summary["lp_objective"] = prepared.lp().objective.str();
  summary["oracle_opt"] = prepared.oracle_opt() ? ojson(prepared.oracle_opt()->str()) : ojson(nullptr);
  summary["offline"] = prepared.offline_value() ? ojson(prepared.offline_value()->str()) : ojson(nullptr);
  ojson means = ojson::object();
  for (const auto& r : result.reports) means[r.strategy] = {{"mean", r.mean}, {"ci95", r.ci95}};
  summary["strategies"] = std::move(means);
  if (coupled) {
    summary["free_information"] = {{"mean_z", coupled->mean_z},
                                   {"mean_free", coupled->mean_free},
                                   {"mean_difference", coupled->difference.mean}};
  }
  summary["verified"] = result.verification.ok();
  summary["notices"] = prepared.notices();
  result.summary = summary.dump(2) + "\n";

  result.artifacts["lp.json"] = prepared.lp_json(seed);
  result.artifacts["distributions.json"] = prepared.distributions_json(seed);
  if (prepared.surrogate()) result.artifacts["surrogate.json"] = prepared.surrogate_json(seed);
  result.artifacts["report.csv"] = export_csv(result.reports);
  result.artifacts["verify.json"] = result.verification.json(seed);
  result.artifacts["summary.json"] = result.summary;
  return result;
}

void write_artifacts(const PipelineResult& result, const std::string& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [name, text] : result.artifacts) {
    const auto path = std::filesystem::path(directory) / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw InvalidInput("cannot write " + path.string());
  }
}

}  // namespace stochmatch
