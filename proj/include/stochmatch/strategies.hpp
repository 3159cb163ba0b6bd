#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochmatch/decomp.hpp"
#include "stochmatch/lpcore.hpp"
#include "stochmatch/model.hpp"
#include "stochmatch/rng.hpp"

namespace stochmatch {

/// Identifies one trial's draw streams.
struct TrialKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
};

/// Per-edge outcome samplers of a base instance. Outcome k < support size is
/// "edge takes its k-th support value" (QC: k = 0 means the edge exists);
/// nullopt is "absent".
class OutcomeSource {
 public:
  OutcomeSource() = default;
  explicit OutcomeSource(const QCInstance& instance);
  explicit OutcomeSource(const PoIInstance& instance);

  std::size_t edge_count() const { return samplers_.size(); }
  std::optional<std::size_t> draw(const TrialKey& key, std::size_t edge) const;

 private:
  std::vector<ExactSampler> samplers_;
};

/// Access to edge outcomes during a run.
class Draws {
 public:
  virtual ~Draws() = default;
  virtual std::optional<std::size_t> outcome(std::size_t edge) = 0;
};

/// A fully pre-drawn realization (the 𝕀_e of QC, the X_e of PoI).
class Realization : public Draws {
 public:
  Realization() = default;
  explicit Realization(std::vector<std::optional<std::size_t>> outcomes) : outcomes_(std::move(outcomes)) {}
  static Realization draw(const OutcomeSource& source, const TrialKey& key);

  std::optional<std::size_t> outcome(std::size_t edge) override { return outcomes_.at(edge); }
  bool exists(std::size_t edge) const { return outcomes_.at(edge).has_value(); }
  const std::vector<std::optional<std::size_t>>& outcomes() const { return outcomes_; }

 private:
  std::vector<std::optional<std::size_t>> outcomes_;
};

/// Draws each edge on first access and memoizes it. Because the streams are
/// counter based, this agrees draw for draw with Realization::draw.
class LazyDraws : public Draws {
 public:
  LazyDraws(const OutcomeSource& source, const TrialKey& key)
      : source_(&source), key_(key), memo_(source.edge_count()), known_(source.edge_count(), false) {}

  std::optional<std::size_t> outcome(std::size_t edge) override;

 private:
  const OutcomeSource* source_;
  TrialKey key_;
  std::vector<std::optional<std::size_t>> memo_;
  std::vector<bool> known_;
};

struct QueryStep {
  std::size_t vertex = 0;   // left vertex
  std::size_t edge = 0;     // base instance edge
  Rational value;           // listed value (QC: the weight)
  bool real = false;        // false: simulated (else branch)
  bool paid = false;        // PoI: cost charged at this step
  bool success = false;
};

/// One run of a strategy. Edges are indices of the base instance.
struct RunRecord {
  std::vector<double> arrival;  // t_a, empty for strategies without arrivals
  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, Rational>> matching;  // (edge, realized weight)
  std::vector<QueryStep> steps;
  Rational gross;
  Rational cost;
  Rational net;
  /// PoI: Σ over matched edges of min(X_e, tau_e), the free-information value.
  Rational free_value;
};

/// Throws InternalError if the matching shares an endpoint or contains an
/// edge that was never really queried.
void check_run(const BipartiteGraph& graph, const RunRecord& run);

std::string run_record_json(const BipartiteGraph& graph, const RunRecord& run, std::uint64_t trial);

/// Samples the permutation atoms of one D_a.
class PermutationSampler {
 public:
  explicit PermutationSampler(const PermutationDistribution& dist);
  const std::vector<std::size_t>& sample(CounterRng& rng) const;

 private:
  const PermutationDistribution* dist_;
  ExactSampler sampler_;
  static const std::vector<std::size_t> empty_;
};

/// Single-vertex query-commit procedure: first edge of a sampled order that
/// exists, as an element id.
std::optional<std::size_t> single_vertex_query_qc(const ElementModel& model, const PermutationSampler& dist,
                                                  Draws& draws, CounterRng& rng);
/// Single-vertex PoI procedure: walks the sampled order with memoized per-edge values and
/// returns the first element whose value equals the realized surrogate value.
std::optional<std::size_t> single_vertex_query_poi(const ElementModel& model, const SurrogateInstance& surrogate,
                                                   const PermutationSampler& dist, Draws& draws, CounterRng& rng);

/// Threshold matcher for query-commit: left vertices in random arrival order,
/// each walking a sampled order from its D_a.
class ApproxQc {
 public:
  ApproxQc(const QCInstance& instance, const ElementModel& model, const LPSolution& lp,
           const std::vector<PermutationDistribution>& dists);

  RunRecord run(const TrialKey& key, Draws& draws, bool record_steps = false) const;
  double base_price(std::size_t right_vertex) const { return base_price_.at(right_vertex); }

 private:
  const QCInstance* instance_;
  const ElementModel* model_;
  std::vector<PermutationSampler> samplers_;
  std::vector<double> base_price_;
  std::vector<double> weight_;
};

/// Threshold matcher for price of information, with the free-information value
/// of the same run.
class ApproxPoi {
 public:
  ApproxPoi(const SurrogateInstance& surrogate, const ElementModel& model, const LPSolution& lp,
            const std::vector<PermutationDistribution>& dists);

  RunRecord run(const TrialKey& key, Draws& draws, bool record_steps = false) const;
  double base_price(std::size_t right_vertex) const { return base_price_.at(right_vertex); }

 private:
  const SurrogateInstance* surrogate_;
  const ElementModel* model_;
  std::vector<PermutationSampler> samplers_;
  std::vector<double> base_price_;
  std::vector<double> value_;
};

/// Edge order of the greedy baseline: decreasing weight, then edge order.
std::vector<std::size_t> greedy_order(const QCInstance& instance);
RunRecord greedy_qc(const QCInstance& instance, Draws& draws, bool record_steps = false);
RunRecord greedy_qc(const QCInstance& instance, const std::vector<std::size_t>& order, Draws& draws,
                    bool record_steps = false);

/// α(t) = 1 - e^{t-1}.
double threshold_factor(double t);

}  // namespace stochmatch
