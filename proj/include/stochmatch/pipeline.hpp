#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stochmatch/decomp.hpp"
#include "stochmatch/harness.hpp"
#include "stochmatch/lpcore.hpp"
#include "stochmatch/model.hpp"
#include "stochmatch/oracles.hpp"
#include "stochmatch/strategies.hpp"

namespace stochmatch {

std::string tool_version();

struct PipelineOptions {
  /// Scaling parameter used when some p_e = 1 (or Σ_v p_{e,v} = 1). Defaults
  /// to 10^-6; zero disables scaling.
  std::optional<Rational> gamma;
  Caps caps;
  OracleCaps oracle_caps;
  std::size_t threads = 0;
  std::string name = "instance";
};

/// Everything a strategy needs, computed once: the (scaled) working instance,
/// the surrogate for PoI, the LP optimum and every D_a.
class Prepared {
 public:
  Prepared(const Instance& input, const PipelineOptions& options);
  Prepared(const Prepared&) = delete;
  Prepared& operator=(const Prepared&) = delete;

  ModelKind kind() const { return model_.kind(); }
  const std::string& name() const { return options_.name; }
  const PipelineOptions& options() const { return options_; }
  const Instance& input() const { return input_; }
  const Instance& working() const { return working_; }
  const QCInstance* qc() const { return std::get_if<QCInstance>(&working_); }
  const PoIInstance* poi() const { return std::get_if<PoIInstance>(&working_); }
  const SurrogateInstance* surrogate() const { return surrogate_ ? &*surrogate_ : nullptr; }
  /// The scaling applied, if any.
  const std::optional<Rational>& gamma_applied() const { return gamma_applied_; }
  const std::vector<std::string>& notices() const { return notices_; }

  const ElementModel& model() const { return model_; }
  const LPSolution& lp() const { return lp_; }
  const std::vector<PermutationDistribution>& distributions() const { return dists_; }
  const OutcomeSource& outcomes() const { return outcomes_; }
  const ApproxQc* approx_qc() const { return approx_qc_.get(); }
  const ApproxPoi* approx_poi() const { return approx_poi_.get(); }

  /// Exact adaptive optimum and offline expectation, when within the oracle caps.
  const std::optional<Rational>& oracle_opt() const { return oracle_opt_; }
  const std::optional<Rational>& offline_value() const { return offline_; }

  std::string lp_json(std::uint64_t seed) const;
  std::string distributions_json(std::uint64_t seed) const;
  std::string surrogate_json(std::uint64_t seed) const;

 private:
  PipelineOptions options_;
  Instance input_;
  Instance working_;
  std::optional<Rational> gamma_applied_;
  std::vector<std::string> notices_;
  std::optional<SurrogateInstance> surrogate_;
  ElementModel model_;
  LPSolution lp_;
  std::vector<PermutationDistribution> dists_;
  OutcomeSource outcomes_;
  std::unique_ptr<ApproxQc> approx_qc_;
  std::unique_ptr<ApproxPoi> approx_poi_;
  std::optional<Rational> oracle_opt_;
  std::optional<Rational> offline_;
};

/// Strategies: "approx", "greedy" (QC only), "never". With a trace stream,
/// trials run on one thread and each run is written as one JSON line.
SimulationReport simulate_strategy(const Prepared& prepared, const std::string& strategy, std::size_t trials,
                                   std::uint64_t seed, std::ostream* trace = nullptr);

CoupledReport coupled_free_info(const Prepared& prepared, std::size_t trials, std::uint64_t seed);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  bool ok() const;
  std::string json(std::uint64_t seed) const;
};

/// Exact invariants (LP feasibility, marginal identities, oracle sandwich) and
/// the statistical guarantee for the approximation strategy.
VerifyResult verify(const Prepared& prepared, std::size_t trials, std::uint64_t seed);

struct PipelineResult {
  std::map<std::string, std::string> artifacts;  // file name -> contents
  std::vector<SimulationReport> reports;
  VerifyResult verification;
  std::string summary;  // the summary.json document
};

/// scale -> surrogate -> LP -> decompose -> simulate -> verify. Errors name the
/// failing stage.
PipelineResult run_pipeline(const Instance& input, const PipelineOptions& options, std::size_t trials,
                            std::uint64_t seed);
void write_artifacts(const PipelineResult& result, const std::string& directory);

}  // namespace stochmatch
