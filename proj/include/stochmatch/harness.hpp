#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochmatch/rational.hpp"
#include "stochmatch/strategies.hpp"

namespace stochmatch {

inline constexpr double kZ999 = 3.2905267314919255;

struct SampleStats {
  std::size_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n - 1 denominator
  double ci95 = 0.0;      // 1.96 * sqrt(variance / trials)
  double half_width(double z) const;
};

/// Two-pass mean and variance, folded in index order.
SampleStats summarize(std::span<const double> values);

struct SimulationReport {
  std::string instance;
  std::string strategy;
  std::size_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ci95 = 0.0;
  std::uint64_t seed = 0;
  Rational lp_bound;
  std::optional<Rational> oracle;
};

/// Per-trial value; may throw. Must depend only on the trial index.
using TrialFunction = std::function<double(std::uint64_t trial)>;

/// Runs trials 0..n-1 on up to `threads` workers (0 = hardware concurrency)
/// and returns the values in trial order. The first failing trial, by index,
/// is rethrown with its index in the message.
std::vector<double> run_trials(std::size_t trials, const TrialFunction& fn, std::size_t threads = 0);

SimulationReport simulate(const std::string& instance, const std::string& strategy, std::size_t trials,
                          std::uint64_t seed, const TrialFunction& fn, std::size_t threads = 0);

struct CoupledReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mean_z = 0.0;
  double mean_free = 0.0;
  SampleStats difference;  // of Z - Z'
  bool contains_zero(double z) const;
};

/// The PoI matcher and its free-information twin on the same draws: Z is the net
/// utility, Z' the sum of matched min(X_e, tau_e) with no costs.
CoupledReport coupled_free_info(const ApproxPoi& strategy, const OutcomeSource& outcomes, std::size_t trials,
                                std::uint64_t seed, std::size_t threads = 0);

/// instance,strategy,trials,mean,variance,ci95,lp_bound,oracle_opt,ratio_mean_over_lp,seed
std::string export_csv(std::span<const SimulationReport> reports);
std::string report_json(const SimulationReport& report);

/// "num/den (d.dddddddddddd)".
std::string rational_cell(const Rational& r);
/// Shortest text that reads back as the same double.
std::string format_double(double v);

}  // namespace stochmatch
