#include "stochmatch/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stochmatch/error.hpp"

namespace stochmatch {

double SampleStats::half_width(double z) const {
  return trials == 0 ? 0.0 : z * std::sqrt(variance / static_cast<double>(trials));
}

SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.trials = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.variance = sq / static_cast<double>(values.size() - 1);
  }
  s.ci95 = 1.96 * std::sqrt(s.variance / static_cast<double>(s.trials));
  return s;
}

std::vector<double> run_trials(std::size_t trials, const TrialFunction& fn, std::size_t threads) {
  std::vector<double> values(trials);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(trials, 1));

  struct Failure {
    std::size_t trial = SIZE_MAX;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(threads);
  auto worker = [&](std::size_t w) {
    const std::size_t lo = trials * w / threads;
    const std::size_t hi = trials * (w + 1) / threads;
    for (std::size_t t = lo; t < hi; ++t) {
      try {
        values[t] = fn(t);
      } catch (...) {
        failures[w] = Failure{t, std::current_exception()};
        return;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  const auto first = std::min_element(failures.begin(), failures.end(),
                                      [](const Failure& a, const Failure& b) { return a.trial < b.trial; });
  if (first->error) {
    const std::string where = "trial " + std::to_string(first->trial) + ": ";
    try {
      std::rethrow_exception(first->error);
    } catch (const CapExceeded& e) {
      throw CapExceeded(e.cap(), where + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    } catch (const std::exception& e) {
      throw InternalError(where + e.what());
    }
  }
  return values;
}

SimulationReport simulate(const std::string& instance, const std::string& strategy, std::size_t trials,
                          std::uint64_t seed, const TrialFunction& fn, std::size_t threads) {
  if (trials < 2) throw InvalidInput("at least two trials are required");
  const std::vector<double> values = run_trials(trials, fn, threads);
  const SampleStats s = summarize(values);
  SimulationReport r;
  r.instance = instance;
  r.strategy = strategy;
  r.trials = trials;
  r.mean = s.mean;
  r.variance = s.variance;
  r.ci95 = s.ci95;
  r.seed = seed;
  return r;
}

bool CoupledReport::contains_zero(double z) const { return std::abs(difference.mean) <= difference.half_width(z); }

CoupledReport coupled_free_info(const ApproxPoi& strategy, const OutcomeSource& outcomes, std::size_t trials,
                                std::uint64_t seed, std::size_t threads) {
  if (trials < 2) throw InvalidInput("at least two trials are required");
  std::vector<double> z(trials), zfree(trials);
  const std::vector<double> diff = run_trials(
      trials,
      [&](std::uint64_t t) {
        const TrialKey key{seed, t};
        LazyDraws draws(outcomes, key);
        const RunRecord run = strategy.run(key, draws);
        z[t] = run.net.to_double();
        zfree[t] = run.free_value.to_double();
        return z[t] - zfree[t];
      },
      threads);
  CoupledReport r;
  r.trials = trials;
  r.seed = seed;
  r.mean_z = summarize(z).mean;
  r.mean_free = summarize(zfree).mean;
  r.difference = summarize(diff);
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string rational_cell(const Rational& r) { return r.str() + " (" + r.decimal(12) + ")"; }

std::string export_csv(std::span<const SimulationReport> reports) {
  std::ostringstream os;
  os << "instance,strategy,trials,mean,variance,ci95,lp_bound,oracle_opt,ratio_mean_over_lp,seed\n";
  for (const SimulationReport& r : reports) {
    os << r.instance << ',' << r.strategy << ',' << r.trials << ',' << format_double(r.mean) << ','
       << format_double(r.variance) << ',' << format_double(r.ci95) << ',' << rational_cell(r.lp_bound) << ',';
    if (r.oracle) os << rational_cell(*r.oracle);
    os << ',';
    if (!r.lp_bound.is_zero()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12f", r.mean / r.lp_bound.to_double());
      os << buf;
    }
    os << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string report_json(const SimulationReport& r) {
  nlohmann::ordered_json doc;
  doc["instance"] = r.instance;
  doc["strategy"] = r.strategy;
  doc["trials"] = r.trials;
  doc["mean"] = r.mean;
  doc["variance"] = r.variance;
  doc["ci95"] = r.ci95;
  doc["seed"] = r.seed;
  doc["lp_bound"] = r.lp_bound.str();
  doc["oracle_opt"] = r.oracle ? nlohmann::ordered_json(r.oracle->str()) : nlohmann::ordered_json(nullptr);
  return doc.dump(2) + "\n";
}

}  // namespace stochmatch
