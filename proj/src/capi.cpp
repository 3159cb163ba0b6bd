#include "stochmatch/stochmatch.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stochmatch/error.hpp"
#include "stochmatch/generate.hpp"
#include "stochmatch/pipeline.hpp"

struct sm_instance {
  stochmatch::Instance value;
};

struct sm_prepared {
  std::unique_ptr<stochmatch::Prepared> value;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_cap;

sm_status fail(sm_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
sm_status guarded(F&& f) {
  last_error.clear();
  last_cap.clear();
  try {
    return f();
  } catch (const stochmatch::CapExceeded& e) {
    last_cap = e.cap();
    return fail(SM_ERR_CAP, e.what());
  } catch (const stochmatch::Error& e) {
    switch (e.kind()) {
      case stochmatch::ErrorKind::Parse: return fail(SM_ERR_PARSE, e.what());
      case stochmatch::ErrorKind::Invalid: return fail(SM_ERR_INVALID, e.what());
      case stochmatch::ErrorKind::CapExceeded: return fail(SM_ERR_CAP, e.what());
      case stochmatch::ErrorKind::Verification: return fail(SM_ERR_VERIFY, e.what());
      case stochmatch::ErrorKind::Internal: return fail(SM_ERR_INTERNAL, e.what());
    }
    return fail(SM_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SM_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

sm_status emit(char** out, const std::string& s) {
  if (out) *out = copy_string(s);
  return SM_OK;
}

#define SM_REQUIRE(cond, what)                                     \
  do {                                                             \
    if (!(cond)) return fail(SM_ERR_USAGE, std::string(what)); \
  } while (0)

stochmatch::PipelineOptions to_options(const sm_options* o) {
  sm_options defaults;
  sm_options_init(&defaults);
  if (!o) o = &defaults;
  stochmatch::PipelineOptions p;
  if (o->gamma) {
    const stochmatch::Rational g = stochmatch::Rational::parse(o->gamma);
    if (g.is_negative() || g >= stochmatch::Rational(1)) {
      throw stochmatch::InvalidInput("--gamma must satisfy 0 <= gamma < 1, got " + g.str());
    }
    p.gamma = g;
  }
  p.caps.degree = o->cap_degree;
  p.caps.lattice = o->cap_lattice;
  p.oracle_caps.qc_edges = o->cap_oracle_edges;
  p.oracle_caps.poi_support = o->cap_poi_support;
  p.oracle_caps.offline_outcomes = static_cast<std::size_t>(o->cap_offline);
  p.threads = o->threads;
  if (o->name) p.name = o->name;
  return p;
}

}  // namespace

extern "C" {

const char* sm_version(void) {
  static const std::string v = stochmatch::tool_version();
  return v.c_str();
}

const char* sm_last_error(void) { return last_error.c_str(); }
const char* sm_last_error_cap(void) { return last_cap.c_str(); }
void sm_string_free(char* s) { std::free(s); }

void sm_options_init(sm_options* options) {
  if (!options) return;
  const stochmatch::Caps caps;
  const stochmatch::OracleCaps oracle;
  options->gamma = nullptr;
  options->cap_degree = caps.degree;
  options->cap_lattice = caps.lattice;
  options->cap_oracle_edges = oracle.qc_edges;
  options->cap_poi_support = oracle.poi_support;
  options->cap_offline = oracle.offline_outcomes;
  options->threads = 0;
  options->name = nullptr;
}

void sm_gen_params_init(sm_gen_params* params) {
  if (!params) return;
  const stochmatch::GenParams g;
  params->left = g.left;
  params->right = g.right;
  params->edges = g.edges;
  params->denominator = g.denominator;
  params->max_weight = g.max_weight;
  params->certain = g.certain;
  params->support = g.support;
  params->max_value = g.max_value;
  params->max_cost_twentieths = g.max_cost_twentieths;
}

sm_status sm_instance_parse(const char* text, size_t length, sm_instance** out) {
  SM_REQUIRE(text && out, "sm_instance_parse: null argument");
  return guarded([&] {
    *out = new sm_instance{stochmatch::parse_instance(std::string_view(text, length))};
    return SM_OK;
  });
}

sm_status sm_instance_read_file(const char* path, sm_instance** out) {
  SM_REQUIRE(path && out, "sm_instance_read_file: null argument");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(SM_ERR_USAGE, std::string("cannot open instance file ") + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    *out = new sm_instance{stochmatch::parse_instance(buf.str())};
    return SM_OK;
  });
}

sm_status sm_generate(const char* family, const sm_gen_params* params, uint64_t seed, sm_instance** out) {
  SM_REQUIRE(family && out, "sm_generate: null argument");
  return guarded([&] {
    stochmatch::GenParams g;
    if (params) {
      g.left = params->left;
      g.right = params->right;
      g.edges = params->edges;
      g.denominator = params->denominator;
      g.max_weight = params->max_weight;
      g.certain = params->certain;
      g.support = params->support;
      g.max_value = params->max_value;
      g.max_cost_twentieths = params->max_cost_twentieths;
    }
    *out = new sm_instance{stochmatch::generate_instance(family, g, seed)};
    return SM_OK;
  });
}

void sm_instance_destroy(sm_instance* instance) { delete instance; }

int sm_instance_is_poi(const sm_instance* instance) {
  return instance && std::holds_alternative<stochmatch::PoIInstance>(instance->value) ? 1 : 0;
}

size_t sm_instance_edge_count(const sm_instance* instance) {
  if (!instance) return 0;
  return std::visit([](const auto& i) { return i.graph().edge_count(); }, instance->value);
}

sm_status sm_instance_to_json(const sm_instance* instance, char** out) {
  SM_REQUIRE(instance && out, "sm_instance_to_json: null argument");
  return guarded([&] { return emit(out, stochmatch::serialize_instance(instance->value)); });
}

sm_status sm_prepare(const sm_instance* instance, const sm_options* options, sm_prepared** out) {
  SM_REQUIRE(instance && out, "sm_prepare: null argument");
  return guarded([&] {
    auto p = std::make_unique<stochmatch::Prepared>(instance->value, to_options(options));
    *out = new sm_prepared{std::move(p)};
    return SM_OK;
  });
}

void sm_prepared_destroy(sm_prepared* prepared) { delete prepared; }

sm_status sm_prepared_notices(const sm_prepared* prepared, char** out) {
  SM_REQUIRE(prepared && out, "sm_prepared_notices: null argument");
  return guarded([&] { return emit(out, nlohmann::json(prepared->value->notices()).dump()); });
}

sm_status sm_prepared_lp_objective(const sm_prepared* prepared, char** out) {
  SM_REQUIRE(prepared && out, "sm_prepared_lp_objective: null argument");
  return guarded([&] { return emit(out, prepared->value->lp().objective.str()); });
}

sm_status sm_prepared_lp_json(const sm_prepared* prepared, uint64_t seed, char** out) {
  SM_REQUIRE(prepared && out, "sm_prepared_lp_json: null argument");
  return guarded([&] { return emit(out, prepared->value->lp_json(seed)); });
}

sm_status sm_prepared_distributions_json(const sm_prepared* prepared, uint64_t seed, char** out) {
  SM_REQUIRE(prepared && out, "sm_prepared_distributions_json: null argument");
  return guarded([&] { return emit(out, prepared->value->distributions_json(seed)); });
}

sm_status sm_prepared_surrogate_json(const sm_prepared* prepared, uint64_t seed, char** out) {
  SM_REQUIRE(prepared && out, "sm_prepared_surrogate_json: null argument");
  return guarded([&] { return emit(out, prepared->value->surrogate_json(seed)); });
}

sm_status sm_simulate(const sm_prepared* prepared, const char* strategy, size_t trials, uint64_t seed,
                      const char* trace_path, sm_report* report, char** csv) {
  SM_REQUIRE(prepared && strategy, "sm_simulate: null argument");
  return guarded([&] {
    std::ofstream trace;
    if (trace_path) {
      trace.open(trace_path, std::ios::binary);
      if (!trace) return fail(SM_ERR_USAGE, std::string("cannot open trace file ") + trace_path);
    }
    const stochmatch::SimulationReport r =
        stochmatch::simulate_strategy(*prepared->value, strategy, trials, seed, trace_path ? &trace : nullptr);
    if (report) *report = sm_report{r.trials, r.mean, r.variance, r.ci95, r.seed};
    if (csv) *csv = copy_string(stochmatch::export_csv(std::span(&r, 1)));
    return SM_OK;
  });
}

sm_status sm_compare(const sm_prepared* prepared, size_t trials, uint64_t seed, char** csv) {
  SM_REQUIRE(prepared && csv, "sm_compare: null argument");
  return guarded([&] {
    std::vector<stochmatch::SimulationReport> reports;
    reports.push_back(stochmatch::simulate_strategy(*prepared->value, "approx", trials, seed));
    if (prepared->value->qc()) reports.push_back(stochmatch::simulate_strategy(*prepared->value, "greedy", trials, seed));
    reports.push_back(stochmatch::simulate_strategy(*prepared->value, "never", trials, seed));
    return emit(csv, stochmatch::export_csv(reports));
  });
}

sm_status sm_coupled_free_info(const sm_prepared* prepared, size_t trials, uint64_t seed, sm_coupled* out) {
  SM_REQUIRE(prepared && out, "sm_coupled_free_info: null argument");
  return guarded([&] {
    const stochmatch::CoupledReport r = stochmatch::coupled_free_info(*prepared->value, trials, seed);
    *out = sm_coupled{r.trials,
                      r.mean_z,
                      r.mean_free,
                      r.difference.mean,
                      r.difference.variance,
                      r.difference.half_width(stochmatch::kZ999),
                      r.contains_zero(stochmatch::kZ999) ? 1 : 0};
    return SM_OK;
  });
}

sm_status sm_verify(const sm_prepared* prepared, size_t trials, uint64_t seed, char** json) {
  SM_REQUIRE(prepared && json, "sm_verify: null argument");
  return guarded([&] {
    const stochmatch::VerifyResult v = stochmatch::verify(*prepared->value, trials, seed);
    emit(json, v.json(seed));
    return v.ok() ? SM_OK : fail(SM_ERR_VERIFY, "verification failed");
  });
}

sm_status sm_pipeline(const sm_instance* instance, const sm_options* options, size_t trials, uint64_t seed,
                      const char* out_dir, char** summary) {
  SM_REQUIRE(instance, "sm_pipeline: null argument");
  return guarded([&] {
    const stochmatch::PipelineResult r = stochmatch::run_pipeline(instance->value, to_options(options), trials, seed);
    if (out_dir) stochmatch::write_artifacts(r, out_dir);
    if (summary) *summary = copy_string(r.summary);
    return r.verification.ok() ? SM_OK : fail(SM_ERR_VERIFY, "verification failed");
  });
}

}  // extern "C"
