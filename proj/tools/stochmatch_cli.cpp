// Command-line front end. Talks to the library through the C interface only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stochmatch/stochmatch.h"

namespace {

struct Config {
  std::string instance;
  std::string family;
  std::string strategy = "approx";
  std::string out;
  std::string trace;
  std::string gamma;
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
  sm_options options{};
  sm_gen_params gen{};
};

int exit_code(sm_status s) {
  switch (s) {
    case SM_OK: return 0;
    case SM_ERR_VERIFY: return 1;
    case SM_ERR_CAP: return 3;
    case SM_ERR_USAGE:
    case SM_ERR_PARSE:
    case SM_ERR_INVALID: return 2;
    case SM_ERR_INTERNAL: return 1;
  }
  return 1;
}

int report(sm_status s) {
  if (s == SM_OK) return 0;
  if (s == SM_ERR_CAP) {
    std::cerr << "error: cap exceeded (--" << sm_last_error_cap() << "): " << sm_last_error() << "\n";
  } else if (s == SM_ERR_VERIFY) {
    std::cerr << "verification failed\n";
  } else {
    std::cerr << "error: " << sm_last_error() << "\n";
  }
  return exit_code(s);
}

struct String {
  char* p = nullptr;
  ~String() { sm_string_free(p); }
};

struct InstanceHandle {
  sm_instance* p = nullptr;
  ~InstanceHandle() { sm_instance_destroy(p); }
};

struct PreparedHandle {
  sm_prepared* p = nullptr;
  ~PreparedHandle() { sm_prepared_destroy(p); }
};

bool write_output(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

sm_options options_for(Config& cfg, std::string& name) {
  sm_options o = cfg.options;
  o.gamma = cfg.gamma.empty() ? nullptr : cfg.gamma.c_str();
  name = std::filesystem::path(cfg.instance).stem().string();
  o.name = name.c_str();
  return o;
}

void print_notices(const sm_prepared* p) {
  String notices;
  if (sm_prepared_notices(p, &notices.p) != SM_OK) return;
  const std::string text = notices.p;
  if (text != "[]") std::cerr << "notice: " << text << "\n";
}

// Loads and prepares the instance named in cfg.
sm_status prepare(Config& cfg, InstanceHandle& inst, PreparedHandle& prep) {
  if (sm_status s = sm_instance_read_file(cfg.instance.c_str(), &inst.p); s != SM_OK) return s;
  std::string name;
  const sm_options o = options_for(cfg, name);
  if (sm_status s = sm_prepare(inst.p, &o, &prep.p); s != SM_OK) return s;
  print_notices(prep.p);
  return SM_OK;
}

int cmd_gen(Config& cfg) {
  InstanceHandle inst;
  if (sm_status s = sm_generate(cfg.family.c_str(), &cfg.gen, cfg.seed, &inst.p); s != SM_OK) return report(s);
  String text;
  if (sm_status s = sm_instance_to_json(inst.p, &text.p); s != SM_OK) return report(s);
  return write_output(cfg.out, text.p) ? 0 : 2;
}

template <class F>
int with_prepared(Config& cfg, F&& f) {
  InstanceHandle inst;
  PreparedHandle prep;
  if (sm_status s = prepare(cfg, inst, prep); s != SM_OK) return report(s);
  return f(prep.p);
}

int cmd_solve(Config& cfg) {
  return with_prepared(cfg, [&](sm_prepared* p) {
    String text;
    if (sm_status s = sm_prepared_lp_json(p, cfg.seed, &text.p); s != SM_OK) return report(s);
    return write_output(cfg.out, text.p) ? 0 : 2;
  });
}

int cmd_decompose(Config& cfg) {
  return with_prepared(cfg, [&](sm_prepared* p) {
    String text;
    if (sm_status s = sm_prepared_distributions_json(p, cfg.seed, &text.p); s != SM_OK) return report(s);
    return write_output(cfg.out, text.p) ? 0 : 2;
  });
}

int cmd_simulate(Config& cfg) {
  return with_prepared(cfg, [&](sm_prepared* p) {
    String csv;
    const char* trace = cfg.trace.empty() ? nullptr : cfg.trace.c_str();
    if (sm_status s = sm_simulate(p, cfg.strategy.c_str(), cfg.trials, cfg.seed, trace, nullptr, &csv.p); s != SM_OK) {
      return report(s);
    }
    return write_output(cfg.out, csv.p) ? 0 : 2;
  });
}

int cmd_compare(Config& cfg) {
  return with_prepared(cfg, [&](sm_prepared* p) {
    String csv;
    if (sm_status s = sm_compare(p, cfg.trials, cfg.seed, &csv.p); s != SM_OK) return report(s);
    return write_output(cfg.out, csv.p) ? 0 : 2;
  });
}

int cmd_verify(Config& cfg) {
  return with_prepared(cfg, [&](sm_prepared* p) {
    String json;
    const sm_status s = sm_verify(p, cfg.trials, cfg.seed, &json.p);
    if (json.p && !write_output(cfg.out, json.p)) return 2;
    return report(s);
  });
}

int cmd_pipeline(Config& cfg) {
  InstanceHandle inst;
  if (sm_status s = sm_instance_read_file(cfg.instance.c_str(), &inst.p); s != SM_OK) return report(s);
  std::string name;
  const sm_options o = options_for(cfg, name);
  const std::string dir = cfg.out.empty() ? "out" : cfg.out;
  String summary;
  const sm_status s = sm_pipeline(inst.p, &o, cfg.trials, cfg.seed, dir.c_str(), &summary.p);
  if (summary.p) std::fputs(summary.p, stdout);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  sm_options_init(&cfg.options);
  sm_gen_params_init(&cfg.gen);

  CLI::App app{"Stochastic bipartite matching: LP bounds, query strategies and exact oracles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sm_version()));

  auto add_common = [&](CLI::App* sub, bool simulates) {
    sub->add_option("instance", cfg.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    if (simulates) sub->add_option("--trials", cfg.trials, "Monte Carlo trials")->capture_default_str();
    sub->add_option("--gamma", cfg.gamma,
                    "Scaling used when some probability is 1 (default 1/1000000; 0 disables)");
    sub->add_option("--cap-degree", cfg.options.cap_degree, "Max LP coordinates per vertex for subset enumeration")
        ->capture_default_str();
    sub->add_option("--cap-lattice", cfg.options.cap_lattice, "Max lattice family size per left vertex")
        ->capture_default_str();
    sub->add_option("--cap-oracle-edges", cfg.options.cap_oracle_edges, "Max edges for the query-commit oracle")
        ->capture_default_str();
    sub->add_option("--cap-poi-support", cfg.options.cap_poi_support,
                    "Max total support for the price-of-information oracle")
        ->capture_default_str();
    sub->add_option("--cap-offline", cfg.options.cap_offline, "Max joint outcomes for the offline oracle")
        ->capture_default_str();
    sub->add_option("--threads", cfg.options.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("family", cfg.family, "random-qc | random-poi | figure1 | k22")
      ->required()
      ->check(CLI::IsMember({"random-qc", "random-poi", "figure1", "k22"}));
  gen->add_option("--seed", cfg.seed, "Generator seed")->capture_default_str();
  gen->add_option("--left", cfg.gen.left, "Left vertices")->capture_default_str();
  gen->add_option("--right", cfg.gen.right, "Right vertices")->capture_default_str();
  gen->add_option("--edges", cfg.gen.edges, "Edges")->capture_default_str();
  gen->add_option("--den", cfg.gen.denominator, "Probability denominator")->capture_default_str();
  gen->add_option("--wmax", cfg.gen.max_weight, "Max integer weight (random-qc)")->capture_default_str();
  gen->add_option("--certain", cfg.gen.certain, "Edges with probability 1 (random-qc)")->capture_default_str();
  gen->add_option("--support", cfg.gen.support, "Max support size (random-poi)")->capture_default_str();
  gen->add_option("--vmax", cfg.gen.max_value, "Max integer value (random-poi)")->capture_default_str();
  gen->add_option("--cost-max", cfg.gen.max_cost_twentieths, "Max cost as twentieths of E[X] (random-poi)")
      ->capture_default_str();
  gen->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "Solve the LP and print it as JSON");
  add_common(solve, false);
  solve->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* decompose = app.add_subcommand("decompose", "Print the permutation distributions as JSON");
  add_common(decompose, false);
  decompose->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate for one strategy (CSV)");
  add_common(simulate, true);
  simulate->add_option("--strategy", cfg.strategy, "approx | greedy | never")
      ->capture_default_str()
      ->check(CLI::IsMember({"approx", "greedy", "never"}));
  simulate->add_option("--trace", cfg.trace, "Write one JSON line per trial to this file");
  simulate->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* compare = app.add_subcommand("compare", "Monte Carlo estimates for every strategy (CSV)");
  add_common(compare, true);
  compare->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* verify = app.add_subcommand("verify", "Exact and statistical checks (JSON); exit 1 on failure");
  add_common(verify, true);
  verify->add_option("--out", cfg.out, "Output file (default stdout)");

  auto* pipeline = app.add_subcommand("pipeline", "Run everything and write the artifacts");
  add_common(pipeline, true);
  pipeline->add_option("--out", cfg.out, "Artifact directory (default ./out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*gen) return cmd_gen(cfg);
  if (*solve) return cmd_solve(cfg);
  if (*decompose) return cmd_decompose(cfg);
  if (*simulate) return cmd_simulate(cfg);
  if (*compare) return cmd_compare(cfg);
  if (*verify) return cmd_verify(cfg);
  return cmd_pipeline(cfg);
}
