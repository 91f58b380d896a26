// Command-line front end: single fits and Monte Carlo sweeps over the
// built-in scenario registry or user-supplied scenario JSON.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "errcal/errcal.hpp"

namespace {

using namespace errcal;

struct CliConfig {
  std::string scenario;
  std::vector<std::string> methods;
  std::size_t replicates = 0;
  std::vector<std::size_t> subset_sizes;
  std::uint64_t seed = 0;
  std::string variance = "sandwich";
  std::vector<std::string> overrides;
  std::string out;
  std::string format;  // per-command default applied after parsing
  std::size_t threads = 0;
  bool threads_given = false;
};

// Usage problems detected after flag parsing (unknown scenario name, bad
// variance syntax, ...). They exit 2, like flag errors.
struct UsageError {
  std::string message;
};

VarianceSpec parse_variance(const std::string& text) {
  VarianceSpec v;
  if (text == "sandwich") return v;
  v.kind = VarianceSpec::Kind::bootstrap;
  if (text == "bootstrap") return v;
  const std::string prefix = "bootstrap:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string count = text.substr(prefix.size());
    try {
      const long b = std::stol(count);
      if (b >= 2) {
        v.b = static_cast<std::size_t>(b);
        return v;
      }
    } catch (const std::exception&) {
    }
  }
  throw UsageError{"--variance must be sandwich, bootstrap, or bootstrap:<resamples>, got '" +
                   text + "'"};
}

std::string registry_names_joined() {
  std::string names;
  for (const auto& n : scenario_names()) {
    if (!names.empty()) names += ", ";
    names += n;
  }
  return names;
}

// A scenario argument is first matched against the registry, then treated as
// a path to a scenario JSON file. --set overrides are applied to the JSON
// form in either case, so the same sweeps work on built-ins and files.
ScenarioSpec resolve_scenario(const CliConfig& cfg) {
  nlohmann::json doc;
  bool found = false;
  for (const auto& n : scenario_names())
    if (n == cfg.scenario) {
      doc = scenario_to_json(scenario_by_name(n));
      found = true;
      break;
    }
  if (!found) {
    std::ifstream probe(cfg.scenario);
    if (!probe)
      throw UsageError{"unknown scenario '" + cfg.scenario +
                       "' (registry: " + registry_names_joined() +
                       "; or pass a path to a scenario JSON file)"};
    doc = read_json_file(cfg.scenario);
  }
  for (const auto& assignment : cfg.overrides) apply_set_override(doc, assignment);
  return scenario_from_json(doc);
}

std::size_t resolve_threads(const CliConfig& cfg) {
  if (cfg.threads_given) return cfg.threads;
  if (const char* env = std::getenv("ERRCAL_THREADS")) {
    try {
      const long k = std::stol(env);
      if (k > 0) return static_cast<std::size_t>(k);
    } catch (const std::exception&) {
    }
  }
  return 0;  // the runner resolves 0 to the logical processor count
}

// Writes to --out when given, stdout otherwise.
int deliver(const CliConfig& cfg, const std::string& payload) {
  if (cfg.out.empty()) {
    std::cout << payload;
    return 0;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  out << payload;
  if (!out) {
    std::cerr << "cannot write '" << cfg.out << "'\n";
    return 1;
  }
  return 0;
}

nlohmann::json summary_to_json(const MonteCarloSummary& s) {
  nlohmann::json j;
  j["scenario"] = s.scenario;
  j["n_subset"] = s.n_subset;
  j["replicates"] = s.replicates;
  j["coef_names"] = s.coef_names;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : s.methods)
    j["methods"].push_back({{"method", m.method},
                            {"pct_bias", m.pct_bias},
                            {"se", m.se},
                            {"ase", m.ase},
                            {"mse", m.mse},
                            {"cp", m.cp},
                            {"n_ok", m.n_ok},
                            {"n_failed", m.n_failed}});
  return j;
}

int run_simulate(const CliConfig& cfg) {
  RunSpec spec;
  spec.scenario = resolve_scenario(cfg);
  spec.methods = cfg.methods;
  spec.replicates = cfg.replicates;
  spec.base_seed = cfg.seed;
  spec.variance = parse_variance(cfg.variance);
  spec.subset_sizes = cfg.subset_sizes;
  spec.threads = resolve_threads(cfg);
  const auto summaries = errcal::run(spec);
  if (cfg.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : summaries) j.push_back(summary_to_json(s));
    return deliver(cfg, j.dump(2) + "\n");
  }
  std::ostringstream os;
  write_csv(os, summaries);
  return deliver(cfg, os.str());
}

int run_fit(const CliConfig& cfg) {
  const ScenarioSpec scenario = resolve_scenario(cfg);
  const VarianceSpec variance = parse_variance(cfg.variance);
  std::vector<std::string> methods = cfg.methods;
  if (methods.empty()) {
    switch (scenario.design) {  // default to the calibrated estimator
      case Design::reliability: methods = {"rc_case1"}; break;
      case Design::validation: methods = {"rc_case2"}; break;
      case Design::biomarker: methods = {"rc_case3"}; break;
    }
  }
  for (const auto& tag : methods)
    if (!method_valid(tag, scenario.design))
      throw UsageError{"method '" + tag + "' is not available for the " +
                       std::string(to_string(scenario.design)) + " design"};

  const auto data = generate(scenario, cfg.seed);
  const auto names = coef_names(scenario.p(), scenario.q());

  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["design"] = std::string(to_string(scenario.design));
  j["seed"] = cfg.seed;
  j["n_records"] = data.size();
  j["coef_names"] = names;
  j["fits"] = nlohmann::json::array();
  std::ostringstream csv;
  csv << "method,coef,estimate,se\n";

  for (const auto& tag : methods) {
    const CalibrationFit fit = detail::fit_by_tag(tag, scenario.design, data);
    nlohmann::json jf;
    jf["method"] = fit.method;
    jf["n_used"] = fit.n_used;
    jf["beta"] = fit.beta;
    std::optional<Vector> se;
    if (fit.vcov) {
      jf["variance"] = "classical";
      se = Vector(fit.beta.size());
      for (std::size_t c = 0; c < fit.beta.size(); ++c)
        (*se)[c] = std::sqrt((*fit.vcov)(c, c));
    } else if (variance.kind == VarianceSpec::Kind::bootstrap) {
      const auto estimator = [&tag, &scenario](std::span<const SubjectRecord> d) {
        return detail::fit_by_tag(tag, scenario.design, d).beta;
      };
      const BootstrapResult boot = bootstrap(data, estimator, variance.b, cfg.seed);
      jf["variance"] = "bootstrap";
      jf["b"] = boot.b;
      jf["b_ok"] = boot.b_ok;
      se = boot.se;
    } else if (tag.rfind("rc_", 0) == 0) {
      const SandwichResult sw = sandwich(scenario.design, data, fit);
      jf["variance"] = "sandwich";
      jf["psi_residual_norm"] = sw.psi_residual_norm;
      se = Vector(fit.beta.size());
      for (std::size_t c = 0; c < fit.beta.size(); ++c)
        (*se)[c] = std::sqrt(sw.beta_vcov(c, c));
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t r = 0; r < sw.beta_vcov.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < sw.beta_vcov.cols(); ++c)
          row.push_back(sw.beta_vcov(r, c));
        rows.push_back(row);
      }
      jf["vcov"] = rows;
    } else {
      jf["variance"] = nullptr;  // moment methods carry no sandwich stack
    }
    if (se) jf["se"] = *se;
    j["fits"].push_back(jf);

    for (std::size_t c = 0; c < fit.beta.size(); ++c) {
      csv << fit.method << ',' << names[c] << ',' << format_metric(fit.beta[c]) << ','
          << (se ? format_metric((*se)[c]) : "nan") << '\n';
    }
  }
  if (cfg.format == "csv") return deliver(cfg, csv.str());
  return deliver(cfg, j.dump(2) + "\n");
}

int run_list() {
  for (const auto& n : scenario_names()) std::cout << n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  CLI::App app{
      "Measurement-error-corrected linear regression: single fits and Monte "
      "Carlo sweeps over simulated cohorts."};
  app.require_subcommand(1);

  auto add_common = [&cfg](CLI::App* cmd, bool simulate) {
    cmd->add_option("--scenario", cfg.scenario,
                    "registry scenario name or path to a scenario JSON file")
        ->required();
    cmd->add_option("--seed", cfg.seed, "base seed for all random streams");
    cmd->add_option("--variance", cfg.variance,
                    "variance estimator: sandwich | bootstrap:<resamples>");
    cmd->add_option("--set", cfg.overrides,
                    "scenario override path.to.field=value (repeatable)");
    cmd->add_option("--out", cfg.out, "output path (default: stdout)");
    auto* methods =
        cmd->add_option("--methods", cfg.methods, "comma-separated method tags")
            ->delimiter(',');
    cmd->add_option("--format", cfg.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    if (simulate) {
      methods->required();
      cmd->add_option("--replicates", cfg.replicates, "Monte Carlo replicates")
          ->required()
          ->check(CLI::PositiveNumber);
      cmd->add_option("--subset-sizes", cfg.subset_sizes,
                      "subset sizes to sweep (default: the scenario's own)")
          ->delimiter(',');
      cmd->add_option("--threads", cfg.threads,
                      "worker threads (default: ERRCAL_THREADS or processor count)")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* fit = app.add_subcommand("fit", "generate one cohort and fit it");
  add_common(fit, false);
  CLI::App* simulate =
      app.add_subcommand("simulate", "replicated bias/coverage simulation");
  add_common(simulate, true);
  app.add_subcommand("list-scenarios", "print the scenario registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.threads_given = simulate->count("--threads") > 0;
  if (cfg.format.empty()) cfg.format = app.got_subcommand("fit") ? "json" : "csv";

  try {
    if (app.got_subcommand("list-scenarios")) return run_list();
    if (app.got_subcommand("fit")) return run_fit(cfg);
    return run_simulate(cfg);
  } catch (const UsageError& e) {
    std::cerr << e.message << '\n';
    return 2;
  } catch (const errcal::Error& e) {
    std::cerr << e.what() << '\n';  // leads with the diagnostic name
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
