// Command-line front end: `apspic benchmark|diocotron (--config F | --preset P)`.
//
// Exit codes: 0 success, 1 unexpected failure, 2 usage or configuration error,
// 3 Poisson solver failure, 4 domain error. Failures print a single JSON object
// {"error": {"type", "message", "field"?}} on stderr.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "apspic/experiments.hpp"

namespace {

int fail(int code, const std::string& type, const std::string& message, const std::string& field = {}) {
  nlohmann::json err{{"type", type}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << nlohmann::json{{"error", err}}.dump() << '\n';
  return code;
}

struct RunOptions {
  std::string config;
  std::string preset;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  auto* cfg = cmd->add_option("--config", o.config, "JSON config file");
  auto* pre = cmd->add_option("--preset", o.preset, "shipped preset name (see `apspic presets`)");
  cfg->excludes(pre);
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "override the config seed (u64)");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
}

apspic::ExperimentConfig load(const RunOptions& o) {
  if (o.config.empty() == o.preset.empty()) throw apspic::ConfigError("give exactly one of --config or --preset");
  apspic::ExperimentConfig cfg = o.config.empty() ? apspic::preset(o.preset) : apspic::parse_config(o.config);
  if (o.seed) std::visit([&](auto& c) { c.seed = *o.seed; }, cfg);
  return cfg;
}

int run_benchmark(const RunOptions& o) {
  auto cfg = load(o);
  auto* b = std::get_if<apspic::BenchmarkConfig>(&cfg);
  if (!b) throw apspic::ConfigError("config describes a diocotron run; use the diocotron subcommand", "kind");
  const auto res = apspic::run_benchmark(*b, o.out, o.threads);
  nlohmann::json slopes = nlohmann::json::array();
  for (const auto& s : res.slopes) {
    nlohmann::json row{{"axis", s.axis}, {"fixed", s.fixed}, {"component", s.component}, {"status", s.status}};
    if (s.fit) row["slope"] = s.fit->slope;
    slopes.push_back(row);
  }
  std::cout << nlohmann::json{{"status", "ok"}, {"out", o.out}, {"rows", res.rows.size()}, {"slopes", slopes}}.dump()
            << '\n';
  return 0;
}

int run_diocotron(const RunOptions& o) {
  auto cfg = load(o);
  auto* d = std::get_if<apspic::DiocotronConfig>(&cfg);
  if (!d) throw apspic::ConfigError("config describes a benchmark run; use the benchmark subcommand", "kind");
  const auto res = apspic::run_diocotron(*d, o.out, o.threads);
  const auto& last = res.series.back();
  std::cout << nlohmann::json{{"status", "ok"},
                              {"out", o.out},
                              {"steps", last.step},
                              {"initial_charge", res.initial_charge},
                              {"final_charge", last.Q},
                              {"snapshots", res.snapshots.size()}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic-preserving stochastic PIC experiments"};
  app.set_version_flag("--version", apspic::version());
  app.require_subcommand(1);

  RunOptions bench_opts, dio_opts;
  auto* bench = app.add_subcommand("benchmark", "single-particle benchmark study");
  add_run_options(bench, bench_opts);
  auto* dio = app.add_subcommand("diocotron", "diocotron PIC run");
  add_run_options(dio, dio_opts);
  auto* presets = app.add_subcommand("presets", "list shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "usage", e.what());
  }

  try {
    if (presets->parsed()) {
      for (const auto& name : apspic::preset_names())
        std::cout << name << '\t' << apspic::to_json(apspic::preset(name)).at("kind").get<std::string>() << '\n';
      return 0;
    }
    if (bench->parsed()) return run_benchmark(bench_opts);
    return run_diocotron(dio_opts);
  } catch (const apspic::ConfigError& e) {
    return fail(2, "config", e.what(), e.field());
  } catch (const apspic::SolverError& e) {
    return fail(3, "solver", e.what());
  } catch (const apspic::DomainError& e) {
    return fail(4, "domain", e.what());
  } catch (const std::exception& e) {
    return fail(1, "runtime", e.what());
  }
}
