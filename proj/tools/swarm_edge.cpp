// swarm-edge: run swarm-learning benchmarks from a config file.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "swarm_edge/errors.hpp"
#include "swarm_edge/experiment.hpp"

namespace se = swarm_edge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void print_summary(const se::SummaryReport& report) {
  std::printf("%-4s %10s %10s %10s %10s %12s %10s\n", "algo", "acc_mean", "acc_std", "slope",
              "to_target", "reports", "vec_uses");
  for (const auto& s : report.algos) {
    const std::string target = s.rounds_to_target ? std::to_string(*s.rounds_to_target) : "-";
    std::printf("%-4s %10.4f %10.4f %10.4f %10s %12.1f %10.1f\n", std::string(se::to_string(s.algo)).c_str(),
                s.final_acc_mean, s.final_acc_std, s.slope, target.c_str(), s.scalar_reports,
                s.vector_uses);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed swarm learning simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a benchmark described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algo;
  std::optional<std::string> attack;
  std::optional<std::string> out;
  bool quiet = false;
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--seed", seed, "override experiment.seed");
  run->add_option("--algo", algo, "run a single algorithm: dsl, fl or pso");
  run->add_option("--attack", attack, "none, signflip, gauss, scorecheat or mixed");
  run->add_option("--out", out, "output directory");
  run->add_flag("--quiet", quiet, "no summary table on stdout");

  auto* defaults = app.add_subcommand("defaults", "print a config file with every default");
  bool describe = false;
  defaults->add_flag("--describe", describe, "one line of documentation per key");

  CLI11_PARSE(app, argc, argv);

  if (defaults->parsed()) {
    se::ExperimentConfig cfg;
    cfg.swarm.s_max = se::default_s_max(cfg.swarm.workers);
    std::cout << (describe ? se::describe_config_keys() : se::serialize_config(cfg));
    return kExitOk;
  }

  se::ExperimentConfig cfg;
  try {
    cfg = se::parse_config(config_path);
    if (seed) cfg.seed = *seed;
    if (algo) cfg.algos = {se::parse_algo(*algo)};
    if (attack) cfg.attack.kind = se::parse_attack(*attack);
    if (out) cfg.out_dir = *out;
    cfg.validate();
  } catch (const se::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const se::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const se::IoError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const se::BenchmarkResult result = se::run_benchmark(cfg);
    se::write_benchmark_outputs(result, cfg.out_dir);
    if (!quiet) print_summary(result.summary);
  } catch (const se::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
