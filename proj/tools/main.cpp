#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "commands.hpp"
#include "rnash/error.hpp"

int main(int argc, char** argv) {
  using namespace rnash::cli;
  CLI::App app{"Riccati-Nash solver for linear-quadratic N-player games"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool quiet = false;
  std::string oracle;
  int oracle_H = 12;

  const std::map<std::string, std::string> about{
      {"solve", "integrate the Riccati system backward from c(T) = g"},
      {"genfun", "generating-function solution of a shift-invariant game"},
      {"ergodic", "ergodic coefficients and the long-time constant lambda"},
      {"sweep", "long-time convergence over a list of horizons"},
      {"nash-mc", "Monte Carlo epsilon-Nash gain against a unilateral deviation"},
      {"meanfield", "mean-field-like system with a-priori envelope monitor"},
      {"certify-seq", "self-control constant of the exponential Fourier sequence"}};
  for (const std::string& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config_path, "experiment config (YAML)");
    sub->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
    sub->add_option("--seed", seed, "master seed (overrides numerics.seed)");
    sub->add_option("--threads", threads, "worker threads (RICCATI_NASH_THREADS wins)");
    sub->add_flag("--quiet", quiet, "suppress the summary on stderr");
    if (name == "ergodic") {
      sub->add_option("--oracle", oracle, "built-in oracle instead of a config (directed-chain)");
      sub->add_option("--H", oracle_H, "oracle truncation");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  RunRequest req;
  req.command = app.get_subcommands().front()->get_name();
  CLI::App* sub = app.get_subcommands().front();
  req.quiet = quiet;
  req.threads = resolve_threads(threads);
  if (sub->count("--out")) req.out_dir = out_dir;
  if (sub->count("--seed")) req.seed = seed;
  if (req.command == "ergodic" && sub->count("--oracle")) {
    req.oracle = oracle;
    req.oracle_H = oracle_H;
  }
  if (sub->count("--config")) {
    try {
      req.config = load_config(config_path);
    } catch (const rnash::Error& e) {
      std::cerr << "riccati_nash " << req.command << ": " << e.what() << "\n";
      return 4;
    }
  } else if (!req.oracle) {
    std::cerr << "riccati_nash " << req.command << ": ConfigError: --config is required\n";
    return 4;
  }
  return run(req);
}
