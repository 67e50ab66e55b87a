#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hybridcop/cli.hpp"

namespace cli = hybridcop::cli;

int main(int argc, char** argv) {
  CLI::App app{"hybridcop: hybrid copula estimators, limit covariances and Monte Carlo checks"};
  app.footer(cli::config_help() +
             "\nExit codes: 0 ok, 1 internal or check failure, 2 tolerance failure, 3 input error.\n");

  std::string command;
  app.add_option("command", command, "simulate | estimate | limit-cov | experiment | check")
      ->required()
      ->check(CLI::IsMember({"simulate", "estimate", "limit-cov", "experiment", "check"}));

  // Flag name -> config key. Values are kept as text and validated by the
  // same parser as config files.
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const std::vector<Flag> flags = {
      {"--data", "data", "input CSV"},
      {"--out", "out", "output path (default stdout)"},
      {"--scheme", "scheme", "preset: empirical | known | missing | parametric"},
      {"--joint", "joint", "empirical | complete-case"},
      {"--margins", "margins", "empirical | available-case | known | parametric, or a comma list"},
      {"--margin-family", "true_margins", "true margin family: uniform | normal[:mu:sd] | exponential[:rate]"},
      {"--copula", "copula", "independence | clayton | fgm"},
      {"--theta", "theta", "copula parameter"},
      {"--dim", "dim", "dimension"},
      {"--px", "px", "P(column 1 observed)"},
      {"--py", "py", "P(column 2 observed)"},
      {"--pxy", "pxy", "P(both observed)"},
      {"--grid", "grid", "default | axis:a,b,... | u1,u2;u1,u2"},
      {"--n", "n", "sample size(s), comma list"},
      {"--reps", "reps", "replications"},
      {"--seed", "seed", "master seed"},
      {"--threads", "threads", "worker threads"},
      {"--kernel", "kernel", "cov_alpha | cov_beta | cov_beta_beta | cov_alpha_beta | limit_variance"},
      {"--j", "j", "margin index (1-based)"},
      {"--k", "k", "second margin index (1-based)"},
      {"--s", "s", "margin argument"},
      {"--t", "t", "second margin argument"},
      {"--u", "u", "point, comma list"},
      {"--v", "v", "second point, comma list"},
      {"--mc-draws", "mc_draws", "Monte Carlo draws for kernels without a closed form"},
  };
  std::vector<std::string> values(flags.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    options.push_back(app.add_option(flags[i].name, values[i], flags[i].help));
  }
  std::string config_path;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  bool quick = false, corrupt = false;
  app.add_flag("--quick", quick, "reduced replication counts for check");
  app.add_flag("--corrupt-derivative", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  cli::KeyValues kv;
  try {
    if (!config_path.empty()) kv = cli::read_config_file(config_path);
  } catch (const cli::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInputError;
  }
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (options[i]->count() > 0) cli::set_key(kv, flags[i].key, values[i]);
  }
  if (quick) cli::set_key(kv, "quick", "true");
  if (corrupt) cli::set_key(kv, "corrupt_derivative", "true");
  if (const char* seed = std::getenv("HYBRIDCOP_SEED"); seed != nullptr && *seed != '\0') {
    cli::set_key(kv, "seed", seed);
  }
  return cli::run_command(command, kv, std::cout, std::cerr);
}
