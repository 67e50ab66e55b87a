// Command layer behind the hybridcop executable: CSV I/O, key=value
// configuration, JSON reports and the five commands.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybridcop/asymptotics.hpp"
#include "hybridcop/estimators.hpp"
#include "hybridcop/harness.hpp"
#include "hybridcop/scheme.hpp"

namespace hybridcop::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kToleranceFailure = 2, kInputError = 3 };

/// Bad flags, config, or data files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> names;
  DataMatrix data;
};

/// Header row then numeric rows; an empty cell or NA marks a missing value.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::string_view text);
/// Missing values are written as NA, numbers with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& names, const DataMatrix& data);
std::string format_double(double x);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key=value lines; '#' starts a comment, keys may repeat.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::string& path);

/// Replaces every entry of key with value.
void set_key(KeyValues& kv, const std::string& key, const std::string& value);

struct ToleranceCheck {
  enum class Kind { kVariance, kMarginVariance, kRemainderDecay };
  Kind kind;
  std::string text;
  Point u;            // kVariance
  std::size_t j = 0;  // kMarginVariance, zero-based
  double s = 0.0;
  std::optional<double> target;  // empty: use the limit
  double tolerance = 0.0;
  bool tolerance_in_se = false;  // tolerance is a multiple of the MC standard error
};

struct RunConfig {
  RunConfig(KeyValues e, SchemeSpec sc) : echo(std::move(e)), scheme(std::move(sc)) {}

  KeyValues echo;
  SchemeSpec scheme;
  Grid grid;
  bool grid_given = false;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 200;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  bool quick = false;
  bool corrupt_derivative = false;
  std::size_t mc_draws = McOptions{}.draws;
  std::string data_path;
  std::string out_path;
  // limit-cov
  std::string kernel;
  std::size_t j = 0, k = 1;  // zero-based
  double s = 0.5, t = 0.5;
  std::optional<Point> v;
  std::vector<ToleranceCheck> checks;
};

/// Builds and validates a run configuration. Keys: scheme, copula, theta,
/// dim, joint, margins, true_margins, px, py, pxy, grid, n, reps, seed,
/// threads, quick, mc_draws, data, out, kernel, j, k, s, t, u, v, check,
/// corrupt_derivative. Throws InputError.
RunConfig make_run_config(const KeyValues& kv);

/// "default", "axis:a,b,..." (product grid) or "u1,u2;u1,u2;...".
Grid parse_grid(std::string_view text, std::size_t dim);

/// Usage text for the config keys.
std::string config_help();

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_limit_cov(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_experiment(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Dispatches by command name and maps exceptions to exit codes.
int run_command(const std::string& command, const KeyValues& kv, std::ostream& out, std::ostream& err);

}  // namespace hybridcop::cli
