#include "hybridcop/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "hybridcop/checks.hpp"

namespace hybridcop::cli {

namespace {

using nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

double parse_number(std::string_view s, const std::string& key) {
  const auto x = to_double(s);
  if (!x || !std::isfinite(*x)) {
    throw InputError("bad value for '" + key + "': '" + std::string(s) + "' is not a finite number");
  }
  return *x;
}

std::uint64_t parse_unsigned(std::string_view s, const std::string& key) {
  s = trim(s);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("bad value for '" + key + "': '" + std::string(s) + "' is not a non-negative integer");
  }
  return x;
}

bool parse_bool(std::string_view s, const std::string& key) {
  s = trim(s);
  if (s.empty() || s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw InputError("bad value for '" + key + "': expected true or false");
}

Point parse_point(std::string_view s, std::size_t dim, const std::string& key) {
  Point u;
  for (auto part : split(s, ',')) {
    const double x = parse_number(part, key);
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("'" + key + "': coordinates must lie in [0, 1]");
    u.push_back(x);
  }
  if (u.size() != dim) {
    throw InputError("'" + key + "': expected " + std::to_string(dim) + " coordinates, got " +
                     std::to_string(u.size()));
  }
  return u;
}

class Lookup {
 public:
  explicit Lookup(const KeyValues& kv) : kv_(kv) {}
  std::optional<std::string> get(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : kv_) {
      if (k == key) out = v;
    }
    return out;
  }
  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : kv_) {
      if (k == key) out.push_back(v);
    }
    return out;
  }

 private:
  const KeyValues& kv_;
};

const std::vector<std::string> kKnownKeys = {
    "scheme", "copula", "theta", "dim",  "joint",  "margins", "true_margins",      "px",
    "py",     "pxy",    "grid",  "n",    "reps",   "seed",    "threads",           "quick",
    "mc_draws", "limits", "data", "out", "kernel", "j",       "k",                 "s",
    "t",      "u",      "v",     "check", "corrupt_derivative"};

const std::vector<std::string> kKernels = {"cov_alpha", "cov_beta", "cov_beta_beta", "cov_alpha_beta",
                                           "limit_variance"};

template <typename T>
std::vector<T> per_column(const std::vector<T>& values, std::size_t dim, const std::string& key) {
  if (values.size() == 1) return std::vector<T>(dim, values.front());
  if (values.size() != dim) {
    throw InputError("'" + key + "': give one value or one per column (" + std::to_string(dim) + ")");
  }
  return values;
}

SchemeSpec build_scheme(const Lookup& in) {
  const std::string preset = in.get("scheme").value_or("empirical");
  std::string joint = "empirical", margin = "empirical";
  ObservationModel obs;
  if (preset == "known") {
    margin = "known";
  } else if (preset == "missing") {
    joint = "complete-case";
    margin = "available-case";
    obs = {0.8, 0.8, 0.64};
  } else if (preset == "parametric") {
    margin = "parametric";
  } else if (preset != "empirical") {
    throw InputError("unknown scheme preset '" + preset + "' (empirical, known, missing, parametric)");
  }
  const std::string copula_name = in.get("copula").value_or("independence");
  const double theta = in.get("theta") ? parse_number(*in.get("theta"), "theta") : 1.0;
  const auto dim_raw = in.get("dim") ? parse_unsigned(*in.get("dim"), "dim") : 2;
  if (dim_raw < 1 || dim_raw > 16) throw InputError("'dim' must be between 1 and 16");
  const auto dim = static_cast<std::size_t>(dim_raw);

  if (in.get("px")) obs.px = parse_number(*in.get("px"), "px");
  if (in.get("py")) obs.py = parse_number(*in.get("py"), "py");
  if (in.get("pxy")) obs.pxy = parse_number(*in.get("pxy"), "pxy");

  try {
    CopulaModel copula = make_copula(copula_name, theta, static_cast<int>(dim));
    const JointScheme js = parse_joint_scheme(in.get("joint").value_or(joint));
    std::vector<MarginScheme> ms;
    for (auto part : split(in.get("margins").value_or(margin), ',')) {
      ms.push_back(parse_margin_scheme(trim(part)));
    }
    ms = per_column(ms, dim, "margins");
    std::vector<std::optional<MarginFamily>> truths(dim);
    if (auto text = in.get("true_margins")) {
      std::vector<MarginFamily> parsed;
      for (auto part : split(*text, ',')) parsed.push_back(parse_margin_family(trim(part)));
      parsed = per_column(parsed, dim, "true_margins");
      for (std::size_t j = 0; j < dim; ++j) truths[j] = parsed[j];
    }
    std::vector<MarginSpec> specs;
    for (std::size_t j = 0; j < dim; ++j) {
      MarginFamily truth = Uniform01{};
      if (truths[j]) {
        truth = *truths[j];
      } else if (ms[j] == MarginScheme::kParametric) {
        truth = NormalMargin{0.0, 1.0};
      }
      specs.push_back({ms[j], truth});
    }
    return SchemeSpec(std::move(copula), js, std::move(specs), obs);
  } catch (const InputError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

ToleranceCheck parse_check(std::string_view text, std::size_t dim) {
  const auto tok = tokens(text);
  ToleranceCheck c;
  c.text = std::string(trim(text));
  const auto bad = [&](const std::string& why) {
    return InputError("check '" + c.text + "': " + why);
  };
  if (tok.empty()) throw bad("empty");
  const auto target_and_tol = [&](std::string_view target, std::string_view tol) {
    if (target != "limit") c.target = parse_number(target, "check target");
    if (tol.size() > 2 && tol.substr(tol.size() - 2) == "se") {
      c.tolerance_in_se = true;
      tol.remove_suffix(2);
    }
    c.tolerance = parse_number(tol, "check tolerance");
    if (c.tolerance < 0.0) throw bad("negative tolerance");
  };
  if (tok[0] == "variance") {
    if (tok.size() != 4) throw bad("expected 'variance <u> <target|limit> <tol|Kse>'");
    c.kind = ToleranceCheck::Kind::kVariance;
    c.u = parse_point(tok[1], dim, "check point");
    target_and_tol(tok[2], tok[3]);
    const bool interior = std::all_of(c.u.begin(), c.u.end(), [](double x) { return x > 0.0 && x < 1.0; });
    if (!c.target && !interior) throw bad("the limit variance needs an interior point");
  } else if (tok[0] == "margin_variance") {
    if (tok.size() != 5) throw bad("expected 'margin_variance <j> <s> <target|limit> <tol|Kse>'");
    c.kind = ToleranceCheck::Kind::kMarginVariance;
    const auto j = parse_unsigned(tok[1], "check margin");
    if (j < 1 || j > dim) throw bad("margin index out of range");
    c.j = static_cast<std::size_t>(j - 1);
    c.s = parse_number(tok[2], "check s");
    if (!(c.s >= 0.0 && c.s <= 1.0)) throw bad("s must lie in [0, 1]");
    target_and_tol(tok[3], tok[4]);
  } else if (tok[0] == "remainder_decay") {
    if (tok.size() != 1) throw bad("remainder_decay takes no arguments");
    c.kind = ToleranceCheck::Kind::kRemainderDecay;
  } else {
    throw bad("unknown check (variance, margin_variance, remainder_decay)");
  }
  return c;
}

std::size_t find_point(const Grid& grid, const Point& u) {
  return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), u) - grid.begin());
}

std::size_t find_margin_point(const Grid& grid, std::size_t j, double s) {
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (grid[g][j] == s) return g;
  }
  return grid.size();
}

std::ostream& open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw InputError("cannot open '" + path + "' for writing");
  return file;
}

std::vector<std::string> point_columns(const std::string& prefix, std::size_t dim) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < dim; ++j) out.push_back(prefix + "_" + std::to_string(j + 1));
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
  out << '\n';
}

void append_point(std::vector<std::string>& row, const Point& u) {
  for (double x : u) row.push_back(format_double(x));
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable parse_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw InputError("empty CSV: missing header row");
  std::vector<std::string> names;
  for (auto name : split(lines[0], ',')) names.emplace_back(trim(name));
  const std::size_t p = names.size();
  if (lines.size() < 2) throw InputError("no data rows");
  const std::size_t n = lines.size() - 1;
  RowMatrix values = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  BoolMatrix mask = BoolMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), true);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line = i + 2;
    const auto cells = split(lines[i + 1], ',');
    if (cells.size() != p) {
      throw InputError("row " + std::to_string(line) + ": expected " + std::to_string(p) + " fields, found " +
                       std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < p; ++j) {
      const auto cell = trim(cells[j]);
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      if (cell.empty() || cell == "NA") {
        mask(ii, jj) = false;
        continue;
      }
      const auto x = to_double(cell);
      if (!x || !std::isfinite(*x)) {
        throw InputError("row " + std::to_string(line) + ", column " + std::to_string(j + 1) + " ('" +
                         names[j] + "'): '" + std::string(cell) + "' is not a finite number");
      }
      values(ii, jj) = *x;
    }
  }
  return {std::move(names), DataMatrix(std::move(values), std::move(mask))};
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_csv(std::ostream& out, const std::vector<std::string>& names, const DataMatrix& data) {
  if (names.size() != data.cols()) throw std::invalid_argument("write_csv: one name per column");
  write_row(out, names);
  std::vector<std::string> row(data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      row[j] = data.is_observed(i, j) ? format_double(data.value(i, j)) : "NA";
    }
    write_row(out, row);
  }
}

KeyValues parse_config_text(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    kv.emplace_back(std::move(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void set_key(KeyValues& kv, const std::string& key, const std::string& value) {
  std::erase_if(kv, [&](const auto& e) { return e.first == key; });
  kv.emplace_back(key, value);
}

Grid parse_grid(std::string_view text, std::size_t dim) {
  text = trim(text);
  if (text.empty()) throw InputError("empty grid");
  if (text == "default") return default_grid(dim);
  if (text.starts_with("axis:")) {
    std::vector<double> axis;
    for (auto part : split(text.substr(5), ',')) {
      const double x = parse_number(part, "grid");
      if (!(x >= 0.0 && x <= 1.0)) throw InputError("'grid': values must lie in [0, 1]");
      axis.push_back(x);
    }
    Grid grid{{}};
    for (std::size_t d = 0; d < dim; ++d) {
      Grid next;
      for (const auto& prefix : grid) {
        for (double a : axis) {
          Point q = prefix;
          q.push_back(a);
          next.push_back(std::move(q));
        }
      }
      grid = std::move(next);
    }
    return grid;
  }
  Grid grid;
  for (auto part : split(text, ';')) {
    if (trim(part).empty()) continue;
    grid.push_back(parse_point(part, dim, "grid"));
  }
  if (grid.empty()) throw InputError("empty grid");
  return grid;
}

RunConfig make_run_config(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw InputError("unknown key '" + key + "'");
    }
  }
  const Lookup in(kv);
  RunConfig c(kv, build_scheme(in));
  const std::size_t dim = c.scheme.dim();

  if (auto g = in.get("grid")) {
    c.grid = parse_grid(*g, dim);
    c.grid_given = true;
  } else if (auto u = in.get("u")) {
    c.grid = {parse_point(*u, dim, "u")};
    c.grid_given = true;
  } else {
    c.grid = default_grid(dim);
  }
  for (const auto& entry : in.all("n")) {
    for (auto part : split(entry, ',')) {
      const auto n = parse_unsigned(part, "n");
      if (n == 0) throw InputError("'n' must be positive");
      c.sample_sizes.push_back(static_cast<std::size_t>(n));
    }
  }
  for (std::size_t k = 1; k < c.sample_sizes.size(); ++k) {
    if (c.sample_sizes[k] <= c.sample_sizes[k - 1]) throw InputError("'n' values must be strictly increasing");
  }
  if (auto r = in.get("reps")) {
    c.replications = static_cast<std::size_t>(parse_unsigned(*r, "reps"));
    if (c.replications < 2) throw InputError("'reps' must be at least 2");
  }
  if (auto s = in.get("seed")) c.seed = parse_unsigned(*s, "seed");
  if (auto t = in.get("threads")) {
    const auto threads = parse_unsigned(*t, "threads");
    if (threads < 1 || threads > 1024) throw InputError("'threads' must be between 1 and 1024");
    c.threads = static_cast<unsigned>(threads);
  }
  if (auto q = in.get("quick")) c.quick = parse_bool(*q, "quick");
  if (auto q = in.get("corrupt_derivative")) c.corrupt_derivative = parse_bool(*q, "corrupt_derivative");
  if (auto m = in.get("mc_draws")) {
    c.mc_draws = static_cast<std::size_t>(parse_unsigned(*m, "mc_draws"));
    if (c.mc_draws < 2) throw InputError("'mc_draws' must be at least 2");
  }
  c.data_path = in.get("data").value_or("");
  c.out_path = in.get("out").value_or("");
  if (auto k = in.get("kernel")) {
    if (std::find(kKernels.begin(), kKernels.end(), *k) == kKernels.end()) {
      throw InputError("unknown kernel '" + *k + "'");
    }
    c.kernel = *k;
  }
  const auto index = [&](const std::string& key, std::size_t fallback) {
    const auto v = in.get(key);
    if (!v) return fallback;
    const auto x = parse_unsigned(*v, key);
    if (x < 1 || x > dim) throw InputError("'" + key + "' must be between 1 and " + std::to_string(dim));
    return static_cast<std::size_t>(x - 1);
  };
  c.j = index("j", 0);
  c.k = index("k", std::min<std::size_t>(1, dim - 1));
  const auto prob = [&](const std::string& key, double fallback) {
    const auto v = in.get(key);
    if (!v) return fallback;
    const double x = parse_number(*v, key);
    if (!(x >= 0.0 && x <= 1.0)) throw InputError("'" + key + "' must lie in [0, 1]");
    return x;
  };
  c.s = prob("s", 0.5);
  c.t = prob("t", c.s);
  if (auto v = in.get("v")) c.v = parse_point(*v, dim, "v");

  for (const auto& text : in.all("check")) {
    auto check = parse_check(text, dim);
    if (check.kind == ToleranceCheck::Kind::kVariance && find_point(c.grid, check.u) == c.grid.size()) {
      c.grid.push_back(check.u);
    }
    if (check.kind == ToleranceCheck::Kind::kMarginVariance &&
        find_margin_point(c.grid, check.j, check.s) == c.grid.size()) {
      Point u(dim, 0.5);
      u[check.j] = check.s;
      c.grid.push_back(u);
    }
    c.checks.push_back(std::move(check));
  }
  if (auto limits = in.get("limits"); limits && !parse_bool(*limits, "limits")) {
    for (const auto& check : c.checks) {
      if (!check.target && check.kind != ToleranceCheck::Kind::kRemainderDecay) {
        throw InputError("check '" + check.text + "' needs limits = true");
      }
    }
  }
  return c;
}

std::string config_help() {
  return R"(Config file: one "key = value" per line, '#' comments, repeated keys append.
Command-line flags override file entries with the same key.
  scheme        empirical | known | missing | parametric (preset for joint/margins)
  copula        independence | clayton | fgm        theta   copula parameter
  dim           dimension (default 2)
  joint         empirical | complete-case
  margins       empirical | available-case | known | parametric (one or comma list)
  true_margins  uniform | normal[:mu:sd] | exponential[:rate] (one or comma list)
  px, py, pxy   observation probabilities (missing preset: 0.8, 0.8, 0.64)
  grid          default | axis:a,b,... | u1,u2;u1,u2;...
  n             sample size(s), comma list or repeated, strictly increasing
  reps          replications (>= 2)          seed     master seed (HYBRIDCOP_SEED overrides)
  threads       worker threads               mc_draws Monte Carlo draws for kernels
  limits        compute limit variances in experiment reports (default true)
  kernel        cov_alpha | cov_beta | cov_beta_beta | cov_alpha_beta | limit_variance
  j, k          margin indices (1-based)     s, t     margin arguments
  u, v          points (comma lists)
  check         variance <u> <target|limit> <tol|Kse>
                margin_variance <j> <s> <target|limit> <tol|Kse>
                remainder_decay
)";
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.sample_sizes.empty()) throw InputError("simulate needs a sample size (--n)");
  const std::size_t n = config.sample_sizes.front();
  const DataMatrix data = simulate_dataset(config.scheme, n, config.seed);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < data.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  std::ofstream file;
  write_csv(open_output(config.out_path, file, out), names, data);
  err << "simulated " << n << " rows, " << data.complete_rows() << " complete\n";
  return kOk;
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.data_path.empty()) throw InputError("estimate needs --data");
  const CsvTable table = read_csv(config.data_path);
  const auto& data = table.data;
  if (data.cols() != config.scheme.dim()) {
    throw InputError("data has " + std::to_string(data.cols()) + " columns but the scheme has dimension " +
                     std::to_string(config.scheme.dim()));
  }
  err << "n = " << data.rows() << ", complete rows = " << data.complete_rows() << ", observed =";
  for (std::size_t j = 0; j < data.cols(); ++j) err << ' ' << data.observed_count(j);
  err << '\n';
  const HybridEstimator est = fit_scheme(config.scheme, data);
  std::ofstream file;
  std::ostream& os = open_output(config.out_path, file, out);
  auto header = point_columns("u", data.cols());
  header.push_back("c_hat");
  write_row(os, header);
  for (const auto& u : config.grid) {
    std::vector<std::string> row;
    append_point(row, u);
    row.push_back(format_double(est.eval(u)));
    write_row(os, row);
  }
  return kOk;
}

int cmd_limit_cov(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.kernel.empty()) throw InputError("limit-cov needs --kernel");
  const std::size_t dim = config.scheme.dim();
  const LimitCovariance lc(config.scheme, McOptions{config.mc_draws, McOptions{}.seed});
  std::ofstream file;
  std::ostream& os = open_output(config.out_path, file, out);
  int code = kOk;
  if (config.kernel == "cov_beta") {
    write_row(os, {"j", "s", "t", "value"});
    const double v = cov_beta(config.scheme, config.j, config.s, config.t);
    write_row(os, {std::to_string(config.j + 1), format_double(config.s), format_double(config.t), format_double(v)});
  } else if (config.kernel == "cov_beta_beta") {
    if (config.j == config.k) throw InputError("cov_beta_beta needs distinct margins j and k");
    const auto e = lc.cov(BetaAt{config.j, config.s}, BetaAt{config.k, config.t});
    write_row(os, {"j", "k", "s", "t", "value", "std_error"});
    write_row(os, {std::to_string(config.j + 1), std::to_string(config.k + 1), format_double(config.s),
                   format_double(config.t), format_double(e.value), format_double(e.std_error)});
  } else if (config.kernel == "cov_alpha") {
    auto header = point_columns("u", dim);
    for (auto& name : point_columns("v", dim)) header.push_back(name);
    header.push_back("value");
    write_row(os, header);
    for (const auto& u : config.grid) {
      const Point v = config.v.value_or(u);
      std::vector<std::string> row;
      append_point(row, u);
      append_point(row, v);
      row.push_back(format_double(cov_alpha(config.scheme, u, v)));
      write_row(os, row);
    }
  } else if (config.kernel == "cov_alpha_beta") {
    auto header = point_columns("u", dim);
    for (const char* name : {"j", "s", "value", "std_error"}) header.emplace_back(name);
    write_row(os, header);
    for (const auto& u : config.grid) {
      const auto e = lc.cov(AlphaAt{u}, BetaAt{config.j, config.s});
      std::vector<std::string> row;
      append_point(row, u);
      row.push_back(std::to_string(config.j + 1));
      row.push_back(format_double(config.s));
      row.push_back(format_double(e.value));
      row.push_back(format_double(e.std_error));
      write_row(os, row);
    }
  } else {
    auto header = point_columns("u", dim);
    for (const char* name : {"value", "std_error", "status"}) header.emplace_back(name);
    write_row(os, header);
    for (const auto& u : config.grid) {
      std::vector<std::string> row;
      append_point(row, u);
      try {
        const auto e = limit_variance(config.scheme, u, McOptions{config.mc_draws, McOptions{}.seed});
        row.push_back(format_double(e.value));
        row.push_back(format_double(e.std_error));
        row.push_back("ok");
      } catch (const std::domain_error&) {
        row.insert(row.end(), {"NA", "NA", "error: boundary point"});
        code = kInputError;
      }
      write_row(os, row);
    }
    if (code != kOk) err << "error: limit_variance is undefined at boundary points (some u_j is 0 or 1)\n";
  }
  return code;
}

namespace {

ordered_json config_json(const RunConfig& config) {
  const auto& scheme = config.scheme;
  ordered_json margins = ordered_json::array(), truths = ordered_json::array();
  for (const auto& m : scheme.margins()) {
    margins.push_back(to_string(m.scheme));
    truths.push_back(to_string(m.truth));
  }
  ordered_json input = ordered_json::object();
  for (const auto& [key, value] : config.echo) {
    if (key == "threads" || key == "out") continue;  // do not affect results
    if (key == "n" || key == "check") {
      if (!input.contains(key)) input[key] = ordered_json::array();
      input[key].push_back(value);
    } else {
      input[key] = value;
    }
  }
  const auto& obs = scheme.observation();
  return {{"copula", scheme.copula().to_string()},
          {"joint", to_string(scheme.joint())},
          {"margins", margins},
          {"true_margins", truths},
          {"px", obs.px},
          {"py", obs.py},
          {"pxy", obs.pxy},
          {"sample_sizes", config.sample_sizes},
          {"replications", config.replications},
          {"seed", config.seed},
          {"grid_points", config.grid.size()},
          {"rate", "sqrt(n)"},
          {"input", input}};
}

ordered_json stats_json(const SummaryStats& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"variance_se", s.variance_se}};
}

ordered_json report_json(const ExperimentReport& report) {
  ordered_json sizes = ordered_json::array();
  for (const auto& size : report.sizes) {
    ordered_json points = ordered_json::array();
    for (const auto& pt : size.points) {
      ordered_json p = {{"u", pt.u}, {"process", stats_json(pt.process)}};
      if (pt.limit_variance) {
        p["limit_variance"] = pt.limit_variance->value;
        p["limit_variance_se"] = pt.limit_variance->std_error;
      } else {
        p["limit_variance"] = nullptr;
      }
      ordered_json margins = ordered_json::array();
      for (const auto& m : pt.margins) {
        margins.push_back({{"j", m.j + 1}, {"s", m.s}, {"process", stats_json(m.process)},
                           {"limit_variance", m.limit_variance}});
      }
      p["margins"] = margins;
      points.push_back(p);
    }
    sizes.push_back({{"n", size.n},
                     {"replications", size.replications},
                     {"skipped", size.skipped},
                     {"remainder_sup", {{"median", size.remainder_median}, {"q90", size.remainder_q90}}},
                     {"points", points}});
  }
  return {{"sizes", sizes}};
}

struct CheckOutcome {
  bool passed;
  ordered_json json;
};

CheckOutcome evaluate_check(const ToleranceCheck& c, const RunConfig& config, const ExperimentReport& report) {
  if (c.kind == ToleranceCheck::Kind::kRemainderDecay) {
    std::vector<double> medians;
    bool ok = report.sizes.size() >= 2;
    for (const auto& s : report.sizes) medians.push_back(s.remainder_median);
    for (std::size_t k = 1; k < medians.size(); ++k) ok = ok && medians[k] < medians[k - 1];
    return {ok, {{"check", c.text}, {"medians", medians}, {"passed", ok}}};
  }
  const auto& last = report.sizes.back();
  double observed = 0.0, observed_se = 0.0, target = 0.0, target_se = 0.0;
  if (c.kind == ToleranceCheck::Kind::kVariance) {
    const auto& pt = last.points[find_point(config.grid, c.u)];
    observed = pt.process.variance;
    observed_se = pt.process.variance_se;
    if (c.target) {
      target = *c.target;
    } else {
      target = pt.limit_variance->value;
      target_se = pt.limit_variance->std_error;
    }
  } else {
    const auto& m = last.points[find_margin_point(config.grid, c.j, c.s)].margins[c.j];
    observed = m.process.variance;
    observed_se = m.process.variance_se;
    target = c.target.value_or(m.limit_variance);
  }
  const double tol = c.tolerance_in_se ? c.tolerance * std::hypot(observed_se, target_se) : c.tolerance;
  const bool ok = std::abs(observed - target) <= tol;
  return {ok,
          {{"check", c.text},
           {"n", last.n},
           {"observed", observed},
           {"observed_se", observed_se},
           {"target", target},
           {"tolerance", tol},
           {"passed", ok}}};
}

}  // namespace

int cmd_experiment(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.sample_sizes.empty()) throw InputError("experiment needs sample sizes (n)");
  ExperimentConfig ec{config.scheme, config.sample_sizes, config.replications, config.grid,
                      config.seed,   config.threads,      true,
                      McOptions{config.mc_draws, McOptions{}.seed}};
  const Lookup in(config.echo);
  if (auto limits = in.get("limits")) ec.compute_limits = parse_bool(*limits, "limits");
  try {
    validate(ec);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const ExperimentReport report = run_experiment(ec);

  ordered_json checks = ordered_json::array();
  bool all_ok = true;
  for (const auto& c : config.checks) {
    auto outcome = evaluate_check(c, config, report);
    all_ok = all_ok && outcome.passed;
    err << (outcome.passed ? "PASS " : "FAIL ") << c.text << '\n';
    checks.push_back(std::move(outcome.json));
  }
  ordered_json doc = {{"config", config_json(config)},
                      {"results", report_json(report)},
                      {"checks", checks},
                      {"version", kVersion}};
  std::ofstream file;
  open_output(config.out_path, file, out) << doc.dump(2) << '\n';
  return all_ok ? kOk : kToleranceFailure;
}

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream&) {
  CheckOptions options;
  options.quick = config.quick;
  if (config.corrupt_derivative) {
    options.partial = [](const CopulaModel& c, int j, std::span<const double> u) {
      const double d = c.partial(j, u);
      return j == 0 ? 1.01 * d : d;
    };
  }
  const auto results = run_check_suites(options);
  bool all_ok = true;
  for (const auto& r : results) {
    all_ok = all_ok && r.passed;
    out << std::left << std::setw(18) << r.name << (r.passed ? "PASS  " : "FAIL  ") << r.detail << '\n';
  }
  return all_ok ? kOk : kFailure;
}

int run_command(const std::string& command, const KeyValues& kv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = make_run_config(kv);
    if (command == "simulate") return cmd_simulate(config, out, err);
    if (command == "estimate") return cmd_estimate(config, out, err);
    if (command == "limit-cov") return cmd_limit_cov(config, out, err);
    if (command == "experiment") return cmd_experiment(config, out, err);
    if (command == "check") return cmd_check(config, out, err);
    throw InputError("unknown command '" + command + "'");
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace hybridcop::cli
