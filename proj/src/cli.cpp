#include "refresh/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "refresh/calibration.hpp"
#include "refresh/continuous_solver.hpp"
#include "refresh/discrete_solver.hpp"
#include "refresh/errors.hpp"
#include "refresh/report_json.hpp"
#include "refresh/sweep.hpp"

namespace refresh::cli {

namespace {

using nlohmann::json;

constexpr double kCertifyThreshold = 1e-8;

// Bad invocation: unknown or missing flag, unreadable file, malformed config.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Values given on the command line, before merging with --config.
struct FlagValues {
  RunConfig config;
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  bool given(const std::string& name) const {
    for (const auto& [n, opt] : options) {
      if (n == name) return opt->count() > 0;
    }
    return false;
  }
};

void add_model_flags(CLI::App& sub, FlagValues& v) {
  auto& c = v.config;
  v.options.emplace_back("alpha", sub.add_option("--alpha", c.alpha,
                                                 "BER scale alpha"));
  v.options.emplace_back("beta", sub.add_option("--beta", c.beta,
                                                "BER growth rate beta (1/s)"));
  v.options.emplace_back("bits", sub.add_option("--bits", c.bits, "word width B"));
  v.options.emplace_back("delta", sub.add_option("--delta", c.delta,
                                                 "minimum refresh interval (s)"));
  sub.add_option("--config", v.config_path, "JSON file with flag values");
  v.options.emplace_back("output", sub.add_option("--output", c.output,
                                                  "write output to this path"));
  v.options.emplace_back(
      "format", sub.add_option("--format", c.format, "json or csv")
                    ->check(CLI::IsMember({"json", "csv"})));
}

void add_budget_flag(CLI::App& sub, FlagValues& v) {
  v.options.emplace_back("budget", sub.add_option("--budget", v.config.budget,
                                                  "refresh power budget"));
}

void add_gamma_flags(CLI::App& sub, FlagValues& v) {
  v.options.emplace_back("gamma", sub.add_option("--gamma", v.config.gammas,
                                                 "discrete step multiplier")
                                      ->allow_extra_args(false)
                                      ->take_all());
  v.options.emplace_back("z-cap", sub.add_option("--z-cap", v.config.z_cap,
                                                 "largest step count per bit"));
}

std::string read_file(const std::string& path, const std::string& flag) {
  std::ifstream in(path);
  if (!in) throw UsageError(flag + ": cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
void take(const json& cfg, const char* key, T& dst) {
  if (!cfg.contains(key)) return;
  try {
    dst = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("--config: key '") + key + "' has the wrong type");
  }
}

template <typename T>
void take(const json& cfg, const char* key, std::optional<T>& dst) {
  T value{};
  if (!cfg.contains(key)) return;
  take(cfg, key, value);
  dst = value;
}

// Starts from the config file (if any) and lays explicitly given flags on top.
RunConfig merge(const FlagValues& flags) {
  RunConfig merged;
  merged.command = flags.config.command;
  if (!flags.config_path.empty()) {
    json cfg;
    try {
      cfg = json::parse(read_file(flags.config_path, "--config"));
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("--config: malformed JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw UsageError("--config: expected a JSON object");
    static const char* kKnown[] = {"alpha",  "beta",       "bits",
                                   "delta",  "budget",     "target-mse",
                                   "target-psnr", "gamma", "z-cap",
                                   "budgets", "measurements", "input",
                                   "output", "format"};
    for (const auto& [key, value] : cfg.items()) {
      if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
        throw UsageError("--config: unknown key '" + key + "'");
      }
    }
    take(cfg, "alpha", merged.alpha);
    take(cfg, "beta", merged.beta);
    take(cfg, "bits", merged.bits);
    take(cfg, "delta", merged.delta);
    take(cfg, "budget", merged.budget);
    take(cfg, "target-mse", merged.target_mse);
    take(cfg, "target-psnr", merged.target_psnr);
    if (cfg.contains("gamma")) {
      const json& g = cfg["gamma"];
      if (g.is_number_integer()) {
        merged.gammas = {g.get<int>()};
      } else {
        take(cfg, "gamma", merged.gammas);
      }
    }
    take(cfg, "z-cap", merged.z_cap);
    take(cfg, "budgets", merged.budgets);
    take(cfg, "measurements", merged.measurements);
    take(cfg, "input", merged.input);
    take(cfg, "output", merged.output);
    take(cfg, "format", merged.format);
  }

  const RunConfig& f = flags.config;
  if (flags.given("alpha")) merged.alpha = f.alpha;
  if (flags.given("beta")) merged.beta = f.beta;
  if (flags.given("bits")) merged.bits = f.bits;
  if (flags.given("delta")) merged.delta = f.delta;
  if (flags.given("budget")) merged.budget = f.budget;
  if (flags.given("target-mse")) merged.target_mse = f.target_mse;
  if (flags.given("target-psnr")) merged.target_psnr = f.target_psnr;
  if (flags.given("gamma")) merged.gammas = f.gammas;
  if (flags.given("z-cap")) merged.z_cap = f.z_cap;
  if (flags.given("budgets")) merged.budgets = f.budgets;
  if (flags.given("measurements")) merged.measurements = f.measurements;
  if (flags.given("input")) merged.input = f.input;
  if (flags.given("output")) merged.output = f.output;
  if (flags.given("format")) merged.format = f.format;
  if (!merged.format.empty() && merged.format != "json" && merged.format != "csv") {
    throw UsageError("--format: expected json or csv, got '" + merged.format + "'");
  }
  return merged;
}

double require(const std::optional<double>& value, const char* flag) {
  if (!value) throw UsageError(std::string(flag) + " is required");
  return *value;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_or(const RunConfig& c, const char* fallback) {
  return c.format.empty() ? fallback : c.format;
}

void emit_json(std::ostream& out, const nlohmann::ordered_json& doc) { out << doc.dump(2) << '\n'; }

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BerModel model(c.alpha, c.beta);
  const DeviceParams params(c.bits, c.delta);
  const double budget = require(c.budget, "--budget");
  const SolveReport report = solve(model, params, budget);
  if (format_or(c, "json") == "csv") {
    out << "bit,interval_s\n";
    for (int b = 0; b < params.bits(); ++b) {
      out << b << ',' << fmt17(report.plan.intervals[static_cast<std::size_t>(b)])
          << '\n';
    }
  } else {
    emit_json(out, to_json(report, model, params));
  }
  err << "solve: budget " << budget << " -> power " << report.power << ", MSE "
      << report.mse << ", PSNR " << report.psnr_db << " dB, nu " << report.nu
      << (report.trivial ? " (all intervals at delta)" : "") << '\n';
  return kOk;
}

int cmd_solve_discrete(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BerModel model(c.alpha, c.beta);
  if (c.gammas.size() > 1) {
    throw UsageError("--gamma: solve-discrete takes a single value");
  }
  const int gamma = c.gammas.empty() ? 1 : c.gammas.front();
  const DeviceParams params(c.bits, c.delta, gamma);
  const double budget = require(c.budget, "--budget");
  const int z_cap = c.z_cap ? *c.z_cap : default_z_cap(model, params);
  const DiscreteSolveReport report = solve_discrete(model, params, budget, z_cap);
  if (format_or(c, "json") == "csv") {
    out << "bit,z,interval_s\n";
    const auto t = report.plan.intervals();
    for (std::size_t b = 0; b < t.size(); ++b) {
      out << b << ',' << report.plan.z[b] << ',' << fmt17(t[b]) << '\n';
    }
  } else {
    emit_json(out, to_json(report, model, params, budget));
  }
  err << "solve-discrete: budget " << budget << ", step " << params.step()
      << " s -> power " << report.power << ", MSE " << report.mse << ", "
      << report.nodes_explored << " nodes"
      << (report.proven_optimal ? "" : " (node cap hit, not proven optimal)")
      << '\n';
  return kOk;
}

int cmd_fit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.measurements.empty()) throw UsageError("--measurements is required");
  std::ifstream in(c.measurements);
  if (!in) {
    throw UsageError("--measurements: cannot open '" + c.measurements + "'");
  }
  const auto data = read_measurements_csv(in);
  const FitResult fit = fit_ber_model(data);
  if (format_or(c, "json") == "csv") {
    out << "alpha,beta,r_squared\n"
        << fmt17(fit.model.alpha()) << ',' << fmt17(fit.model.beta()) << ','
        << fmt17(fit.r_squared) << '\n';
  } else {
    auto doc = to_json(fit);
    doc["meta"] = {{"measurements", data.size()}, {"space", "log"}};
    emit_json(out, doc);
  }
  err << "fit: " << data.size() << " points -> alpha " << fit.model.alpha()
      << ", beta " << fit.model.beta() << ", r^2 " << fit.r_squared << '\n';
  return kOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BerModel model(c.alpha, c.beta);
  const DeviceParams params(c.bits, c.delta);
  const auto budgets = parse_budgets(c.budgets);
  SweepOptions options;
  if (c.z_cap) {
    if (*c.z_cap < 1) throw UsageError("--z-cap must be >= 1");
    options.z_cap = *c.z_cap;
  }
  const auto rows = run_sweep(model, params, budgets, c.gammas, options);
  if (format_or(c, "csv") == "json") {
    emit_json(out, to_json(std::span<const SweepRow>(rows)));
  } else {
    write_sweep_csv(out, rows, params.bits(), c.gammas);
  }
  int infeasible = 0;
  for (const auto& row : rows) {
    for (const auto& cell : row.discrete) infeasible += cell.mse ? 0 : 1;
  }
  err << "sweep: " << rows.size() << " budgets, " << c.gammas.size()
      << " discrete step sizes";
  if (infeasible > 0) err << ", " << infeasible << " infeasible discrete cells";
  err << '\n';
  return kOk;
}

int cmd_savings(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const BerModel model(c.alpha, c.beta);
  const DeviceParams params(c.bits, c.delta);
  if (c.target_mse && c.target_psnr) {
    throw UsageError("--target-mse and --target-psnr are mutually exclusive");
  }
  if (!c.target_mse && !c.target_psnr) {
    throw UsageError("--target-mse or --target-psnr is required");
  }
  const double target =
      c.target_mse ? *c.target_mse : mse_for_psnr(*c.target_psnr, params.bits());
  const double p_opt =
      min_power_for_mse(model, params, target, AllocationMethod::kOptimal);
  const double p_uni =
      min_power_for_mse(model, params, target, AllocationMethod::kUniform);
  const double savings = 1.0 - p_opt / p_uni;
  const double target_psnr = psnr(target, params.bits());
  if (format_or(c, "json") == "csv") {
    out << "target_mse,target_psnr_db,power_optimal,power_uniform,savings\n"
        << fmt17(target) << ',' << fmt17(target_psnr) << ',' << fmt17(p_opt)
        << ',' << fmt17(p_uni) << ',' << fmt17(savings) << '\n';
  } else {
    emit_json(out, {{"target_mse", target},
                    {"target_psnr_db", number_or_null(target_psnr)},
                    {"power_optimal", p_opt},
                    {"power_uniform", p_uni},
                    {"savings", savings},
                    {"meta", {{"parameters", parameters_json(model, params)}}}});
  }
  err << "savings: target MSE " << target << " (" << target_psnr
      << " dB): optimal power " << p_opt << ", uniform power " << p_uni << ", "
      << std::fixed << std::setprecision(1) << 100.0 * savings << "% saved\n";
  return kOk;
}

int cmd_verify(const RunConfig& c, const FlagValues& flags, std::istream& in_default,
               std::ostream& out, std::ostream& err) {
  std::string text;
  if (c.input.empty()) {
    std::ostringstream ss;
    ss << in_default.rdbuf();
    text = ss.str();
  } else {
    text = read_file(c.input, "--input");
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("--input: malformed JSON: ") + e.what());
  }

  RunConfig merged = c;
  SolveReport report;
  try {
    const json& p = doc.at("meta").at("parameters");
    if (!flags.given("alpha")) merged.alpha = p.at("alpha").get<double>();
    if (!flags.given("beta")) merged.beta = p.at("beta").get<double>();
    if (!flags.given("bits")) merged.bits = p.at("bits").get<int>();
    if (!flags.given("delta")) merged.delta = p.at("delta").get<double>();
    if (!flags.given("budget")) merged.budget = p.at("budget").get<double>();
    report.plan.intervals = doc.at("plan").at("intervals").get<std::vector<double>>();
    report.nu = doc.at("nu").get<double>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("--input: not a solve report: ") + e.what());
  }
  const BerModel model(merged.alpha, merged.beta);
  const DeviceParams params(merged.bits, merged.delta);
  if (report.plan.bits() != params.bits()) {
    throw DomainError("--input: plan has " + std::to_string(report.plan.bits()) +
                      " intervals, expected " + std::to_string(params.bits()));
  }
  for (double t : report.plan.intervals) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DomainError("--input: intervals must be finite and > 0");
    }
  }
  const double budget = *merged.budget;
  if (!(budget > 0.0)) throw DomainError("budget must be > 0");
  const KktReport kkt = verify_kkt(model, params, budget, report);
  const double worst = kkt.max_residual();
  emit_json(out, {{"kkt", to_json(kkt)},
                  {"max_residual", worst},
                  {"certified", worst <= kCertifyThreshold},
                  {"power", refresh_power(report.plan)},
                  {"mse", word_mse(model, report.plan)},
                  {"meta", {{"threshold", kCertifyThreshold}}}});
  err << "verify: max scaled KKT residual " << worst
      << (worst <= kCertifyThreshold ? " (certified)" : " (NOT certified)") << '\n';
  return kOk;
}

}  // namespace

std::vector<double> parse_budgets(const std::string& grid) {
  const auto first = grid.find(':');
  if (first != std::string::npos) {
    const auto second = grid.find(':', first + 1);
    if (second == std::string::npos) {
      throw UsageError("--budgets: expected min:max:count, got '" + grid + "'");
    }
    std::string count_text = grid.substr(second + 1);
    if (count_text.size() > 4 &&
        count_text.compare(count_text.size() - 4, 4, "-log") == 0) {
      count_text.resize(count_text.size() - 4);
    }
    double lo = 0.0, hi = 0.0;
    int count = 0;
    try {
      std::size_t used = 0;
      lo = std::stod(grid.substr(0, first), &used);
      if (used != first) throw std::invalid_argument("min");
      const std::string hi_text = grid.substr(first + 1, second - first - 1);
      hi = std::stod(hi_text, &used);
      if (used != hi_text.size()) throw std::invalid_argument("max");
      count = std::stoi(count_text, &used);
      if (used != count_text.size()) throw std::invalid_argument("count");
    } catch (const std::logic_error&) {
      throw UsageError("--budgets: cannot parse '" + grid + "'");
    }
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
      throw UsageError("--budgets: need 0 < min <= max and count >= 1");
    }
    return log_spaced_budgets(lo, hi, count);
  }

  std::istringstream lines(read_file(grid, "--budgets"));
  std::vector<double> budgets;
  std::string line;
  while (std::getline(lines, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = field.find_last_not_of(" \t\r");
      const std::string token = field.substr(b, e - b + 1);
      double value = 0.0;
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw UsageError("--budgets: bad number '" + token + "' in " + grid);
      }
      budgets.push_back(value);
    }
  }
  if (budgets.empty()) throw UsageError("--budgets: no budgets in " + grid);
  std::sort(budgets.begin(), budgets.end());
  return budgets;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-bit refresh interval optimizer", "refresh_opt"};
  app.require_subcommand(1);

  FlagValues solve_f, discrete_f, fit_f, sweep_f, savings_f, verify_f;

  auto* solve_cmd = app.add_subcommand("solve", "optimal continuous intervals");
  add_model_flags(*solve_cmd, solve_f);
  add_budget_flag(*solve_cmd, solve_f);

  auto* discrete_cmd =
      app.add_subcommand("solve-discrete", "optimal intervals on a step grid");
  add_model_flags(*discrete_cmd, discrete_f);
  add_budget_flag(*discrete_cmd, discrete_f);
  add_gamma_flags(*discrete_cmd, discrete_f);

  auto* fit_cmd = app.add_subcommand("fit", "fit the BER model to measurements");
  add_model_flags(*fit_cmd, fit_f);
  fit_f.options.emplace_back(
      "measurements", fit_cmd->add_option("--measurements",
                                          fit_f.config.measurements,
                                          "CSV with header interval_s,ber"));

  auto* sweep_cmd =
      app.add_subcommand("sweep", "optimal vs uniform vs discrete over budgets");
  add_model_flags(*sweep_cmd, sweep_f);
  add_gamma_flags(*sweep_cmd, sweep_f);
  sweep_f.options.emplace_back(
      "budgets", sweep_cmd->add_option("--budgets", sweep_f.config.budgets,
                                       "file or min:max:count (log-spaced)"));

  auto* savings_cmd =
      app.add_subcommand("savings", "power saved over uniform at a target");
  add_model_flags(*savings_cmd, savings_f);
  savings_f.options.emplace_back(
      "target-mse", savings_cmd->add_option("--target-mse",
                                            savings_f.config.target_mse));
  savings_f.options.emplace_back(
      "target-psnr", savings_cmd->add_option("--target-psnr",
                                             savings_f.config.target_psnr));

  auto* verify_cmd =
      app.add_subcommand("verify", "recheck KKT conditions of a solve report");
  add_model_flags(*verify_cmd, verify_f);
  add_budget_flag(*verify_cmd, verify_f);
  verify_f.options.emplace_back(
      "input", verify_cmd->add_option("--input", verify_f.config.input,
                                      "solve JSON report (default stdin)"));

  std::vector<std::string> argv_store;
  argv_store.emplace_back("refresh_opt");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  const std::vector<std::pair<CLI::App*, FlagValues*>> table = {
      {solve_cmd, &solve_f},     {discrete_cmd, &discrete_f},
      {fit_cmd, &fit_f},         {sweep_cmd, &sweep_f},
      {savings_cmd, &savings_f}, {verify_cmd, &verify_f}};

  try {
    for (const auto& [cmd, flags] : table) {
      if (!cmd->parsed()) continue;
      flags->config.command = cmd->get_name();
      const RunConfig config = merge(*flags);

      std::ofstream file;
      std::ostringstream buffer;
      std::ostream& sink = config.output.empty() ? out : buffer;

      int code = kOk;
      const std::string& name = config.command;
      if (name == "solve") code = cmd_solve(config, sink, err);
      else if (name == "solve-discrete") code = cmd_solve_discrete(config, sink, err);
      else if (name == "fit") code = cmd_fit(config, sink, err);
      else if (name == "sweep") code = cmd_sweep(config, sink, err);
      else if (name == "savings") code = cmd_savings(config, sink, err);
      else code = cmd_verify(config, *flags, std::cin, sink, err);

      if (!config.output.empty()) {
        file.open(config.output);
        if (!file) throw UsageError("--output: cannot write '" + config.output + "'");
        file << buffer.str();
      }
      return code;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  }
  return kUsage;
}

}  // namespace refresh::cli
