#include "refresh/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <string>

#include "refresh/continuous_solver.hpp"
#include "refresh/discrete_solver.hpp"
#include "refresh/errors.hpp"

namespace refresh {

namespace {

constexpr double kMseTolerance = 1e-8;
constexpr int kMaxPowerSearchIterations = 400;

void check_sweep_input(std::span<const double> budgets,
                       std::span<const int> gammas) {
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!std::isfinite(budgets[i]) || budgets[i] <= 0.0) {
      throw DomainError("sweep budgets must be finite and > 0");
    }
    if (i > 0 && budgets[i] < budgets[i - 1]) {
      throw DomainError("sweep budgets must be sorted ascending");
    }
  }
  for (int g : gammas) {
    if (g < 1) throw DomainError("gamma must be >= 1, got " + std::to_string(g));
  }
}

SweepRow evaluate_row(const BerModel& model, const DeviceParams& params,
                      double budget, std::span<const int> gammas,
                      const SweepOptions& options) {
  SweepRow row;
  row.budget = budget;

  const SolveReport optimal = solve(model, params, budget);
  row.power_optimal = optimal.power;
  row.mse_optimal = optimal.mse;
  row.psnr_optimal_db = optimal.psnr_db;
  row.nu = optimal.nu;
  row.intervals = optimal.plan.intervals;

  const RefreshPlan uniform = uniform_plan_for_budget(params, budget);
  row.power_uniform = refresh_power(uniform);
  row.mse_uniform = word_mse(model, uniform);
  row.psnr_uniform_db = psnr(row.mse_uniform, params.bits());

  const double longest =
      *std::max_element(row.intervals.begin(), row.intervals.end());
  for (int gamma : gammas) {
    const DeviceParams stepped = params.with_gamma(gamma);
    DiscreteCell cell;
    cell.gamma = gamma;
    int z_cap = options.z_cap;
    if (z_cap == 0) {
      z_cap = std::max(default_z_cap(model, stepped),
                       static_cast<int>(std::ceil(longest / stepped.step())) + 1);
    }
    try {
      cell.mse = solve_discrete(model, stepped, budget, z_cap).mse;
    } catch (const InfeasibleError& e) {
      cell.reason = e.what();
    }
    row.discrete.push_back(std::move(cell));
  }
  return row;
}

void append_number(std::string& line, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  line += buf;
}

}  // namespace

RefreshPlan uniform_plan_for_budget(const DeviceParams& params, double budget) {
  if (!std::isfinite(budget) || budget <= 0.0) {
    throw DomainError("power budget must be finite and > 0, got " +
                      std::to_string(budget));
  }
  return RefreshPlan::uniform(params.bits(),
                              std::max(params.delta(), params.bits() / budget));
}

std::vector<SweepRow> run_sweep_serial(const BerModel& model,
                                       const DeviceParams& params,
                                       std::span<const double> budgets,
                                       std::span<const int> gammas,
                                       const SweepOptions& options) {
  check_sweep_input(budgets, gammas);
  std::vector<SweepRow> rows;
  rows.reserve(budgets.size());
  for (double budget : budgets) {
    rows.push_back(evaluate_row(model, params, budget, gammas, options));
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const BerModel& model, const DeviceParams& params,
                                std::span<const double> budgets,
                                std::span<const int> gammas,
                                const SweepOptions& options) {
  check_sweep_input(budgets, gammas);
  const auto n = static_cast<std::ptrdiff_t>(budgets.size());
  std::vector<SweepRow> rows(budgets.size());
  std::vector<std::exception_ptr> failures(budgets.size());
  // Discrete rows vary widely in cost, hence dynamic scheduling.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = evaluate_row(model, params, budgets[i], gammas, options);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  // Report the failure of the earliest budget, as the serial loop would.
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

std::vector<double> log_spaced_budgets(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi) || count < 1) {
    throw DomainError("log-spaced grid needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::exp(a + (b - a) * i / (count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

double min_power_for_mse(const BerModel& model, const DeviceParams& params,
                         double target_mse, AllocationMethod method) {
  if (!std::isfinite(target_mse) || target_mse <= 0.0) {
    throw DomainError("target MSE must be finite and > 0");
  }
  const double floor_mse = min_mse(model, params);
  if (target_mse < floor_mse) {
    throw UnreachableFidelityError(
        "target MSE " + std::to_string(target_mse) +
            " is below the minimum achievable MSE " + std::to_string(floor_mse),
        floor_mse);
  }
  const double p_max = max_power(params);
  if (target_mse == floor_mse) return p_max;

  if (method == AllocationMethod::kUniform) {
    const double t = std::log(3.0 * target_mse /
                              (model.alpha() * (bit_weight(params.bits()) - 1.0))) /
                     model.beta();
    return params.bits() / std::max(params.delta(), t);
  }

  const auto mse_at = [&](double budget) {
    return solve(model, params, budget).mse;
  };
  // Optimal MSE is nonincreasing in the budget: keep mse(hi) <= target < mse(lo).
  double hi = p_max;
  double lo = 0.5 * p_max;
  int guard = 0;
  while (mse_at(lo) <= target_mse) {
    hi = lo;
    lo *= 0.5;
    if (++guard > kMaxPowerSearchIterations) {
      throw NumericError("min_power_for_mse: bracket search failed");
    }
  }
  for (int it = 0; it < kMaxPowerSearchIterations; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double mse = mse_at(mid);
    if (mse <= target_mse) {
      hi = mid;
      if (target_mse - mse <= kMseTolerance * target_mse) return hi;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-15 * hi) return hi;
  }
  throw NumericError("min_power_for_mse: bisection did not converge");
}

double power_savings(const BerModel& model, const DeviceParams& params,
                     double target_mse) {
  const double optimal =
      min_power_for_mse(model, params, target_mse, AllocationMethod::kOptimal);
  const double uniform =
      min_power_for_mse(model, params, target_mse, AllocationMethod::kUniform);
  return 1.0 - optimal / uniform;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     int bits, std::span<const int> gammas) {
  std::string header =
      "budget,power_optimal,mse_optimal,psnr_optimal_db,power_uniform,"
      "mse_uniform,psnr_uniform_db,nu";
  for (int b = 0; b < bits; ++b) header += ",t_" + std::to_string(b);
  for (int g : gammas) header += ",mse_discrete_g" + std::to_string(g);
  out << header << '\n';

  std::string line;
  for (const auto& row : rows) {
    line.clear();
    for (double v : {row.budget, row.power_optimal, row.mse_optimal,
                     row.psnr_optimal_db, row.power_uniform, row.mse_uniform,
                     row.psnr_uniform_db, row.nu}) {
      if (!line.empty()) line += ',';
      append_number(line, v);
    }
    for (double t : row.intervals) {
      line += ',';
      append_number(line, t);
    }
    for (const auto& cell : row.discrete) {
      line += ',';
      if (cell.mse) append_number(line, *cell.mse);
    }
    out << line << '\n';
  }
}

}  // namespace refresh
