#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "refresh/metrics.hpp"

namespace refresh {

struct DiscreteCell {
  int gamma = 1;
  std::optional<double> mse;  // absent when the instance was infeasible
  std::string reason;
};

struct SweepRow {
  double budget = 0.0;
  double power_optimal = 0.0;
  double mse_optimal = 0.0;
  double psnr_optimal_db = 0.0;
  double power_uniform = 0.0;
  double mse_uniform = 0.0;
  double psnr_uniform_db = 0.0;
  double nu = 0.0;
  std::vector<double> intervals;
  std::vector<DiscreteCell> discrete;  // one per requested gamma, same order
};

struct SweepOptions {
  // Fixed step-count cap for the discrete solves. Zero picks, per row,
  // max(default_z_cap, ceil(max continuous t_b / step) + 1).
  int z_cap = 0;
};

// Equal intervals t = max(delta, B / budget) for every bit.
RefreshPlan uniform_plan_for_budget(const DeviceParams& params, double budget);

// One row per budget, in input order. Rows are independent and evaluated in
// parallel; run_sweep_serial is the single-threaded reference and returns
// identical rows.
std::vector<SweepRow> run_sweep(const BerModel& model, const DeviceParams& params,
                                std::span<const double> budgets,
                                std::span<const int> gammas,
                                const SweepOptions& options = {});
std::vector<SweepRow> run_sweep_serial(const BerModel& model,
                                       const DeviceParams& params,
                                       std::span<const double> budgets,
                                       std::span<const int> gammas,
                                       const SweepOptions& options = {});

// `count` budgets log-spaced over [lo, hi], endpoints included.
std::vector<double> log_spaced_budgets(double lo, double hi, int count);

enum class AllocationMethod { kOptimal, kUniform };

// Smallest power budget whose plan reaches word MSE <= target_mse.
// Throws UnreachableFidelityError when target_mse < min_mse.
double min_power_for_mse(const BerModel& model, const DeviceParams& params,
                         double target_mse, AllocationMethod method);

// 1 - optimal power / uniform power at the same target MSE.
double power_savings(const BerModel& model, const DeviceParams& params,
                     double target_mse);

// Header plus one line per row, floats with 17 significant digits.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows,
                     int bits, std::span<const int> gammas);

}  // namespace refresh
