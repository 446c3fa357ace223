#pragma once

#include <span>
#include <vector>

#include "refresh/metrics.hpp"

namespace refresh {

// First-order optimality certificate for a solved plan. All residuals are
// scaled (see verify_kkt) so a single threshold applies across bits whose raw
// gradient magnitudes differ by orders of magnitude.
struct KktReport {
  std::vector<double> stationarity_residuals;
  std::vector<double> lambda;  // multipliers of t_b >= delta, all >= 0
  double complementary_slackness_power = 0.0;
  std::vector<double> complementary_slackness_bounds;
  double primal_power_violation = 0.0;   // max(0, P - budget) / budget
  double primal_bound_violation = 0.0;   // max_b max(0, delta - t_b) / delta

  double max_residual() const;
};

struct SolveReport {
  RefreshPlan plan;
  double budget = 0.0;
  double nu = 0.0;  // dual variable of the power constraint
  double power = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
  int bisection_iterations = 0;
  // The all-lower-bound plan already met the budget; nu is zero.
  bool trivial = false;
  KktReport kkt;
};

// Bisection settings shared by the continuous solvers.
inline constexpr double kPowerTolerance = 1e-10;   // relative power residual
inline constexpr double kDualWidthTolerance = 1e-14;
inline constexpr int kMaxBisectionIterations = 200;
// Slack allowed when testing sum(1/t) <= budget.
inline constexpr double kFeasibilityTolerance = 1e-12;

// Unclamped stationary interval of bit b at dual level nu,
// (2/beta) W0((beta/2) sqrt(nu / (4^b alpha beta))).
double stationary_interval(const BerModel& model, int bit, double nu);

// Interval assignment at a fixed dual level: max(delta, stationary_interval).
RefreshPlan intervals_for_dual(const BerModel& model, const DeviceParams& params,
                               double nu);

// Minimizes word MSE subject to sum(1/t_b) <= budget and t_b >= delta.
// Budgets at or above B/delta return the all-delta plan with nu = 0.
SolveReport solve(const BerModel& model, const DeviceParams& params,
                  double budget);

// Same objective and power constraint with per-bit bounds
// lower_b <= t_b <= upper_b (upper may be +infinity). Throws InfeasibleError
// when even the all-upper plan exceeds the budget.
SolveReport solve_boxed(const BerModel& model, const DeviceParams& params,
                        double budget, std::span<const double> lower,
                        std::span<const double> upper);

// Recomputes the KKT conditions of the delta-bounded problem for `report`.
// Never throws on large residuals; the caller judges them.
KktReport verify_kkt(const BerModel& model, const DeviceParams& params,
                     double budget, const SolveReport& report);

}  // namespace refresh
