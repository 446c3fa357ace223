#include "refresh/continuous_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "refresh/errors.hpp"
#include "refresh/lambert_w.hpp"

namespace refresh {

namespace {

constexpr int kMaxBracketDoublings = 2100;

void check_budget(double budget) {
  if (!std::isfinite(budget) || budget <= 0.0) {
    throw DomainError("power budget must be finite and > 0, got " +
                      std::to_string(budget));
  }
}

bool within_budget(double power, double budget) {
  return power <= budget * (1.0 + kFeasibilityTolerance);
}

struct DualSearch {
  double nu = 0.0;
  int iterations = 0;
};

// Finds the dual level where power(nu) meets the budget. power(nu) must be
// nonincreasing, with power(0) > budget and power(inf) <= budget.
template <typename PowerAt>
DualSearch bisect_dual(PowerAt power_at, double budget) {
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!within_budget(power_at(hi), budget)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings || !std::isfinite(hi)) {
      throw NumericError("dual bracket search failed for budget " +
                         std::to_string(budget));
    }
  }

  DualSearch out;
  for (int it = 1; it <= kMaxBisectionIterations; ++it) {
    out.iterations = it;
    const double mid = 0.5 * (lo + hi);
    const double p = power_at(mid);
    if (std::fabs(p - budget) <= kPowerTolerance * budget) {
      out.nu = mid;
      return out;
    }
    if (p > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= kDualWidthTolerance * hi) {
      out.nu = hi;
      return out;
    }
  }
  throw NumericError("dual bisection did not converge in " +
                     std::to_string(kMaxBisectionIterations) + " iterations");
}

void fill_metrics(const BerModel& model, const DeviceParams& params,
                  SolveReport& report) {
  report.power = refresh_power(report.plan);
  report.mse = word_mse(model, report.plan);
  report.psnr_db = psnr(report.mse, params.bits());
}

}  // namespace

double stationary_interval(const BerModel& model, int bit, double nu) {
  const double a = model.alpha();
  const double b = model.beta();
  const double arg = 0.5 * b * std::sqrt(nu / (bit_weight(bit) * a * b));
  if (!std::isfinite(arg)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", nu);
    throw NumericError(std::string("dual level ") + buf +
                       " overflows the interval inversion");
  }
  return 2.0 / b * lambert_w0(arg).value;
}

RefreshPlan intervals_for_dual(const BerModel& model, const DeviceParams& params,
                               double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw DomainError("dual variable must be finite and >= 0, got " +
                      std::to_string(nu));
  }
  RefreshPlan plan = RefreshPlan::uniform(params.bits(), params.delta());
  if (nu == 0.0) return plan;
  for (int b = 0; b < params.bits(); ++b) {
    plan.intervals[static_cast<std::size_t>(b)] =
        std::max(params.delta(), stationary_interval(model, b, nu));
  }
  return plan;
}

SolveReport solve(const BerModel& model, const DeviceParams& params,
                  double budget) {
  check_budget(budget);
  SolveReport report;
  report.budget = budget;
  if (budget >= max_power(params)) {
    report.plan = RefreshPlan::uniform(params.bits(), params.delta());
    report.trivial = true;
  } else {
    const auto power_at = [&](double nu) {
      return refresh_power(intervals_for_dual(model, params, nu));
    };
    const DualSearch dual = bisect_dual(power_at, budget);
    report.nu = dual.nu;
    report.bisection_iterations = dual.iterations;
    report.plan = intervals_for_dual(model, params, dual.nu);
  }
  fill_metrics(model, params, report);
  report.kkt = verify_kkt(model, params, budget, report);
  return report;
}

SolveReport solve_boxed(const BerModel& model, const DeviceParams& params,
                        double budget, std::span<const double> lower,
                        std::span<const double> upper) {
  check_budget(budget);
  const auto bits = static_cast<std::size_t>(params.bits());
  if (lower.size() != bits || upper.size() != bits) {
    throw DomainError("box bounds must have one entry per bit");
  }
  for (std::size_t b = 0; b < bits; ++b) {
    if (!std::isfinite(lower[b]) || lower[b] < params.delta() ||
        std::isnan(upper[b]) || upper[b] < lower[b]) {
      throw DomainError("malformed box at bit " + std::to_string(b) +
                        ": need delta <= lower <= upper");
    }
  }
  double min_power = 0.0;
  for (double u : upper) min_power += 1.0 / u;
  if (!within_budget(min_power, budget)) {
    throw InfeasibleError("box is infeasible: smallest reachable power " +
                              std::to_string(min_power) + " exceeds budget " +
                              std::to_string(budget),
                          min_power);
  }

  const auto clamped = [&](double nu) {
    RefreshPlan plan{std::vector<double>(lower.begin(), lower.end())};
    if (nu == 0.0) return plan;
    for (std::size_t b = 0; b < bits; ++b) {
      const double t = stationary_interval(model, static_cast<int>(b), nu);
      plan.intervals[b] = std::clamp(t, lower[b], upper[b]);
    }
    return plan;
  };

  SolveReport report;
  report.budget = budget;
  if (refresh_power(lower) <= budget) {
    report.plan = clamped(0.0);
    report.trivial = true;
  } else {
    const DualSearch dual = bisect_dual(
        [&](double nu) { return refresh_power(clamped(nu)); }, budget);
    report.nu = dual.nu;
    report.bisection_iterations = dual.iterations;
    report.plan = clamped(dual.nu);
  }
  fill_metrics(model, params, report);
  return report;
}

double KktReport::max_residual() const {
  double worst = std::max({complementary_slackness_power,
                           primal_power_violation, primal_bound_violation});
  for (double r : stationarity_residuals) worst = std::max(worst, r);
  for (double r : complementary_slackness_bounds) worst = std::max(worst, r);
  return worst;
}

KktReport verify_kkt(const BerModel& model, const DeviceParams& params,
                     double budget, const SolveReport& report) {
  const auto& t = report.plan.intervals;
  const double nu = report.nu;
  const double a = model.alpha();
  const double b = model.beta();

  KktReport kkt;
  kkt.stationarity_residuals.resize(t.size());
  kkt.lambda.resize(t.size());
  kkt.complementary_slackness_bounds.resize(t.size());

  double power = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double ti = t[i];
    power += 1.0 / ti;
    const double marginal_mse = bit_weight(static_cast<int>(i)) * a * b *
                                std::exp(b * ti);
    // Gradient of the Lagrangian without the bound term; its positive part is
    // the bound multiplier.
    const double g = marginal_mse - nu / (ti * ti);
    kkt.lambda[i] = std::max(0.0, g);
    kkt.stationarity_residuals[i] = std::max(0.0, -g) / marginal_mse;
    kkt.complementary_slackness_bounds[i] =
        std::fabs(kkt.lambda[i] * (ti - params.delta())) / (marginal_mse * ti);
    kkt.primal_bound_violation = std::max(
        kkt.primal_bound_violation, std::max(0.0, params.delta() - ti) /
                                        params.delta());
  }
  kkt.primal_power_violation = std::max(0.0, power - budget) / budget;
  kkt.complementary_slackness_power =
      nu > 0.0 ? std::fabs(nu * (power - budget)) / (nu * budget) : 0.0;
  return kkt;
}

}  // namespace refresh
