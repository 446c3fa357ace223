#include "refresh/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "refresh/errors.hpp"

namespace refresh {

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > DeviceParams::kMaxBits) {
    throw DomainError("bits must be in [1, 64], got " + std::to_string(bits));
  }
}

double peak_squared(int bits) {
  const double peak = std::ldexp(1.0, bits) - 1.0;
  return peak * peak;
}

}  // namespace

BerModel::BerModel(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    throw DomainError("alpha must be finite and > 0, got " +
                      std::to_string(alpha));
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("beta must be finite and > 0, got " +
                      std::to_string(beta));
  }
}

DeviceParams::DeviceParams(int bits, double delta, int gamma)
    : bits_(bits), delta_(delta), gamma_(gamma) {
  check_bits(bits);
  if (!std::isfinite(delta) || delta <= 0.0) {
    throw DomainError("delta must be finite and > 0, got " +
                      std::to_string(delta));
  }
  if (gamma < 1) {
    throw DomainError("gamma must be >= 1, got " + std::to_string(gamma));
  }
}

void validate_plan(const RefreshPlan& plan, const DeviceParams& params) {
  if (plan.bits() != params.bits()) {
    throw DomainError("plan has " + std::to_string(plan.bits()) +
                      " intervals, expected " + std::to_string(params.bits()));
  }
  for (int b = 0; b < plan.bits(); ++b) {
    const double t = plan.intervals[static_cast<std::size_t>(b)];
    if (!(t >= params.delta()) || !std::isfinite(t)) {
      throw DomainError("interval t_" + std::to_string(b) + " = " +
                        std::to_string(t) + " is below delta");
    }
  }
}

double bit_weight(int b) { return std::ldexp(1.0, 2 * b); }

BitErrorRate bit_error_rate(const BerModel& model, double interval) {
  if (!std::isfinite(interval) || interval < 0.0) {
    throw DomainError("refresh interval must be finite and >= 0, got " +
                      std::to_string(interval));
  }
  const double p = model.alpha() * std::exp(model.beta() * interval);
  return {p, p > 0.5};
}

double refresh_power(std::span<const double> intervals) {
  double power = 0.0;
  for (double t : intervals) {
    if (!(t > 0.0)) {
      throw DomainError("refresh interval must be > 0, got " +
                        std::to_string(t));
    }
    power += 1.0 / t;
  }
  return power;
}

double word_mse(const BerModel& model, std::span<const double> intervals) {
  check_bits(static_cast<int>(intervals.size()));
  double mse = 0.0;
  for (std::size_t b = 0; b < intervals.size(); ++b) {
    mse += bit_weight(static_cast<int>(b)) * model.alpha() *
           std::exp(model.beta() * intervals[b]);
  }
  return mse;
}

double min_mse(const BerModel& model, const DeviceParams& params) {
  const double geometric = (bit_weight(params.bits()) - 1.0) / 3.0;
  return geometric * model.alpha() * std::exp(model.beta() * params.delta());
}

double max_power(const DeviceParams& params) {
  return params.bits() / params.delta();
}

double psnr(double mse, int bits) {
  check_bits(bits);
  if (mse < 0.0 || std::isnan(mse)) {
    throw DomainError("psnr: mse must be >= 0, got " + std::to_string(mse));
  }
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak_squared(bits) / mse);
}

double mse_for_psnr(double psnr_db, int bits) {
  check_bits(bits);
  if (!std::isfinite(psnr_db)) {
    throw DomainError("psnr target must be finite");
  }
  return peak_squared(bits) / std::pow(10.0, psnr_db / 10.0);
}

}  // namespace refresh
