#pragma once

#include <span>
#include <vector>

namespace refresh {

// Exponential error-rate law: ber(t) = alpha * exp(beta * t).
class BerModel {
 public:
  // Throws DomainError unless both parameters are finite and positive.
  BerModel(double alpha, double beta);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  friend bool operator==(const BerModel&, const BerModel&) = default;

 private:
  double alpha_;
  double beta_;
};

// Word width, minimum refresh interval (seconds) and the integer multiplier
// gamma that sets the discrete step size gamma * delta.
class DeviceParams {
 public:
  static constexpr int kMaxBits = 64;
  static constexpr double kDefaultDelta = 0.064;

  DeviceParams(int bits, double delta, int gamma = 1);

  int bits() const { return bits_; }
  double delta() const { return delta_; }
  int gamma() const { return gamma_; }
  double step() const { return gamma_ * delta_; }

  DeviceParams with_gamma(int gamma) const { return {bits_, delta_, gamma}; }

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;

 private:
  int bits_;
  double delta_;
  int gamma_;
};

// Per-bit refresh intervals in seconds; index 0 is the LSB.
struct RefreshPlan {
  std::vector<double> intervals;

  int bits() const { return static_cast<int>(intervals.size()); }
  static RefreshPlan uniform(int bits, double interval) {
    return {std::vector<double>(static_cast<std::size_t>(bits), interval)};
  }
};

// Throws DomainError if the plan length differs from params.bits() or any
// interval is below delta.
void validate_plan(const RefreshPlan& plan, const DeviceParams& params);

// Place-value weight 4^b of bit b, exact in double for b < 64.
double bit_weight(int b);

struct BitErrorRate {
  double value;
  // Set when the value exceeds 0.5, past where the fitted law is trusted.
  bool beyond_model_validity;
};

BitErrorRate bit_error_rate(const BerModel& model, double interval);

// Normalized refresh power, sum of 1/t_b.
double refresh_power(std::span<const double> intervals);
inline double refresh_power(const RefreshPlan& plan) {
  return refresh_power(plan.intervals);
}

// Word mean squared error, sum of 4^b * ber(t_b).
double word_mse(const BerModel& model, std::span<const double> intervals);
inline double word_mse(const BerModel& model, const RefreshPlan& plan) {
  return word_mse(model, plan.intervals);
}

// MSE of the all-delta plan, ((4^B - 1) / 3) * alpha * exp(beta * delta).
double min_mse(const BerModel& model, const DeviceParams& params);

// Power of the all-delta plan, B / delta.
double max_power(const DeviceParams& params);

// 10 log10((2^B - 1)^2 / mse). mse == 0 gives +infinity; mse < 0 throws.
double psnr(double mse, int bits);

// Inverse of psnr at fixed word width.
double mse_for_psnr(double psnr_db, int bits);

}  // namespace refresh
