#include "refresh/lambert_w.hpp"

#include <cmath>
#include <cstddef>
#include <exception>
#include <string>

#include "refresh/errors.hpp"

namespace refresh {

namespace {

constexpr int kMaxIterations = 50;
constexpr double kStepTolerance = 1e-14;

void check_sizes(std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size()) {
    throw DomainError("lambert_w0_batch: input and output sizes differ");
  }
}

}  // namespace

LambertResult lambert_w0(double x) {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError("lambert_w0: argument must be finite and >= 0, got " +
                      std::to_string(x));
  }
  LambertResult result;
  if (x == 0.0) return result;

  double w = std::log1p(x);
  for (int it = 1; it <= kMaxIterations; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    // Halley: w -= f / (f' - f f'' / (2 f')), with f' = e^w (w+1),
    // f''/f' = (w+2)/(w+1).
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    result.iterations = it;
    if (std::fabs(step) <= kStepTolerance * (1.0 + std::fabs(w))) {
      result.value = w;
      result.residual = std::fabs(w * std::exp(w) - x);
      return result;
    }
  }
  throw NumericError("lambert_w0: no convergence after 50 Halley steps for x=" +
                     std::to_string(x));
}

void lambert_w0_batch_serial(std::span<const double> x, std::span<double> out) {
  check_sizes(x, out);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = lambert_w0(x[i]).value;
}

void lambert_w0_batch(std::span<const double> x, std::span<double> out) {
  check_sizes(x, out);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = lambert_w0(x[i]).value;
    } catch (...) {
#pragma omp critical(lambert_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace refresh
