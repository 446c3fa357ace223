#pragma once

#include <span>

namespace refresh {

struct LambertResult {
  double value = 0.0;   // w with w * exp(w) == x
  int iterations = 0;
  double residual = 0.0;  // |w * exp(w) - x|
};

// Principal branch W0 on x >= 0, by Halley iteration from log1p(x).
// Throws DomainError for negative or non-finite x and NumericError if the
// iteration fails to settle within 50 steps.
LambertResult lambert_w0(double x);

// Element-wise W0 over a batch. `out` must be the same length as `x`.
// The parallel version splits the batch across OpenMP threads; results are
// identical to the serial one element for element.
void lambert_w0_batch(std::span<const double> x, std::span<double> out);
void lambert_w0_batch_serial(std::span<const double> x, std::span<double> out);

}  // namespace refresh
