#pragma once

#include <istream>
#include <span>
#include <vector>

#include "refresh/metrics.hpp"

namespace refresh {

// One retention test point: bit error rate observed at a refresh interval.
struct RetentionMeasurement {
  double interval;  // seconds, > 0
  double ber;       // in (0, 1)
};

struct FitResult {
  BerModel model;
  double r_squared;               // in log space
  std::vector<double> residuals;  // ln(ber) - (ln(alpha) + beta * interval)
};

// Ordinary least squares of ln(ber) against the interval.
FitResult fit_ber_model(std::span<const RetentionMeasurement> measurements);

// alpha = 2.7737e-7, beta = 1.9508 (80 C retention data).
BerModel default_ber_model();

// Parses CSV with header `interval_s,ber`. Blank lines are skipped.
// Throws DomainError naming the line on malformed or out-of-range rows.
std::vector<RetentionMeasurement> read_measurements_csv(std::istream& in);

}  // namespace refresh
