#include "refresh/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "refresh/errors.hpp"

namespace refresh {

namespace {

void validate(const RetentionMeasurement& m, std::size_t index) {
  if (!std::isfinite(m.interval) || m.interval <= 0.0) {
    throw DomainError("measurement " + std::to_string(index) +
                      ": interval must be > 0");
  }
  if (!(m.ber > 0.0 && m.ber < 1.0)) {
    throw DomainError("measurement " + std::to_string(index) +
                      ": ber must lie in (0, 1), got " + std::to_string(m.ber));
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DomainError("measurements line " + std::to_string(line) +
                      ": cannot parse number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

FitResult fit_ber_model(std::span<const RetentionMeasurement> measurements) {
  if (measurements.size() < 2) {
    throw InsufficientDataError("fit needs at least 2 measurements, got " +
                                std::to_string(measurements.size()));
  }
  const auto n = static_cast<double>(measurements.size());
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    validate(measurements[i], i);
    mean_t += measurements[i].interval;
    mean_y += std::log(measurements[i].ber);
  }
  mean_t /= n;
  mean_y /= n;

  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (const auto& m : measurements) {
    const double dt = m.interval - mean_t;
    const double dy = std::log(m.ber) - mean_y;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt == 0.0) {
    throw InsufficientDataError("fit needs at least 2 distinct intervals");
  }
  const double beta = sty / stt;
  if (!(beta > 0.0)) {
    throw NonPhysicalFitError(
        "fitted beta = " + std::to_string(beta) +
        " <= 0; error rate must grow with the refresh interval");
  }
  const double log_alpha = mean_y - beta * mean_t;

  std::vector<double> residuals;
  residuals.reserve(measurements.size());
  double sse = 0.0;
  for (const auto& m : measurements) {
    const double r = std::log(m.ber) - (log_alpha + beta * m.interval);
    residuals.push_back(r);
    sse += r * r;
  }
  double r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  r_squared = std::clamp(r_squared, 0.0, 1.0);
  return {BerModel(std::exp(log_alpha), beta), r_squared, std::move(residuals)};
}

BerModel default_ber_model() { return BerModel(2.7737e-7, 1.9508); }

std::vector<RetentionMeasurement> read_measurements_csv(std::istream& in) {
  std::vector<RetentionMeasurement> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      if (row != "interval_s,ber") {
        throw DomainError("measurements: expected header 'interval_s,ber', got '" +
                          std::string(row) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos ||
        row.find(',', comma + 1) != std::string_view::npos) {
      throw DomainError("measurements line " + std::to_string(line_no) +
                        ": expected two comma-separated fields");
    }
    RetentionMeasurement m{parse_number(row.substr(0, comma), line_no),
                           parse_number(row.substr(comma + 1), line_no)};
    validate(m, out.size());
    out.push_back(m);
  }
  if (!header_seen) throw DomainError("measurements: empty input");
  return out;
}

}  // namespace refresh
