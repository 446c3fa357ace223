#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "refresh/calibration.hpp"
#include "refresh/errors.hpp"

using namespace refresh;

namespace {

std::vector<RetentionMeasurement> synthesize(double alpha, double beta,
                                             const std::vector<double>& t) {
  std::vector<RetentionMeasurement> out;
  for (double ti : t) out.push_back({ti, alpha * std::exp(beta * ti)});
  return out;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("two-point fit is exact") {
  const auto data = synthesize(1e-6, 2.0, {1.0, 2.0});
  const FitResult fit = fit_ber_model(data);
  CHECK(rel(fit.model.alpha(), 1e-6) <= 1e-12);
  CHECK(rel(fit.model.beta(), 2.0) <= 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("noiseless round trip on 50 points") {
  std::vector<double> t;
  for (int i = 0; i < 50; ++i) t.push_back(0.1 + 0.15 * i);
  const FitResult fit = fit_ber_model(synthesize(2.7737e-7, 1.9508, t));
  CHECK(rel(fit.model.alpha(), 2.7737e-7) <= 1e-10);
  CHECK(rel(fit.model.beta(), 1.9508) <= 1e-10);
  for (double r : fit.residuals) CHECK(std::fabs(r) <= 1e-10);
}

TEST_CASE("shipped default model") {
  const BerModel m = default_ber_model();
  CHECK(m.alpha() == 2.7737e-7);
  CHECK(m.beta() == 1.9508);
}

TEST_CASE("fit rejects degenerate or non-physical data") {
  CHECK_THROWS_AS(fit_ber_model(synthesize(1e-6, 1.0, {1.0})), InsufficientDataError);
  CHECK_THROWS_AS(fit_ber_model(std::vector<RetentionMeasurement>{}),
                  InsufficientDataError);
  CHECK_THROWS_AS(
      fit_ber_model(std::vector<RetentionMeasurement>{{1.0, 1e-5}, {1.0, 2e-5}}),
      InsufficientDataError);
  CHECK_THROWS_AS(
      fit_ber_model(std::vector<RetentionMeasurement>{{1.0, 1e-5}, {2.0, 1e-6}}),
      NonPhysicalFitError);
  CHECK_THROWS_AS(
      fit_ber_model(std::vector<RetentionMeasurement>{{1.0, 1e-5}, {2.0, 1e-5}}),
      NonPhysicalFitError);
  CHECK_THROWS_AS(
      fit_ber_model(std::vector<RetentionMeasurement>{{1.0, 0.0}, {2.0, 1e-5}}),
      DomainError);
  CHECK_THROWS_AS(
      fit_ber_model(std::vector<RetentionMeasurement>{{-1.0, 1e-6}, {2.0, 1e-5}}),
      DomainError);
}

TEST_CASE("equivariance and normal-equation properties on noisy data") {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = oracles::log_uniform(rng, 1e-9, 1e-5);
    const double beta = std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    std::vector<RetentionMeasurement> data;
    for (int i = 0; i < 30; ++i) {
      const double t = 0.05 + 0.1 * i;
      data.push_back({t, std::min(0.5, alpha * std::exp(beta * t + noise(rng)))});
    }
    const FitResult base = fit_ber_model(data);

    double sum = 0.0, weighted = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      sum += base.residuals[i];
      weighted += base.residuals[i] * data[i].interval;
      scale += std::fabs(base.residuals[i]) * data[i].interval;
    }
    REQUIRE(std::fabs(sum) <= 1e-10 * data.size());
    REQUIRE(std::fabs(weighted) <= 1e-10 * std::max(1.0, scale));
    REQUIRE(base.r_squared >= 0.0);
    REQUIRE(base.r_squared <= 1.0);

    const double c = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
    auto scaled = data;
    for (auto& m : scaled) m.ber *= c;
    const FitResult fs = fit_ber_model(scaled);
    REQUIRE(rel(fs.model.alpha(), c * base.model.alpha()) <= 1e-10);
    REQUIRE(rel(fs.model.beta(), base.model.beta()) <= 1e-10);

    const double s = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    auto shifted = data;
    for (auto& m : shifted) m.interval += s;
    const FitResult fh = fit_ber_model(shifted);
    REQUIRE(rel(fh.model.beta(), base.model.beta()) <= 1e-10);
    REQUIRE(rel(fh.model.alpha(),
                base.model.alpha() * std::exp(-base.model.beta() * s)) <= 1e-10);
  }
}

TEST_CASE("measurement CSV") {
  std::istringstream good(
      "interval_s,ber\n0.064,3.1e-7\n\n1.5 , 5.0E-6\n2,0.0001\n");
  const auto rows = read_measurements_csv(good);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].interval == 1.5);
  CHECK(rows[1].ber == 5.0e-6);
  CHECK(rows[2].ber == 1e-4);

  std::istringstream bad_header("t,ber\n1,1e-6\n");
  CHECK_THROWS_AS(read_measurements_csv(bad_header), DomainError);
  std::istringstream bad_number("interval_s,ber\n1,abc\n");
  CHECK_THROWS_AS(read_measurements_csv(bad_number), DomainError);
  std::istringstream zero_ber("interval_s,ber\n1,0\n");
  CHECK_THROWS_AS(read_measurements_csv(zero_ber), DomainError);
  std::istringstream extra_field("interval_s,ber\n1,1e-6,3\n");
  CHECK_THROWS_AS(read_measurements_csv(extra_field), DomainError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_measurements_csv(empty), DomainError);
}
