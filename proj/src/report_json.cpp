#include "refresh/report_json.hpp"

#include <cmath>

namespace refresh {

using json = nlohmann::ordered_json;

json number_or_null(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

json parameters_json(const BerModel& model, const DeviceParams& params) {
  return {{"alpha", model.alpha()},
          {"beta", model.beta()},
          {"bits", params.bits()},
          {"delta", params.delta()},
          {"gamma", params.gamma()}};
}

json to_json(const KktReport& kkt) {
  return {{"stationarity_residuals", kkt.stationarity_residuals},
          {"lambda", kkt.lambda},
          {"complementary_slackness_power", kkt.complementary_slackness_power},
          {"complementary_slackness_bounds", kkt.complementary_slackness_bounds},
          {"primal_power_violation", kkt.primal_power_violation},
          {"primal_bound_violation", kkt.primal_bound_violation},
          {"max_residual", kkt.max_residual()}};
}

json to_json(const SolveReport& report, const BerModel& model,
             const DeviceParams& params) {
  json parameters = parameters_json(model, params);
  parameters["budget"] = report.budget;
  return {{"plan", {{"intervals", report.plan.intervals}}},
          {"nu", report.nu},
          {"power", report.power},
          {"mse", report.mse},
          {"psnr_db", number_or_null(report.psnr_db)},
          {"kkt", to_json(report.kkt)},
          {"meta",
           {{"solver", "continuous"},
            {"iterations", report.bisection_iterations},
            {"trivial", report.trivial},
            {"parameters", parameters}}}};
}

json to_json(const DiscreteSolveReport& report, const BerModel& model,
             const DeviceParams& params, double budget) {
  json parameters = parameters_json(model, params);
  parameters["budget"] = budget;
  parameters["z_cap"] = report.plan.z_cap;
  return {{"plan",
           {{"z", report.plan.z},
            {"step", report.plan.step},
            {"z_cap", report.plan.z_cap},
            {"intervals", report.plan.intervals()}}},
          {"power", report.power},
          {"mse", report.mse},
          {"psnr_db", number_or_null(report.psnr_db)},
          {"root_relaxation_mse", report.root_relaxation_mse},
          {"relaxation_gap", report.relaxation_gap},
          {"meta",
           {{"solver", "branch_and_bound"},
            {"nodes_explored", report.nodes_explored},
            {"proven_optimal", report.proven_optimal},
            {"parameters", parameters}}}};
}

json to_json(const FitResult& fit) {
  return {{"alpha", fit.model.alpha()},
          {"beta", fit.model.beta()},
          {"r_squared", fit.r_squared},
          {"residuals", fit.residuals}};
}

json to_json(std::span<const SweepRow> rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json discrete = json::array();
    for (const auto& cell : row.discrete) {
      json c = {{"gamma", cell.gamma},
                {"mse", cell.mse ? json(*cell.mse) : json(nullptr)}};
      if (!cell.reason.empty()) c["reason"] = cell.reason;
      discrete.push_back(std::move(c));
    }
    out.push_back({{"budget", row.budget},
                   {"power_optimal", row.power_optimal},
                   {"mse_optimal", row.mse_optimal},
                   {"psnr_optimal_db", number_or_null(row.psnr_optimal_db)},
                   {"power_uniform", row.power_uniform},
                   {"mse_uniform", row.mse_uniform},
                   {"psnr_uniform_db", number_or_null(row.psnr_uniform_db)},
                   {"nu", row.nu},
                   {"intervals", row.intervals},
                   {"discrete", std::move(discrete)}});
  }
  return out;
}

}  // namespace refresh
