#pragma once

#include <span>

#include "json.hpp"
#include "refresh/calibration.hpp"
#include "refresh/continuous_solver.hpp"
#include "refresh/discrete_solver.hpp"
#include "refresh/sweep.hpp"

namespace refresh {

nlohmann::ordered_json parameters_json(const BerModel& model, const DeviceParams& params);
nlohmann::ordered_json to_json(const KktReport& kkt);

// {plan, nu, power, mse, psnr_db, kkt, meta}; meta echoes the model,
// device parameters and budget so the report can be re-verified alone.
nlohmann::ordered_json to_json(const SolveReport& report, const BerModel& model,
                       const DeviceParams& params);
nlohmann::ordered_json to_json(const DiscreteSolveReport& report, const BerModel& model,
                       const DeviceParams& params, double budget);
nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(std::span<const SweepRow> rows);

// Infinite or NaN values become null.
nlohmann::ordered_json number_or_null(double value);

}  // namespace refresh
