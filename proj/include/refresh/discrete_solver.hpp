#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "refresh/continuous_solver.hpp"
#include "refresh/metrics.hpp"

namespace refresh {

// Intervals restricted to multiples of step = gamma * delta: t_b = step * z_b.
struct DiscretePlan {
  std::vector<int> z;  // index 0 = LSB, each in [1, z_cap]
  double step = 0.0;
  int z_cap = 0;

  std::vector<double> intervals() const;
};

struct DiscreteSolveReport {
  DiscretePlan plan;
  double power = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
  std::int64_t nodes_explored = 0;
  double root_relaxation_mse = 0.0;
  double relaxation_gap = 0.0;  // mse - root_relaxation_mse
  bool proven_optimal = false;
};

// One explored branch-and-bound node, reported through DiscreteOptions.
struct NodeTrace {
  std::vector<int> lower;
  std::vector<int> upper;
  double relaxation_mse;
};

struct DiscreteOptions {
  std::int64_t node_cap = 1'000'000;
  std::function<void(const NodeTrace&)> on_node;
};

// Power and MSE of a step-count vector. Both solvers score candidates with
// these, so equal plans compare bit-identically.
double discrete_power(std::span<const int> z, double step);
double discrete_mse(const BerModel& model, std::span<const int> z, double step);

// ceil(ln(3 / alpha) / (beta * step)), at least 1.
int default_z_cap(const BerModel& model, const DeviceParams& params);

// Exact minimizer of the word MSE over z in {1..z_cap}^B with
// discrete_power(z) <= budget. Ties resolve to the lexicographically smallest
// z. Best-first branch-and-bound on the continuous box relaxation.
DiscreteSolveReport solve_discrete(const BerModel& model,
                                   const DeviceParams& params, double budget,
                                   int z_cap, const DiscreteOptions& options = {});

// Exhaustive enumeration, limited to B <= 4 and z_cap <= 40.
DiscreteSolveReport brute_force_discrete(const BerModel& model,
                                         const DeviceParams& params,
                                         double budget, int z_cap);

// Continuous relaxation over [step, step * z_cap]^B.
SolveReport root_relaxation(const BerModel& model, const DeviceParams& params,
                            double budget, int z_cap);

}  // namespace refresh
