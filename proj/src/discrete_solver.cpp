#include "refresh/discrete_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "refresh/errors.hpp"

namespace refresh {

namespace {

constexpr int kMaxBruteForceBits = 4;
constexpr int kMaxBruteForceCap = 40;
// Relaxed step counts this close to an integer are treated as integral.
constexpr double kIntegralityTolerance = 1e-9;
// A node is pruned only when its bound is clearly above the incumbent, so
// nodes that could hold an equal-MSE, lexicographically smaller plan survive.
constexpr double kPruneTolerance = 1e-8;

bool within_budget(double power, double budget) {
  return power <= budget * (1.0 + kFeasibilityTolerance);
}

void check_instance(const DeviceParams& params, double budget, int z_cap) {
  if (!std::isfinite(budget) || budget <= 0.0) {
    throw DomainError("power budget must be finite and > 0, got " +
                      std::to_string(budget));
  }
  if (z_cap < 1) {
    throw DomainError("z_cap must be >= 1, got " + std::to_string(z_cap));
  }
  const std::vector<int> slowest(static_cast<std::size_t>(params.bits()), z_cap);
  const double min_power = discrete_power(slowest, params.step());
  if (!within_budget(min_power, budget)) {
    throw InfeasibleError(
        "no discrete plan meets budget " + std::to_string(budget) +
            " with z_cap " + std::to_string(z_cap) +
            "; minimum achievable power is " + std::to_string(min_power),
        min_power);
  }
}

struct Incumbent {
  std::vector<int> z;
  double mse = std::numeric_limits<double>::infinity();

  void offer(const std::vector<int>& candidate, double candidate_mse) {
    if (candidate_mse < mse ||
        (candidate_mse == mse && !z.empty() && candidate < z)) {
      z = candidate;
      mse = candidate_mse;
    }
  }
};

struct Node {
  std::vector<int> lower;
  std::vector<int> upper;
  std::vector<double> relaxed;  // t_b / step at the relaxation optimum
  double bound;
  std::int64_t sequence;
};

struct WorseBound {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.sequence > b.sequence;
  }
};

DiscreteSolveReport finish(const BerModel& model, const DeviceParams& params,
                           std::vector<int> z, int z_cap, double root_mse) {
  DiscreteSolveReport report;
  report.plan = {std::move(z), params.step(), z_cap};
  report.power = discrete_power(report.plan.z, params.step());
  report.mse = discrete_mse(model, report.plan.z, params.step());
  report.psnr_db = psnr(report.mse, params.bits());
  report.root_relaxation_mse = root_mse;
  report.relaxation_gap = report.mse - root_mse;
  return report;
}

}  // namespace

std::vector<double> DiscretePlan::intervals() const {
  std::vector<double> t(z.size());
  for (std::size_t b = 0; b < z.size(); ++b) t[b] = step * z[b];
  return t;
}

double discrete_power(std::span<const int> z, double step) {
  double power = 0.0;
  for (int zb : z) power += 1.0 / (step * zb);
  return power;
}

double discrete_mse(const BerModel& model, std::span<const int> z, double step) {
  double mse = 0.0;
  for (std::size_t b = 0; b < z.size(); ++b) {
    mse += bit_weight(static_cast<int>(b)) * model.alpha() *
           std::exp(model.beta() * step * z[b]);
  }
  return mse;
}

int default_z_cap(const BerModel& model, const DeviceParams& params) {
  const double cap = std::ceil(std::log(3.0 / model.alpha()) /
                               (model.beta() * params.step()));
  if (!(cap >= 1.0)) return 1;
  return cap > 1e9 ? 1'000'000'000 : static_cast<int>(cap);
}

SolveReport root_relaxation(const BerModel& model, const DeviceParams& params,
                            double budget, int z_cap) {
  check_instance(params, budget, z_cap);
  const auto bits = static_cast<std::size_t>(params.bits());
  const std::vector<double> lower(bits, params.step());
  const std::vector<double> upper(bits, params.step() * z_cap);
  return solve_boxed(model, params, budget, lower, upper);
}

DiscreteSolveReport solve_discrete(const BerModel& model,
                                   const DeviceParams& params, double budget,
                                   int z_cap, const DiscreteOptions& options) {
  check_instance(params, budget, z_cap);
  const auto bits = static_cast<std::size_t>(params.bits());
  const double step = params.step();

  std::int64_t sequence = 0;
  // Returns false when the box holds no feasible integer point.
  const auto relax = [&](std::vector<int> lower, std::vector<int> upper,
                         Node& out) {
    if (!within_budget(discrete_power(upper, step), budget)) return false;
    std::vector<double> lo(bits), hi(bits);
    for (std::size_t b = 0; b < bits; ++b) {
      lo[b] = step * lower[b];
      hi[b] = step * upper[b];
    }
    const SolveReport r = solve_boxed(model, params, budget, lo, hi);
    out.relaxed.resize(bits);
    for (std::size_t b = 0; b < bits; ++b) {
      out.relaxed[b] = r.plan.intervals[b] / step;
    }
    out.lower = std::move(lower);
    out.upper = std::move(upper);
    out.bound = r.mse;
    out.sequence = sequence++;
    return true;
  };

  Node root;
  relax(std::vector<int>(bits, 1), std::vector<int>(bits, z_cap), root);
  const double root_mse = root.bound;

  Incumbent best;
  std::priority_queue<Node, std::vector<Node>, WorseBound> open;
  open.push(std::move(root));

  std::int64_t explored = 0;
  bool closed = true;
  while (!open.empty()) {
    if (open.top().bound > best.mse * (1.0 + kPruneTolerance)) break;
    if (explored >= options.node_cap) {
      closed = false;
      break;
    }
    Node node = open.top();
    open.pop();
    ++explored;
    if (options.on_node) {
      options.on_node({node.lower, node.upper, node.bound});
    }

    // Snap near-integral step counts and round the rest up. Rounding up only
    // lengthens intervals, so the all-ceil plan is feasible whenever the
    // relaxation is; the snapped plan may not be and is checked.
    std::vector<int> snapped(bits), ceiled(bits);
    std::size_t branch_bit = bits;
    std::size_t nearest_bit = bits;
    double widest = 0.0;
    double widest_snapped = -1.0;
    for (std::size_t b = 0; b < bits; ++b) {
      const double zr = node.relaxed[b];
      const double nearest = std::round(zr);
      const double distance = std::fabs(zr - nearest);
      const bool integral =
          distance <= kIntegralityTolerance * std::max(1.0, zr);
      ceiled[b] = std::clamp(static_cast<int>(std::ceil(zr)), node.lower[b],
                             node.upper[b]);
      snapped[b] = integral ? std::clamp(static_cast<int>(nearest),
                                         node.lower[b], node.upper[b])
                            : ceiled[b];
      if (!integral && distance > widest) {
        widest = distance;
        branch_bit = b;
      }
      if (integral && zr != nearest && distance > widest_snapped) {
        widest_snapped = distance;
        nearest_bit = b;
      }
    }
    const bool snapped_feasible =
        within_budget(discrete_power(snapped, step), budget);
    if (snapped_feasible) {
      best.offer(snapped, discrete_mse(model, snapped, step));
    }
    if (ceiled != snapped && within_budget(discrete_power(ceiled, step), budget)) {
      best.offer(ceiled, discrete_mse(model, ceiled, step));
    }
    if (branch_bit == bits) {
      // Integral relaxation optimum: nothing better in this box.
      if (snapped_feasible || nearest_bit == bits) continue;
      // Snapping overshot the budget; split around the snapped value.
      branch_bit = nearest_bit;
    }

    const double zr = node.relaxed[branch_bit];
    const int down = static_cast<int>(std::floor(zr));
    const int up = down + 1;
    if (down >= node.lower[branch_bit]) {
      std::vector<int> upper = node.upper;
      upper[branch_bit] = down;
      Node child;
      if (relax(node.lower, std::move(upper), child)) open.push(std::move(child));
    }
    if (up <= node.upper[branch_bit]) {
      std::vector<int> lower = node.lower;
      lower[branch_bit] = up;
      Node child;
      if (relax(std::move(lower), node.upper, child)) open.push(std::move(child));
    }
  }

  if (best.z.empty()) {
    throw NumericError("branch-and-bound found no feasible plan within " +
                       std::to_string(options.node_cap) + " nodes");
  }
  DiscreteSolveReport report =
      finish(model, params, std::move(best.z), z_cap, root_mse);
  report.nodes_explored = explored;
  report.proven_optimal = closed;
  return report;
}

DiscreteSolveReport brute_force_discrete(const BerModel& model,
                                         const DeviceParams& params,
                                         double budget, int z_cap) {
  if (params.bits() > kMaxBruteForceBits || z_cap > kMaxBruteForceCap) {
    throw SizeError("brute force is limited to B <= 4 and z_cap <= 40 (got B=" +
                    std::to_string(params.bits()) +
                    ", z_cap=" + std::to_string(z_cap) + ")");
  }
  check_instance(params, budget, z_cap);
  const auto bits = static_cast<std::size_t>(params.bits());
  const double step = params.step();

  Incumbent best;
  std::int64_t visited = 0;
  // Odometer over {1..z_cap}^B in lexicographic order, last index fastest,
  // so the first minimum met is the lexicographically smallest.
  std::vector<int> z(bits, 1);
  while (true) {
    ++visited;
    if (within_budget(discrete_power(z, step), budget)) {
      const double mse = discrete_mse(model, z, step);
      if (mse < best.mse) {
        best.z = z;
        best.mse = mse;
      }
    }
    std::size_t b = bits;
    while (b > 0 && z[b - 1] == z_cap) z[--b] = 1;
    if (b == 0) break;
    ++z[b - 1];
  }

  const double root_mse = root_relaxation(model, params, budget, z_cap).mse;
  DiscreteSolveReport report =
      finish(model, params, std::move(best.z), z_cap, root_mse);
  report.nodes_explored = visited;
  report.proven_optimal = true;
  return report;
}

}  // namespace refresh
