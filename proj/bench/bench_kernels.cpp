// Serial reference vs OpenMP kernels: wall time and agreement.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "refresh/calibration.hpp"
#include "refresh/lambert_w.hpp"
#include "refresh/sweep.hpp"

using h_clock = std::chrono::steady_clock;

template <typename F>
double seconds(F&& f) {
  const auto t0 = h_clock::now();
  f();
  return std::chrono::duration<double>(h_clock::now() - t0).count();
}

bool same_rows(const std::vector<refresh::SweepRow>& a,
               const std::vector<refresh::SweepRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].mse_optimal != b[i].mse_optimal || a[i].intervals != b[i].intervals)
      return false;
    for (std::size_t g = 0; g < a[i].discrete.size(); ++g) {
      if (a[i].discrete[g].mse != b[i].discrete[g].mse) return false;
    }
  }
  return true;
}

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  const std::size_t n = 1'000'000;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exponent(-6.0, 12.0);
  std::vector<double> x(n), w_serial(n), w_parallel(n);
  for (auto& v : x) v = std::pow(10.0, exponent(rng));

  const double t_ls = seconds([&] { refresh::lambert_w0_batch_serial(x, w_serial); });
  const double t_lp = seconds([&] { refresh::lambert_w0_batch(x, w_parallel); });
  std::printf("%-28s serial %8.4f s  parallel %8.4f s  speedup %5.2f  %s\n",
              "lambert_w0 x1e6", t_ls, t_lp, t_ls / t_lp,
              w_serial == w_parallel ? "identical" : "MISMATCH");

  const auto model = refresh::default_ber_model();
  const refresh::DeviceParams params(8, 0.064);
  const auto budgets = refresh::log_spaced_budgets(1.0, 125.0, 200);

  for (const std::vector<int>& gammas :
       {std::vector<int>{}, std::vector<int>{1, 15}}) {
    std::vector<refresh::SweepRow> serial, parallel;
    const double ts = seconds(
        [&] { serial = refresh::run_sweep_serial(model, params, budgets, gammas); });
    const double tp =
        seconds([&] { parallel = refresh::run_sweep(model, params, budgets, gammas); });
    std::printf("%-28s serial %8.4f s  parallel %8.4f s  speedup %5.2f  %s\n",
                gammas.empty() ? "sweep continuous x200" : "sweep +discrete g1,g15",
                ts, tp, ts / tp, same_rows(serial, parallel) ? "identical" : "MISMATCH");
  }
  return 0;
}
