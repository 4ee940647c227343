// Compares the OpenMP lanes against their serial references: bulk profiling
// of scaled variants and the default-grid coefficient search.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "convscale/analyzer.hpp"
#include "convscale/scaling.hpp"
#include "convscale/search.hpp"
#include "convscale/zoo.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<convscale::NetworkSpec> make_workload(int n) {
  const convscale::NetworkSpec base = convscale::efficientnet_b0();
  std::vector<convscale::NetworkSpec> specs;
  specs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double phi = 0.5 + 6.0 * i / n;
    specs.push_back(convscale::apply_scale(
        base, convscale::triple_from_compound({1.2, 1.1, 1.15, phi})));
  }
  return specs;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled\n");
#endif

  {
    const auto workload = make_workload(20000);
    const int n = static_cast<int>(workload.size());

    std::int64_t checksum_serial = 0;
    auto t0 = Clock::now();
    for (const auto& spec : workload)
      checksum_serial += convscale::profile_serial(spec).total_flops;
    const double serial_s = seconds_since(t0);

    // parallelism over specs; each candidate runs the serial kernel
    std::int64_t checksum_parallel = 0;
    t0 = Clock::now();
    std::vector<std::int64_t> flops(workload.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (int i = 0; i < n; ++i)
      flops[i] = convscale::profile_serial(workload[i]).total_flops;
    for (std::int64_t f : flops) checksum_parallel += f;
    const double parallel_s = seconds_since(t0);

    std::printf("bulk profile (%d specs): serial %.3fs, parallel %.3fs, speedup %.2fx, %s\n",
                n, serial_s, parallel_s, serial_s / parallel_s,
                checksum_serial == checksum_parallel ? "checksums equal" : "CHECKSUM MISMATCH");
  }

  {
    const convscale::NetworkSpec base = convscale::efficientnet_b0();
    convscale::SearchSpec spec;  // default ranges at a 5x finer step
    spec.alpha_range.step = spec.beta_range.step = spec.gamma_range.step = 0.01;
    spec.phi_for_eval = 2.0;
    const convscale::Evaluator evaluate = convscale::make_flops_objective_evaluator();

    auto t0 = Clock::now();
    const auto serial_result =
        convscale::grid_search(base, spec, evaluate, convscale::ExecutionMode::kSerial);
    const double serial_s = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel_result =
        convscale::grid_search(base, spec, evaluate, convscale::ExecutionMode::kParallel);
    const double parallel_s = seconds_since(t0);

    const bool same = serial_result.best == parallel_result.best &&
                      serial_result.best_score == parallel_result.best_score &&
                      serial_result.candidates_evaluated == parallel_result.candidates_evaluated;
    std::printf(
        "grid search (%lld candidates): serial %.3fs, parallel %.3fs, speedup %.2fx, %s\n",
        static_cast<long long>(serial_result.candidates_evaluated), serial_s, parallel_s,
        serial_s / parallel_s, same ? "results equal" : "RESULT MISMATCH");
  }
  return 0;
}
