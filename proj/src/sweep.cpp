#include "dss/sweep.hpp"

#include <exception>

namespace dss::sim {

std::vector<SweepResult> run_sweep_serial(const SimConfig& base,
                                          std::span<const std::uint64_t> seeds) {
    std::vector<SweepResult> results(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        SimConfig config = base;
        config.seed = seeds[i];
        results[i] = SweepResult{seeds[i], run(config)};
    }
    return results;
}

std::vector<SweepResult> run_sweep(const SimConfig& base, std::span<const std::uint64_t> seeds,
                                   bool parallel) {
#ifdef _OPENMP
    std::vector<SweepResult> results(seeds.size());
    std::exception_ptr failure;
    const std::int64_t n = static_cast<std::int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            SimConfig config = base;
            config.seed = seeds[static_cast<std::size_t>(i)];
            results[static_cast<std::size_t>(i)] =
                SweepResult{config.seed, run(config)};
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
#else
    (void)parallel;
    return run_sweep_serial(base, seeds);
#endif
}

}  // namespace dss::sim
