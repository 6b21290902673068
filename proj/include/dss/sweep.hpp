#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dss/sim.hpp"

namespace dss::sim {

struct SweepResult {
    std::uint64_t seed = 0;
    RunResult run;
};

// Runs the base config once per seed. Results are ordered like `seeds`
// regardless of execution order; each run is independently deterministic,
// so the parallel and serial paths produce identical results.
std::vector<SweepResult> run_sweep(const SimConfig& base, std::span<const std::uint64_t> seeds,
                                   bool parallel = true);

// Plain-loop reference the parallel path is checked against.
std::vector<SweepResult> run_sweep_serial(const SimConfig& base,
                                          std::span<const std::uint64_t> seeds);

}  // namespace dss::sim
