#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dss/ledger.hpp"
#include "dss/node.hpp"
#include "dss/registry.hpp"
#include "dss/thermal.hpp"

namespace dss::sim {

struct DoorEvent {
    int node_id = 0;
    double t_h = 0.0;
    double duration_s = 0.0;
};

// Full description of one deterministic run. Identical configs (seed
// included) give byte-identical traces.
struct SimConfig {
    int n_nodes = 1;
    double duration_h = 168.0;
    double tick_h = 1.0 / 60.0;  // freezer integration substep
    double loss_prob = 0.0;
    std::uint64_t seed = 1;
    node::DutyCycleConfig duty_cycle;
    node::BatteryState battery;
    double cold_capacity_factor = 1.0;  // capacity derating at cabinet temperature
    thermal::FreezerParams freezer;
    thermal::SensorSpec sensor;
    bool sensor_noise = true;
    ledger::ValidityPolicy policy;
    node::FlushPolicy flush;
    double draw_period_h = 0.0;  // 0 disables draws
    std::uint64_t initial_fund = 0;
    std::string fund_address = "sponsor";
    std::vector<DoorEvent> door_events;
    std::map<int, node::DutyCycleConfig> duty_overrides;
    std::map<int, thermal::FreezerParams> freezer_overrides;

    void validate() const;  // throws std::invalid_argument
};

struct NodeSummary {
    int node_id = 0;
    double drawn_mah = 0.0;
    std::optional<double> death_h;

    bool operator==(const NodeSummary&) const = default;
};

struct LotteryOutcome {
    std::uint64_t tick = 0;
    std::string winner;
    std::uint64_t amount = 0;

    bool operator==(const LotteryOutcome&) const = default;
};

struct SimSummary {
    std::uint64_t sent = 0;       // flush transmissions attempted
    std::uint64_t delivered = 0;  // survived the lossy link
    std::uint64_t accepted = 0;   // entered the draw
    std::uint64_t rejected = 0;   // delivered but turned away
    std::vector<NodeSummary> nodes;  // sorted by id
    std::vector<LotteryOutcome> draws;

    std::string render() const;
    static SimSummary parse(std::istream& in);
    static SimSummary parse_text(const std::string& text);

    bool operator==(const SimSummary&) const = default;
};

struct RunResult {
    std::string trace;
    SimSummary summary;
    std::vector<int> active_nodes;  // nodes with a valid report inside their window at the end
};

// Runs the network: every node sleeps, wakes, samples its freezer, and
// transmits packed readings into the shared ledger over a lossy link.
// Row kinds in the trace: N (node phase), F (freezer sample), L (ledger
// record).
RunResult run(const SimConfig& config);

// Recomputes the run summary from a trace alone. Throws dss::ParseError
// (with line number) on malformed or truncated traces.
SimSummary replay(std::istream& in);
SimSummary replay_text(const std::string& text);

}  // namespace dss::sim
