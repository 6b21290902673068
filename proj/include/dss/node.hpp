#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dss/encoding.hpp"
#include "dss/ledger.hpp"
#include "dss/rng.hpp"
#include "dss/thermal.hpp"

namespace dss::node {

// Per-cycle charge accounting. `rounded` uses the published two-decimal
// phase figures (0.03 mAh boot, 0.09 mAh transmit) with matching rounded
// phase durations; `measured` multiplies the measured phase durations by
// the measured currents.
enum class ChargeModel { rounded, measured };

struct DutyCycleConfig {
    double sleep_hours = 0.73;
    double init_duration_h = 2400.0 / 3.6e6;  // 2400 ms boot and sensor init
    double init_current_ma = 50.0;
    double com_duration_h = 3160.0 / 3.6e6;  // 3160 ms connect and transmit
    double com_current_ma = 100.0;
    double sleep_current_ma = 0.01;  // ESP32 deep sleep, 10 uA
    ChargeModel charge_model = ChargeModel::rounded;

    void validate() const;  // throws std::invalid_argument

    double init_charge_mah() const;
    double com_charge_mah() const;
    double init_phase_h() const;
    double com_phase_h() const;
    double sleep_charge_mah() const { return sleep_current_ma * sleep_hours; }
    double cycle_length_h() const { return init_phase_h() + com_phase_h() + sleep_hours; }
};

struct BatteryState {
    double capacity_mah = 1500.0;  // 3.6 V LiFePO4 cell
    double drawn_mah = 0.0;
    double nominal_v = 3.6;

    void validate() const;
    bool exhausted() const { return drawn_mah >= capacity_mah; }
};

// Charge drawn by one full wake/transmit/sleep cycle.
double cycle_charge_mah(const DutyCycleConfig& duty);

// Hours until the battery empties at the configured duty cycle.
double lifetime_hours(const DutyCycleConfig& duty, const BatteryState& battery);

// Lifetime limit as the sleep interval grows without bound.
double lifetime_asymptote_hours(const DutyCycleConfig& duty, const BatteryState& battery);

// Smallest sleep interval whose lifetime reaches target_h, to within 1e-4 h.
// Returns 0 when even back-to-back cycles last that long; throws
// std::domain_error when the target is unreachable.
double min_sleep_for(double target_h, const DutyCycleConfig& duty,
                     const BatteryState& battery);

enum class Phase { sleeping, init, com };

const char* to_string(Phase phase);

struct BufferedReading {
    EncodedReading encoded;
    double sampled_at_h = 0.0;
};

struct NodeState {
    int id = 0;
    Phase phase = Phase::sleeping;
    BatteryState battery;
    std::vector<BufferedReading> buffered;
    bool alive = true;
    double t_h = 0.0;
    std::optional<double> death_h;

    std::string address() const { return "node" + std::to_string(id); }
};

// When to drain the buffer into one packed transmission: at max_buffer
// readings, or once the oldest buffered reading is max_latency_h old.
// Zero latency flushes every cycle.
struct FlushPolicy {
    std::size_t max_buffer = 32;
    double max_latency_h = 24.0;

    void validate() const;
};

struct LossyLink {
    double loss_prob = 0.0;  // per-transmission drop probability

    void validate() const;
    // Consumes exactly one draw per attempt.
    bool transmit(Rng& rng) const { return !rng.bernoulli(loss_prob); }
};

struct PhaseEvent {
    Phase phase = Phase::sleeping;
    double end_h = 0.0;
    double drawn_mah = 0.0;  // cumulative at phase end
};

struct CycleOutcome {
    bool ran = false;
    std::vector<PhaseEvent> phases;
    std::optional<thermal::Reading> reading;
    bool compressor_on = false;  // cabinet state at sampling time
    bool door_open = false;
    std::size_t buffered = 0;  // buffer size at cycle end
    bool submitted = false;
    bool delivered = false;
    bool accepted = false;
    std::optional<ledger::EnterStatus> enter_status;
};

// One sleep/init/com cycle: sleep, wake, sample the freezer, buffer the
// encoded reading, then transmit the packed buffer when the flush policy
// says so. Battery exhaustion inside sleep or init ends the cycle early;
// exhaustion at the com boundary still delivers, since the energy was
// already spent on air time. lottery may be null (transmit only);
// sensor_rng null disables sensor noise.
CycleOutcome run_cycle(NodeState& node, thermal::FreezerRun& freezer,
                       const thermal::SensorSpec& sensor, const DutyCycleConfig& duty,
                       const FlushPolicy& flush, const LossyLink& link,
                       ledger::Lottery* lottery, const ledger::ValidityPolicy& policy,
                       Rng* sensor_rng, Rng& link_rng, std::uint64_t tick);

namespace detail {
// Evaluators without the sleep_hours > 0 precondition, for root bracketing
// at zero sleep.
double cycle_charge_mah_at(double sleep_hours, const DutyCycleConfig& duty);
double lifetime_hours_at(double sleep_hours, const DutyCycleConfig& duty,
                         const BatteryState& battery);
}  // namespace detail

}  // namespace dss::node
