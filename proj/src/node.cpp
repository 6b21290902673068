#include "dss/node.hpp"

#include <stdexcept>

#include <fmt/core.h>

namespace dss::node {

void DutyCycleConfig::validate() const {
    if (!(sleep_hours > 0.0))
        throw std::invalid_argument("sleep_hours must be positive");
    if (!(init_duration_h > 0.0) || !(com_duration_h > 0.0))
        throw std::invalid_argument("phase durations must be positive");
    if (init_current_ma < 0.0 || com_current_ma < 0.0 || sleep_current_ma < 0.0)
        throw std::invalid_argument("currents must be non-negative");
}

double DutyCycleConfig::init_charge_mah() const {
    return charge_model == ChargeModel::rounded ? 0.03 : init_duration_h * init_current_ma;
}

double DutyCycleConfig::com_charge_mah() const {
    return charge_model == ChargeModel::rounded ? 0.09 : com_duration_h * com_current_ma;
}

double DutyCycleConfig::init_phase_h() const {
    return charge_model == ChargeModel::rounded ? 0.0007 : init_duration_h;
}

double DutyCycleConfig::com_phase_h() const {
    return charge_model == ChargeModel::rounded ? 0.0009 : com_duration_h;
}

void BatteryState::validate() const {
    if (!(capacity_mah > 0.0))
        throw std::invalid_argument("capacity_mah must be positive");
    if (drawn_mah < 0.0)
        throw std::invalid_argument("drawn_mah must be non-negative");
    if (!(nominal_v > 0.0))
        throw std::invalid_argument("nominal_v must be positive");
}

namespace detail {

double cycle_charge_mah_at(double sleep_hours, const DutyCycleConfig& duty) {
    return duty.init_charge_mah() + duty.com_charge_mah() +
           duty.sleep_current_ma * sleep_hours;
}

double lifetime_hours_at(double sleep_hours, const DutyCycleConfig& duty,
                         const BatteryState& battery) {
    const double charge = cycle_charge_mah_at(sleep_hours, duty);
    if (!(charge > 0.0))
        throw std::invalid_argument("cycle charge must be positive");
    const double length = duty.init_phase_h() + duty.com_phase_h() + sleep_hours;
    return battery.capacity_mah / charge * length;
}

}  // namespace detail

double cycle_charge_mah(const DutyCycleConfig& duty) {
    duty.validate();
    return detail::cycle_charge_mah_at(duty.sleep_hours, duty);
}

double lifetime_hours(const DutyCycleConfig& duty, const BatteryState& battery) {
    duty.validate();
    battery.validate();
    return detail::lifetime_hours_at(duty.sleep_hours, duty, battery);
}

double lifetime_asymptote_hours(const DutyCycleConfig& duty, const BatteryState& battery) {
    duty.validate();
    battery.validate();
    if (!(duty.sleep_current_ma > 0.0))
        throw std::domain_error("lifetime is unbounded with zero sleep current");
    return battery.capacity_mah / duty.sleep_current_ma;
}

double min_sleep_for(double target_h, const DutyCycleConfig& duty,
                     const BatteryState& battery) {
    duty.validate();
    battery.validate();
    if (!(target_h > 0.0))
        throw std::invalid_argument("target_h must be positive");
    if (duty.sleep_current_ma > 0.0 && target_h >= lifetime_asymptote_hours(duty, battery))
        throw std::domain_error(
            fmt::format("target {} h is unreachable at any sleep interval", target_h));
    if (detail::lifetime_hours_at(0.0, duty, battery) >= target_h)
        return 0.0;
    // Lifetime grows monotonically with the sleep interval here, so bracket
    // then bisect. Returning the upper end keeps the guarantee
    // lifetime(result) >= target_h.
    double lo = 0.0;
    double hi = 1.0;
    while (detail::lifetime_hours_at(hi, duty, battery) < target_h) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (detail::lifetime_hours_at(mid, duty, battery) >= target_h)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

const char* to_string(Phase phase) {
    switch (phase) {
        case Phase::sleeping: return "sleeping";
        case Phase::init: return "init";
        case Phase::com: return "com";
    }
    throw std::logic_error("unknown Phase");
}

void FlushPolicy::validate() const {
    if (max_buffer < 1 || max_buffer > kMaxReadingsPerWord)
        throw std::invalid_argument(
            fmt::format("max_buffer must be within [1, {}]", kMaxReadingsPerWord));
    if (max_latency_h < 0.0)
        throw std::invalid_argument("max_latency_h must be non-negative");
}

void LossyLink::validate() const {
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
        throw std::invalid_argument("loss_prob must be within [0, 1]");
}

namespace {

// Advances time, accrues charge, and flags exhaustion at the phase end.
void spend(NodeState& node, Phase phase, double duration_h, double charge_mah,
           CycleOutcome& out) {
    node.phase = phase;
    node.t_h += duration_h;
    node.battery.drawn_mah += charge_mah;
    out.phases.push_back(PhaseEvent{phase, node.t_h, node.battery.drawn_mah});
    if (node.battery.exhausted()) {
        node.alive = false;
        node.death_h = node.t_h;
    }
}

}  // namespace

CycleOutcome run_cycle(NodeState& node, thermal::FreezerRun& freezer,
                       const thermal::SensorSpec& sensor, const DutyCycleConfig& duty,
                       const FlushPolicy& flush, const LossyLink& link,
                       ledger::Lottery* lottery, const ledger::ValidityPolicy& policy,
                       Rng* sensor_rng, Rng& link_rng, std::uint64_t tick) {
    duty.validate();
    flush.validate();
    link.validate();
    policy.validate();
    CycleOutcome out;
    if (!node.alive) return out;
    out.ran = true;

    spend(node, Phase::sleeping, duty.sleep_hours, duty.sleep_charge_mah(), out);
    if (!node.alive) return out;
    spend(node, Phase::init, duty.init_phase_h(), duty.init_charge_mah(), out);
    if (!node.alive) return out;

    freezer.advance_to(node.t_h);
    const thermal::Reading reading = freezer.sample(sensor, sensor_rng);
    out.reading = reading;
    out.compressor_on = freezer.state().compressor_on;
    out.door_open = thermal::door_open(freezer.state());
    node.buffered.push_back(BufferedReading{encode(reading.temp_c, reading.rh_pct), node.t_h});

    const double oldest_age_h = node.t_h - node.buffered.front().sampled_at_h;
    const bool will_flush =
        node.buffered.size() >= flush.max_buffer || oldest_age_h >= flush.max_latency_h;

    // Air time is spent before the delivery outcome is known, so a node that
    // empties its battery on this transmission still gets the words out.
    spend(node, Phase::com, duty.com_phase_h(), duty.com_charge_mah(), out);

    if (will_flush) {
        std::vector<std::uint8_t> temps, hums;
        temps.reserve(node.buffered.size());
        hums.reserve(node.buffered.size());
        for (const auto& b : node.buffered) {
            temps.push_back(b.encoded.temp_byte);
            hums.push_back(b.encoded.hum_byte);
        }
        const PackedWord temp_word = pack(temps);
        const PackedWord hum_word = pack(hums);
        node.buffered.clear();
        out.submitted = true;
        out.delivered = link.transmit(link_rng);
        if (out.delivered && lottery) {
            const ledger::EnterStatus status = lottery->enter_packed(
                node.address(), temp_word, hum_word, temp_word.count, policy, tick);
            out.enter_status = status;
            out.accepted = status == ledger::EnterStatus::accepted;
        }
    }
    out.buffered = node.buffered.size();
    node.phase = Phase::sleeping;
    return out;
}

}  // namespace dss::node
