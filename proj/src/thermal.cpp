#include "dss/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dss::thermal {

void FreezerParams::validate() const {
    if (!(hysteresis_band_c > 0.0))
        throw std::invalid_argument("hysteresis_band_c must be positive");
    if (!(setpoint_c < 0.0))
        throw std::invalid_argument("setpoint_c must be below zero");
    if (warm_rate_c_per_h < 0.0 || cool_rate_c_per_h < 0.0)
        throw std::invalid_argument("thermal rates must be non-negative");
    if (warm_rate_c_per_h > 0.0 && !(ambient_c > setpoint_c))
        throw std::invalid_argument("ambient_c must exceed setpoint_c when warming is enabled");
    if (cool_rate_c_per_h > 0.0 && !(cool_rate_c_per_h > warm_rate_c_per_h))
        throw std::invalid_argument("cool_rate_c_per_h must exceed warm_rate_c_per_h");
    if (door_open_delta_c_per_s < 0.0)
        throw std::invalid_argument("door_open_delta_c_per_s must be non-negative");
    if (container_rh_pct < 0.0 || container_rh_pct > 100.0)
        throw std::invalid_argument("container_rh_pct must be within [0, 100]");
}

FreezerState initial_state(const FreezerParams& params) {
    params.validate();
    FreezerState s;
    s.t_h = 0.0;
    s.air_temp_c = params.setpoint_c;
    s.rh_pct = params.container_rh_pct;
    s.compressor_on = false;
    s.door_open_until_h.reset();
    return s;
}

namespace {

// Integrate one segment with no door transition inside it, then apply the
// hysteresis switch at the segment end.
FreezerState integrate_segment(FreezerState s, const FreezerParams& p, double dt_h) {
    const bool open = door_open(s);
    double drift = 0.0;
    if (p.warm_rate_c_per_h > 0.0)
        drift += p.warm_rate_c_per_h * (p.ambient_c - s.air_temp_c) / (p.ambient_c - p.setpoint_c);
    if (s.compressor_on)
        drift -= p.cool_rate_c_per_h;
    if (open)
        drift += p.door_open_delta_c_per_s * 3600.0;
    s.air_temp_c += drift * dt_h;
    s.air_temp_c = std::min(s.air_temp_c, p.ambient_c);
    s.t_h += dt_h;
    if (!s.compressor_on && s.air_temp_c >= p.setpoint_c + p.hysteresis_band_c)
        s.compressor_on = true;
    else if (s.compressor_on && s.air_temp_c <= p.setpoint_c - p.hysteresis_band_c)
        s.compressor_on = false;
    if (s.door_open_until_h && s.t_h >= *s.door_open_until_h)
        s.door_open_until_h.reset();
    return s;
}

}  // namespace

FreezerState step(FreezerState state, const FreezerParams& params, double dt_h) {
    if (!(dt_h > 0.0)) throw std::invalid_argument("dt_h must be positive");
    const double t_end = state.t_h + dt_h;
    if (state.door_open_until_h && *state.door_open_until_h > state.t_h &&
        *state.door_open_until_h < t_end) {
        const double close = *state.door_open_until_h;
        state = integrate_segment(std::move(state), params, close - state.t_h);
        state.t_h = close;  // absorb accumulation error at the boundary
        state.door_open_until_h.reset();
    }
    if (t_end > state.t_h)
        state = integrate_segment(std::move(state), params, t_end - state.t_h);
    state.t_h = t_end;
    state.rh_pct = params.container_rh_pct;
    return state;
}

FreezerState open_door(FreezerState state, double now_h, double duration_s) {
    if (duration_s < 0.0) throw std::invalid_argument("duration_s must be non-negative");
    const double until = now_h + duration_s / 3600.0;
    if (!state.door_open_until_h || until > *state.door_open_until_h)
        state.door_open_until_h = until;
    return state;
}

void SensorSpec::validate() const {
    if (!(temp_min_c < temp_max_c))
        throw std::invalid_argument("sensor temperature range is empty");
    if (temp_accuracy_c < 0.0 || rh_accuracy_pct < 0.0)
        throw std::invalid_argument("sensor accuracy must be non-negative");
    if (!(temp_resolution_c > 0.0) || !(rh_resolution_pct > 0.0))
        throw std::invalid_argument("sensor resolution must be positive");
    if (measure_current_ma < 0.0 || standby_current_ua < 0.0)
        throw std::invalid_argument("sensor currents must be non-negative");
}

double quantize(double value, double resolution) {
    if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
    return std::round(value / resolution) * resolution;
}

Reading sample(const FreezerState& state, const SensorSpec& spec, Rng* rng) {
    spec.validate();
    double temp = state.air_temp_c;
    double rh = state.rh_pct;
    if (rng) {
        temp += rng->uniform(-spec.temp_accuracy_c, spec.temp_accuracy_c);
        rh += rng->uniform(-spec.rh_accuracy_pct, spec.rh_accuracy_pct);
    }
    temp = quantize(temp, spec.temp_resolution_c);
    rh = quantize(rh, spec.rh_resolution_pct);
    temp = std::clamp(temp, spec.temp_min_c, spec.temp_max_c);
    rh = std::clamp(rh, 0.0, 100.0);
    return Reading{state.t_h, temp, rh};
}

FreezerRun::FreezerRun(const FreezerParams& params, double tick_h,
                       std::vector<DoorEvent> schedule)
    : params_(params), state_(initial_state(params)), tick_h_(tick_h),
      schedule_(std::move(schedule)) {
    if (!(tick_h_ > 0.0)) throw std::invalid_argument("tick_h must be positive");
    for (const auto& ev : schedule_)
        if (ev.t_h < 0.0 || ev.duration_s < 0.0)
            throw std::invalid_argument("door events must have non-negative time and duration");
    std::stable_sort(schedule_.begin(), schedule_.end(),
                     [](const DoorEvent& a, const DoorEvent& b) { return a.t_h < b.t_h; });
}

void FreezerRun::advance_to(double t_h) {
    if (t_h < state_.t_h) throw std::invalid_argument("cannot advance a freezer backwards");
    while (state_.t_h < t_h) {
        double stop = std::min(t_h, state_.t_h + tick_h_);
        while (next_event_ < schedule_.size() && schedule_[next_event_].t_h <= state_.t_h) {
            state_ = open_door(state_, schedule_[next_event_].t_h, schedule_[next_event_].duration_s);
            ++next_event_;
        }
        if (next_event_ < schedule_.size() && schedule_[next_event_].t_h < stop)
            stop = schedule_[next_event_].t_h;
        if (stop > state_.t_h)
            state_ = step(std::move(state_), params_, stop - state_.t_h);
        state_.t_h = stop;
    }
    while (next_event_ < schedule_.size() && schedule_[next_event_].t_h <= state_.t_h) {
        state_ = open_door(state_, schedule_[next_event_].t_h, schedule_[next_event_].duration_s);
        ++next_event_;
    }
}

Reading FreezerRun::sample(const SensorSpec& spec, Rng* rng) const {
    return dss::thermal::sample(state_, spec, rng);
}

}  // namespace dss::thermal
