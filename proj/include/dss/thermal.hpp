#pragma once

#include <optional>
#include <vector>

#include "dss/rng.hpp"

namespace dss::thermal {

// Freezer cabinet model: first-order warming toward ambient, a constant
// compressor pull-down, hysteresis switching around the setpoint, and an
// additive warm-air term while the door is open.
struct FreezerParams {
    double setpoint_c = -18.0;
    double hysteresis_band_c = 1.5;   // compressor toggles at setpoint +/- band
    double ambient_c = 21.0;
    double warm_rate_c_per_h = 1.5;   // passive warming, measured at the setpoint
    double cool_rate_c_per_h = 6.0;
    double door_open_delta_c_per_s = 0.0025;
    double container_rh_pct = 15.0;   // RH inside the airtight seed container

    void validate() const;  // throws std::invalid_argument
};

struct FreezerState {
    double t_h = 0.0;  // hours since simulation start
    double air_temp_c = -18.0;
    double rh_pct = 15.0;
    bool compressor_on = false;
    std::optional<double> door_open_until_h;
};

FreezerState initial_state(const FreezerParams& params);

inline bool door_open(const FreezerState& s) {
    return s.door_open_until_h && s.t_h < *s.door_open_until_h;
}

// Advance the cabinet by dt_h hours. Pure: identical inputs give identical
// output. The door-close boundary splits the integration step exactly.
FreezerState step(FreezerState state, const FreezerParams& params, double dt_h);

// Mark the door open for duration_s seconds starting at now_h. Overlapping
// opens extend to the latest closing time.
FreezerState open_door(FreezerState state, double now_h, double duration_s);

// DHT22-class sensor: bounded noise, fixed resolution, hard range clamp.
struct SensorSpec {
    double temp_min_c = -40.0;
    double temp_max_c = 80.0;
    double temp_accuracy_c = 0.5;
    double temp_resolution_c = 0.1;
    double rh_accuracy_pct = 2.0;
    double rh_resolution_pct = 0.1;
    double measure_current_ma = 1.0;  // informational; the com phase charge covers acquisition
    double standby_current_ua = 40.0;

    void validate() const;
};

struct Reading {
    double t_sim_h = 0.0;
    double temp_c = 0.0;
    double rh_pct = 0.0;
};

// Nearest multiple of resolution, halves rounded away from zero.
double quantize(double value, double resolution);

// One measurement of the current cabinet state: true value plus uniform
// noise within +/- accuracy, quantized to the resolution, clamped to the
// range. rng == nullptr disables noise.
Reading sample(const FreezerState& state, const SensorSpec& spec, Rng* rng);

// A freezer plus its door-open schedule, advanced lazily in fixed substeps.
// Scheduled opens are applied exactly at their event times.
class FreezerRun {
public:
    struct DoorEvent {
        double t_h = 0.0;
        double duration_s = 0.0;
    };

    FreezerRun(const FreezerParams& params, double tick_h, std::vector<DoorEvent> schedule);

    void advance_to(double t_h);
    Reading sample(const SensorSpec& spec, Rng* rng) const;
    const FreezerState& state() const noexcept { return state_; }
    const FreezerParams& params() const noexcept { return params_; }

private:
    FreezerParams params_;
    FreezerState state_;
    double tick_h_;
    std::vector<DoorEvent> schedule_;  // sorted by t_h
    std::size_t next_event_ = 0;
};

}  // namespace dss::thermal
