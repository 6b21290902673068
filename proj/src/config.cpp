#include "dss/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <initializer_list>

#include <fmt/core.h>
#include <json.hpp>

#include "dss/errors.hpp"

namespace dss::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view where, std::string_view message) {
    throw ParseError(0, fmt::format("config {}: {}", where, message));
}

void reject_unknown(const json& obj, std::string_view where,
                    std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : obj.items()) {
        bool found = false;
        for (const auto& k : known)
            if (key == k) {
                found = true;
                break;
            }
        if (!found) fail(where, fmt::format("unknown key '{}'", key));
    }
}

const json* get(const json& obj, std::string_view key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, std::string_view where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

std::uint64_t as_u64(const json& v, std::string_view where) {
    if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

int as_int(const json& v, std::string_view where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, std::string_view where) {
    if (!v.is_boolean()) fail(where, "expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, std::string_view where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

void set_double(const json& obj, std::string_view key, std::string_view where, double& out) {
    if (const json* v = get(obj, key)) out = as_double(*v, where);
}

void set_bool(const json& obj, std::string_view key, std::string_view where, bool& out) {
    if (const json* v = get(obj, key)) out = as_bool(*v, where);
}

void apply_duty(const json& obj, std::string_view where, node::DutyCycleConfig& duty) {
    if (!obj.is_object()) fail(where, "expected an object");
    reject_unknown(obj, where,
                   {"sleep_hours", "init_duration_ms", "init_current_ma", "com_duration_ms",
                    "com_current_ma", "sleep_current_ma", "charge_model"});
    set_double(obj, "sleep_hours", where, duty.sleep_hours);
    if (const json* v = get(obj, "init_duration_ms"))
        duty.init_duration_h = as_double(*v, where) / 3.6e6;
    set_double(obj, "init_current_ma", where, duty.init_current_ma);
    if (const json* v = get(obj, "com_duration_ms"))
        duty.com_duration_h = as_double(*v, where) / 3.6e6;
    set_double(obj, "com_current_ma", where, duty.com_current_ma);
    set_double(obj, "sleep_current_ma", where, duty.sleep_current_ma);
    if (const json* v = get(obj, "charge_model")) {
        const std::string model = as_string(*v, where);
        if (model == "rounded")
            duty.charge_model = node::ChargeModel::rounded;
        else if (model == "measured")
            duty.charge_model = node::ChargeModel::measured;
        else
            fail(where, fmt::format("charge_model must be rounded or measured, got '{}'",
                                    model));
    }
}

void apply_freezer(const json& obj, std::string_view where, thermal::FreezerParams& fz) {
    if (!obj.is_object()) fail(where, "expected an object");
    reject_unknown(obj, where,
                   {"setpoint_c", "hysteresis_band_c", "ambient_c", "warm_rate_c_per_h",
                    "cool_rate_c_per_h", "door_open_delta_c_per_s", "container_rh_pct"});
    set_double(obj, "setpoint_c", where, fz.setpoint_c);
    set_double(obj, "hysteresis_band_c", where, fz.hysteresis_band_c);
    set_double(obj, "ambient_c", where, fz.ambient_c);
    set_double(obj, "warm_rate_c_per_h", where, fz.warm_rate_c_per_h);
    set_double(obj, "cool_rate_c_per_h", where, fz.cool_rate_c_per_h);
    set_double(obj, "door_open_delta_c_per_s", where, fz.door_open_delta_c_per_s);
    set_double(obj, "container_rh_pct", where, fz.container_rh_pct);
}

void apply_sensor(const json& obj, std::string_view where, thermal::SensorSpec& sensor) {
    if (!obj.is_object()) fail(where, "expected an object");
    reject_unknown(obj, where,
                   {"temp_min_c", "temp_max_c", "temp_accuracy_c", "temp_resolution_c",
                    "rh_accuracy_pct", "rh_resolution_pct", "measure_current_ma",
                    "standby_current_ua"});
    set_double(obj, "temp_min_c", where, sensor.temp_min_c);
    set_double(obj, "temp_max_c", where, sensor.temp_max_c);
    set_double(obj, "temp_accuracy_c", where, sensor.temp_accuracy_c);
    set_double(obj, "temp_resolution_c", where, sensor.temp_resolution_c);
    set_double(obj, "rh_accuracy_pct", where, sensor.rh_accuracy_pct);
    set_double(obj, "rh_resolution_pct", where, sensor.rh_resolution_pct);
    set_double(obj, "measure_current_ma", where, sensor.measure_current_ma);
    set_double(obj, "standby_current_ua", where, sensor.standby_current_ua);
}

void apply_policy(const json& obj, std::string_view where, ledger::ValidityPolicy& policy) {
    if (!obj.is_object()) fail(where, "expected an object");
    reject_unknown(obj, where,
                   {"ideal_temp_min_c", "ideal_temp_max_c", "ideal_rh_min_pct",
                    "ideal_rh_max_pct", "acceptable_mode"});
    set_double(obj, "ideal_temp_min_c", where, policy.ideal_temp_min_c);
    set_double(obj, "ideal_temp_max_c", where, policy.ideal_temp_max_c);
    set_double(obj, "ideal_rh_min_pct", where, policy.ideal_rh_min_pct);
    set_double(obj, "ideal_rh_max_pct", where, policy.ideal_rh_max_pct);
    set_bool(obj, "acceptable_mode", where, policy.acceptable_mode);
}

}  // namespace

sim::SimConfig load_sim_config(std::istream& in) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(0, fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!root.is_object()) fail("root", "expected an object");
    reject_unknown(root, "root",
                   {"version", "sim", "duty_cycle", "battery", "freezer", "sensor", "policy",
                    "flush", "lottery", "door_events", "node_overrides"});
    const json* version = get(root, "version");
    if (!version) fail("root", "missing 'version'");
    if (as_u64(*version, "version") != 1) fail("version", "only version 1 is understood");

    sim::SimConfig config;
    if (const json* obj = get(root, "sim")) {
        if (!obj->is_object()) fail("sim", "expected an object");
        reject_unknown(*obj, "sim",
                       {"n_nodes", "duration_h", "tick_h", "loss_prob", "seed",
                        "cold_capacity_factor", "sensor_noise"});
        if (const json* v = get(*obj, "n_nodes")) config.n_nodes = as_int(*v, "sim.n_nodes");
        set_double(*obj, "duration_h", "sim.duration_h", config.duration_h);
        set_double(*obj, "tick_h", "sim.tick_h", config.tick_h);
        set_double(*obj, "loss_prob", "sim.loss_prob", config.loss_prob);
        if (const json* v = get(*obj, "seed")) config.seed = as_u64(*v, "sim.seed");
        set_double(*obj, "cold_capacity_factor", "sim.cold_capacity_factor",
                   config.cold_capacity_factor);
        set_bool(*obj, "sensor_noise", "sim.sensor_noise", config.sensor_noise);
    }
    if (const json* obj = get(root, "duty_cycle"))
        apply_duty(*obj, "duty_cycle", config.duty_cycle);
    if (const json* obj = get(root, "battery")) {
        if (!obj->is_object()) fail("battery", "expected an object");
        reject_unknown(*obj, "battery", {"capacity_mah", "nominal_v"});
        set_double(*obj, "capacity_mah", "battery.capacity_mah", config.battery.capacity_mah);
        set_double(*obj, "nominal_v", "battery.nominal_v", config.battery.nominal_v);
    }
    if (const json* obj = get(root, "freezer"))
        apply_freezer(*obj, "freezer", config.freezer);
    if (const json* obj = get(root, "sensor"))
        apply_sensor(*obj, "sensor", config.sensor);
    if (const json* obj = get(root, "policy"))
        apply_policy(*obj, "policy", config.policy);
    if (const json* obj = get(root, "flush")) {
        if (!obj->is_object()) fail("flush", "expected an object");
        reject_unknown(*obj, "flush", {"max_buffer", "max_latency_h"});
        if (const json* v = get(*obj, "max_buffer"))
            config.flush.max_buffer =
                static_cast<std::size_t>(as_u64(*v, "flush.max_buffer"));
        set_double(*obj, "max_latency_h", "flush.max_latency_h", config.flush.max_latency_h);
    }
    if (const json* obj = get(root, "lottery")) {
        if (!obj->is_object()) fail("lottery", "expected an object");
        reject_unknown(*obj, "lottery", {"draw_period_h", "initial_fund", "fund_address"});
        set_double(*obj, "draw_period_h", "lottery.draw_period_h", config.draw_period_h);
        if (const json* v = get(*obj, "initial_fund"))
            config.initial_fund = as_u64(*v, "lottery.initial_fund");
        if (const json* v = get(*obj, "fund_address"))
            config.fund_address = as_string(*v, "lottery.fund_address");
    }
    if (const json* arr = get(root, "door_events")) {
        if (!arr->is_array()) fail("door_events", "expected an array");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string where = fmt::format("door_events[{}]", i);
            const json& obj = (*arr)[i];
            if (!obj.is_object()) fail(where, "expected an object");
            reject_unknown(obj, where, {"node_id", "t_h", "duration_s"});
            sim::DoorEvent ev;
            const json* id = get(obj, "node_id");
            if (!id) fail(where, "missing 'node_id'");
            ev.node_id = as_int(*id, where);
            set_double(obj, "t_h", where, ev.t_h);
            set_double(obj, "duration_s", where, ev.duration_s);
            config.door_events.push_back(ev);
        }
    }
    if (const json* arr = get(root, "node_overrides")) {
        if (!arr->is_array()) fail("node_overrides", "expected an array");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string where = fmt::format("node_overrides[{}]", i);
            const json& obj = (*arr)[i];
            if (!obj.is_object()) fail(where, "expected an object");
            reject_unknown(obj, where, {"node_id", "duty_cycle", "freezer"});
            const json* id = get(obj, "node_id");
            if (!id) fail(where, "missing 'node_id'");
            const int node_id = as_int(*id, where);
            if (const json* duty = get(obj, "duty_cycle")) {
                auto [it, fresh] =
                    config.duty_overrides.emplace(node_id, config.duty_cycle);
                if (!fresh) fail(where, fmt::format("node {} already overridden", node_id));
                apply_duty(*duty, where + ".duty_cycle", it->second);
            }
            if (const json* fz = get(obj, "freezer")) {
                auto [it, fresh] = config.freezer_overrides.emplace(node_id, config.freezer);
                if (!fresh) fail(where, fmt::format("node {} already overridden", node_id));
                apply_freezer(*fz, where + ".freezer", it->second);
            }
        }
    }
    return config;
}

sim::SimConfig load_sim_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, fmt::format("cannot open config file '{}'", path));
    return load_sim_config(in);
}

namespace {

constexpr std::array<ConfigKeyInfo, 46> kCatalog{{
    {"version", "1", "config format version; must be 1"},
    {"sim.n_nodes", "1", "storage nodes in the network"},
    {"sim.duration_h", "168", "simulated time span, hours"},
    {"sim.tick_h", "0.0167", "freezer integration substep, hours"},
    {"sim.loss_prob", "0", "per-transmission drop probability; 0.4 matched in-freezer measurements"},
    {"sim.seed", "1", "master seed; sensor, link, and draw streams derive from it"},
    {"sim.cold_capacity_factor", "1", "battery capacity derating at cabinet temperature"},
    {"sim.sensor_noise", "true", "uniform sensor error within the accuracy bounds"},
    {"duty_cycle.sleep_hours", "0.73", "deep-sleep interval between wake cycles"},
    {"duty_cycle.init_duration_ms", "2400", "measured boot and sensor warm-up time"},
    {"duty_cycle.init_current_ma", "50", "measured draw during init"},
    {"duty_cycle.com_duration_ms", "3160", "measured connect and transmit time"},
    {"duty_cycle.com_current_ma", "100", "measured draw during transmission"},
    {"duty_cycle.sleep_current_ma", "0.01", "ESP32 deep-sleep draw, 10 uA"},
    {"duty_cycle.charge_model", "\"rounded\"", "rounded per-phase figures, or measured duration times current"},
    {"battery.capacity_mah", "1500", "3.6 V LiFePO4 cell"},
    {"battery.nominal_v", "3.6", "cell voltage, informational"},
    {"freezer.setpoint_c", "-18", "recommended long-term storage temperature"},
    {"freezer.hysteresis_band_c", "1.5", "compressor toggles at setpoint +/- band"},
    {"freezer.ambient_c", "21", "room temperature around the cabinet"},
    {"freezer.warm_rate_c_per_h", "1.5", "passive warming, measured at the setpoint"},
    {"freezer.cool_rate_c_per_h", "6", "compressor pull-down rate"},
    {"freezer.door_open_delta_c_per_s", "0.0025", "extra warming while the door stands open"},
    {"freezer.container_rh_pct", "15", "humidity inside the sealed sample container"},
    {"sensor.temp_min_c", "-40", "DHT22 lower range limit"},
    {"sensor.temp_max_c", "80", "DHT22 upper range limit"},
    {"sensor.temp_accuracy_c", "0.5", "temperature error bound"},
    {"sensor.temp_resolution_c", "0.1", "temperature step"},
    {"sensor.rh_accuracy_pct", "2", "humidity error bound"},
    {"sensor.rh_resolution_pct", "0.1", "humidity step"},
    {"sensor.measure_current_ma", "1", "draw while measuring, informational"},
    {"sensor.standby_current_ua", "40", "draw while idle, informational"},
    {"policy.ideal_temp_min_c", "-21", "ideal band: -18 +/- 3"},
    {"policy.ideal_temp_max_c", "-15", "ideal band upper edge"},
    {"policy.ideal_rh_min_pct", "12", "ideal band: 15 +/- 3"},
    {"policy.ideal_rh_max_pct", "18", "ideal band upper edge"},
    {"policy.acceptable_mode", "false", "also admit any sub-zero reading"},
    {"flush.max_buffer", "32", "transmit when this many readings are buffered; a word carries at most 32"},
    {"flush.max_latency_h", "24", "transmit once the oldest buffered reading is this old"},
    {"lottery.draw_period_h", "0", "hours between draws; 0 disables draws"},
    {"lottery.initial_fund", "0", "pot seeded before the run"},
    {"lottery.fund_address", "\"sponsor\"", "address credited with the initial funding"},
    {"door_events[].node_id", "-", "whose cabinet door opens"},
    {"door_events[].t_h", "0", "opening time, hours"},
    {"door_events[].duration_s", "0", "how long the door stands open"},
    {"node_overrides[]", "-", "node_id plus partial duty_cycle or freezer sections"},
}};

}  // namespace

std::span<const ConfigKeyInfo> key_catalog() { return kCatalog; }

std::string render_key_table() {
    std::size_t key_width = 0, value_width = 0;
    for (const auto& info : kCatalog) {
        key_width = std::max(key_width, info.key.size());
        value_width = std::max(value_width, info.value.size());
    }
    std::string out;
    for (const auto& info : kCatalog)
        out += fmt::format("  {:<{}}  {:<{}}  {}\n", info.key, key_width, info.value,
                           value_width, info.note);
    return out;
}

}  // namespace dss::config
