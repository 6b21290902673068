#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "dss/sim.hpp"

namespace dss::config {

// Reads a versioned JSON run description. Unknown keys anywhere are
// rejected, so typos fail loudly instead of silently running defaults.
// Throws dss::ParseError on malformed input.
sim::SimConfig load_sim_config(std::istream& in);
sim::SimConfig load_sim_config_file(const std::string& path);

struct ConfigKeyInfo {
    std::string_view key;      // section-qualified, e.g. "duty_cycle.sleep_hours"
    std::string_view value;    // default, as written in JSON
    std::string_view note;
};

std::span<const ConfigKeyInfo> key_catalog();

// Plain-text key/default/note table for CLI help output.
std::string render_key_table();

}  // namespace dss::config
