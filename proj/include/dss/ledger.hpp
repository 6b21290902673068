#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dss/encoding.hpp"

namespace dss::ledger {

// Storage-condition policy a submitted reading must meet to enter the
// draw. The ideal band defaults to the recommended long-term values:
// -18 +/- 3 degrees and 15 +/- 3 percent RH. With acceptable_mode set,
// any sub-zero temperature also qualifies regardless of humidity.
struct ValidityPolicy {
    double ideal_temp_min_c = -21.0;
    double ideal_temp_max_c = -15.0;
    double ideal_rh_min_pct = 12.0;
    double ideal_rh_max_pct = 18.0;
    bool acceptable_mode = false;

    void validate() const;  // throws std::invalid_argument

    // Policy verdict for one well-formed reading (bytes already in range).
    bool admits(std::uint8_t temp_byte, std::uint8_t hum_byte) const;

    bool operator==(const ValidityPolicy&) const = default;
};

enum class EnterStatus {
    accepted,
    rejected_malformed,
    rejected_out_of_policy,
    rejected_count_mismatch,
};

const char* to_string(EnterStatus status);

// Throws std::invalid_argument unless address is non-empty and uses only
// [A-Za-z0-9_.-].
void validate_address(const std::string& address);

// Most recent accepted reading per entrant address.
struct Entry {
    std::string address;
    std::uint8_t temp_byte = 0;
    std::uint8_t hum_byte = 0;
    std::uint64_t tick = 0;

    bool operator==(const Entry&) const = default;
};

struct LogRecord {
    std::uint64_t tick = 0;
    std::string op;       // fund | enter | enter_packed | draw
    std::string address;  // "-" for draw
    std::string payload;  // semicolon-separated k=v pairs
    std::string result;
    std::uint64_t pot = 0;  // pot after the operation

    bool operator==(const LogRecord&) const = default;
};

// Append-only incentive ledger. Every operation (including rejected ones)
// produces one log record; the log alone reconstructs the full state.
// Invariant after every operation: total_funded == pot + total_paid.
class Lottery {
public:
    // Adds amount to the pot. Throws std::invalid_argument for a zero
    // amount, a pot overflow, or a bad address; nothing is logged then.
    void fund(const std::string& address, std::uint64_t amount, std::uint64_t tick);

    // Submits a single reading. Acceptance enters (or refreshes) the
    // address in the current round; one ticket per address.
    EnterStatus enter(const std::string& address, std::uint8_t temp_byte,
                      std::uint8_t hum_byte, const ValidityPolicy& policy,
                      std::uint64_t tick);

    // Submits packed words holding `count` readings each. The whole word
    // is judged: a malformed word or reading rejects it outright, and every
    // reading must satisfy the policy. The last reading becomes the entry.
    EnterStatus enter_packed(const std::string& address, const node::PackedWord& temps,
                             const node::PackedWord& hums, std::size_t count,
                             const ValidityPolicy& policy, std::uint64_t tick);

    struct DrawResult {
        std::string winner;
        std::uint64_t amount = 0;
    };

    // Pays the whole pot to one uniformly drawn entrant and starts the
    // next round. Throws std::logic_error when nobody entered.
    DrawResult draw(std::uint64_t seed, std::uint64_t tick);

    std::uint64_t pot() const noexcept { return pot_; }
    std::uint64_t round() const noexcept { return round_; }
    std::uint64_t total_funded() const noexcept { return total_funded_; }
    std::uint64_t total_paid() const noexcept { return total_paid_; }
    const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
    const std::vector<LogRecord>& log() const noexcept { return log_; }

    bool operator==(const Lottery&) const = default;

    void write_log(std::ostream& out) const;
    std::string log_text() const;

private:
    void append(LogRecord record);

    std::uint64_t pot_ = 0;
    std::uint64_t round_ = 0;
    std::uint64_t total_funded_ = 0;
    std::uint64_t total_paid_ = 0;
    std::map<std::string, Entry> entries_;
    std::vector<LogRecord> log_;
};

// Re-executes a ledger log and verifies every line against the freshly
// produced record. Throws dss::ParseError (with the offending line number)
// on malformed input or any divergence.
Lottery replay(std::istream& in);
Lottery replay_text(const std::string& text);

}  // namespace dss::ledger
