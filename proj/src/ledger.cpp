#include "dss/ledger.hpp"

#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "dss/errors.hpp"
#include "dss/rng.hpp"
#include "dss/text.hpp"

namespace dss::ledger {

namespace {

constexpr std::string_view kLogHeader = "# dss-ledger-log v1";
constexpr std::string_view kLogFooter = "# end";
constexpr std::string_view kDrawAddress = "-";

bool valid_address_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '.' || c == '-';
}

std::string policy_suffix(const ValidityPolicy& p) {
    return fmt::format("tmin={};tmax={};hmin={};hmax={};acc={}", p.ideal_temp_min_c,
                       p.ideal_temp_max_c, p.ideal_rh_min_pct, p.ideal_rh_max_pct,
                       p.acceptable_mode ? 1 : 0);
}

std::string hex_bytes(const std::array<std::uint8_t, node::kWordBytes>& bytes) {
    std::string out;
    out.reserve(2 * bytes.size());
    for (std::uint8_t b : bytes) out += fmt::format("{:02x}", b);
    return out;
}

}  // namespace

void validate_address(const std::string& address) {
    if (address.empty())
        throw std::invalid_argument("address must be non-empty");
    for (char c : address)
        if (!valid_address_char(c))
            throw std::invalid_argument(
                fmt::format("address '{}' has characters outside [A-Za-z0-9_.-]", address));
}

void ValidityPolicy::validate() const {
    if (!(ideal_temp_min_c <= ideal_temp_max_c))
        throw std::invalid_argument("ideal temperature band is empty");
    if (!(ideal_rh_min_pct <= ideal_rh_max_pct))
        throw std::invalid_argument("ideal humidity band is empty");
    if (ideal_rh_min_pct < 0.0 || ideal_rh_max_pct > 100.0)
        throw std::invalid_argument("ideal humidity band must lie within [0, 100]");
    if (!(ideal_temp_max_c < 0.0))
        throw std::invalid_argument("ideal temperature band must stay below zero");
}

bool ValidityPolicy::admits(std::uint8_t temp_byte, std::uint8_t hum_byte) const {
    const int t = node::decode_temp(temp_byte);
    const int h = node::decode_hum(hum_byte);
    const bool ideal = t >= ideal_temp_min_c && t <= ideal_temp_max_c &&
                       h >= ideal_rh_min_pct && h <= ideal_rh_max_pct;
    if (ideal) return true;
    return acceptable_mode && t < 0;
}

const char* to_string(EnterStatus status) {
    switch (status) {
        case EnterStatus::accepted: return "accepted";
        case EnterStatus::rejected_malformed: return "rejected=malformed";
        case EnterStatus::rejected_out_of_policy: return "rejected=out_of_policy";
        case EnterStatus::rejected_count_mismatch: return "rejected=count_mismatch";
    }
    throw std::logic_error("unknown EnterStatus");
}

void Lottery::fund(const std::string& address, std::uint64_t amount, std::uint64_t tick) {
    validate_address(address);
    if (amount == 0)
        throw std::invalid_argument("fund amount must be positive");
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    if (amount > kMax - pot_ || amount > kMax - total_funded_)
        throw std::invalid_argument("fund amount overflows the pot");
    pot_ += amount;
    total_funded_ += amount;
    append({tick, "fund", address, fmt::format("amount={}", amount), "ok", pot_});
}

EnterStatus Lottery::enter(const std::string& address, std::uint8_t temp_byte,
                           std::uint8_t hum_byte, const ValidityPolicy& policy,
                           std::uint64_t tick) {
    validate_address(address);
    policy.validate();
    EnterStatus status;
    if (temp_byte > node::kTempByteMax || hum_byte > node::kHumByteMax)
        status = EnterStatus::rejected_malformed;
    else if (!policy.admits(temp_byte, hum_byte))
        status = EnterStatus::rejected_out_of_policy;
    else {
        status = EnterStatus::accepted;
        entries_[address] = Entry{address, temp_byte, hum_byte, tick};
    }
    append({tick, "enter", address,
            fmt::format("temp={};hum={};{}", temp_byte, hum_byte, policy_suffix(policy)),
            to_string(status), pot_});
    return status;
}

EnterStatus Lottery::enter_packed(const std::string& address, const node::PackedWord& temps,
                                  const node::PackedWord& hums, std::size_t count,
                                  const ValidityPolicy& policy, std::uint64_t tick) {
    validate_address(address);
    policy.validate();
    EnterStatus status = EnterStatus::accepted;
    bool words_ok = true;
    try {
        node::unpack(temps);
        node::unpack(hums);
    } catch (const std::invalid_argument&) {
        words_ok = false;
        status = EnterStatus::rejected_malformed;
    }
    if (words_ok && (temps.count != count || hums.count != count))
        status = EnterStatus::rejected_count_mismatch;
    if (status == EnterStatus::accepted) {
        for (std::size_t i = 0; i < count; ++i) {
            if (temps.bytes[i] > node::kTempByteMax || hums.bytes[i] > node::kHumByteMax) {
                status = EnterStatus::rejected_malformed;
                break;
            }
        }
    }
    if (status == EnterStatus::accepted) {
        for (std::size_t i = 0; i < count; ++i) {
            if (!policy.admits(temps.bytes[i], hums.bytes[i])) {
                status = EnterStatus::rejected_out_of_policy;
                break;
            }
        }
    }
    if (status == EnterStatus::accepted)
        entries_[address] =
            Entry{address, temps.bytes[count - 1], hums.bytes[count - 1], tick};
    append({tick, "enter_packed", address,
            fmt::format("count={};tcount={};hcount={};temps={};hums={};{}", count,
                        temps.count, hums.count, hex_bytes(temps.bytes),
                        hex_bytes(hums.bytes), policy_suffix(policy)),
            to_string(status), pot_});
    return status;
}

Lottery::DrawResult Lottery::draw(std::uint64_t seed, std::uint64_t tick) {
    if (entries_.empty())
        throw std::logic_error("cannot draw a round with no entrants");
    const std::uint64_t n = entries_.size();
    Rng rng(seed);
    auto it = entries_.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.below(n)));
    DrawResult result{it->first, pot_};
    total_paid_ += pot_;
    pot_ = 0;
    entries_.clear();
    ++round_;
    append({tick, "draw", std::string(kDrawAddress),
            fmt::format("seed={};entrants={}", seed, n),
            fmt::format("winner={};amount={}", result.winner, result.amount), pot_});
    return result;
}

void Lottery::append(LogRecord record) {
    if (total_funded_ != pot_ + total_paid_)
        throw std::logic_error("ledger conservation violated: funded != pot + paid");
    log_.push_back(std::move(record));
}

void Lottery::write_log(std::ostream& out) const {
    out << kLogHeader << '\n';
    for (const auto& r : log_)
        out << fmt::format("{},{},{},{},{},{}\n", r.tick, r.op, r.address, r.payload,
                           r.result, r.pot);
    out << kLogFooter << '\n';
}

std::string Lottery::log_text() const {
    std::ostringstream out;
    write_log(out);
    return out.str();
}

namespace {

std::uint8_t parse_byte(std::string_view field, int line_no, std::string_view what) {
    const std::uint64_t v = text::parse_u64(field, line_no, what);
    if (v > 255) throw ParseError(line_no, fmt::format("{} {} does not fit a byte", what, v));
    return static_cast<std::uint8_t>(v);
}

const std::string& kv_get(const std::map<std::string, std::string, std::less<>>& kv,
                          std::string_view key, int line_no) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw ParseError(line_no, fmt::format("payload is missing '{}'", key));
    return it->second;
}

ValidityPolicy parse_policy(const std::map<std::string, std::string, std::less<>>& kv,
                            int line_no) {
    ValidityPolicy p;
    p.ideal_temp_min_c = text::parse_double(kv_get(kv, "tmin", line_no), line_no, "tmin");
    p.ideal_temp_max_c = text::parse_double(kv_get(kv, "tmax", line_no), line_no, "tmax");
    p.ideal_rh_min_pct = text::parse_double(kv_get(kv, "hmin", line_no), line_no, "hmin");
    p.ideal_rh_max_pct = text::parse_double(kv_get(kv, "hmax", line_no), line_no, "hmax");
    const std::uint64_t acc = text::parse_u64(kv_get(kv, "acc", line_no), line_no, "acc");
    if (acc > 1) throw ParseError(line_no, "acc must be 0 or 1");
    p.acceptable_mode = acc == 1;
    return p;
}

std::array<std::uint8_t, node::kWordBytes> parse_hex_word(std::string_view hex,
                                                          int line_no,
                                                          std::string_view what) {
    if (hex.size() != 2 * node::kWordBytes)
        throw ParseError(line_no, fmt::format("{} must be {} hex digits", what,
                                              2 * node::kWordBytes));
    const auto nibble = [&](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        throw ParseError(line_no, fmt::format("bad hex digit '{}' in {}", c, what));
    };
    std::array<std::uint8_t, node::kWordBytes> bytes{};
    for (std::size_t i = 0; i < node::kWordBytes; ++i)
        bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    return bytes;
}

LogRecord parse_record(std::string_view line, int line_no) {
    const auto fields = text::split(line, ',');
    if (fields.size() != 6)
        throw ParseError(line_no,
                         fmt::format("expected 6 comma-separated fields, got {}", fields.size()));
    LogRecord r;
    r.tick = text::parse_u64(fields[0], line_no, "tick");
    r.op = std::string(fields[1]);
    r.address = std::string(fields[2]);
    r.payload = std::string(fields[3]);
    r.result = std::string(fields[4]);
    r.pot = text::parse_u64(fields[5], line_no, "pot");
    return r;
}

void replay_record(Lottery& lottery, const LogRecord& r, int line_no) {
    const auto kv = text::parse_kv(r.payload, line_no);
    try {
        if (r.op == "fund") {
            lottery.fund(r.address, text::parse_u64(kv_get(kv, "amount", line_no), line_no,
                                                    "amount"),
                         r.tick);
        } else if (r.op == "enter") {
            lottery.enter(r.address, parse_byte(kv_get(kv, "temp", line_no), line_no, "temp"),
                          parse_byte(kv_get(kv, "hum", line_no), line_no, "hum"),
                          parse_policy(kv, line_no), r.tick);
        } else if (r.op == "enter_packed") {
            node::PackedWord temps;
            temps.bytes = parse_hex_word(kv_get(kv, "temps", line_no), line_no, "temps");
            temps.count = text::parse_u64(kv_get(kv, "tcount", line_no), line_no, "tcount");
            node::PackedWord hums;
            hums.bytes = parse_hex_word(kv_get(kv, "hums", line_no), line_no, "hums");
            hums.count = text::parse_u64(kv_get(kv, "hcount", line_no), line_no, "hcount");
            lottery.enter_packed(r.address, temps, hums,
                                 text::parse_u64(kv_get(kv, "count", line_no), line_no, "count"),
                                 parse_policy(kv, line_no), r.tick);
        } else if (r.op == "draw") {
            if (lottery.entries().empty())
                throw ParseError(line_no, "draw recorded with no entrants");
            lottery.draw(text::parse_u64(kv_get(kv, "seed", line_no), line_no, "seed"), r.tick);
        } else {
            throw ParseError(line_no, fmt::format("unknown operation '{}'", r.op));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line_no, fmt::format("operation failed on replay: {}", e.what()));
    }
    if (lottery.log().back() != r)
        throw ParseError(line_no, "replayed record diverges from the log");
}

}  // namespace

Lottery replay(std::istream& in) {
    Lottery lottery;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    bool saw_footer = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!saw_header) {
            if (line != kLogHeader)
                throw ParseError(line_no, fmt::format("expected header '{}'", kLogHeader));
            saw_header = true;
            continue;
        }
        if (saw_footer) {
            if (!line.empty())
                throw ParseError(line_no, "content after the end marker");
            continue;
        }
        if (line == kLogFooter) {
            saw_footer = true;
            continue;
        }
        replay_record(lottery, parse_record(line, line_no), line_no);
    }
    if (!saw_header) throw ParseError(line_no, "empty input, expected a ledger log");
    if (!saw_footer) throw ParseError(line_no, "log is truncated: missing end marker");
    return lottery;
}

Lottery replay_text(const std::string& text) {
    std::istringstream in(text);
    return replay(in);
}

}  // namespace dss::ledger
