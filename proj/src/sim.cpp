#include "dss/sim.hpp"

#include <algorithm>
#include <istream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <fmt/core.h>

#include "dss/errors.hpp"
#include "dss/rng.hpp"
#include "dss/text.hpp"

namespace dss::sim {

namespace {

constexpr std::string_view kTraceHeader = "# dss-trace v1";
constexpr std::string_view kSummaryHeader = "# dss-summary v1";
constexpr std::string_view kFooter = "# end";

// Seed stream tags; one independent stream per purpose per node.
constexpr std::uint64_t kSensorTag = 1;
constexpr std::uint64_t kLinkTag = 2;
constexpr std::uint64_t kDrawTag = 3;

}  // namespace

void SimConfig::validate() const {
    if (n_nodes < 1)
        throw std::invalid_argument("n_nodes must be at least 1");
    if (!(duration_h > 0.0))
        throw std::invalid_argument("duration_h must be positive");
    if (!(tick_h > 0.0))
        throw std::invalid_argument("tick_h must be positive");
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
        throw std::invalid_argument("loss_prob must be within [0, 1]");
    if (!(cold_capacity_factor > 0.0))
        throw std::invalid_argument("cold_capacity_factor must be positive");
    if (draw_period_h < 0.0)
        throw std::invalid_argument("draw_period_h must be non-negative");
    duty_cycle.validate();
    battery.validate();
    freezer.validate();
    sensor.validate();
    policy.validate();
    flush.validate();
    ledger::validate_address(fund_address);
    for (const auto& ev : door_events) {
        if (ev.node_id < 0 || ev.node_id >= n_nodes)
            throw std::invalid_argument(
                fmt::format("door event names unknown node {}", ev.node_id));
        if (ev.t_h < 0.0 || ev.duration_s < 0.0)
            throw std::invalid_argument("door events need non-negative time and duration");
    }
    for (const auto& [id, duty] : duty_overrides) {
        if (id < 0 || id >= n_nodes)
            throw std::invalid_argument(
                fmt::format("duty override names unknown node {}", id));
        duty.validate();
    }
    for (const auto& [id, fz] : freezer_overrides) {
        if (id < 0 || id >= n_nodes)
            throw std::invalid_argument(
                fmt::format("freezer override names unknown node {}", id));
        fz.validate();
    }
}

namespace {

struct Event {
    double t = 0.0;
    int kind = 0;  // 0: node cycle end, 1: draw
    int id = 0;    // node id, or draw index
    std::uint64_t seq = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.t, a.kind, a.id, a.seq) > std::tie(b.t, b.kind, b.id, b.seq);
    }
};

struct SimNode {
    node::NodeState state;
    thermal::FreezerRun freezer;
    Rng sensor_rng;
    Rng link_rng;
    node::DutyCycleConfig duty;
};

std::string ledger_row(const ledger::LogRecord& r) {
    return fmt::format("L,{},{},{},{},{},{}\n", r.tick, r.op, r.address, r.payload,
                       r.result, r.pot);
}

}  // namespace

RunResult run(const SimConfig& config) {
    config.validate();
    std::string trace = fmt::format("{}\n", kTraceHeader);
    SimSummary summary;
    ledger::Lottery lottery;
    registry::NodeRegistry registry;
    std::uint64_t tick = 0;

    std::vector<SimNode> nodes;
    nodes.reserve(static_cast<std::size_t>(config.n_nodes));
    for (int id = 0; id < config.n_nodes; ++id) {
        const auto duty_it = config.duty_overrides.find(id);
        const node::DutyCycleConfig duty =
            duty_it == config.duty_overrides.end() ? config.duty_cycle : duty_it->second;
        const auto fz_it = config.freezer_overrides.find(id);
        const thermal::FreezerParams freezer =
            fz_it == config.freezer_overrides.end() ? config.freezer : fz_it->second;
        std::vector<thermal::FreezerRun::DoorEvent> doors;
        for (const auto& ev : config.door_events)
            if (ev.node_id == id) doors.push_back({ev.t_h, ev.duration_s});
        node::NodeState state;
        state.id = id;
        state.battery = config.battery;
        state.battery.capacity_mah *= config.cold_capacity_factor;
        nodes.push_back(SimNode{std::move(state),
                                thermal::FreezerRun(freezer, config.tick_h, std::move(doors)),
                                Rng(derive_seed(config.seed, kSensorTag,
                                                static_cast<std::uint64_t>(id))),
                                Rng(derive_seed(config.seed, kLinkTag,
                                                static_cast<std::uint64_t>(id))),
                                duty});
        registry.add_node(id, 0, 3.0 * duty.sleep_hours);
        trace += fmt::format("N,{},0,start,0,0,0,0\n", id);
    }
    if (config.initial_fund > 0) {
        lottery.fund(config.fund_address, config.initial_fund, tick++);
        trace += ledger_row(lottery.log().back());
    }

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t seq = 0;
    const auto schedule_cycle = [&](int id) {
        // Mirror run_cycle's accumulation exactly so the event time equals
        // the node clock after the cycle.
        double end = nodes[static_cast<std::size_t>(id)].state.t_h;
        const auto& duty = nodes[static_cast<std::size_t>(id)].duty;
        end += duty.sleep_hours;
        end += duty.init_phase_h();
        end += duty.com_phase_h();
        if (end <= config.duration_h) queue.push(Event{end, 0, id, seq++});
    };
    for (int id = 0; id < config.n_nodes; ++id) schedule_cycle(id);
    if (config.draw_period_h > 0.0) {
        for (int k = 1; k * config.draw_period_h <= config.duration_h; ++k)
            queue.push(Event{k * config.draw_period_h, 1, k - 1, seq++});
    }

    const node::LossyLink link{config.loss_prob};
    while (!queue.empty()) {
        const Event ev = queue.top();
        queue.pop();
        if (ev.kind == 1) {
            if (lottery.entries().empty()) continue;  // nobody to pay this round
            const std::uint64_t draw_seed =
                derive_seed(config.seed, kDrawTag, static_cast<std::uint64_t>(ev.id));
            const auto result = lottery.draw(draw_seed, tick++);
            trace += ledger_row(lottery.log().back());
            summary.draws.push_back(
                LotteryOutcome{lottery.log().back().tick, result.winner, result.amount});
            continue;
        }
        SimNode& sn = nodes[static_cast<std::size_t>(ev.id)];
        const std::size_t pre_buffer = sn.state.buffered.size();
        const node::CycleOutcome out = node::run_cycle(
            sn.state, sn.freezer, config.sensor, sn.duty, config.flush, link, &lottery,
            config.policy, config.sensor_noise ? &sn.sensor_rng : nullptr, sn.link_rng,
            tick);
        if (out.enter_status) ++tick;
        for (const auto& pe : out.phases) {
            const bool is_com = pe.phase == node::Phase::com;
            trace += fmt::format("N,{},{},{},{},{},{},{}\n", ev.id, pe.end_h,
                                 node::to_string(pe.phase), pe.drawn_mah,
                                 is_com ? out.buffered : pre_buffer,
                                 is_com && out.submitted ? 1 : 0,
                                 is_com && out.delivered ? 1 : 0);
            if (pe.phase == node::Phase::init && out.reading)
                trace += fmt::format("F,{},{},{},{},{},{}\n", ev.id, out.reading->t_sim_h,
                                     out.reading->temp_c, out.reading->rh_pct,
                                     out.compressor_on ? 1 : 0, out.door_open ? 1 : 0);
            if (is_com && out.enter_status) trace += ledger_row(lottery.log().back());
        }
        if (out.submitted) ++summary.sent;
        if (out.delivered) ++summary.delivered;
        if (out.enter_status) {
            if (out.accepted)
                ++summary.accepted;
            else
                ++summary.rejected;
            registry.record_report(ev.id, out.accepted, sn.state.t_h);
        }
        if (!sn.state.alive)
            trace += fmt::format("N,{},{},dead,{},{},0,0\n", ev.id, *sn.state.death_h,
                                 sn.state.battery.drawn_mah, sn.state.buffered.size());
        else
            schedule_cycle(ev.id);
    }
    trace += fmt::format("{}\n", kFooter);

    RunResult result;
    result.trace = std::move(trace);
    for (const auto& sn : nodes)
        summary.nodes.push_back(
            NodeSummary{sn.state.id, sn.state.battery.drawn_mah, sn.state.death_h});
    result.summary = std::move(summary);
    for (int id = 0; id < config.n_nodes; ++id)
        if (registry.is_active(id, config.duration_h)) result.active_nodes.push_back(id);
    return result;
}

std::string SimSummary::render() const {
    std::string out = fmt::format("{}\n", kSummaryHeader);
    out += fmt::format("sent={}\n", sent);
    out += fmt::format("delivered={}\n", delivered);
    out += fmt::format("accepted={}\n", accepted);
    out += fmt::format("rejected={}\n", rejected);
    for (const auto& n : nodes) {
        out += fmt::format("node,{},drawn_mah={},death_h=", n.node_id, n.drawn_mah);
        out += n.death_h ? fmt::format("{}\n", *n.death_h) : "-\n";
    }
    for (const auto& d : draws)
        out += fmt::format("draw,tick={},winner={},amount={}\n", d.tick, d.winner, d.amount);
    out += fmt::format("{}\n", kFooter);
    return out;
}

namespace {

std::string_view expect_prefix(std::string_view line, std::string_view prefix, int line_no) {
    if (!line.starts_with(prefix))
        throw ParseError(line_no, fmt::format("expected '{}...'", prefix));
    return line.substr(prefix.size());
}

}  // namespace

SimSummary SimSummary::parse(std::istream& in) {
    SimSummary s;
    std::string line;
    int line_no = 0;
    const auto next_line = [&]() {
        if (!std::getline(in, line))
            throw ParseError(line_no, "summary is truncated");
        ++line_no;
        return std::string_view(line);
    };
    if (next_line() != kSummaryHeader)
        throw ParseError(line_no, fmt::format("expected header '{}'", kSummaryHeader));
    s.sent = text::parse_u64(expect_prefix(next_line(), "sent=", line_no), line_no, "sent");
    s.delivered = text::parse_u64(expect_prefix(next_line(), "delivered=", line_no), line_no,
                                  "delivered");
    s.accepted = text::parse_u64(expect_prefix(next_line(), "accepted=", line_no), line_no,
                                 "accepted");
    s.rejected = text::parse_u64(expect_prefix(next_line(), "rejected=", line_no), line_no,
                                 "rejected");
    bool saw_footer = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (saw_footer) {
            if (!line.empty()) throw ParseError(line_no, "content after the end marker");
            continue;
        }
        if (line == kFooter) {
            saw_footer = true;
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields[0] == "node") {
            if (fields.size() != 4)
                throw ParseError(line_no, "node line needs 4 fields");
            NodeSummary n;
            n.node_id = static_cast<int>(text::parse_i64(fields[1], line_no, "node id"));
            n.drawn_mah = text::parse_double(expect_prefix(fields[2], "drawn_mah=", line_no),
                                             line_no, "drawn_mah");
            const auto death = expect_prefix(fields[3], "death_h=", line_no);
            if (death != "-")
                n.death_h = text::parse_double(death, line_no, "death_h");
            if (!s.draws.empty())
                throw ParseError(line_no, "node lines must precede draw lines");
            s.nodes.push_back(std::move(n));
        } else if (fields[0] == "draw") {
            if (fields.size() != 4)
                throw ParseError(line_no, "draw line needs 4 fields");
            LotteryOutcome d;
            d.tick = text::parse_u64(expect_prefix(fields[1], "tick=", line_no), line_no,
                                     "tick");
            d.winner = std::string(expect_prefix(fields[2], "winner=", line_no));
            d.amount = text::parse_u64(expect_prefix(fields[3], "amount=", line_no), line_no,
                                       "amount");
            s.draws.push_back(std::move(d));
        } else {
            throw ParseError(line_no, fmt::format("unknown summary line '{}'", line));
        }
    }
    if (!saw_footer) throw ParseError(line_no, "summary is truncated: missing end marker");
    return s;
}

SimSummary SimSummary::parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

namespace {

bool parse_flag(std::string_view field, int line_no, std::string_view what) {
    const std::uint64_t v = text::parse_u64(field, line_no, what);
    if (v > 1) throw ParseError(line_no, fmt::format("{} must be 0 or 1", what));
    return v == 1;
}

}  // namespace

SimSummary replay(std::istream& in) {
    SimSummary s;
    struct NodeReplay {
        double drawn = 0.0;
        std::optional<double> death_h;
    };
    std::map<int, NodeReplay> nodes;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    bool saw_footer = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!saw_header) {
            if (line != kTraceHeader)
                throw ParseError(line_no, fmt::format("expected header '{}'", kTraceHeader));
            saw_header = true;
            continue;
        }
        if (saw_footer) {
            if (!line.empty()) throw ParseError(line_no, "content after the end marker");
            continue;
        }
        if (line == kFooter) {
            saw_footer = true;
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields[0] == "N") {
            if (fields.size() != 8)
                throw ParseError(line_no, "node row needs 8 fields");
            const int id = static_cast<int>(text::parse_i64(fields[1], line_no, "node id"));
            const double t = text::parse_double(fields[2], line_no, "time");
            const std::string_view phase = fields[3];
            const double drawn = text::parse_double(fields[4], line_no, "drawn_mah");
            text::parse_u64(fields[5], line_no, "buffered");
            const bool submitted = parse_flag(fields[6], line_no, "submitted");
            const bool delivered = parse_flag(fields[7], line_no, "delivered");
            if (delivered && !submitted)
                throw ParseError(line_no, "delivered without a submission");
            if (phase == "start") {
                if (t != 0.0)
                    throw ParseError(line_no, "start rows must sit at time 0");
                if (!nodes.emplace(id, NodeReplay{}).second)
                    throw ParseError(line_no, fmt::format("duplicate start row for node {}", id));
                continue;
            }
            const auto it = nodes.find(id);
            if (it == nodes.end())
                throw ParseError(line_no, fmt::format("node {} has no start row", id));
            it->second.drawn = drawn;
            if (phase == "dead") {
                if (it->second.death_h)
                    throw ParseError(line_no, fmt::format("node {} died twice", id));
                it->second.death_h = t;
            } else if (phase == "com") {
                if (submitted) ++s.sent;
                if (delivered) ++s.delivered;
            } else if (phase != "sleeping" && phase != "init") {
                throw ParseError(line_no, fmt::format("unknown phase '{}'", phase));
            }
        } else if (fields[0] == "F") {
            if (fields.size() != 7)
                throw ParseError(line_no, "freezer row needs 7 fields");
            text::parse_i64(fields[1], line_no, "node id");
            text::parse_double(fields[2], line_no, "time");
            text::parse_double(fields[3], line_no, "temperature");
            text::parse_double(fields[4], line_no, "humidity");
            parse_flag(fields[5], line_no, "compressor");
            parse_flag(fields[6], line_no, "door");
        } else if (fields[0] == "L") {
            if (fields.size() != 7)
                throw ParseError(line_no, "ledger row needs 7 fields");
            const std::uint64_t tick = text::parse_u64(fields[1], line_no, "tick");
            const std::string_view op = fields[2];
            const std::string_view result = fields[5];
            if (op == "enter" || op == "enter_packed") {
                if (result == "accepted")
                    ++s.accepted;
                else if (result.starts_with("rejected="))
                    ++s.rejected;
                else
                    throw ParseError(line_no,
                                     fmt::format("unknown entry result '{}'", result));
            } else if (op == "draw") {
                const auto kv = text::parse_kv(result, line_no);
                const auto winner = kv.find("winner");
                const auto amount = kv.find("amount");
                if (winner == kv.end() || amount == kv.end())
                    throw ParseError(line_no, "draw result needs winner and amount");
                s.draws.push_back(LotteryOutcome{
                    tick, winner->second,
                    text::parse_u64(amount->second, line_no, "amount")});
            } else if (op != "fund") {
                throw ParseError(line_no, fmt::format("unknown ledger op '{}'", op));
            }
        } else {
            throw ParseError(line_no, fmt::format("unknown row kind '{}'", fields[0]));
        }
    }
    if (!saw_header) throw ParseError(line_no, "empty input, expected a trace");
    if (!saw_footer) throw ParseError(line_no, "trace is truncated: missing end marker");
    for (const auto& [id, nr] : nodes)
        s.nodes.push_back(NodeSummary{id, nr.drawn, nr.death_h});
    return s;
}

SimSummary replay_text(const std::string& text) {
    std::istringstream in(text);
    return replay(in);
}

}  // namespace dss::sim
