#include <doctest.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dss/errors.hpp"
#include "dss/sim.hpp"
#include "dss/text.hpp"

using namespace dss;
using namespace dss::sim;

namespace {

// Small fast network: quiet freezer, no sensor noise, flush every cycle.
SimConfig quiet_config() {
    SimConfig config;
    config.n_nodes = 1;
    config.duration_h = 1.0;
    config.duty_cycle.sleep_hours = 0.25;
    config.flush.max_latency_h = 0.0;
    config.sensor_noise = false;
    config.freezer.warm_rate_c_per_h = 0.0;  // pinned at the setpoint
    return config;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    for (const auto piece : text::split(text, '\n'))
        if (!piece.empty()) out.emplace_back(piece);
    return out;
}

std::map<char, int> row_kinds(const std::vector<std::string>& lines) {
    std::map<char, int> counts;
    for (const auto& l : lines)
        if (!l.starts_with("#")) ++counts[l[0]];
    return counts;
}

}  // namespace

TEST_CASE("a quiet run is fully accounted for") {
    const RunResult r = run(quiet_config());
    // three cycles of 0.2516 h fit in one hour
    CHECK(r.summary.sent == 3);
    CHECK(r.summary.delivered == 3);
    CHECK(r.summary.accepted == 3);
    CHECK(r.summary.rejected == 0);
    REQUIRE(r.summary.nodes.size() == 1);
    CHECK(r.summary.nodes[0].drawn_mah == doctest::Approx(3 * 0.1225));
    CHECK_FALSE(r.summary.nodes[0].death_h.has_value());
    CHECK(r.summary.draws.empty());
    CHECK(r.active_nodes == std::vector<int>{0});

    const auto lines = lines_of(r.trace);
    CHECK(lines.front() == "# dss-trace v1");
    CHECK(lines.back() == "# end");
    const auto kinds = row_kinds(lines);
    CHECK(kinds.at('N') == 1 + 3 * 3);  // start plus three phases per cycle
    CHECK(kinds.at('F') == 3);
    CHECK(kinds.at('L') == 3);  // one accepted entry per cycle

}

TEST_CASE("freezer rows carry the pinned reading") {
    const RunResult r = run(quiet_config());
    for (const auto& l : lines_of(r.trace)) {
        if (!l.starts_with("F,")) continue;
        const auto fields = text::split(l, ',');
        REQUIRE(fields.size() == 7);
        CHECK(fields[3] == "-18");
        CHECK(fields[4] == "15");
        CHECK(fields[5] == "0");
        CHECK(fields[6] == "0");
    }
}

TEST_CASE("the replayed summary matches the run") {
    SimConfig config = quiet_config();
    config.n_nodes = 3;
    config.duration_h = 24.0;
    config.loss_prob = 0.35;
    config.sensor_noise = true;
    config.freezer.warm_rate_c_per_h = 1.5;
    config.draw_period_h = 6.0;
    config.initial_fund = 900;
    config.seed = 11;
    const RunResult r = run(config);
    CHECK(r.summary.sent > r.summary.delivered);  // the link dropped some
    CHECK(r.summary.delivered == r.summary.accepted + r.summary.rejected);
    CHECK_FALSE(r.summary.draws.empty());
    const SimSummary replayed = replay_text(r.trace);
    CHECK(replayed == r.summary);
}

TEST_CASE("identical configs give byte-identical traces") {
    SimConfig config = quiet_config();
    config.n_nodes = 2;
    config.duration_h = 12.0;
    config.loss_prob = 0.2;
    config.sensor_noise = true;
    config.seed = 1234;
    const RunResult a = run(config);
    const RunResult b = run(config);
    CHECK(a.trace == b.trace);
    CHECK(a.summary == b.summary);
    SimConfig other = config;
    other.seed = 1235;
    CHECK(run(other).trace != a.trace);
}

TEST_CASE("battery exhaustion shows up as a dead row and in the summary") {
    SimConfig config = quiet_config();
    config.duration_h = 3.0;
    config.battery.capacity_mah = 0.5;
    const RunResult r = run(config);
    REQUIRE(r.summary.nodes.size() == 1);
    REQUIRE(r.summary.nodes[0].death_h.has_value());
    // 0.5 mAh at 0.1225 mAh per cycle dies in the fifth cycle
    CHECK(*r.summary.nodes[0].death_h == doctest::Approx(5 * 0.2516).epsilon(0.01));
    bool saw_dead = false;
    for (const auto& l : lines_of(r.trace)) saw_dead = saw_dead || l.find(",dead,") != std::string::npos;
    CHECK(saw_dead);
    CHECK(r.active_nodes.empty());
    const SimSummary replayed = replay_text(r.trace);
    CHECK(replayed == r.summary);
}

TEST_CASE("cold derating scales the usable capacity") {
    SimConfig config = quiet_config();
    config.duration_h = 2.0;
    config.battery.capacity_mah = 1.0;
    config.cold_capacity_factor = 0.25;  // effectively 0.25 mAh
    const RunResult r = run(config);
    REQUIRE(r.summary.nodes.size() == 1);
    CHECK(r.summary.nodes[0].death_h.has_value());
}

TEST_CASE("the lottery pays a node through the trace") {
    SimConfig config = quiet_config();
    config.duration_h = 6.0;
    config.draw_period_h = 3.0;
    config.initial_fund = 1000;
    const RunResult r = run(config);
    REQUIRE(r.summary.draws.size() >= 1);
    CHECK(r.summary.draws[0].winner == "node0");
    CHECK(r.summary.draws[0].amount == 1000);
    // later draws pay an unfunded pot
    if (r.summary.draws.size() > 1) CHECK(r.summary.draws[1].amount == 0);
}

TEST_CASE("draws wait until somebody entered") {
    SimConfig config = quiet_config();
    config.duration_h = 1.0;
    config.duty_cycle.sleep_hours = 0.6;  // first entry lands at 0.6016
    config.draw_period_h = 0.5;           // the 0.5 h draw finds nobody
    config.initial_fund = 100;
    const RunResult r = run(config);
    CHECK(r.summary.sent == 1);
    REQUIRE(r.summary.draws.size() == 1);  // only the 1.0 h draw fires
    CHECK(r.summary.draws[0].amount == 100);
}

TEST_CASE("per-node overrides change only their node") {
    SimConfig config = quiet_config();
    config.n_nodes = 2;
    config.duration_h = 4.0;
    node::DutyCycleConfig slow = config.duty_cycle;
    slow.sleep_hours = 1.0;
    config.duty_overrides[1] = slow;
    const RunResult r = run(config);
    std::map<std::string, int> com_rows;
    for (const auto& l : lines_of(r.trace)) {
        const auto fields = text::split(l, ',');
        if (fields[0] == "N" && fields[3] == "com") ++com_rows[std::string(fields[1])];
    }
    CHECK(com_rows.at("0") == 15);  // 4 / 0.2516
    CHECK(com_rows.at("1") == 3);   // 4 / 1.0016
}

TEST_CASE("door events reach the right node's cabinet") {
    SimConfig config = quiet_config();
    config.n_nodes = 2;
    config.duration_h = 1.0;
    // cover node 1's first sample at 0.2507 h
    config.door_events.push_back({1, 0.2, 400.0});
    const RunResult r = run(config);
    bool node0_door = false, node1_door = false;
    for (const auto& l : lines_of(r.trace)) {
        const auto fields = text::split(l, ',');
        if (fields[0] != "F") continue;
        if (fields[1] == "0" && fields[6] == "1") node0_door = true;
        if (fields[1] == "1" && fields[6] == "1") node1_door = true;
    }
    CHECK_FALSE(node0_door);
    CHECK(node1_door);
}

TEST_CASE("config validation rejects bad shapes") {
    SimConfig config = quiet_config();
    SUBCASE("node counts") {
        config.n_nodes = 0;
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("door event node ids") {
        config.door_events.push_back({5, 0.0, 1.0});
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("override node ids") {
        config.duty_overrides[9] = config.duty_cycle;
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("loss probability") {
        config.loss_prob = 1.5;
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
    SUBCASE("fund address") {
        config.fund_address = "no spaces allowed";
        CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    }
}

TEST_CASE("summary text round-trips") {
    SimSummary s;
    s.sent = 12;
    s.delivered = 10;
    s.accepted = 9;
    s.rejected = 1;
    s.nodes.push_back({0, 1.2345678901234567, std::nullopt});
    s.nodes.push_back({1, 0.5, 45.75});
    s.draws.push_back({7, "node1", 1000});
    const SimSummary parsed = SimSummary::parse_text(s.render());
    CHECK(parsed == s);
}

TEST_CASE("trace replay rejects malformed input") {
    const std::string good = run(quiet_config()).trace;
    CHECK_NOTHROW(replay_text(good));
    SUBCASE("truncation") {
        CHECK_THROWS_AS(replay_text(good.substr(0, good.size() - 6)), ParseError);
    }
    SUBCASE("bad header") {
        CHECK_THROWS_AS(replay_text("# dss-trace v9\n# end\n"), ParseError);
    }
    SUBCASE("unknown row kind") {
        std::string bent = good;
        bent.insert(bent.find("N,0,0,start"), "X,1,2\n");
        CHECK_THROWS_AS(replay_text(bent), ParseError);
    }
    SUBCASE("delivery without submission") {
        std::string bent = good;
        const auto pos = bent.find(",com,");
        REQUIRE(pos != std::string::npos);
        const auto line_end = bent.find('\n', pos);
        bent.replace(pos, line_end - pos, ",com,0.1225,0,0,1");
        CHECK_THROWS_AS(replay_text(bent), ParseError);
    }
    SUBCASE("rows for unknown nodes") {
        CHECK_THROWS_AS(
            replay_text("# dss-trace v1\nN,3,1,sleeping,0.1,0,0,0\n# end\n"), ParseError);
    }
    SUBCASE("duplicate start rows") {
        CHECK_THROWS_AS(
            replay_text("# dss-trace v1\nN,0,0,start,0,0,0,0\nN,0,0,start,0,0,0,0\n# end\n"),
            ParseError);
    }
}

TEST_CASE("summary parse rejects malformed input") {
    CHECK_THROWS_AS(SimSummary::parse_text(""), ParseError);
    CHECK_THROWS_AS(SimSummary::parse_text("# dss-summary v1\nsent=1\n"), ParseError);
    CHECK_THROWS_AS(SimSummary::parse_text("# dss-summary v1\nsent=x\ndelivered=0\n"
                                           "accepted=0\nrejected=0\n# end\n"),
                    ParseError);
}
