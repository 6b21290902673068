#include <doctest.h>

#include <stdexcept>
#include <string>

#include "dss/errors.hpp"
#include "dss/ledger.hpp"
#include "dss/rng.hpp"

using namespace dss;
using namespace dss::ledger;

TEST_CASE("funding grows the pot and is conserved") {
    Lottery lottery;
    lottery.fund("sponsor", 1000, 0);
    CHECK(lottery.pot() == 1000);
    CHECK(lottery.total_funded() == 1000);
    lottery.fund("sponsor", 1, 1);
    CHECK(lottery.pot() == 1001);

    CHECK_THROWS_AS(lottery.fund("sponsor", 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(lottery.fund("sponsor", ~0ull, 2), std::invalid_argument);
    CHECK_THROWS_AS(lottery.fund("", 5, 2), std::invalid_argument);
    CHECK_THROWS_AS(lottery.fund("has space", 5, 2), std::invalid_argument);
    CHECK(lottery.log().size() == 2);  // failed ops leave no record
}

TEST_CASE("policy validation and the byte-band oracle") {
    ValidityPolicy policy;
    CHECK_NOTHROW(policy.validate());
    SUBCASE("ideal band must stay sub-zero") {
        policy.ideal_temp_max_c = 0.0;
        CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
    }
    SUBCASE("bands must be non-empty") {
        policy.ideal_rh_min_pct = 19.0;
        CHECK_THROWS_AS(policy.validate(), std::invalid_argument);
    }
    SUBCASE("default band admits exactly bytes [19,25] x [12,18]") {
        // -18 +/- 3 C maps to bytes 19..25; 15 +/- 3 %RH maps to 12..18
        for (int tb = 0; tb <= 120; ++tb)
            for (int hb = 0; hb <= 100; ++hb) {
                const bool expected = tb >= 19 && tb <= 25 && hb >= 12 && hb <= 18;
                CHECK(policy.admits(static_cast<std::uint8_t>(tb),
                                    static_cast<std::uint8_t>(hb)) == expected);
            }
    }
    SUBCASE("acceptable mode admits any sub-zero temperature") {
        policy.acceptable_mode = true;
        CHECK(policy.admits(39, 90));        // -1 C, humidity ignored
        CHECK(policy.admits(0, 0));          // -40 C
        CHECK_FALSE(policy.admits(40, 15));  // 0 C is not sub-zero
        CHECK(policy.admits(22, 15));        // ideal still qualifies
    }
}

TEST_CASE("entering the draw") {
    Lottery lottery;
    const ValidityPolicy policy;
    SUBCASE("in-band readings are accepted and ticketed") {
        CHECK(lottery.enter("node1", 22, 15, policy, 1) == EnterStatus::accepted);
        CHECK(lottery.entries().size() == 1);
        const Entry& e = lottery.entries().at("node1");
        CHECK(e.temp_byte == 22);
        CHECK(e.hum_byte == 15);
        CHECK(e.tick == 1);
        // re-entry refreshes rather than duplicating
        CHECK(lottery.enter("node1", 19, 18, policy, 2) == EnterStatus::accepted);
        CHECK(lottery.entries().size() == 1);
        CHECK(lottery.entries().at("node1").temp_byte == 19);
    }
    SUBCASE("byte edges of the band") {
        CHECK(lottery.enter("a", 19, 12, policy, 0) == EnterStatus::accepted);
        CHECK(lottery.enter("b", 25, 18, policy, 0) == EnterStatus::accepted);
        CHECK(lottery.enter("c", 18, 15, policy, 0) == EnterStatus::rejected_out_of_policy);
        CHECK(lottery.enter("d", 26, 15, policy, 0) == EnterStatus::rejected_out_of_policy);
        CHECK(lottery.enter("e", 22, 11, policy, 0) == EnterStatus::rejected_out_of_policy);
        CHECK(lottery.enter("f", 22, 19, policy, 0) == EnterStatus::rejected_out_of_policy);
    }
    SUBCASE("malformed bytes are rejected before policy") {
        CHECK(lottery.enter("node1", 121, 15, policy, 0) == EnterStatus::rejected_malformed);
        CHECK(lottery.enter("node1", 22, 101, policy, 0) == EnterStatus::rejected_malformed);
        CHECK(lottery.entries().empty());
    }
    SUBCASE("a warm reading never qualifies") {
        CHECK(lottery.enter("node1", 60, 15, policy, 0) ==
              EnterStatus::rejected_out_of_policy);  // +20 C
        ValidityPolicy lax = policy;
        lax.acceptable_mode = true;
        CHECK(lottery.enter("node1", 60, 15, lax, 0) == EnterStatus::rejected_out_of_policy);
    }
}

TEST_CASE("entering packed words") {
    Lottery lottery;
    const ValidityPolicy policy;
    const auto word = [](std::initializer_list<std::uint8_t> bytes) {
        return node::pack(std::vector<std::uint8_t>(bytes));
    };
    SUBCASE("all readings must pass; the last one becomes the entry") {
        const auto status = lottery.enter_packed("node1", word({22, 23, 19}),
                                                 word({15, 16, 17}), 3, policy, 9);
        CHECK(status == EnterStatus::accepted);
        const Entry& e = lottery.entries().at("node1");
        CHECK(e.temp_byte == 19);
        CHECK(e.hum_byte == 17);
        CHECK(e.tick == 9);
    }
    SUBCASE("count mismatch") {
        CHECK(lottery.enter_packed("n", word({22, 23}), word({15, 16}), 3, policy, 0) ==
              EnterStatus::rejected_count_mismatch);
        CHECK(lottery.enter_packed("n", word({22, 23}), word({15}), 2, policy, 0) ==
              EnterStatus::rejected_count_mismatch);
    }
    SUBCASE("corrupt word shape is malformed") {
        node::PackedWord bad = word({22, 23});
        bad.bytes[10] = 7;  // non-zero past count
        CHECK(lottery.enter_packed("n", bad, word({15, 16}), 2, policy, 0) ==
              EnterStatus::rejected_malformed);
        node::PackedWord zero;
        CHECK(lottery.enter_packed("n", zero, zero, 0, policy, 0) ==
              EnterStatus::rejected_malformed);
    }
    SUBCASE("one bad reading rejects the whole word") {
        CHECK(lottery.enter_packed("n", word({22, 121}), word({15, 15}), 2, policy, 0) ==
              EnterStatus::rejected_malformed);
        CHECK(lottery.enter_packed("n", word({22, 30}), word({15, 15}), 2, policy, 0) ==
              EnterStatus::rejected_out_of_policy);
        CHECK(lottery.entries().empty());
    }
}

TEST_CASE("drawing a round") {
    Lottery lottery;
    const ValidityPolicy policy;
    CHECK_THROWS_AS(lottery.draw(1, 0), std::logic_error);
    lottery.fund("sponsor", 500, 0);
    lottery.enter("node1", 22, 15, policy, 1);
    lottery.enter("node2", 23, 16, policy, 2);
    lottery.enter("node3", 24, 17, policy, 3);

    SUBCASE("the winner takes the whole pot and the round resets") {
        const auto result = lottery.draw(42, 4);
        CHECK(result.amount == 500);
        CHECK(lottery.pot() == 0);
        CHECK(lottery.total_paid() == 500);
        CHECK(lottery.total_funded() == 500);
        CHECK(lottery.round() == 1);
        CHECK(lottery.entries().empty());
        CHECK_THROWS_AS(lottery.draw(43, 5), std::logic_error);  // nobody re-entered
    }
    SUBCASE("the same seed picks the same winner") {
        Lottery other;
        other.fund("sponsor", 500, 0);
        other.enter("node1", 22, 15, policy, 1);
        other.enter("node2", 23, 16, policy, 2);
        other.enter("node3", 24, 17, policy, 3);
        CHECK(lottery.draw(42, 4).winner == other.draw(42, 4).winner);
    }
    SUBCASE("the draw follows the seeded index over sorted entrants") {
        const auto result = lottery.draw(42, 4);
        Rng rng(42);
        const char* expected[] = {"node1", "node2", "node3"};
        CHECK(result.winner == expected[rng.below(3)]);
    }
    SUBCASE("an empty pot still draws") {
        Lottery dry;
        dry.enter("node1", 22, 15, policy, 0);
        CHECK(dry.draw(7, 1).amount == 0);
        CHECK(dry.round() == 1);
    }
}

TEST_CASE("log format is stable") {
    Lottery lottery;
    const ValidityPolicy policy;
    lottery.fund("sponsor", 1000, 0);
    lottery.enter("node1", 22, 15, policy, 1);
    lottery.enter("node2", 60, 15, policy, 2);
    lottery.draw(42, 3);
    const std::string expected =
        "# dss-ledger-log v1\n"
        "0,fund,sponsor,amount=1000,ok,1000\n"
        "1,enter,node1,temp=22;hum=15;tmin=-21;tmax=-15;hmin=12;hmax=18;acc=0,accepted,1000\n"
        "2,enter,node2,temp=60;hum=15;tmin=-21;tmax=-15;hmin=12;hmax=18;acc=0,"
        "rejected=out_of_policy,1000\n"
        "3,draw,-,seed=42;entrants=1,winner=node1;amount=1000,0\n"
        "# end\n";
    CHECK(lottery.log_text() == expected);
}

TEST_CASE("replay reconstructs the lottery exactly") {
    Lottery lottery;
    const ValidityPolicy policy;
    lottery.fund("sponsor", 750, 0);
    lottery.enter("node1", 22, 15, policy, 1);
    lottery.enter("node2", 121, 15, policy, 2);
    ValidityPolicy lax = policy;
    lax.acceptable_mode = true;
    lottery.enter("node3", 39, 77, lax, 3);
    const auto temps = node::pack(std::vector<std::uint8_t>{22, 23});
    const auto hums = node::pack(std::vector<std::uint8_t>{15, 16});
    lottery.enter_packed("node4", temps, hums, 2, policy, 4);
    lottery.draw(99, 5);
    lottery.fund("sponsor", 10, 6);

    const Lottery replayed = replay_text(lottery.log_text());
    CHECK(replayed == lottery);
    CHECK(replayed.log_text() == lottery.log_text());
}

TEST_CASE("replay rejects tampering, truncation, and garbage") {
    Lottery lottery;
    const ValidityPolicy policy;
    lottery.fund("sponsor", 100, 0);
    lottery.enter("node1", 22, 15, policy, 1);
    lottery.draw(5, 2);
    const std::string text = lottery.log_text();

    SUBCASE("clean text replays") { CHECK_NOTHROW(replay_text(text)); }
    SUBCASE("missing end marker") {
        const std::string cut = text.substr(0, text.size() - 6);
        CHECK_THROWS_AS(replay_text(cut), ParseError);
    }
    SUBCASE("bad header") {
        try {
            replay_text("# dss-ledger-log v2\n# end\n");
            FAIL("bad header replayed");
        } catch (const ParseError& e) {
            CHECK(e.line_no() == 1);
        }
    }
    SUBCASE("tampered result field") {
        std::string bent = text;
        const auto pos = bent.find(",accepted,");
        REQUIRE(pos != std::string::npos);
        bent.replace(pos, 10, ",rejected=out_of_policy,");
        try {
            replay_text(bent);
            FAIL("tampered log replayed");
        } catch (const ParseError& e) {
            CHECK(e.line_no() == 3);
        }
    }
    SUBCASE("tampered pot") {
        std::string bent = text;
        const auto pos = bent.find("ok,100");
        REQUIRE(pos != std::string::npos);
        bent.replace(pos, 6, "ok,101");
        CHECK_THROWS_AS(replay_text(bent), ParseError);
    }
    SUBCASE("content after the end marker") {
        CHECK_THROWS_AS(replay_text(text + "0,fund,x,amount=1,ok,1\n"), ParseError);
    }
    SUBCASE("draw without entrants") {
        CHECK_THROWS_AS(
            replay_text("# dss-ledger-log v1\n0,draw,-,seed=1;entrants=1,winner=x;amount=0,0\n# end\n"),
            ParseError);
    }
    SUBCASE("unknown op") {
        CHECK_THROWS_AS(replay_text("# dss-ledger-log v1\n0,mint,x,amount=1,ok,1\n# end\n"),
                        ParseError);
    }
    SUBCASE("empty input") { CHECK_THROWS_AS(replay_text(""), ParseError); }
}

TEST_CASE("conservation holds through arbitrary op sequences") {
    Lottery lottery;
    const ValidityPolicy policy;
    Rng rng(2024);
    for (int i = 0; i < 3000; ++i) {
        const auto tick = static_cast<std::uint64_t>(i);
        switch (rng.below(4)) {
            case 0:
                lottery.fund("backer" + std::to_string(rng.below(3)), rng.below(100) + 1,
                             tick);
                break;
            case 1:
                lottery.enter("node" + std::to_string(rng.below(8)),
                              static_cast<std::uint8_t>(rng.below(256)),
                              static_cast<std::uint8_t>(rng.below(256)), policy, tick);
                break;
            case 2: {
                std::vector<std::uint8_t> temps, hums;
                const std::size_t count = rng.below(5) + 1;
                for (std::size_t j = 0; j < count; ++j) {
                    temps.push_back(static_cast<std::uint8_t>(rng.below(130)));
                    hums.push_back(static_cast<std::uint8_t>(rng.below(110)));
                }
                lottery.enter_packed("node" + std::to_string(rng.below(8)),
                                     node::pack(temps), node::pack(hums), count, policy,
                                     tick);
                break;
            }
            default:
                if (!lottery.entries().empty()) lottery.draw(rng.next_u64(), tick);
                break;
        }
        CHECK(lottery.total_funded() == lottery.pot() + lottery.total_paid());
    }
    const Lottery replayed = replay_text(lottery.log_text());
    CHECK(replayed == lottery);
}
