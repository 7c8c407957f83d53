#include <gtest/gtest.h>

#include "support.hpp"

using namespace fogddos;

namespace {

Packet ack_to(std::uint64_t seq, double t, Ipv4Address dst) {
    return test::tcp(seq, t, addressing::device_ip(DeviceId{0}), dst, 50000, 443, {TcpFlag::ACK});
}

Packet syn_to(std::uint64_t seq, double t, Ipv4Address dst, std::uint16_t sport = 50000) {
    return test::tcp(seq, t, addressing::device_ip(DeviceId{0}), dst, sport, 80, {TcpFlag::SYN});
}

}  // namespace

TEST(RuleParse, DefaultRuleset) {
    const auto rules = default_mitigation_ruleset();
    ASSERT_EQ(rules.size(), 4u);

    const auto& r1 = rules[0];
    EXPECT_EQ(r1.action, RuleAction::DROP);
    EXPECT_EQ(r1.protocol, Protocol::TCP);
    EXPECT_FALSE(r1.src_ip);
    EXPECT_FALSE(r1.dst_port);
    EXPECT_EQ(r1.flags, (FlagSet{TcpFlag::SYN}));
    EXPECT_EQ(r1.msg, "TCP SYN flood detected!");
    EXPECT_EQ(r1.sid, 100001u);
    EXPECT_FALSE(r1.threshold);

    const auto& r2 = rules[1];
    EXPECT_EQ(r2.action, RuleAction::ALERT);
    EXPECT_FALSE(r2.protocol);
    ASSERT_TRUE(r2.threshold);
    EXPECT_EQ(r2.threshold->track, Track::BY_DST);
    EXPECT_EQ(r2.threshold->count, 50u);
    EXPECT_EQ(r2.threshold->seconds, 1u);
    EXPECT_EQ(r2.sid, 100002u);

    const auto& r3 = rules[2];
    EXPECT_EQ(r3.count, 10u);
    EXPECT_EQ(r3.seconds, 1u);
    ASSERT_TRUE(r3.threshold);
    EXPECT_EQ(r3.threshold->count, 50u);
    EXPECT_EQ(r3.sid, 100008u);

    const auto& r4 = rules[3];
    EXPECT_EQ(r4.flags, (FlagSet{TcpFlag::SYN, TcpFlag::ACK}));
    ASSERT_TRUE(r4.detection_filter);
    EXPECT_EQ(r4.detection_filter->track, Track::BY_DST);
    EXPECT_EQ(r4.detection_filter->count, 5u);
    EXPECT_EQ(r4.detection_filter->window_s, 1u);
    EXPECT_EQ(r4.sid, 100003u);
}

TEST(RuleParse, ShippedFileEqualsBuiltIn) {
    EXPECT_EQ(load_mitigation_rules(FOGDDOS_SOURCE_DIR "/rules/mitigation_default.rules"),
              default_mitigation_ruleset());
}

TEST(RuleParse, ProsePrefixIsDiscarded) {
    const auto r = parse_rule(
        "Responding to abnormal network activity.alert any any -> any any (threshold: type both, track by_dst, "
        "count 50, seconds 1; msg:\"x\"; sid:7;)");
    EXPECT_EQ(r.action, RuleAction::ALERT);
    EXPECT_EQ(r.discarded_prefix, "Responding to abnormal network activity.");
    EXPECT_EQ(r.sid, 7u);
}

TEST(RuleParse, EmptySidReportsOffset) {
    const std::string line = "drop tcp any any -> any any (flags: S; msg:\"m\"; sid:;)";
    try {
        parse_rule(line, 4);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
        EXPECT_EQ(e.offset(), line.find("sid:") + 4);
    }
}

TEST(RuleParse, Rejections) {
    for (const char* bad : {
             "reject tcp any any -> any any (sid:1;)",
             "drop tcp any any any any (sid:1;)",
             "drop tcp any any -> any any (flags: Z; sid:1;)",
             "drop tcp any any -> any any (msg:\"no sid\";)",
             "drop tcp any any -> any any (sid:0;)",
             "drop tcp any any -> any any (sid:1; sid:2;)",
             "drop tcp any any -> any any (sid:1; bogus: 3;)",
             "drop tcp any any -> any any (sid:1; threshold: type both, count 5;)",
             "drop tcp any any -> any 99999 (sid:1;)",
             "drop tcp any any -> any any (sid:1;) trailing",
             "drop tcp any any -> any any sid:1;",
         })
        EXPECT_THROW(parse_rule(bad), ParseError) << bad;
}

TEST(RuleParse, RulesetErrors) {
    EXPECT_TRUE(parse_ruleset("").empty());
    EXPECT_TRUE(parse_ruleset("# only a comment\n\n").empty());
    try {
        parse_ruleset("alert any any -> any any (sid:5;)\n\nalert any any -> any any (sid:5;)\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("duplicate sid 5"), std::string::npos);
    }
}

TEST(RuleEval, SynDroppedByFirstRule) {
    Trace t{syn_to(0, 0.1, addressing::server_ip(0))};
    const auto r = evaluate_trace(default_mitigation_ruleset(), t);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0], Verdict::DROP);
    ASSERT_EQ(r.log.size(), 1u);
    EXPECT_EQ(r.log[0].sid, 100001u);
    EXPECT_EQ(r.log[0].msg, "TCP SYN flood detected!");
}

TEST(RuleEval, ResponseTimeAlertAtFifty) {
    const auto rules = default_mitigation_ruleset();
    const auto dst = addressing::server_ip(1);
    Trace t;
    for (std::uint64_t i = 0; i < 49; ++i) t.push_back(ack_to(i, 0.01 * static_cast<double>(i), dst));
    auto r = evaluate_trace(rules, t);
    EXPECT_TRUE(r.log.empty());
    for (auto v : r.verdicts) EXPECT_EQ(v, Verdict::FORWARD);

    t.push_back(ack_to(49, 0.495, dst));
    r = evaluate_trace(rules, t);
    ASSERT_EQ(r.log.size(), 1u);
    EXPECT_EQ(r.log[0].sid, 100002u);
    EXPECT_EQ(r.log[0].seq_no, 49u);
    EXPECT_EQ(r.verdicts.back(), Verdict::ALERT);

    // Suppressed for the rest of the second, then fires again.
    for (std::uint64_t i = 50; i < 60; ++i) t.push_back(ack_to(i, 0.5 + 0.01 * static_cast<double>(i - 50), dst));
    r = evaluate_trace(rules, t);
    EXPECT_EQ(r.log.size(), 1u);
}

TEST(RuleEval, HalfOpenFilterNeedsMoreThanCount) {
    std::vector<MitigationRule> rules{default_mitigation_ruleset()[3]};
    Trace t;
    for (std::uint64_t i = 0; i < 6; ++i)
        t.push_back(test::tcp(i, 0.1 * static_cast<double>(i), addressing::device_ip(DeviceId{0}),
                              addressing::server_ip(0), 50000, 80, {TcpFlag::SYN, TcpFlag::ACK}));
    const auto r = evaluate_trace(rules, t);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.verdicts[i], Verdict::FORWARD) << i;
    EXPECT_EQ(r.verdicts[5], Verdict::DROP);
}

TEST(RuleEval, MatchesWindowReplayOracle) {
    Rng rng(77);
    for (int round = 0; round < 300; ++round) {
        const auto rules = test::random_rule_subset(rng);
        const auto trace = test::random_trace(rng, rng.below(400), 1.0 + rng.uniform01() * 4.0);
        const auto got = evaluate_trace(rules, trace);
        const auto want = test::oracle_rules(rules, trace);
        ASSERT_EQ(got.verdicts, want.verdicts) << "round " << round;
        ASSERT_EQ(got.log, want.log) << "round " << round;
    }
}

TEST(RuleEval, DenseAlertOnlyRulesMatchOracle) {
    // Without the leading SYN drop the counting rules see heavy traffic.
    auto all = default_mitigation_ruleset();
    std::vector<MitigationRule> rules{all[1], all[2], all[3]};
    rules[1].threshold->count = 3;
    rules[1].count = 2;
    rules[0].threshold->count = 4;
    Rng rng(8);
    for (int round = 0; round < 100; ++round) {
        const auto trace = test::random_trace(rng, 300, 2.0);
        ASSERT_EQ(evaluate_trace(rules, trace).verdicts, test::oracle_rules(rules, trace).verdicts);
        ASSERT_EQ(evaluate_trace(rules, trace).log, test::oracle_rules(rules, trace).log);
    }
}

TEST(RuleEval, StateCarriesAcrossSplits) {
    Rng rng(11);
    const auto rules = default_mitigation_ruleset();
    for (int round = 0; round < 50; ++round) {
        const auto trace = test::random_trace(rng, 300, 3.0);
        const auto whole = evaluate_trace(rules, trace);
        const auto cut = rng.below(trace.size() + 1);

        RuleEngine first(rules);
        std::vector<RuleActionRecord> log;
        std::vector<Verdict> verdicts;
        for (std::size_t i = 0; i < cut; ++i) verdicts.push_back(first.process(trace[i], log));
        RuleEngine second(rules, first.state());
        for (std::size_t i = cut; i < trace.size(); ++i) verdicts.push_back(second.process(trace[i], log));
        ASSERT_EQ(verdicts, whole.verdicts);
        ASSERT_EQ(log, whole.log);
    }
}

TEST(RuleEval, OutOfOrderTimestampsRejected) {
    const auto dst = addressing::server_ip(0);
    Trace t{ack_to(0, 1.0, dst), ack_to(1, 0.5, dst)};
    EXPECT_THROW(evaluate_trace(default_mitigation_ruleset(), t), PreconditionError);
}

TEST(RuleEval, ActionLogIsOneJsonObjectPerLine) {
    Trace t{syn_to(0, 0.1, addressing::server_ip(0)), syn_to(1, 0.2, addressing::server_ip(0), 50001)};
    const auto r = evaluate_trace(default_mitigation_ruleset(), t);
    std::ostringstream os;
    write_action_log(os, r.log);
    std::istringstream is(os.str());
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("sid"), 100001);
        EXPECT_EQ(j.at("action"), "drop");
        ++n;
    }
    EXPECT_EQ(n, 2);
}
