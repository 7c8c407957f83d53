#include <gtest/gtest.h>

#include "support.hpp"

using namespace fogddos;

namespace {

const DetectorParams kParams{};
const Ipv4Address kDst = addressing::server_ip(0);

Trace syn_burst(std::size_t n, std::uint32_t device = 0, double t0 = 0.1) {
    Trace t;
    for (std::size_t i = 0; i < n; ++i)
        t.push_back(test::tcp(i, t0 + 0.001 * static_cast<double>(i), addressing::device_ip(DeviceId{device}), kDst,
                              static_cast<std::uint16_t>(40000 + i), 80, {TcpFlag::SYN}, device));
    return t;
}

bool has(const EvidenceList& ev, Reason r) {
    return std::any_of(ev.begin(), ev.end(), [&](const Evidence& e) { return e.reason == r; });
}

std::size_t count(const EvidenceList& ev, Reason r) {
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [&](const Evidence& e) { return e.reason == r; }));
}

}  // namespace

TEST(Statistical, SynRateBoundary) {
    EXPECT_FALSE(has(statistical_analyze(syn_burst(10), kParams), Reason::SYN_RATE));
    const auto ev = statistical_analyze(syn_burst(11), kParams);
    ASSERT_TRUE(has(ev, Reason::SYN_RATE));
    for (const auto& e : ev)
        if (e.reason == Reason::SYN_RATE) {
            EXPECT_EQ(e.analyzer, Analyzer::STATISTICAL);
            EXPECT_EQ(e.seq_nos.size(), 11u);
            EXPECT_EQ(e.window_start_s, 0.0);
        }
}

TEST(Statistical, SynRateNeedsSynDominance) {
    auto t = syn_burst(11);
    for (std::uint64_t i = 0; i < 12; ++i)
        t.push_back(test::udp(11 + i, 0.5 + 0.001 * static_cast<double>(i), addressing::device_ip(DeviceId{0}), kDst, 53));
    EXPECT_FALSE(has(statistical_analyze(t, kParams), Reason::SYN_RATE));
}

TEST(Specification, ConnRateBoundary) {
    EXPECT_FALSE(has(specification_analyze(syn_burst(20), kParams), Reason::CONN_RATE));
    const auto ev = specification_analyze(syn_burst(21), kParams);
    ASSERT_EQ(count(ev, Reason::CONN_RATE), 1u);
}

TEST(Specification, CompletedConnectionsAreNotAttributed) {
    Trace t;
    std::uint64_t seq = 0;
    for (std::uint16_t i = 0; i < 25; ++i) test::benign_session(t, seq, 0.1 + 0.03 * i, 0, kDst, 50000 + i);
    EXPECT_FALSE(has(specification_analyze(t, kParams), Reason::CONN_RATE));
}

TEST(Specification, ProtocolViolations) {
    const auto src = addressing::device_ip(DeviceId{0});
    Trace t{test::tcp(0, 0.1, src, kDst, 50000, 80, {TcpFlag::ACK}),
            test::tcp(1, 0.2, src, kDst, 50001, 80, {TcpFlag::SYN, TcpFlag::FIN})};
    const auto ev = specification_analyze(t, kParams);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0].reason, Reason::HANDSHAKE_VIOLATION);
    EXPECT_EQ(ev[0].seq_nos, std::vector<std::uint64_t>{0});
    EXPECT_EQ(ev[1].reason, Reason::FLAG_VIOLATION);
    EXPECT_EQ(ev[1].seq_nos, std::vector<std::uint64_t>{1});
}

TEST(Behavioral, HalfOpenBoundary) {
    EXPECT_FALSE(has(behavioral_analyze(syn_burst(5), kParams), Reason::HALF_OPEN));
    const auto ev = behavioral_analyze(syn_burst(6), kParams);
    ASSERT_EQ(count(ev, Reason::HALF_OPEN), 1u);
    EXPECT_EQ(ev.front().analyzer, Analyzer::BEHAVIORAL);
}

TEST(Behavioral, FlowSpikeBoundary) {
    auto flows = [](std::size_t n) {
        Trace t;
        for (std::size_t i = 0; i < n; ++i)
            t.push_back(test::udp(i, 0.1 + 0.001 * static_cast<double>(i),
                                  Ipv4Address(100, 64, 0, static_cast<std::uint8_t>(i + 1)), kDst, 53));
        return t;
    };
    EXPECT_FALSE(has(behavioral_analyze(flows(50), kParams), Reason::FLOW_SPIKE));
    EXPECT_TRUE(has(behavioral_analyze(flows(51), kParams), Reason::FLOW_SPIKE));
}

TEST(Behavioral, ResponseTimeInflation) {
    Trace t;
    std::vector<ResponseObservation> responses;
    std::uint64_t seq = 0;
    // 40 normal observations build the baseline, then 12 slow ones in window 5.
    for (int i = 0; i < 40; ++i) {
        ResponseObservation r;
        r.syn_seq_no = seq++;
        r.dst_ip = kDst;
        r.latency_s = 0.01;
        r.timestamp = 0.05 * i;
        responses.push_back(r);
    }
    auto burst = syn_burst(12, 0, 5.1);
    for (auto& p : burst) {
        p.seq_no = seq++;
        ResponseObservation r;
        r.syn_seq_no = p.seq_no;
        r.dst_ip = kDst;
        r.latency_s = 0.2;
        r.timestamp = p.timestamp + 0.2;
        responses.push_back(r);
        t.push_back(p);
    }
    EXPECT_TRUE(has(behavioral_analyze(t, kParams, responses), Reason::RESPONSE_TIME));
    EXPECT_FALSE(has(behavioral_analyze(t, kParams), Reason::RESPONSE_TIME));
}

TEST(Dpi, IllegalFlagsAndRepetitivePayload) {
    const auto src = addressing::device_ip(DeviceId{0});
    Trace t{test::tcp(0, 0.1, src, kDst, 50001, 80, {TcpFlag::SYN, TcpFlag::FIN}),
            test::tcp(1, 0.2, src, kDst, 50002, 80, {TcpFlag::ACK, TcpFlag::PSH}, 0, Label::BENIGN,
                      std::vector<std::uint8_t>(1000, 0x41))};
    const auto ev = deep_packet_inspect(t, kParams);
    EXPECT_TRUE(has(ev, Reason::ILLEGAL_FLAGS));
    EXPECT_TRUE(has(ev, Reason::REPETITIVE_PAYLOAD));
    EXPECT_FALSE(has(ev, Reason::OVERSIZED_PAYLOAD));
    for (const auto& e : ev) EXPECT_EQ(e.analyzer, Analyzer::DPI);
}

TEST(Dpi, SynPayloadAndOversize) {
    const auto src = addressing::device_ip(DeviceId{0});
    std::vector<std::uint8_t> big(1500);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = static_cast<std::uint8_t>(i);
    Trace t{test::tcp(0, 0.1, src, kDst, 50001, 80, {TcpFlag::SYN}, 0, Label::BENIGN, {1, 2, 3}),
            test::tcp(1, 0.2, src, kDst, 50002, 80, {TcpFlag::ACK, TcpFlag::PSH}, 0, Label::BENIGN, big)};
    const auto ev = deep_packet_inspect(t, kParams);
    EXPECT_TRUE(has(ev, Reason::SYN_PAYLOAD));
    EXPECT_TRUE(has(ev, Reason::OVERSIZED_PAYLOAD));
}

TEST(FogNode, BenignSessionsProduceNoEvidence) {
    Trace t;
    std::uint64_t seq = 0;
    for (int s = 0; s < 30; ++s)
        for (std::uint32_t d = 0; d < 4; ++d)
            test::benign_session(t, seq, s * 1.0 + 0.1 * d, d, addressing::server_ip(d % 3),
                                 static_cast<std::uint16_t>(50000 + s));
    const auto r = fog_node_analyze(FogNodeId{0}, t, kParams);
    EXPECT_TRUE(r.evidence.empty());
    EXPECT_TRUE(r.flagged_packets.empty());
    EXPECT_TRUE(r.suspect_devices.empty());
}

TEST(FogNode, EmptyStream) {
    const auto r = fog_node_analyze(FogNodeId{2}, {}, kParams);
    EXPECT_EQ(r.fog_node_id, FogNodeId{2});
    EXPECT_TRUE(r.evidence.empty());
}

TEST(FogNode, UnorderedInputRejected) {
    auto t = syn_burst(3);
    std::swap(t[0].timestamp, t[2].timestamp);
    EXPECT_THROW(fog_node_analyze(FogNodeId{0}, t, kParams), PreconditionError);
}

TEST(FogNode, UnionsMatchEvidence) {
    ScenarioConfig cfg = preset_config("scenario1");
    RunOptions opt;
    opt.sample_resources = false;
    const auto run = run_scenario(cfg, opt);
    bool attacker_suspected = false;
    for (const auto& r : run.fog_reports) {
        std::set<std::uint64_t> flagged;
        std::set<DeviceId> suspects;
        for (const auto& e : r.evidence) {
            EXPECT_EQ(e.analyzer, analyzer_of(e.reason));
            flagged.insert(e.seq_nos.begin(), e.seq_nos.end());
            suspects.insert(e.device_id);
        }
        EXPECT_EQ(r.flagged_packets, flagged);
        EXPECT_EQ(r.suspect_devices, suspects);
        attacker_suspected = attacker_suspected || r.suspect_devices.count(DeviceId{0});
    }
    EXPECT_TRUE(attacker_suspected);
}

TEST(FogNode, BlindToGroundTruthLabels) {
    Rng rng(31);
    for (int round = 0; round < 30; ++round) {
        auto t = test::random_trace(rng, 400, 4.0);
        const auto a = fog_node_analyze(FogNodeId{0}, t, kParams);
        for (auto& p : t)
            if (rng.below(2)) p.label = p.label == Label::ATTACK ? Label::BENIGN : Label::ATTACK;
        const auto b = fog_node_analyze(FogNodeId{0}, t, kParams);
        ASSERT_EQ(a.evidence, b.evidence);
    }
}

TEST(DetectorParams, Validation) {
    EXPECT_NO_THROW(validate(DetectorParams{}));
    DetectorParams p;
    p.window_s = 0;
    EXPECT_THROW(validate(p), ConfigError);
    p = {};
    p.syn_fraction_threshold = 1.5;
    EXPECT_THROW(validate(p), ConfigError);
}
