#pragma once

// Packet builders, random inputs and brute-force oracles shared by the
// unit tests and the acceptance binary. The oracles deliberately avoid the
// library's matching and windowing code.

#include <string>
#include <vector>

#include "fogddos/fogddos.hpp"

namespace fogddos::test {

inline Packet tcp(std::uint64_t seq, double t, Ipv4Address src, Ipv4Address dst, std::uint16_t sport,
                  std::uint16_t dport, FlagSet flags, std::uint32_t device = 0, Label label = Label::BENIGN,
                  std::vector<std::uint8_t> payload = {}) {
    Packet p;
    p.seq_no = seq;
    p.timestamp = t;
    p.src_ip = src;
    p.dst_ip = dst;
    p.src_port = sport;
    p.dst_port = dport;
    p.protocol = Protocol::TCP;
    p.tcp_flags = flags;
    p.payload = std::move(payload);
    p.size_bytes = kHeaderFloor + static_cast<std::uint32_t>(p.payload.size());
    p.device_id = DeviceId{device};
    p.src_mac = addressing::device_mac(DeviceId{device});
    p.label = label;
    return p;
}

inline Packet udp(std::uint64_t seq, double t, Ipv4Address src, Ipv4Address dst, std::uint16_t dport,
                  std::uint32_t device = 0, std::size_t payload_len = 32) {
    Packet p;
    p.seq_no = seq;
    p.timestamp = t;
    p.src_ip = src;
    p.dst_ip = dst;
    p.src_port = 40000;
    p.dst_port = dport;
    p.protocol = Protocol::UDP;
    p.payload.resize(payload_len);
    for (std::size_t i = 0; i < payload_len; ++i) p.payload[i] = static_cast<std::uint8_t>(i * 37 + 11);
    p.size_bytes = kHeaderFloor + static_cast<std::uint32_t>(payload_len);
    p.device_id = DeviceId{device};
    p.src_mac = addressing::device_mac(DeviceId{device});
    return p;
}

/// A complete benign exchange: SYN, handshake ACK, one data segment, FIN.
inline void benign_session(Trace& out, std::uint64_t& seq, double t, std::uint32_t device, Ipv4Address dst,
                           std::uint16_t sport) {
    const auto src = addressing::device_ip(DeviceId{device});
    std::vector<std::uint8_t> data(200);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i * 7 + sport);
    out.push_back(tcp(seq++, t, src, dst, sport, 443, {TcpFlag::SYN}, device));
    out.push_back(tcp(seq++, t + 0.011, src, dst, sport, 443, {TcpFlag::ACK}, device));
    out.push_back(tcp(seq++, t + 0.012, src, dst, sport, 443, {TcpFlag::ACK, TcpFlag::PSH}, device, Label::BENIGN, data));
    out.push_back(tcp(seq++, t + 0.020, src, dst, sport, 443, {TcpFlag::FIN, TcpFlag::ACK}, device));
}

/// Random timestamp-ordered trace over small address pools, so per-window
/// counters collide often.
inline Trace random_trace(Rng& rng, std::size_t n, double duration_s, std::uint32_t n_devices = 3) {
    static const std::vector<FlagSet> kFlags = {
        {TcpFlag::SYN}, {TcpFlag::SYN}, {TcpFlag::SYN}, {TcpFlag::SYN, TcpFlag::ACK}, {TcpFlag::ACK},
        {TcpFlag::ACK, TcpFlag::PSH}, {TcpFlag::FIN, TcpFlag::ACK}, {TcpFlag::RST}, {TcpFlag::SYN, TcpFlag::FIN}};
    std::vector<double> ts(n);
    for (auto& t : ts) t = std::floor(rng.uniform(0.0, duration_s) * 1000.0) / 1000.0;
    std::sort(ts.begin(), ts.end());
    Trace out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto dev = static_cast<std::uint32_t>(rng.below(n_devices));
        const auto src = rng.below(4) == 0 ? Ipv4Address(198, 51, 100, static_cast<std::uint8_t>(rng.below(4)))
                                           : addressing::device_ip(DeviceId{dev});
        const auto dst = addressing::server_ip(static_cast<std::uint32_t>(rng.below(3)));
        const auto dport = static_cast<std::uint16_t>(rng.below(2) ? 80 : 443);
        const auto sport = static_cast<std::uint16_t>(50000 + rng.below(8));
        if (rng.below(5) == 0) {
            auto p = udp(i, ts[i], src, dst, 53, dev, 20 + rng.below(40));
            out.push_back(p);
            continue;
        }
        std::vector<std::uint8_t> payload;
        if (rng.below(4) == 0) payload.assign(8 + rng.below(64), static_cast<std::uint8_t>(rng.below(256)));
        const auto label = rng.below(3) == 0 ? Label::ATTACK : Label::BENIGN;
        out.push_back(tcp(i, ts[i], src, dst, sport, dport, kFlags[rng.below(kFlags.size())], dev, label, payload));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Firewall oracle: naive per-packet scan of the rule list.

inline bool oracle_in_prefix(const Ipv4Prefix& pre, Ipv4Address a) {
    const int drop_bits = 32 - pre.length;
    if (drop_bits >= 32) return true;
    return (static_cast<std::uint64_t>(a.bits()) >> drop_bits) == (static_cast<std::uint64_t>(pre.network.bits()) >> drop_bits);
}

inline std::optional<FirewallAction> oracle_first_match(const std::vector<FirewallRule>& rules, const Packet& p) {
    for (const auto& r : rules) {
        const bool ok = (!r.src_ip || oracle_in_prefix(*r.src_ip, p.src_ip)) &&
                        (!r.dst_ip || oracle_in_prefix(*r.dst_ip, p.dst_ip)) &&
                        (!r.protocol || *r.protocol == p.protocol) && (!r.dst_port || *r.dst_port == p.dst_port) &&
                        (!r.flags || r.flags->bits() == p.tcp_flags.bits());
        if (ok) return r.action;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Rule-engine oracle: every window is recomputed by scanning the full
// history for each packet.

struct OracleResult {
    std::vector<Verdict> verdicts;
    std::vector<RuleActionRecord> log;
};

inline bool oracle_header(const MitigationRule& r, const Packet& p) {
    if (r.protocol && *r.protocol != p.protocol) return false;
    if (r.src_ip && !oracle_in_prefix(*r.src_ip, p.src_ip)) return false;
    if (r.dst_ip && !oracle_in_prefix(*r.dst_ip, p.dst_ip)) return false;
    if (r.src_port && *r.src_port != p.src_port) return false;
    if (r.dst_port && *r.dst_port != p.dst_port) return false;
    if (r.flags && r.flags->bits() != p.tcp_flags.bits()) return false;
    return true;
}

inline OracleResult oracle_rules(const std::vector<MitigationRule>& rules, const Trace& trace) {
    const std::size_t n = trace.size(), m = rules.size();
    std::vector<std::vector<char>> event(m, std::vector<char>(n, 0));
    std::vector<std::vector<char>> eligible(m, std::vector<char>(n, 0));
    std::vector<std::vector<char>> logged(m, std::vector<char>(n, 0));
    auto tracked = [](Track t, const Packet& p) { return t == Track::BY_DST ? p.dst_ip : p.src_ip; };
    OracleResult out;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = trace[i];
        bool dropped = false, alerted = false;
        for (std::size_t r = 0; r < m && !dropped; ++r) {
            const auto& rule = rules[r];
            if (!oracle_header(rule, p)) continue;
            event[r][i] = 1;

            bool ok = true;
            if (rule.detection_filter) {
                const auto& df = *rule.detection_filter;
                std::size_t c = 0;
                for (std::size_t j = 0; j <= i; ++j)
                    if (event[r][j] && tracked(df.track, trace[j]) == tracked(df.track, p) &&
                        p.timestamp - trace[j].timestamp < df.window_s)
                        ++c;
                ok = c > df.count;
            } else if (rule.count) {
                const double window = rule.seconds ? *rule.seconds : 1.0;
                std::size_t c = 0;
                for (std::size_t j = 0; j <= i; ++j)
                    if (event[r][j] && trace[j].dst_ip == p.dst_ip && p.timestamp - trace[j].timestamp < window) ++c;
                ok = c >= *rule.count;
            }
            if (!ok) continue;
            eligible[r][i] = 1;

            bool log_it = true;
            if (rule.threshold) {
                const auto& th = *rule.threshold;
                std::size_t c = 0;
                bool recent_log = false;
                for (std::size_t j = 0; j <= i; ++j) {
                    if (tracked(th.track, trace[j]) != tracked(th.track, p)) continue;
                    if (p.timestamp - trace[j].timestamp >= th.seconds) continue;
                    if (eligible[r][j]) ++c;
                    if (j < i && logged[r][j]) recent_log = true;
                }
                log_it = !recent_log && c >= th.count;
            }
            if (log_it) {
                logged[r][i] = 1;
                out.log.push_back({p.seq_no, rule.sid, rule.action, rule.msg, p.timestamp});
            }
            if (rule.action == RuleAction::DROP) dropped = true;
            else alerted = alerted || log_it;
        }
        out.verdicts.push_back(dropped ? Verdict::DROP : alerted ? Verdict::ALERT : Verdict::FORWARD);
    }
    return out;
}

/// Random subset of the default rules in random order.
inline std::vector<MitigationRule> random_rule_subset(Rng& rng) {
    auto all = default_mitigation_ruleset();
    rng.shuffle(all);
    all.resize(1 + rng.below(all.size()));
    return all;
}

}  // namespace fogddos::test
