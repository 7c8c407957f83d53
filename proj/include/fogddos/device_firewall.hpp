#pragma once

// Device-layer packet filter.
//
// Ruleset file grammar, one rule per line:
//
//   <action> <src> <dst> <proto> <dport> <flags>
//
//   action  drop | alert | forward
//   src/dst dotted IPv4 address, CIDR block (a.b.c.d/n) or *
//   proto   tcp | udp | icmp | *
//   dport   0-65535 or *
//   flags   letters from S A F R P U (exact set), - for the empty set, or *
//
// Blank lines and lines starting with `#` are ignored. Rule ids are assigned
// 1, 2, ... in file order. Matching is first-match-wins; packets no rule
// matches are forwarded. An ALERT withholds the packet and logs it.

#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fogddos/core_model.hpp"
#include "fogddos/ratio.hpp"
#include "fogddos/text_util.hpp"

namespace fogddos {

enum class FirewallAction : std::uint8_t { DROP, ALERT, FORWARD };

struct FirewallRule {
    std::optional<Ipv4Prefix> src_ip;
    std::optional<Ipv4Prefix> dst_ip;
    std::optional<Protocol> protocol;
    std::optional<std::uint16_t> dst_port;
    std::optional<FlagSet> flags;
    FirewallAction action = FirewallAction::DROP;
    std::uint32_t rule_id = 0;

    bool all_wildcard() const { return !src_ip && !dst_ip && !protocol && !dst_port && !flags; }

    friend bool operator==(const FirewallRule&, const FirewallRule&) = default;
};

inline bool match_firewall_rule(const FirewallRule& rule, const Packet& packet) {
    if (rule.src_ip && !rule.src_ip->contains(packet.src_ip)) return false;
    if (rule.dst_ip && !rule.dst_ip->contains(packet.dst_ip)) return false;
    if (rule.protocol && *rule.protocol != packet.protocol) return false;
    if (rule.dst_port && *rule.dst_port != packet.dst_port) return false;
    if (rule.flags && *rule.flags != packet.tcp_flags) return false;
    return true;
}

struct DeviceDelivery {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;

    friend bool operator==(const DeviceDelivery&, const DeviceDelivery&) = default;
};

struct FilterOutcome {
    std::uint64_t total = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t detected_dos = 0;
    std::uint64_t dropped = 0;
    std::uint64_t alerted = 0;
    Trace forwarded_stream;
    std::map<DeviceId, DeviceDelivery> per_device;
};

inline FilterOutcome filter_trace(const std::vector<FirewallRule>& ruleset, const Trace& trace) {
    if (ruleset.empty()) throw ConfigError("firewall ruleset is empty");
    FilterOutcome out;
    out.total = trace.size();
    for (const auto& p : trace) {
        auto& dev = out.per_device[p.device_id];
        ++dev.sent;
        FirewallAction action = FirewallAction::FORWARD;
        for (const auto& r : ruleset) {
            if (match_firewall_rule(r, p)) {
                action = r.action;
                break;
            }
        }
        switch (action) {
            case FirewallAction::FORWARD:
                ++out.forwarded;
                ++dev.delivered;
                out.forwarded_stream.push_back(p);
                break;
            case FirewallAction::DROP:
                ++out.detected_dos;
                ++out.dropped;
                break;
            case FirewallAction::ALERT:
                ++out.detected_dos;
                ++out.alerted;
                break;
        }
    }
    return out;
}

/// forwarded / total. Throws UndefinedRatioError on an empty outcome.
inline Ratio packet_delivery_ratio(const FilterOutcome& outcome) {
    if (outcome.total == 0) throw UndefinedRatioError("packet delivery ratio of an empty trace");
    return Ratio::of(outcome.forwarded, outcome.total);
}

/// delivered / sent per device. Devices that sent nothing are left out.
inline std::map<DeviceId, Ratio> per_device_pdr(const FilterOutcome& outcome) {
    std::map<DeviceId, Ratio> out;
    for (const auto& [dev, d] : outcome.per_device)
        if (d.sent > 0) out.emplace(dev, Ratio::of(d.delivered, d.sent));
    return out;
}

// ---------------------------------------------------------------------------
// Ruleset text

inline std::string format_firewall_rule(const FirewallRule& r) {
    std::string out;
    switch (r.action) {
        case FirewallAction::DROP: out = "drop"; break;
        case FirewallAction::ALERT: out = "alert"; break;
        case FirewallAction::FORWARD: out = "forward"; break;
    }
    out += ' ' + (r.src_ip ? r.src_ip->to_string() : "*");
    out += ' ' + (r.dst_ip ? r.dst_ip->to_string() : "*");
    std::string proto = "*";
    if (r.protocol) {
        proto = std::string(to_string(*r.protocol));
        for (auto& c : proto) c = static_cast<char>(c - 'A' + 'a');
    }
    out += ' ' + proto;
    out += ' ' + (r.dst_port ? std::to_string(*r.dst_port) : "*");
    out += ' ' + (r.flags ? (r.flags->empty() ? "-" : r.flags->to_string()) : "*");
    return out;
}

inline FirewallRule parse_firewall_rule(std::string_view line, std::uint32_t rule_id, std::size_t line_no = 0) {
    const auto f = text::split_ws(line);
    if (f.size() != 6) throw ParseError("expected 6 fields, found " + std::to_string(f.size()), line_no, 0);
    auto offset = [&](std::size_t i) { return static_cast<std::size_t>(f[i].data() - line.data()); };
    auto fail = [&](std::size_t i, const std::string& what) {
        return ParseError(what + " '" + std::string(f[i]) + "'", line_no, offset(i));
    };

    FirewallRule r;
    r.rule_id = rule_id;
    if (f[0] == "drop") r.action = FirewallAction::DROP;
    else if (f[0] == "alert") r.action = FirewallAction::ALERT;
    else if (f[0] == "forward") r.action = FirewallAction::FORWARD;
    else throw fail(0, "unknown action");

    for (std::size_t i : {1, 2}) {
        if (f[i] == "*") continue;
        auto prefix = Ipv4Prefix::parse(f[i]);
        if (!prefix) throw fail(i, "bad address pattern");
        (i == 1 ? r.src_ip : r.dst_ip) = *prefix;
    }
    if (f[3] != "*") {
        auto proto = parse_protocol(f[3]);
        if (!proto) throw fail(3, "unknown protocol");
        r.protocol = *proto;
    }
    if (f[4] != "*") {
        auto port = text::parse_number<std::uint16_t>(f[4]);
        if (!port) throw fail(4, "bad port");
        r.dst_port = *port;
    }
    if (f[5] == "-") {
        r.flags = FlagSet{};
    } else if (f[5] != "*") {
        try {
            r.flags = parse_flag_set(f[5]);
        } catch (const ParseError& e) {
            throw ParseError(e.message(), line_no, offset(5) + e.offset());
        }
    }
    if (r.all_wildcard()) throw ParseError("rule has no non-wildcard field", line_no, 0);
    return r;
}

inline std::vector<FirewallRule> parse_firewall_ruleset(std::istream& is) {
    std::vector<FirewallRule> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto lead = static_cast<std::size_t>(t.data() - line.data());
        try {
            out.push_back(parse_firewall_rule(t, static_cast<std::uint32_t>(out.size() + 1), line_no));
        } catch (const ParseError& e) {
            if (lead == 0) throw;
            throw ParseError(e.message(), line_no, e.offset() + lead);
        }
    }
    return out;
}

inline std::vector<FirewallRule> parse_firewall_ruleset(std::string_view text_in) {
    std::istringstream is{std::string(text_in)};
    return parse_firewall_ruleset(is);
}

/// Blocklisted range dropped outright; SYN-only packets from the secondary
/// range to the web port raise an alert.
inline constexpr std::string_view kDefaultFirewallRules =
    "# action src dst proto dport flags\n"
    "drop 203.0.113.0/24 * * * *\n"
    "alert 198.51.100.0/24 * tcp 80 S\n";

inline std::vector<FirewallRule> default_firewall_ruleset() { return parse_firewall_ruleset(kDefaultFirewallRules); }

}  // namespace fogddos
