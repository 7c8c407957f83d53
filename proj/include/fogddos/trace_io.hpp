#pragma once

// Trace and response-observation text formats.
//
// Trace: one packet per line, whitespace separated, in this order:
//
//   seq_no timestamp src_ip dst_ip src_port dst_port protocol flags size payload src_mac device_id label
//
// `flags` is the canonical letter string (S A F R P U) or `-` when empty,
// `payload` is lowercase hex or `-` when empty, `timestamp` uses the shortest
// decimal form that round-trips. Lines starting with `#` are comments; the
// first line written is the `# fogddos-trace v1` header.
//
// Responses: `syn_seq_no timestamp dst_ip latency_s device_id`, header
// `# fogddos-responses v1`.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fogddos/core_model.hpp"
#include "fogddos/text_util.hpp"

namespace fogddos {

inline constexpr std::string_view kTraceHeader = "# fogddos-trace v1";
inline constexpr std::string_view kResponsesHeader = "# fogddos-responses v1";

inline std::string format_packet(const Packet& p) {
    static constexpr char hex[] = "0123456789abcdef";
    std::string payload;
    if (p.payload.empty()) {
        payload = "-";
    } else {
        payload.reserve(p.payload.size() * 2);
        for (auto b : p.payload) {
            payload.push_back(hex[b >> 4]);
            payload.push_back(hex[b & 0xf]);
        }
    }
    const auto flags = p.tcp_flags.empty() ? std::string("-") : p.tcp_flags.to_string();
    std::string out;
    out += std::to_string(p.seq_no);
    out += ' ';
    out += text::shortest(p.timestamp);
    out += ' ';
    out += p.src_ip.to_string();
    out += ' ';
    out += p.dst_ip.to_string();
    out += ' ';
    out += std::to_string(p.src_port);
    out += ' ';
    out += std::to_string(p.dst_port);
    out += ' ';
    out += to_string(p.protocol);
    out += ' ';
    out += flags;
    out += ' ';
    out += std::to_string(p.size_bytes);
    out += ' ';
    out += payload;
    out += ' ';
    out += p.src_mac.to_string();
    out += ' ';
    out += std::to_string(p.device_id.value);
    out += ' ';
    out += to_string(p.label);
    return out;
}

inline Packet parse_packet(std::string_view line, std::size_t line_no = 0) {
    const auto f = text::split_ws(line);
    if (f.size() != 13)
        throw ParseError("expected 13 fields, found " + std::to_string(f.size()), line_no, 0);
    auto offset_of = [&](std::size_t i) { return static_cast<std::size_t>(f[i].data() - line.data()); };
    auto fail = [&](std::size_t i, const std::string& what) -> ParseError {
        return ParseError(what + " '" + std::string(f[i]) + "'", line_no, offset_of(i));
    };

    Packet p;
    auto seq = text::parse_number<std::uint64_t>(f[0]);
    if (!seq) throw fail(0, "bad seq_no");
    p.seq_no = *seq;
    auto ts = text::parse_number<double>(f[1]);
    if (!ts || *ts < 0) throw fail(1, "bad timestamp");
    p.timestamp = *ts;
    auto src = Ipv4Address::parse(f[2]);
    if (!src) throw fail(2, "bad src_ip");
    p.src_ip = *src;
    auto dst = Ipv4Address::parse(f[3]);
    if (!dst) throw fail(3, "bad dst_ip");
    p.dst_ip = *dst;
    auto sport = text::parse_number<std::uint16_t>(f[4]);
    if (!sport) throw fail(4, "bad src_port");
    p.src_port = *sport;
    auto dport = text::parse_number<std::uint16_t>(f[5]);
    if (!dport) throw fail(5, "bad dst_port");
    p.dst_port = *dport;
    auto proto = parse_protocol(f[6]);
    if (!proto) throw fail(6, "bad protocol");
    p.protocol = *proto;
    if (f[7] != "-") {
        try {
            p.tcp_flags = parse_flag_set(f[7]);
        } catch (const ParseError&) {
            throw fail(7, "bad flags");
        }
    }
    auto size = text::parse_number<std::uint32_t>(f[8]);
    if (!size) throw fail(8, "bad size");
    p.size_bytes = *size;
    if (f[9] != "-") {
        const auto hex = f[9];
        if (hex.size() % 2 != 0) throw fail(9, "odd-length payload hex");
        p.payload.reserve(hex.size() / 2);
        for (std::size_t i = 0; i < hex.size(); i += 2) {
            unsigned v = 0;
            auto [end, ec] = std::from_chars(hex.data() + i, hex.data() + i + 2, v, 16);
            if (ec != std::errc{} || end != hex.data() + i + 2) throw fail(9, "bad payload hex");
            p.payload.push_back(static_cast<std::uint8_t>(v));
        }
    }
    if (p.size_bytes != kHeaderFloor + p.payload.size()) throw fail(8, "size does not match payload");
    auto mac = MacAddress::parse(f[10]);
    if (!mac) throw fail(10, "bad src_mac");
    p.src_mac = *mac;
    auto dev = text::parse_number<std::uint32_t>(f[11]);
    if (!dev) throw fail(11, "bad device_id");
    p.device_id = DeviceId{*dev};
    if (f[12] == "ATTACK") p.label = Label::ATTACK;
    else if (f[12] == "BENIGN") p.label = Label::BENIGN;
    else throw fail(12, "bad label");
    if (p.protocol != Protocol::TCP && !p.tcp_flags.empty()) throw fail(7, "flags on non-TCP packet");
    return p;
}

inline void write_trace(std::ostream& os, const Trace& trace) {
    os << kTraceHeader << '\n';
    for (const auto& p : trace) os << format_packet(p) << '\n';
}

inline Trace read_trace(std::istream& is) {
    Trace out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.push_back(parse_packet(t, line_no));
    }
    return out;
}

inline void write_responses(std::ostream& os, const std::vector<ResponseObservation>& rs) {
    os << kResponsesHeader << '\n';
    for (const auto& r : rs) {
        os << r.syn_seq_no << ' ' << text::shortest(r.timestamp) << ' ' << r.dst_ip.to_string() << ' '
           << text::shortest(r.latency_s) << ' ' << r.device_id.value << '\n';
    }
}

inline std::vector<ResponseObservation> read_responses(std::istream& is) {
    std::vector<ResponseObservation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto f = text::split_ws(t);
        if (f.size() != 5) throw ParseError("expected 5 fields", line_no, 0);
        auto seq = text::parse_number<std::uint64_t>(f[0]);
        auto ts = text::parse_number<double>(f[1]);
        auto dst = Ipv4Address::parse(f[2]);
        auto lat = text::parse_number<double>(f[3]);
        auto dev = text::parse_number<std::uint32_t>(f[4]);
        if (!seq || !ts || !dst || !lat || !dev) throw ParseError("malformed response record", line_no, 0);
        out.push_back({*seq, *ts, *dst, *lat, DeviceId{*dev}});
    }
    return out;
}

}  // namespace fogddos
