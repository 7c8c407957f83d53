#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fogddos/error.hpp"

namespace fogddos {

/// Every packet is framed with a fixed 40-byte header (IPv4 20 + TCP 20),
/// whatever its protocol.
inline constexpr std::uint32_t kHeaderFloor = 40;

enum class Protocol : std::uint8_t { TCP, UDP, ICMP };
enum class Label : std::uint8_t { BENIGN, ATTACK };
enum class Verdict : std::uint8_t { FORWARD, DROP, ALERT };

inline std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::TCP: return "TCP";
        case Protocol::UDP: return "UDP";
        case Protocol::ICMP: return "ICMP";
    }
    return "?";
}

inline std::optional<Protocol> parse_protocol(std::string_view s) {
    auto eq = [&](std::string_view name) {
        if (s.size() != name.size()) return false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
            if (c != name[i]) return false;
        }
        return true;
    };
    if (eq("TCP")) return Protocol::TCP;
    if (eq("UDP")) return Protocol::UDP;
    if (eq("ICMP")) return Protocol::ICMP;
    return std::nullopt;
}

inline std::string_view to_string(Label l) { return l == Label::ATTACK ? "ATTACK" : "BENIGN"; }

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::FORWARD: return "FORWARD";
        case Verdict::DROP: return "DROP";
        case Verdict::ALERT: return "ALERT";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Identifiers

template <typename Tag>
struct Index {
    std::uint32_t value = 0;

    constexpr Index() = default;
    constexpr explicit Index(std::uint32_t v) : value(v) {}
    friend constexpr auto operator<=>(Index, Index) = default;
};

struct DeviceTag {};
struct FogNodeTag {};
using DeviceId = Index<DeviceTag>;
using FogNodeId = Index<FogNodeTag>;

// ---------------------------------------------------------------------------
// Addresses

class Ipv4Address {
public:
    constexpr Ipv4Address() = default;
    constexpr explicit Ipv4Address(std::uint32_t host_order) : bits_(host_order) {}
    constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : bits_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

    constexpr std::uint32_t bits() const { return bits_; }

    static std::optional<Ipv4Address> parse(std::string_view s) {
        std::uint32_t out = 0;
        const char* p = s.data();
        const char* end = s.data() + s.size();
        for (int octet = 0; octet < 4; ++octet) {
            if (octet > 0) {
                if (p == end || *p != '.') return std::nullopt;
                ++p;
            }
            unsigned v = 0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{} || next == p || next - p > 3 || v > 255) return std::nullopt;
            out = (out << 8) | v;
            p = next;
        }
        if (p != end) return std::nullopt;
        return Ipv4Address(out);
    }

    std::string to_string() const {
        return std::to_string(bits_ >> 24) + "." + std::to_string((bits_ >> 16) & 0xff) + "." +
               std::to_string((bits_ >> 8) & 0xff) + "." + std::to_string(bits_ & 0xff);
    }

    friend constexpr auto operator<=>(Ipv4Address, Ipv4Address) = default;

private:
    std::uint32_t bits_ = 0;
};

/// Exact address (prefix 32) or CIDR block.
struct Ipv4Prefix {
    Ipv4Address network;
    std::uint8_t length = 32;

    bool contains(Ipv4Address a) const {
        if (length == 0) return true;
        const std::uint32_t mask = length >= 32 ? 0xffffffffu : ~(0xffffffffu >> length);
        return (a.bits() & mask) == (network.bits() & mask);
    }

    static std::optional<Ipv4Prefix> parse(std::string_view s) {
        auto slash = s.find('/');
        auto addr = Ipv4Address::parse(s.substr(0, slash));
        if (!addr) return std::nullopt;
        Ipv4Prefix out{*addr, 32};
        if (slash != std::string_view::npos) {
            auto len_text = s.substr(slash + 1);
            unsigned len = 0;
            auto [next, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), len);
            if (ec != std::errc{} || next != len_text.data() + len_text.size() || len > 32) return std::nullopt;
            out.length = static_cast<std::uint8_t>(len);
        }
        return out;
    }

    std::string to_string() const {
        return length == 32 ? network.to_string() : network.to_string() + "/" + std::to_string(length);
    }

    friend bool operator==(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(std::uint64_t bits) : bits_(bits & 0xffffffffffffull) {}

    constexpr std::uint64_t bits() const { return bits_; }

    std::string to_string() const {
        static constexpr char hex[] = "0123456789abcdef";
        std::string out;
        out.reserve(17);
        for (int i = 5; i >= 0; --i) {
            const auto byte = static_cast<unsigned>((bits_ >> (8 * i)) & 0xff);
            out.push_back(hex[byte >> 4]);
            out.push_back(hex[byte & 0xf]);
            if (i > 0) out.push_back(':');
        }
        return out;
    }

    static std::optional<MacAddress> parse(std::string_view s) {
        if (s.size() != 17) return std::nullopt;
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < 6; ++i) {
            if (i > 0 && s[i * 3 - 1] != ':') return std::nullopt;
            unsigned v = 0;
            auto [next, ec] = std::from_chars(s.data() + i * 3, s.data() + i * 3 + 2, v, 16);
            if (ec != std::errc{} || next != s.data() + i * 3 + 2) return std::nullopt;
            bits = (bits << 8) | v;
        }
        return MacAddress(bits);
    }

    friend constexpr auto operator<=>(MacAddress, MacAddress) = default;

private:
    std::uint64_t bits_ = 0;
};

// ---------------------------------------------------------------------------
// TCP flags

enum class TcpFlag : std::uint8_t { SYN = 1, ACK = 2, FIN = 4, RST = 8, PSH = 16, URG = 32 };

/// Set over the six TCP control flags. Canonical letters: S A F R P U.
class FlagSet {
public:
    constexpr FlagSet() = default;
    constexpr FlagSet(std::initializer_list<TcpFlag> flags) {
        for (auto f : flags) bits_ |= static_cast<std::uint8_t>(f);
    }

    static constexpr FlagSet from_bits(std::uint8_t bits) {
        FlagSet s;
        s.bits_ = bits & 0x3f;
        return s;
    }

    constexpr std::uint8_t bits() const { return bits_; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool has(TcpFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
    constexpr FlagSet& insert(TcpFlag f) {
        bits_ |= static_cast<std::uint8_t>(f);
        return *this;
    }

    /// Exactly SYN and nothing else.
    constexpr bool syn_only() const { return bits_ == static_cast<std::uint8_t>(TcpFlag::SYN); }

    std::string to_string() const {
        std::string out;
        for (std::size_t i = 0; i < kLetters.size(); ++i)
            if (bits_ & (1u << i)) out.push_back(kLetters[i]);
        return out;
    }

    friend constexpr bool operator==(FlagSet, FlagSet) = default;

    static constexpr std::array<char, 6> kLetters = {'S', 'A', 'F', 'R', 'P', 'U'};

private:
    std::uint8_t bits_ = 0;
};

/// Parses a flag letter string such as "S" or "SA". Order-insensitive;
/// unknown and repeated letters are errors.
inline FlagSet parse_flag_set(std::string_view text) {
    FlagSet out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        std::size_t bit = FlagSet::kLetters.size();
        for (std::size_t k = 0; k < FlagSet::kLetters.size(); ++k)
            if (FlagSet::kLetters[k] == c) bit = k;
        if (bit == FlagSet::kLetters.size())
            throw ParseError(std::string("unknown TCP flag '") + c + "'", 0, i);
        const auto f = static_cast<TcpFlag>(1u << bit);
        if (out.has(f)) throw ParseError(std::string("repeated TCP flag '") + c + "'", 0, i);
        out.insert(f);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Packet

struct Packet {
    std::uint64_t seq_no = 0;
    double timestamp = 0.0;
    Ipv4Address src_ip;
    Ipv4Address dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    Protocol protocol = Protocol::TCP;
    FlagSet tcp_flags;
    std::uint32_t size_bytes = kHeaderFloor;
    std::vector<std::uint8_t> payload;
    MacAddress src_mac;
    DeviceId device_id;
    /// Ground truth. Only the metrics layer reads this.
    Label label = Label::BENIGN;

    std::size_t payload_length() const { return payload.size(); }

    friend bool operator==(const Packet&, const Packet&) = default;
};

using Trace = std::vector<Packet>;

/// Checks the per-packet and per-trace invariants; throws PreconditionError
/// describing the first violation.
inline void validate_trace(const Trace& trace) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const Packet& p = trace[i];
        const auto where = "packet seq " + std::to_string(p.seq_no);
        if (p.timestamp < 0.0) throw PreconditionError(where + ": negative timestamp");
        if (p.protocol != Protocol::TCP && !p.tcp_flags.empty())
            throw PreconditionError(where + ": tcp flags on non-TCP packet");
        if (p.size_bytes != kHeaderFloor + p.payload.size())
            throw PreconditionError(where + ": size_bytes does not equal header floor + payload");
        if (i > 0) {
            if (p.seq_no <= trace[i - 1].seq_no) throw PreconditionError(where + ": seq_no not increasing");
            if (p.timestamp < trace[i - 1].timestamp) throw PreconditionError(where + ": timestamp decreased");
        }
    }
}

/// Simulated SYN -> SYN-ACK latency observed for one connection attempt.
struct ResponseObservation {
    std::uint64_t syn_seq_no = 0;
    double timestamp = 0.0;  // arrival of the SYN-ACK
    Ipv4Address dst_ip;
    double latency_s = 0.0;
    DeviceId device_id;

    friend bool operator==(const ResponseObservation&, const ResponseObservation&) = default;
};

// ---------------------------------------------------------------------------
// Topology

using FogAssignment = std::map<DeviceId, FogNodeId>;

/// Round-robin: device i -> fog node (i mod n_fog).
inline FogAssignment assign_devices_to_fog(std::uint32_t n_devices, std::uint32_t n_fog) {
    if (n_devices == 0) throw ConfigError("at least one device is required");
    if (n_fog == 0) throw ConfigError("at least one fog node is required");
    FogAssignment out;
    for (std::uint32_t i = 0; i < n_devices; ++i) out.emplace(DeviceId{i}, FogNodeId{i % n_fog});
    return out;
}

/// Addressing plan shared by the generator and the default rulesets.
namespace addressing {
inline Ipv4Address device_ip(DeviceId d) { return Ipv4Address(0x0A010000u + d.value + 1); }  // 10.1.x.y
inline MacAddress device_mac(DeviceId d) { return MacAddress(0x020000000000ull | (d.value + 1)); }
inline Ipv4Address server_ip(std::uint32_t i) { return Ipv4Address(0xAC100000u + i + 1); }  // 172.16.0.x
inline constexpr Ipv4Prefix kBlocklistedRange{Ipv4Address(203, 0, 113, 0), 24};
inline constexpr Ipv4Prefix kSecondaryRange{Ipv4Address(198, 51, 100, 0), 24};
inline constexpr Ipv4Prefix kSpoofRange{Ipv4Address(100, 64, 0, 0), 10};
}  // namespace addressing

}  // namespace fogddos
