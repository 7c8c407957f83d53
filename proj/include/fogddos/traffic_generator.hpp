#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "fogddos/core_model.hpp"

namespace fogddos {

/// Portable random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; all conversions to ranges and
/// reals are done here (standard distributions are implementation-defined),
/// so a seed yields the same trace on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform in [0, n), unbiased by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

struct BenignMix {
    double tcp = 0.7;
    double udp = 0.2;
    double icmp = 0.1;

    friend bool operator==(const BenignMix&, const BenignMix&) = default;
};

struct TrafficConfig {
    std::uint32_t n_devices = 3;
    std::uint64_t total_packets = 10000;
    double attack_ratio = 0.0118;
    std::vector<DeviceId> attacker_devices{DeviceId{0}};
    BenignMix benign_mix;
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    /// Fraction of attack SYNs carrying a junk single-byte payload.
    double attack_payload_fraction = 0.1;
    /// Size of the benign server pool (172.16.0.1 ...).
    std::uint32_t n_servers = 20;
    /// Unloaded SYN -> SYN-ACK latency.
    double base_latency_s = 0.010;

    friend bool operator==(const TrafficConfig&, const TrafficConfig&) = default;
};

struct FloodSpec {
    Ipv4Address target_ip = addressing::server_ip(0);
    std::uint16_t target_port = 80;
    /// SYNs per second per attacker device.
    double syn_rate = 100.0;
    double start_s = 10.0;
    double end_s = 50.0;
    /// Attack SYNs not drawn from the blocklisted/secondary pools get a random
    /// source address and MAC instead of the device's own.
    bool spoof_sources = true;
    /// Fraction of attack SYNs sourced from the firewall-blocklisted range.
    double blocklisted_fraction = 0.0;
    /// Fraction of attack SYNs sourced from the secondary (alert-only) range.
    double secondary_fraction = 0.0;
    /// Target latency during the flood is base × (1 + load_factor).
    double load_factor = 4.0;

    friend bool operator==(const FloodSpec&, const FloodSpec&) = default;
};

inline std::uint64_t attack_packet_count(const TrafficConfig& c) {
    const auto n = static_cast<std::uint64_t>(std::llround(c.attack_ratio * static_cast<double>(c.total_packets)));
    return std::min(n, c.total_packets);
}

inline void validate(const TrafficConfig& c, const FloodSpec& f) {
    if (c.n_devices == 0) throw ConfigError("traffic: n_devices must be >= 1");
    if (!(c.attack_ratio >= 0.0 && c.attack_ratio <= 1.0)) throw ConfigError("traffic: attack_ratio must be in [0,1]");
    if (!(c.duration_s > 0.0)) throw ConfigError("traffic: duration_s must be > 0");
    if (c.benign_mix.tcp < 0 || c.benign_mix.udp < 0 || c.benign_mix.icmp < 0)
        throw ConfigError("traffic: benign_mix fractions must be >= 0");
    if (std::abs(c.benign_mix.tcp + c.benign_mix.udp + c.benign_mix.icmp - 1.0) > 1e-9)
        throw ConfigError("traffic: benign_mix must sum to 1");
    if (!(c.attack_payload_fraction >= 0.0 && c.attack_payload_fraction <= 1.0))
        throw ConfigError("traffic: attack_payload_fraction must be in [0,1]");
    if (c.n_servers == 0) throw ConfigError("traffic: n_servers must be >= 1");
    if (!(c.base_latency_s > 0.0)) throw ConfigError("traffic: base_latency_s must be > 0");
    for (auto d : c.attacker_devices)
        if (d.value >= c.n_devices)
            throw ConfigError("traffic: attacker device " + std::to_string(d.value) + " does not exist");
    if (attack_packet_count(c) == 0) return;  // flood ignored
    if (c.attacker_devices.empty()) throw ConfigError("traffic: attack_ratio > 0 requires attacker devices");
    if (!(f.syn_rate > 0.0)) throw ConfigError("flood: syn_rate must be > 0");
    if (!(f.start_s >= 0.0 && f.start_s < f.end_s && f.end_s <= c.duration_s))
        throw ConfigError("flood: requires 0 <= start_s < end_s <= duration_s");
    if (f.blocklisted_fraction < 0 || f.secondary_fraction < 0 ||
        f.blocklisted_fraction + f.secondary_fraction > 1.0 + 1e-12)
        throw ConfigError("flood: blocklisted_fraction + secondary_fraction must be within [0,1]");
    if (!(f.load_factor >= 0.0)) throw ConfigError("flood: load_factor must be >= 0");
}

struct GeneratedTraffic {
    Trace packets;
    /// One observation per SYN, ordered by arrival time.
    std::vector<ResponseObservation> responses;
};

namespace detail {

struct DraftPacket {
    double t;
    std::uint64_t order;
    Packet packet;
    std::optional<double> response_latency;
};

}  // namespace detail

/// Generates a labeled trace: benign sessions (TCP handshakes with data,
/// UDP exchanges, ICMP echoes) from every device plus exactly
/// round(attack_ratio * total_packets) SYN-only flood packets from the
/// attacker devices. Pure function of (config, flood).
inline GeneratedTraffic generate_trace(const TrafficConfig& config, const FloodSpec& flood) {
    validate(config, flood);
    Rng rng(config.seed);
    std::vector<detail::DraftPacket> drafts;
    drafts.reserve(config.total_packets);
    std::uint64_t order = 0;

    const std::uint64_t n_attack = attack_packet_count(config);
    const std::uint64_t n_benign = config.total_packets - n_attack;
    const bool flood_on = n_attack > 0;

    auto jitter = [&] { return rng.uniform(0.8, 1.2); };
    auto latency_for = [&](Ipv4Address dst, double t) {
        double l = config.base_latency_s * jitter();
        if (flood_on && dst == flood.target_ip && t >= flood.start_s && t < flood.end_s) l *= 1.0 + flood.load_factor;
        return l;
    };
    auto random_payload = [&](std::size_t len) {
        std::vector<std::uint8_t> out(len);
        for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(256));
        return out;
    };
    auto clamp_t = [&](double t) { return std::min(t, config.duration_s); };

    // Flood.
    if (flood_on) {
        enum class Source : std::uint8_t { Blocklisted, Secondary, Other };
        const auto n_block = std::min<std::uint64_t>(
            n_attack, static_cast<std::uint64_t>(std::llround(flood.blocklisted_fraction * static_cast<double>(n_attack))));
        const auto n_sec = std::min<std::uint64_t>(
            n_attack - n_block,
            static_cast<std::uint64_t>(std::llround(flood.secondary_fraction * static_cast<double>(n_attack))));
        std::vector<Source> sources(n_attack, Source::Other);
        std::fill_n(sources.begin(), n_block, Source::Blocklisted);
        std::fill_n(sources.begin() + static_cast<std::ptrdiff_t>(n_block), n_sec, Source::Secondary);
        rng.shuffle(sources);

        const std::uint64_t k = config.attacker_devices.size();
        for (std::uint64_t i = 0; i < n_attack; ++i) {
            const DeviceId dev = config.attacker_devices[i % k];
            const std::uint64_t j = i / k;  // index within this attacker
            const std::uint64_t n_k = n_attack / k + (i % k < n_attack % k ? 1 : 0);
            const double span = std::min(flood.end_s - flood.start_s, static_cast<double>(n_k) / flood.syn_rate);
            const double t = flood.start_s + (static_cast<double>(j) + rng.uniform01()) * span / static_cast<double>(n_k);

            Packet p;
            p.timestamp = clamp_t(t);
            p.protocol = Protocol::TCP;
            p.tcp_flags = FlagSet{TcpFlag::SYN};
            p.dst_ip = flood.target_ip;
            p.dst_port = flood.target_port;
            p.src_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
            p.device_id = dev;
            p.label = Label::ATTACK;
            p.src_mac = addressing::device_mac(dev);
            switch (sources[i]) {
                case Source::Blocklisted:
                    p.src_ip = Ipv4Address(addressing::kBlocklistedRange.network.bits() + 1 + rng.below(254));
                    break;
                case Source::Secondary:
                    p.src_ip = Ipv4Address(addressing::kSecondaryRange.network.bits() + 1 + rng.below(254));
                    break;
                case Source::Other:
                    if (flood.spoof_sources) {
                        p.src_ip = Ipv4Address(addressing::kSpoofRange.network.bits() + 1 + rng.below((1u << 22) - 2));
                        p.src_mac = MacAddress(0x060000000000ull | rng.below(1ull << 40));
                    } else {
                        p.src_ip = addressing::device_ip(dev);
                    }
                    break;
            }
            if (rng.uniform01() < config.attack_payload_fraction) {
                const auto len = static_cast<std::size_t>(rng.between(64, 512));
                p.payload.assign(len, static_cast<std::uint8_t>(0x41 + rng.below(26)));
            }
            p.size_bytes = kHeaderFloor + static_cast<std::uint32_t>(p.payload.size());
            const double lat = config.base_latency_s * jitter() * (1.0 + flood.load_factor);
            drafts.push_back({p.timestamp, order++, std::move(p), lat});
        }
    }

    // Benign background.
    static constexpr std::uint16_t kTcpPorts[] = {80, 443, 8080, 22};
    static constexpr std::uint16_t kUdpPorts[] = {53, 123, 5683};
    std::vector<std::uint32_t> next_ephemeral(config.n_devices, 0);
    auto ephemeral = [&](DeviceId d) {
        return static_cast<std::uint16_t>(49152 + (next_ephemeral[d.value]++ % 16384));
    };

    std::uint64_t remaining = n_benign;
    while (remaining > 0) {
        const DeviceId dev{static_cast<std::uint32_t>(rng.below(config.n_devices))};
        const double pick = rng.uniform01();
        Protocol proto = pick < config.benign_mix.tcp                            ? Protocol::TCP
                         : pick < config.benign_mix.tcp + config.benign_mix.udp ? Protocol::UDP
                                                                                 : Protocol::ICMP;
        if (proto == Protocol::TCP && remaining < 3) proto = Protocol::UDP;
        double t = rng.uniform(0.0, config.duration_s);
        const Ipv4Address dst = addressing::server_ip(static_cast<std::uint32_t>(rng.below(config.n_servers)));

        Packet base;
        base.src_ip = addressing::device_ip(dev);
        base.src_mac = addressing::device_mac(dev);
        base.dst_ip = dst;
        base.device_id = dev;
        base.protocol = proto;
        base.label = Label::BENIGN;

        auto emit = [&](Packet p, double at, std::optional<double> response = std::nullopt) {
            p.timestamp = clamp_t(at);
            p.size_bytes = kHeaderFloor + static_cast<std::uint32_t>(p.payload.size());
            drafts.push_back({p.timestamp, order++, std::move(p), response});
            --remaining;
        };

        if (proto == Protocol::TCP) {
            const auto len = std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.between(3, 10)), remaining);
            base.src_port = ephemeral(dev);
            base.dst_port = kTcpPorts[rng.below(std::size(kTcpPorts))];
            const double lat = latency_for(dst, t);

            Packet syn = base;
            syn.tcp_flags = FlagSet{TcpFlag::SYN};
            emit(std::move(syn), t, lat);
            t += lat + 0.0005;
            Packet ack = base;
            ack.tcp_flags = FlagSet{TcpFlag::ACK};
            emit(std::move(ack), t);
            for (std::uint64_t i = 0; i + 3 < len; ++i) {
                t += rng.uniform(0.001, 0.05);
                Packet data = base;
                data.tcp_flags = FlagSet{TcpFlag::ACK, TcpFlag::PSH};
                data.payload = random_payload(static_cast<std::size_t>(rng.between(20, 1360)));
                emit(std::move(data), t);
            }
            t += rng.uniform(0.001, 0.05);
            Packet fin = base;
            fin.tcp_flags = FlagSet{TcpFlag::FIN, TcpFlag::ACK};
            emit(std::move(fin), t);
        } else if (proto == Protocol::UDP) {
            const auto n = std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.between(1, 3)), remaining);
            base.src_port = ephemeral(dev);
            base.dst_port = kUdpPorts[rng.below(std::size(kUdpPorts))];
            for (std::uint64_t i = 0; i < n; ++i) {
                Packet p = base;
                p.payload = random_payload(static_cast<std::size_t>(rng.between(20, 512)));
                emit(std::move(p), t);
                t += rng.uniform(0.001, 0.02);
            }
        } else {
            const auto n = std::min<std::uint64_t>(static_cast<std::uint64_t>(rng.between(1, 2)), remaining);
            for (std::uint64_t i = 0; i < n; ++i) {
                Packet p = base;
                p.payload = random_payload(56);
                emit(std::move(p), t);
                t += rng.uniform(0.5, 1.0);
            }
        }
    }

    std::stable_sort(drafts.begin(), drafts.end(), [](const detail::DraftPacket& a, const detail::DraftPacket& b) {
        return a.t < b.t || (a.t == b.t && a.order < b.order);
    });

    GeneratedTraffic out;
    out.packets.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        auto& d = drafts[i];
        d.packet.seq_no = i;
        if (d.response_latency) {
            out.responses.push_back(
                {i, d.packet.timestamp + *d.response_latency, d.packet.dst_ip, *d.response_latency, d.packet.device_id});
        }
        out.packets.push_back(std::move(d.packet));
    }
    std::stable_sort(out.responses.begin(), out.responses.end(),
                     [](const ResponseObservation& a, const ResponseObservation& b) {
                         return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.syn_seq_no < b.syn_seq_no);
                     });
    return out;
}

struct LabelStats {
    std::uint64_t benign_count = 0;
    std::uint64_t attack_count = 0;
    std::map<DeviceId, std::uint64_t> per_device_counts;

    friend bool operator==(const LabelStats&, const LabelStats&) = default;
};

inline LabelStats trace_label_stats(const Trace& trace) {
    LabelStats s;
    for (const auto& p : trace) {
        (p.label == Label::ATTACK ? s.attack_count : s.benign_count)++;
        ++s.per_device_counts[p.device_id];
    }
    return s;
}

}  // namespace fogddos
