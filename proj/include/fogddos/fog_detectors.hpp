#pragma once

// Fog-layer analyzers. Each one is a pure function of the packet slice of a
// single fog node (timestamp ordered) and builds its own state. Analysis runs
// on tumbling windows keyed by floor(timestamp / window_s). Every threshold
// comparison is strict: a count equal to its threshold does not flag.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fogddos/connection_tracker.hpp"
#include "fogddos/core_model.hpp"

namespace fogddos {

struct DetectorParams {
    double window_s = 1.0;
    /// SYNs per window per device.
    double syn_rate_threshold = 10;
    double syn_fraction_threshold = 0.5;
    /// New connections per window per device.
    double conn_init_threshold = 20;
    double response_time_factor = 3;
    /// Distinct (src, dst) pairs per window per fog node.
    double flow_spike_threshold = 50;
    /// Half-open connections per destination.
    double half_open_threshold = 5;
    /// Previously unseen source MACs per window per device.
    double mac_novelty_threshold = 3;
    double payload_repeat_fraction = 0.9;
    std::uint32_t max_payload_bytes = 1400;

    /// Window mean packet size vs the device baseline, in baseline σ.
    double size_sigma = 3.0;
    /// Samples needed before a size or response-time baseline freezes.
    std::uint32_t min_baseline_samples = 30;
    double dst_concentration_fraction = 0.9;
    /// SYNs per handshake-completing ACK, per destination per window.
    double syn_ack_ratio = 10;
    /// Shorter payloads are not checked for repetition.
    std::uint32_t min_inspect_payload_bytes = 8;

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

inline void validate(const DetectorParams& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw ConfigError(std::string("detector: ") + name + " must be > 0");
    };
    auto fraction = [](double v, const char* name) {
        if (!(v > 0 && v <= 1)) throw ConfigError(std::string("detector: ") + name + " must be in (0,1]");
    };
    positive(p.window_s, "window_s");
    positive(p.syn_rate_threshold, "syn_rate_threshold");
    fraction(p.syn_fraction_threshold, "syn_fraction_threshold");
    positive(p.conn_init_threshold, "conn_init_threshold");
    positive(p.response_time_factor, "response_time_factor");
    positive(p.flow_spike_threshold, "flow_spike_threshold");
    positive(p.half_open_threshold, "half_open_threshold");
    positive(p.mac_novelty_threshold, "mac_novelty_threshold");
    fraction(p.payload_repeat_fraction, "payload_repeat_fraction");
    positive(p.max_payload_bytes, "max_payload_bytes");
    positive(p.size_sigma, "size_sigma");
    positive(p.min_baseline_samples, "min_baseline_samples");
    fraction(p.dst_concentration_fraction, "dst_concentration_fraction");
    positive(p.syn_ack_ratio, "syn_ack_ratio");
}

enum class Analyzer : std::uint8_t { STATISTICAL, SPECIFICATION, BEHAVIORAL, DPI };
inline constexpr std::array<Analyzer, 4> kAllAnalyzers = {Analyzer::STATISTICAL, Analyzer::SPECIFICATION,
                                                          Analyzer::BEHAVIORAL, Analyzer::DPI};

inline std::string_view to_string(Analyzer a) {
    switch (a) {
        case Analyzer::STATISTICAL: return "STATISTICAL";
        case Analyzer::SPECIFICATION: return "SPECIFICATION";
        case Analyzer::BEHAVIORAL: return "BEHAVIORAL";
        case Analyzer::DPI: return "DPI";
    }
    return "?";
}

enum class Reason : std::uint8_t {
    // statistical
    SYN_RATE,
    SIZE_ANOMALY,
    DST_CONCENTRATION,
    // specification
    HANDSHAKE_VIOLATION,
    FLAG_VIOLATION,
    CONN_RATE,
    // behavioral
    RESPONSE_TIME,
    FLOW_SPIKE,
    MAC_NOVELTY,
    HALF_OPEN,
    // deep packet inspection
    SYN_PAYLOAD,
    ILLEGAL_FLAGS,
    SYN_ACK_RATIO,
    REPETITIVE_PAYLOAD,
    OVERSIZED_PAYLOAD,
};

inline Analyzer analyzer_of(Reason r) {
    switch (r) {
        case Reason::SYN_RATE:
        case Reason::SIZE_ANOMALY:
        case Reason::DST_CONCENTRATION: return Analyzer::STATISTICAL;
        case Reason::HANDSHAKE_VIOLATION:
        case Reason::FLAG_VIOLATION:
        case Reason::CONN_RATE: return Analyzer::SPECIFICATION;
        case Reason::RESPONSE_TIME:
        case Reason::FLOW_SPIKE:
        case Reason::MAC_NOVELTY:
        case Reason::HALF_OPEN: return Analyzer::BEHAVIORAL;
        default: return Analyzer::DPI;
    }
}

inline std::string_view to_string(Reason r) {
    switch (r) {
        case Reason::SYN_RATE: return "SYN_RATE";
        case Reason::SIZE_ANOMALY: return "SIZE_ANOMALY";
        case Reason::DST_CONCENTRATION: return "DST_CONCENTRATION";
        case Reason::HANDSHAKE_VIOLATION: return "HANDSHAKE_VIOLATION";
        case Reason::FLAG_VIOLATION: return "FLAG_VIOLATION";
        case Reason::CONN_RATE: return "CONN_RATE";
        case Reason::RESPONSE_TIME: return "RESPONSE_TIME";
        case Reason::FLOW_SPIKE: return "FLOW_SPIKE";
        case Reason::MAC_NOVELTY: return "MAC_NOVELTY";
        case Reason::HALF_OPEN: return "HALF_OPEN";
        case Reason::SYN_PAYLOAD: return "SYN_PAYLOAD";
        case Reason::ILLEGAL_FLAGS: return "ILLEGAL_FLAGS";
        case Reason::SYN_ACK_RATIO: return "SYN_ACK_RATIO";
        case Reason::REPETITIVE_PAYLOAD: return "REPETITIVE_PAYLOAD";
        case Reason::OVERSIZED_PAYLOAD: return "OVERSIZED_PAYLOAD";
    }
    return "?";
}

struct Evidence {
    Analyzer analyzer = Analyzer::STATISTICAL;
    DeviceId device_id;
    std::vector<std::uint64_t> seq_nos;
    Reason reason = Reason::SYN_RATE;
    std::string detail;
    double window_start_s = 0.0;

    friend bool operator==(const Evidence&, const Evidence&) = default;
};

using EvidenceList = std::vector<Evidence>;

struct FogReport {
    FogNodeId fog_node_id;
    EvidenceList evidence;
    std::set<std::uint64_t> flagged_packets;
    std::set<DeviceId> suspect_devices;
    double analysis_wall_time_s = 0.0;
};

namespace detail {

inline std::int64_t window_of(double t, double window_s) { return static_cast<std::int64_t>(std::floor(t / window_s)); }

inline void require_ordered(std::span<const Packet> packets) {
    for (std::size_t i = 1; i < packets.size(); ++i)
        if (packets[i].timestamp < packets[i - 1].timestamp)
            throw PreconditionError("fog analysis requires timestamp-ordered packets");
}

/// Calls fn(window_index, slice) for each non-empty window in order.
template <typename Fn>
void for_each_window(std::span<const Packet> packets, double window_s, Fn&& fn) {
    std::size_t b = 0;
    while (b < packets.size()) {
        const auto w = window_of(packets[b].timestamp, window_s);
        std::size_t e = b + 1;
        while (e < packets.size() && window_of(packets[e].timestamp, window_s) == w) ++e;
        fn(w, packets.subspan(b, e - b));
        b = e;
    }
}

inline Evidence make_evidence(Reason reason, DeviceId dev, std::vector<std::uint64_t> seqs, std::string detail,
                              std::int64_t window, double window_s) {
    return Evidence{analyzer_of(reason), dev, std::move(seqs), reason, std::move(detail),
                    static_cast<double>(window) * window_s};
}

inline bool is_syn_only(const Packet& p) { return p.protocol == Protocol::TCP && p.tcp_flags.syn_only(); }

inline std::string num(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    return std::to_string(v);
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Per device per window: SYN rate with SYN dominance, mean packet size
/// against the device's frozen baseline, destination concentration of a
/// SYN-dominant device.
inline EvidenceList statistical_analyze(std::span<const Packet> packets, const DetectorParams& params) {
    detail::require_ordered(packets);
    struct Baseline {
        double n = 0, mean = 0, m2 = 0;
        bool frozen = false;
        double sd() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
    };
    std::map<DeviceId, Baseline> baselines;
    EvidenceList out;

    detail::for_each_window(packets, params.window_s, [&](std::int64_t w, std::span<const Packet> win) {
        std::map<DeviceId, std::vector<const Packet*>> by_device;
        for (const auto& p : win) by_device[p.device_id].push_back(&p);

        for (const auto& [dev, pkts] : by_device) {
            const double total = static_cast<double>(pkts.size());
            std::vector<std::uint64_t> syns;
            std::map<Ipv4Address, std::vector<const Packet*>> by_dst;
            double size_sum = 0;
            for (const auto* p : pkts) {
                if (detail::is_syn_only(*p)) syns.push_back(p->seq_no);
                by_dst[p->dst_ip].push_back(p);
                size_sum += p->size_bytes;
            }
            const double syn_count = static_cast<double>(syns.size());
            const bool syn_dominant = syn_count / total > params.syn_fraction_threshold;

            bool syn_rate = false;
            if (syn_count > params.syn_rate_threshold && syn_dominant) {
                syn_rate = true;
                // Attributed to SYNs aimed at destinations that alone exceed the threshold.
                std::vector<std::uint64_t> hot;
                for (const auto& [dst, list] : by_dst) {
                    std::vector<std::uint64_t> to_dst;
                    for (const auto* p : list)
                        if (detail::is_syn_only(*p)) to_dst.push_back(p->seq_no);
                    if (static_cast<double>(to_dst.size()) > params.syn_rate_threshold)
                        hot.insert(hot.end(), to_dst.begin(), to_dst.end());
                }
                if (hot.empty()) hot = syns;
                std::sort(hot.begin(), hot.end());
                out.push_back(detail::make_evidence(Reason::SYN_RATE, dev, std::move(hot),
                                                    detail::num(syn_count) + " SYN-only of " + detail::num(total) +
                                                        " packets in window",
                                                    w, params.window_s));
            }

            auto& base = baselines[dev];
            const double mean = size_sum / total;
            if (base.frozen && base.sd() > 0 && std::abs(mean - base.mean) > params.size_sigma * base.sd()) {
                std::vector<std::uint64_t> seqs;
                for (const auto* p : pkts) seqs.push_back(p->seq_no);
                out.push_back(detail::make_evidence(
                    Reason::SIZE_ANOMALY, dev, std::move(seqs),
                    "mean size " + detail::num(std::round(mean)) + " vs baseline " + detail::num(std::round(base.mean)),
                    w, params.window_s));
            }

            if (total > params.syn_rate_threshold && syn_dominant) {
                auto top = std::max_element(by_dst.begin(), by_dst.end(), [](const auto& a, const auto& b) {
                    return a.second.size() < b.second.size();
                });
                if (static_cast<double>(top->second.size()) / total > params.dst_concentration_fraction) {
                    std::vector<std::uint64_t> seqs;
                    for (const auto* p : top->second)
                        if (detail::is_syn_only(*p)) seqs.push_back(p->seq_no);
                    out.push_back(detail::make_evidence(Reason::DST_CONCENTRATION, dev, std::move(seqs),
                                                        "traffic concentrated on " + top->first.to_string(), w,
                                                        params.window_s));
                }
            }

            if (!base.frozen && !syn_rate) {
                for (const auto* p : pkts) {
                    base.n += 1;
                    const double d = p->size_bytes - base.mean;
                    base.mean += d / base.n;
                    base.m2 += d * (p->size_bytes - base.mean);
                }
                if (base.n >= params.min_baseline_samples) base.frozen = true;
            }
        }
    });
    return out;
}

/// TCP state machine per flow: protocol violations (ACK without SYN, SYN on
/// an established flow, SYN+FIN) and per-device connection-initiation rate.
inline EvidenceList specification_analyze(std::span<const Packet> packets, const DetectorParams& params) {
    detail::require_ordered(packets);
    ConnectionTracker tracker;
    EvidenceList out;

    detail::for_each_window(packets, params.window_s, [&](std::int64_t w, std::span<const Packet> win) {
        std::map<DeviceId, std::vector<std::pair<FlowKey, std::uint64_t>>> opened;
        for (const auto& p : win) {
            switch (tracker.observe(p)) {
                case Transition::Opened: opened[p.device_id].push_back({FlowKey::of(p), p.seq_no}); break;
                case Transition::AckWithoutSyn:
                    out.push_back(detail::make_evidence(Reason::HANDSHAKE_VIOLATION, p.device_id, {p.seq_no},
                                                        "ACK with no prior SYN", w, params.window_s));
                    break;
                case Transition::SynOnEstablished:
                    out.push_back(detail::make_evidence(Reason::HANDSHAKE_VIOLATION, p.device_id, {p.seq_no},
                                                        "SYN on established connection", w, params.window_s));
                    break;
                case Transition::SynFin:
                    out.push_back(detail::make_evidence(Reason::FLAG_VIOLATION, p.device_id, {p.seq_no},
                                                        "SYN+FIN combination", w, params.window_s));
                    break;
                default: break;
            }
        }
        // Only connections still unanswered at window end are attributed.
        for (auto& [dev, conns] : opened) {
            if (!(static_cast<double>(conns.size()) > params.conn_init_threshold)) continue;
            std::vector<std::uint64_t> seqs;
            for (const auto& [key, seq] : conns)
                if (tracker.state(key) == ConnState::SYN_SENT) seqs.push_back(seq);
            if (seqs.empty()) continue;
            out.push_back(detail::make_evidence(Reason::CONN_RATE, dev, std::move(seqs),
                                                std::to_string(conns.size()) + " new connections in window", w,
                                                params.window_s));
        }
    });
    return out;
}

/// Response-time inflation, flow spikes, source-MAC novelty and half-open
/// excess. `responses` are the SYN -> SYN-ACK observations for this node.
inline EvidenceList behavioral_analyze(std::span<const Packet> packets, const DetectorParams& params,
                                       std::span<const ResponseObservation> responses = {}) {
    detail::require_ordered(packets);
    EvidenceList out;
    ConnectionTracker tracker;
    std::set<MacAddress> seen_macs;
    std::set<std::pair<Ipv4Address, Ipv4Address>> seen_pairs;

    // Response-time observations, windowed by arrival time.
    std::map<std::int64_t, std::map<Ipv4Address, std::pair<double, std::uint64_t>>> latency_by_window;
    double baseline = 0;
    bool baseline_ready = false;
    {
        double sum = 0;
        std::uint64_t n = 0;
        for (const auto& r : responses) {
            if (!baseline_ready) {
                sum += r.latency_s;
                if (++n >= params.min_baseline_samples) {
                    baseline = sum / static_cast<double>(n);
                    baseline_ready = true;
                }
                continue;
            }
            auto& cell = latency_by_window[detail::window_of(r.timestamp, params.window_s)][r.dst_ip];
            cell.first += r.latency_s;
            ++cell.second;
        }
    }

    detail::for_each_window(packets, params.window_s, [&](std::int64_t w, std::span<const Packet> win) {
        struct Opened {
            FlowKey key;
            std::uint64_t seq;
            DeviceId dev;
        };
        std::vector<Opened> opened;
        std::set<std::pair<Ipv4Address, Ipv4Address>> flows;
        std::map<DeviceId, std::vector<std::uint64_t>> flow_introducers;
        std::set<MacAddress> novel;
        std::map<DeviceId, std::set<MacAddress>> novel_by_device;
        std::map<Ipv4Address, std::map<DeviceId, std::vector<std::uint64_t>>> syns_to;

        for (const auto& p : win) {
            if (tracker.observe(p) == Transition::Opened) opened.push_back({FlowKey::of(p), p.seq_no, p.device_id});
            if (flows.emplace(p.src_ip, p.dst_ip).second && seen_pairs.emplace(p.src_ip, p.dst_ip).second)
                flow_introducers[p.device_id].push_back(p.seq_no);
            if (seen_macs.insert(p.src_mac).second) {
                novel.insert(p.src_mac);
                novel_by_device[p.device_id].insert(p.src_mac);
            }
            if (detail::is_syn_only(p)) syns_to[p.dst_ip][p.device_id].push_back(p.seq_no);
        }

        // Half-open excess: SYNs opened in this window still pending at its end.
        std::map<Ipv4Address, std::map<DeviceId, std::vector<std::uint64_t>>> pending;
        for (const auto& o : opened)
            if (tracker.state(o.key) == ConnState::SYN_SENT) pending[o.key.dst_ip][o.dev].push_back(o.seq);
        for (auto& [dst, per_dev] : pending) {
            const auto half_open = tracker.half_open(dst);
            if (static_cast<double>(half_open) <= params.half_open_threshold) continue;
            for (auto& [dev, seqs] : per_dev)
                out.push_back(detail::make_evidence(Reason::HALF_OPEN, dev, std::move(seqs),
                                                    std::to_string(half_open) + " half-open connections to " +
                                                        dst.to_string(),
                                                    w, params.window_s));
        }

        // Flow spike, attributed to the largest contributor of never-seen pairs.
        if (static_cast<double>(flows.size()) > params.flow_spike_threshold && !flow_introducers.empty()) {
            auto top = std::max_element(flow_introducers.begin(), flow_introducers.end(),
                                        [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
            out.push_back(detail::make_evidence(Reason::FLOW_SPIKE, top->first, top->second,
                                                std::to_string(flows.size()) + " distinct flows in window", w,
                                                params.window_s));
        }

        // MAC novelty.
        for (const auto& [dev, macs] : novel_by_device) {
            if (static_cast<double>(macs.size()) <= params.mac_novelty_threshold) continue;
            std::vector<std::uint64_t> seqs;
            for (const auto& p : win)
                if (p.device_id == dev && macs.count(p.src_mac)) seqs.push_back(p.seq_no);
            out.push_back(detail::make_evidence(Reason::MAC_NOVELTY, dev, std::move(seqs),
                                                std::to_string(macs.size()) + " previously unseen MACs", w,
                                                params.window_s));
        }

        // Response-time inflation, attributed to the heaviest SYN sender.
        if (baseline_ready) {
            auto lw = latency_by_window.find(w);
            if (lw != latency_by_window.end()) {
                for (const auto& [dst, cell] : lw->second) {
                    const double mean = cell.first / static_cast<double>(cell.second);
                    if (!(mean > params.response_time_factor * baseline)) continue;
                    auto st = syns_to.find(dst);
                    if (st == syns_to.end()) continue;
                    auto top = std::max_element(st->second.begin(), st->second.end(), [](const auto& a, const auto& b) {
                        return a.second.size() < b.second.size();
                    });
                    if (!(static_cast<double>(top->second.size()) > params.syn_rate_threshold)) continue;
                    out.push_back(detail::make_evidence(
                        Reason::RESPONSE_TIME, top->first, top->second,
                        "mean response " + std::to_string(mean * 1000) + " ms to " + dst.to_string(), w,
                        params.window_s));
                }
            }
        }
    });
    return out;
}

/// Header and payload checks: SYN carrying data, illegal flag combinations,
/// SYNs not followed by handshake ACKs, repetitive and oversized payloads.
inline EvidenceList deep_packet_inspect(std::span<const Packet> packets, const DetectorParams& params) {
    detail::require_ordered(packets);
    EvidenceList out;
    ConnectionTracker tracker;

    detail::for_each_window(packets, params.window_s, [&](std::int64_t w, std::span<const Packet> win) {
        std::map<std::pair<DeviceId, Reason>, std::vector<std::uint64_t>> hits;
        struct Syn {
            FlowKey key;
            std::uint64_t seq;
            DeviceId dev;
        };
        std::map<Ipv4Address, std::vector<Syn>> syns;
        std::map<Ipv4Address, std::uint64_t> acks;

        for (const auto& p : win) {
            const auto tr = tracker.observe(p);
            if (tr == Transition::Established) ++acks[p.dst_ip];
            if (p.protocol == Protocol::TCP) {
                const FlagSet f = p.tcp_flags;
                if (f.syn_only()) {
                    syns[p.dst_ip].push_back({FlowKey::of(p), p.seq_no, p.device_id});
                    if (!p.payload.empty()) hits[{p.device_id, Reason::SYN_PAYLOAD}].push_back(p.seq_no);
                }
                if (f.empty() || (f.has(TcpFlag::SYN) && f.has(TcpFlag::FIN)))
                    hits[{p.device_id, Reason::ILLEGAL_FLAGS}].push_back(p.seq_no);
            }
            const auto len = p.payload.size();
            if (len >= params.min_inspect_payload_bytes) {
                std::array<std::uint32_t, 256> freq{};
                for (auto b : p.payload) ++freq[b];
                const auto top = *std::max_element(freq.begin(), freq.end());
                if (static_cast<double>(top) > params.payload_repeat_fraction * static_cast<double>(len))
                    hits[{p.device_id, Reason::REPETITIVE_PAYLOAD}].push_back(p.seq_no);
            }
            if (len > params.max_payload_bytes) hits[{p.device_id, Reason::OVERSIZED_PAYLOAD}].push_back(p.seq_no);
        }

        for (const auto& [dst, list] : syns) {
            const auto a = acks.count(dst) ? acks[dst] : 0;
            if (!(static_cast<double>(list.size()) > params.syn_ack_ratio * static_cast<double>(std::max<std::uint64_t>(a, 1))))
                continue;
            for (const auto& s : list)
                if (tracker.state(s.key) == ConnState::SYN_SENT) hits[{s.dev, Reason::SYN_ACK_RATIO}].push_back(s.seq);
        }

        for (auto& [k, seqs] : hits) {
            std::sort(seqs.begin(), seqs.end());
            const auto n = seqs.size();
            out.push_back(detail::make_evidence(k.second, k.first, std::move(seqs),
                                                std::to_string(n) + " packet(s)", w, params.window_s));
        }
    });
    return out;
}

/// Rebuilds flagged_packets and suspect_devices from the evidence list.
inline void recompute_unions(FogReport& r) {
    r.flagged_packets.clear();
    r.suspect_devices.clear();
    for (const auto& e : r.evidence) {
        r.flagged_packets.insert(e.seq_nos.begin(), e.seq_nos.end());
        r.suspect_devices.insert(e.device_id);
    }
}

/// Runs all four analyzers over one fog node's forwarded packets.
inline FogReport fog_node_analyze(FogNodeId node, std::span<const Packet> packets, const DetectorParams& params,
                                  std::span<const ResponseObservation> responses = {}) {
    const auto start = std::chrono::steady_clock::now();
    FogReport report;
    report.fog_node_id = node;
    for (auto part : {statistical_analyze(packets, params), specification_analyze(packets, params),
                      behavioral_analyze(packets, params, responses), deep_packet_inspect(packets, params)}) {
        for (auto& e : part) report.evidence.push_back(std::move(e));
    }
    recompute_unions(report);
    report.analysis_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace fogddos
