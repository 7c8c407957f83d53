#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "fogddos/fog_detectors.hpp"
#include "fogddos/mitigation_rules.hpp"
#include "fogddos/ratio.hpp"

namespace fogddos {

struct EvidenceRef {
    FogNodeId fog_node_id;
    std::size_t index = 0;  // into that report's evidence list

    friend bool operator==(const EvidenceRef&, const EvidenceRef&) = default;
};

struct ConsolidatedView {
    std::map<DeviceId, std::set<Analyzer>> families;
    std::set<std::uint64_t> flagged_packets;
    /// Originating device of every flagged packet.
    std::map<std::uint64_t, DeviceId> packet_device;
    std::map<DeviceId, std::vector<EvidenceRef>> evidence_index;

    /// Distinct analyzer families that flagged the device, in [0, 4].
    std::size_t correlation_count(DeviceId d) const {
        auto it = families.find(d);
        return it == families.end() ? 0 : it->second.size();
    }
};

inline ConsolidatedView consolidate(std::span<const FogReport> reports) {
    ConsolidatedView view;
    std::set<FogNodeId> nodes;
    for (const auto& r : reports) {
        if (!nodes.insert(r.fog_node_id).second)
            throw PreconditionError("duplicate fog node id " + std::to_string(r.fog_node_id.value));
        for (std::size_t i = 0; i < r.evidence.size(); ++i) {
            const auto& e = r.evidence[i];
            view.families[e.device_id].insert(e.analyzer);
            view.evidence_index[e.device_id].push_back({r.fog_node_id, i});
            for (auto s : e.seq_nos) {
                view.flagged_packets.insert(s);
                view.packet_device.emplace(s, e.device_id);
            }
        }
    }
    return view;
}

struct ConfirmationPolicy {
    std::uint32_t min_analyzer_families = 2;
    bool require_statistical_or_dpi = false;

    friend bool operator==(const ConfirmationPolicy&, const ConfirmationPolicy&) = default;
};

inline void validate(const ConfirmationPolicy& p) {
    if (p.min_analyzer_families < 1 || p.min_analyzer_families > 4)
        throw ConfigError("policy: min_analyzer_families must be in [1,4]");
}

inline bool device_confirmed(const ConsolidatedView& view, DeviceId d, const ConfirmationPolicy& policy) {
    auto it = view.families.find(d);
    if (it == view.families.end()) return false;
    if (it->second.size() < policy.min_analyzer_families) return false;
    if (policy.require_statistical_or_dpi && !it->second.count(Analyzer::STATISTICAL) && !it->second.count(Analyzer::DPI))
        return false;
    return true;
}

struct Confirmation {
    std::set<DeviceId> confirmed_devices;
    std::vector<std::uint64_t> confirmed_packets;  // ascending seq_no
    std::vector<std::uint64_t> released_packets;   // flagged, then resumed
};

inline Confirmation confirm_ddos(const ConsolidatedView& view, const ConfirmationPolicy& policy) {
    validate(policy);
    Confirmation out;
    for (const auto& [dev, fams] : view.families)
        if (device_confirmed(view, dev, policy)) out.confirmed_devices.insert(dev);
    for (auto s : view.flagged_packets) {
        if (out.confirmed_devices.count(view.packet_device.at(s))) out.confirmed_packets.push_back(s);
        else out.released_packets.push_back(s);
    }
    return out;
}

struct MitigationResult {
    std::set<DeviceId> confirmed_devices;
    std::set<DeviceId> blocked_devices;
    std::uint64_t confirmed_packets = 0;
    std::uint64_t mitigated_packets = 0;
    std::uint64_t rule_drops = 0;
    std::uint64_t block_drops = 0;
    double mitigation_wall_time_s = 0.0;
    /// mitigated / confirmed; nullopt (not applicable) when nothing was confirmed.
    std::optional<Ratio> mitigation_rate;
    std::uint64_t false_resume_count = 0;
    std::vector<std::uint64_t> mitigated_seq_nos;
    std::vector<RuleActionRecord> action_log;
};

/// Runs the rule engine over the confirmed packets. A device whose packets
/// trigger a DROP is blocked; its later confirmed packets are mitigated by
/// the block without reaching the rules.
inline MitigationResult apply_mitigation(std::span<const Packet> confirmed, const std::vector<MitigationRule>& ruleset) {
    const auto start = std::chrono::steady_clock::now();
    MitigationResult out;
    out.confirmed_packets = confirmed.size();
    RuleEngine engine(ruleset);
    for (const auto& p : confirmed) {
        out.confirmed_devices.insert(p.device_id);
        if (out.blocked_devices.count(p.device_id)) {
            ++out.block_drops;
            out.mitigated_seq_nos.push_back(p.seq_no);
            continue;
        }
        if (engine.process(p, out.action_log) == Verdict::DROP) {
            ++out.rule_drops;
            out.blocked_devices.insert(p.device_id);
            out.mitigated_seq_nos.push_back(p.seq_no);
        }
    }
    out.mitigated_packets = out.rule_drops + out.block_drops;
    if (out.confirmed_packets > 0) out.mitigation_rate = Ratio::of(out.mitigated_packets, out.confirmed_packets);
    out.mitigation_wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

struct CloudOutcome {
    ConsolidatedView view;
    Confirmation confirmation;
    MitigationResult mitigation;
};

/// consolidate -> confirm_ddos -> apply_mitigation; the mitigation wall time
/// covers all three.
inline CloudOutcome run_cloud_stage(std::span<const FogReport> reports, std::span<const Packet> forwarded,
                                    const ConfirmationPolicy& policy, const std::vector<MitigationRule>& ruleset) {
    const auto start = std::chrono::steady_clock::now();
    CloudOutcome out;
    out.view = consolidate(reports);
    out.confirmation = confirm_ddos(out.view, policy);

    Trace confirmed;
    confirmed.reserve(out.confirmation.confirmed_packets.size());
    std::size_t k = 0;
    const auto& want = out.confirmation.confirmed_packets;
    for (const auto& p : forwarded) {
        while (k < want.size() && want[k] < p.seq_no) ++k;
        if (k < want.size() && want[k] == p.seq_no) confirmed.push_back(p);
    }
    if (confirmed.size() != want.size())
        throw PreconditionError("fog reports flag packets missing from the forwarded stream");

    out.mitigation = apply_mitigation(confirmed, ruleset);
    out.mitigation.confirmed_devices = out.confirmation.confirmed_devices;
    out.mitigation.false_resume_count = out.confirmation.released_packets.size();
    out.mitigation.mitigation_wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// One blocked device id per line.
inline void write_block_list(std::ostream& os, const MitigationResult& r) {
    for (auto d : r.blocked_devices) os << d.value << '\n';
}

}  // namespace fogddos
