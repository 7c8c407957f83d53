#pragma once

// Scenario configuration files: `key = value` lines, `#` comments. Keys are
// listed in kConfigKeys below; unknown keys and malformed values are errors
// that cite the file and line. Rule-file paths are resolved against the
// directory of the config file; `default` selects the built-in ruleset.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fogddos/cloud_coordinator.hpp"
#include "fogddos/fog_detectors.hpp"
#include "fogddos/traffic_generator.hpp"

namespace fogddos {

struct ScenarioConfig {
    std::string name;
    std::uint32_t n_devices = 3;
    std::uint32_t n_fog_nodes = 2;
    std::uint32_t n_cloud_servers = 1;
    TrafficConfig traffic;
    FloodSpec flood;
    std::string firewall_ruleset = "default";
    std::string mitigation_ruleset = "default";
    DetectorParams detector;
    ConfirmationPolicy policy;

    std::uint64_t seed() const { return traffic.seed; }

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline void validate(const ScenarioConfig& c) {
    if (c.name.empty()) throw ConfigError("name must not be empty");
    if (c.n_devices == 0) throw ConfigError("topology.devices must be >= 1");
    if (c.n_fog_nodes == 0) throw ConfigError("topology.fog_nodes must be >= 1");
    if (c.n_cloud_servers != 1) throw ConfigError("topology.cloud_servers must be 1");
    if (c.traffic.n_devices != c.n_devices) throw ConfigError("traffic device count differs from topology");
    validate(c.traffic, c.flood);
    validate(c.detector);
    validate(c.policy);
}

namespace detail {

inline std::string list_devices(const std::vector<DeviceId>& ds) {
    if (ds.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < ds.size(); ++i) out += (i ? "," : "") + std::to_string(ds[i].value);
    return out;
}

struct ConfigKey {
    std::string_view key;
    bool required;
    std::function<void(ScenarioConfig&, std::string_view)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

template <typename T>
T number_or_throw(std::string_view v) {
    auto n = text::parse_number<T>(v);
    if (!n) throw ConfigError("expected a number, got '" + std::string(v) + "'");
    return *n;
}

inline bool bool_or_throw(std::string_view v) {
    auto b = text::parse_bool(v);
    if (!b) throw ConfigError("expected true or false, got '" + std::string(v) + "'");
    return *b;
}

#define FOGDDOS_NUM_KEY(KEY, FIELD, TYPE)                                                             \
    ConfigKey {                                                                                       \
        KEY, false, [](ScenarioConfig& c, std::string_view v) { c.FIELD = number_or_throw<TYPE>(v); }, \
            [](const ScenarioConfig& c) { return text::shortest(static_cast<double>(c.FIELD)); }      \
    }

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"name", true, [](ScenarioConfig& c, std::string_view v) { c.name = std::string(v); },
         [](const ScenarioConfig& c) { return c.name; }},
        {"seed", false, [](ScenarioConfig& c, std::string_view v) { c.traffic.seed = number_or_throw<std::uint64_t>(v); },
         [](const ScenarioConfig& c) { return std::to_string(c.traffic.seed); }},
        {"topology.devices", true,
         [](ScenarioConfig& c, std::string_view v) {
             c.n_devices = number_or_throw<std::uint32_t>(v);
             c.traffic.n_devices = c.n_devices;
         },
         [](const ScenarioConfig& c) { return std::to_string(c.n_devices); }},
        {"topology.fog_nodes", true,
         [](ScenarioConfig& c, std::string_view v) { c.n_fog_nodes = number_or_throw<std::uint32_t>(v); },
         [](const ScenarioConfig& c) { return std::to_string(c.n_fog_nodes); }},
        {"topology.cloud_servers", false,
         [](ScenarioConfig& c, std::string_view v) { c.n_cloud_servers = number_or_throw<std::uint32_t>(v); },
         [](const ScenarioConfig& c) { return std::to_string(c.n_cloud_servers); }},
        {"traffic.total_packets", true,
         [](ScenarioConfig& c, std::string_view v) { c.traffic.total_packets = number_or_throw<std::uint64_t>(v); },
         [](const ScenarioConfig& c) { return std::to_string(c.traffic.total_packets); }},
        FOGDDOS_NUM_KEY("traffic.attack_ratio", traffic.attack_ratio, double),
        {"traffic.attacker_devices", false,
         [](ScenarioConfig& c, std::string_view v) {
             c.traffic.attacker_devices.clear();
             if (v == "none") return;
             std::set<std::uint32_t> ids;
             for (auto part : text::split(v, ',')) ids.insert(number_or_throw<std::uint32_t>(text::trim(part)));
             for (auto id : ids) c.traffic.attacker_devices.push_back(DeviceId{id});
         },
         [](const ScenarioConfig& c) { return list_devices(c.traffic.attacker_devices); }},
        {"traffic.benign_mix", false,
         [](ScenarioConfig& c, std::string_view v) {
             const auto parts = text::split(v, ',');
             if (parts.size() != 3) throw ConfigError("benign_mix needs three fractions tcp,udp,icmp");
             c.traffic.benign_mix = {number_or_throw<double>(text::trim(parts[0])),
                                     number_or_throw<double>(text::trim(parts[1])),
                                     number_or_throw<double>(text::trim(parts[2]))};
         },
         [](const ScenarioConfig& c) {
             const auto& m = c.traffic.benign_mix;
             return text::shortest(m.tcp) + "," + text::shortest(m.udp) + "," + text::shortest(m.icmp);
         }},
        FOGDDOS_NUM_KEY("traffic.duration_s", traffic.duration_s, double),
        FOGDDOS_NUM_KEY("traffic.attack_payload_fraction", traffic.attack_payload_fraction, double),
        FOGDDOS_NUM_KEY("traffic.servers", traffic.n_servers, std::uint32_t),
        FOGDDOS_NUM_KEY("traffic.base_latency_s", traffic.base_latency_s, double),
        {"flood.target", false,
         [](ScenarioConfig& c, std::string_view v) {
             const auto colon = v.find(':');
             auto ip = Ipv4Address::parse(v.substr(0, colon));
             if (!ip || colon == std::string_view::npos) throw ConfigError("flood.target must be ip:port");
             c.flood.target_ip = *ip;
             c.flood.target_port = number_or_throw<std::uint16_t>(v.substr(colon + 1));
         },
         [](const ScenarioConfig& c) {
             return c.flood.target_ip.to_string() + ":" + std::to_string(c.flood.target_port);
         }},
        FOGDDOS_NUM_KEY("flood.syn_rate", flood.syn_rate, double),
        FOGDDOS_NUM_KEY("flood.start_s", flood.start_s, double),
        FOGDDOS_NUM_KEY("flood.end_s", flood.end_s, double),
        {"flood.spoof_sources", false,
         [](ScenarioConfig& c, std::string_view v) { c.flood.spoof_sources = bool_or_throw(v); },
         [](const ScenarioConfig& c) { return std::string(c.flood.spoof_sources ? "true" : "false"); }},
        FOGDDOS_NUM_KEY("flood.blocklisted_fraction", flood.blocklisted_fraction, double),
        FOGDDOS_NUM_KEY("flood.secondary_fraction", flood.secondary_fraction, double),
        FOGDDOS_NUM_KEY("flood.load_factor", flood.load_factor, double),
        {"rules.firewall", false, [](ScenarioConfig& c, std::string_view v) { c.firewall_ruleset = std::string(v); },
         [](const ScenarioConfig& c) { return c.firewall_ruleset; }},
        {"rules.mitigation", false, [](ScenarioConfig& c, std::string_view v) { c.mitigation_ruleset = std::string(v); },
         [](const ScenarioConfig& c) { return c.mitigation_ruleset; }},
        FOGDDOS_NUM_KEY("detector.window_s", detector.window_s, double),
        FOGDDOS_NUM_KEY("detector.syn_rate_threshold", detector.syn_rate_threshold, double),
        FOGDDOS_NUM_KEY("detector.syn_fraction_threshold", detector.syn_fraction_threshold, double),
        FOGDDOS_NUM_KEY("detector.conn_init_threshold", detector.conn_init_threshold, double),
        FOGDDOS_NUM_KEY("detector.response_time_factor", detector.response_time_factor, double),
        FOGDDOS_NUM_KEY("detector.flow_spike_threshold", detector.flow_spike_threshold, double),
        FOGDDOS_NUM_KEY("detector.half_open_threshold", detector.half_open_threshold, double),
        FOGDDOS_NUM_KEY("detector.mac_novelty_threshold", detector.mac_novelty_threshold, double),
        FOGDDOS_NUM_KEY("detector.payload_repeat_fraction", detector.payload_repeat_fraction, double),
        FOGDDOS_NUM_KEY("detector.max_payload_bytes", detector.max_payload_bytes, std::uint32_t),
        FOGDDOS_NUM_KEY("detector.size_sigma", detector.size_sigma, double),
        FOGDDOS_NUM_KEY("detector.min_baseline_samples", detector.min_baseline_samples, std::uint32_t),
        FOGDDOS_NUM_KEY("detector.dst_concentration_fraction", detector.dst_concentration_fraction, double),
        FOGDDOS_NUM_KEY("detector.syn_ack_ratio", detector.syn_ack_ratio, double),
        FOGDDOS_NUM_KEY("detector.min_inspect_payload_bytes", detector.min_inspect_payload_bytes, std::uint32_t),
        FOGDDOS_NUM_KEY("policy.min_analyzer_families", policy.min_analyzer_families, std::uint32_t),
        {"policy.require_statistical_or_dpi", false,
         [](ScenarioConfig& c, std::string_view v) { c.policy.require_statistical_or_dpi = bool_or_throw(v); },
         [](const ScenarioConfig& c) { return std::string(c.policy.require_statistical_or_dpi ? "true" : "false"); }},
    };
    return keys;
}

#undef FOGDDOS_NUM_KEY

}  // namespace detail

/// Parses config text. `origin` names the source in error messages;
/// `base_dir` resolves relative rule paths.
inline ScenarioConfig parse_config(std::string_view text_in, const std::string& origin = "<config>",
                                   const std::filesystem::path& base_dir = {}) {
    ScenarioConfig c;
    c.traffic.n_devices = c.n_devices;
    std::map<std::string_view, const detail::ConfigKey*> by_name;
    for (const auto& k : detail::config_keys()) by_name.emplace(k.key, &k);
    std::set<std::string_view> seen;

    std::size_t line_no = 0;
    for (auto raw : text::split(text_in, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto where = origin + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        auto it = by_name.find(key);
        if (it == by_name.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (!seen.insert(it->first).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        try {
            it->second->set(c, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + std::string(key) + ": " + e.what());
        }
    }
    for (const auto& k : detail::config_keys())
        if (k.required && !seen.count(k.key)) throw ConfigError(origin + ": missing required key '" + std::string(k.key) + "'");

    for (auto* path : {&c.firewall_ruleset, &c.mitigation_ruleset}) {
        if (*path != "default" && !base_dir.empty() && std::filesystem::path(*path).is_relative())
            *path = (base_dir / *path).lexically_normal().string();
    }
    try {
        validate(c);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string(), path.parent_path());
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ScenarioConfig& c) {
    std::string out;
    for (const auto& k : detail::config_keys()) out += std::string(k.key) + " = " + k.get(c) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace detail {

inline constexpr std::string_view kPresetCommon =
    "topology.cloud_servers = 1\n"
    "traffic.total_packets = 10000\n"
    "traffic.benign_mix = 0.7,0.2,0.1\n"
    "traffic.duration_s = 60\n"
    "traffic.attack_payload_fraction = 0.1\n"
    "flood.target = 172.16.0.1:80\n"
    "flood.syn_rate = 100\n"
    "flood.start_s = 10\n"
    "flood.end_s = 50\n"
    "flood.spoof_sources = true\n"
    "flood.load_factor = 4\n"
    "rules.firewall = default\n"
    "rules.mitigation = default\n"
    "policy.min_analyzer_families = 2\n";

// 800 attack SYNs of which 85 come from the blocklisted range and 33 from
// the secondary range: the firewall stops 118 of 10,000.
inline constexpr std::string_view kPresetFlood =
    "traffic.attack_ratio = 0.08\n"
    "flood.blocklisted_fraction = 0.10625\n"
    "flood.secondary_fraction = 0.04125\n";

}  // namespace detail

inline const std::map<std::string, std::string, std::less<>>& preset_texts() {
    static const std::map<std::string, std::string, std::less<>> presets = {
        {"scenario1", "name = scenario1\nseed = 101\ntopology.devices = 3\ntopology.fog_nodes = 2\n"
                      "traffic.attacker_devices = 0\n" +
                          std::string(detail::kPresetFlood) + std::string(detail::kPresetCommon)},
        {"scenario2", "name = scenario2\nseed = 202\ntopology.devices = 5\ntopology.fog_nodes = 3\n"
                      "traffic.attacker_devices = 0,2\n" +
                          std::string(detail::kPresetFlood) + std::string(detail::kPresetCommon)},
        {"scenario3", "name = scenario3\nseed = 303\ntopology.devices = 10\ntopology.fog_nodes = 5\n"
                      "traffic.attacker_devices = 0,3,7\n" +
                          std::string(detail::kPresetFlood) + std::string(detail::kPresetCommon)},
        {"scenario1-device-layer",
         "name = scenario1-device-layer\nseed = 100\ntopology.devices = 3\ntopology.fog_nodes = 2\n"
         "traffic.attacker_devices = 0\ntraffic.attack_ratio = 0.0118\n"
         "flood.blocklisted_fraction = 0.72\nflood.secondary_fraction = 0.28\n" +
             std::string(detail::kPresetCommon)},
    };
    return presets;
}

inline bool is_preset(std::string_view name) { return preset_texts().count(name) > 0; }

inline ScenarioConfig preset_config(std::string_view name) {
    auto it = preset_texts().find(name);
    if (it == preset_texts().end()) throw ConfigError("unknown preset '" + std::string(name) + "'");
    return parse_config(it->second, "preset:" + it->first);
}

}  // namespace fogddos
