#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fogddos/cloud_coordinator.hpp"
#include "fogddos/device_firewall.hpp"
#include "fogddos/fog_detectors.hpp"
#include "fogddos/metrics.hpp"
#include "fogddos/resources.hpp"
#include "fogddos/scenario_config.hpp"
#include "fogddos/traffic_generator.hpp"

namespace fogddos {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

struct RunOptions {
    /// Analyze fog nodes one after another instead of concurrently.
    bool serial = false;
    bool sample_resources = true;
    std::chrono::milliseconds sample_interval{10};
    /// Defaults to a HostProbe.
    std::function<std::unique_ptr<ResourceProbe>()> probe_factory;
};

struct ScenarioRun {
    ScenarioConfig config;
    bool serial = false;
    GeneratedTraffic traffic;
    LabelStats generated;
    FilterOutcome firewall;
    FogAssignment assignment;
    std::vector<FogReport> fog_reports;
    /// Packets received by each fog node.
    std::vector<std::uint64_t> fog_packet_counts;
    CloudOutcome cloud;
    DetectionMetrics detection;
    SamplingResult resources;
    std::uint64_t delivered_final = 0;
};

inline std::vector<FirewallRule> load_firewall_rules(const std::string& spec) {
    if (spec == "default") return default_firewall_ruleset();
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot read firewall rules " + spec);
    try {
        return parse_firewall_ruleset(in);
    } catch (const ParseError& e) {
        throw ParseError(spec + ": " + e.message(), e.line(), e.offset());
    }
}

inline std::vector<MitigationRule> load_mitigation_rules(const std::string& spec) {
    if (spec == "default") return default_mitigation_ruleset();
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot read mitigation rules " + spec);
    try {
        return parse_ruleset(in);
    } catch (const ParseError& e) {
        throw ParseError(spec + ": " + e.message(), e.line(), e.offset());
    }
}

/// Conservation invariants of a finished run; empty when all hold.
inline std::vector<std::string> conservation_violations(const ScenarioRun& r) {
    std::vector<std::string> v;
    const auto& fw = r.firewall;
    if (fw.total != r.traffic.packets.size()) v.push_back("firewall total differs from generated count");
    if (fw.forwarded + fw.detected_dos != fw.total) v.push_back("forwarded + detected_dos != total");
    if (fw.dropped + fw.alerted != fw.detected_dos) v.push_back("dropped + alerted != detected_dos");
    if (fw.forwarded_stream.size() != fw.forwarded) v.push_back("forwarded stream size mismatch");
    std::uint64_t fog_total = 0;
    for (auto n : r.fog_packet_counts) fog_total += n;
    if (fog_total != fw.forwarded) v.push_back("fog nodes did not partition the forwarded stream");
    if (r.detection.total() != fw.forwarded) v.push_back("confusion matrix does not cover the forwarded stream");
    const auto& c = r.cloud;
    if (c.confirmation.confirmed_packets.size() + c.confirmation.released_packets.size() != c.view.flagged_packets.size())
        v.push_back("confirmed + released != flagged");
    if (c.mitigation.mitigated_packets > c.mitigation.confirmed_packets) v.push_back("mitigated exceeds confirmed");
    if (c.mitigation.rule_drops + c.mitigation.block_drops != c.mitigation.mitigated_packets)
        v.push_back("rule_drops + block_drops != mitigated");
    if (r.delivered_final + c.mitigation.mitigated_packets != fw.forwarded)
        v.push_back("delivered_final + mitigated != forwarded");
    return v;
}

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace detail

/// Runs the full pipeline: traffic -> firewall -> fog -> cloud -> metrics.
/// Failures are rethrown as StageError naming the stage.
inline ScenarioRun run_scenario(const ScenarioConfig& config, const RunOptions& options = {}) {
    detail::stage("config", [&] { validate(config); return 0; });
    ScenarioRun run;
    run.config = config;
    run.serial = options.serial;

    std::unique_ptr<ResourceSampler> sampler;
    if (options.sample_resources) {
        try {
            auto probe = options.probe_factory ? options.probe_factory() : std::make_unique<HostProbe>();
            sampler = std::make_unique<ResourceSampler>(std::move(probe), options.sample_interval);
        } catch (const std::exception& e) {
            run.resources.warning = std::string("resource sampling disabled: ") + e.what();
        }
    }

    run.traffic = detail::stage("traffic", [&] { return generate_trace(config.traffic, config.flood); });
    run.generated = trace_label_stats(run.traffic.packets);

    run.firewall = detail::stage("firewall", [&] {
        const auto rules = load_firewall_rules(config.firewall_ruleset);
        return filter_trace(rules, run.traffic.packets);
    });
    const auto mitigation_rules = detail::stage("cloud", [&] { return load_mitigation_rules(config.mitigation_ruleset); });

    detail::stage("fog", [&] {
        run.assignment = assign_devices_to_fog(config.n_devices, config.n_fog_nodes);
        std::vector<Trace> streams(config.n_fog_nodes);
        std::set<std::uint64_t> forwarded_seqs;
        for (const auto& p : run.firewall.forwarded_stream) {
            streams[run.assignment.at(p.device_id).value].push_back(p);
            forwarded_seqs.insert(p.seq_no);
        }
        std::vector<std::vector<ResponseObservation>> responses(config.n_fog_nodes);
        for (const auto& r : run.traffic.responses)
            if (forwarded_seqs.count(r.syn_seq_no)) responses[run.assignment.at(r.device_id).value].push_back(r);

        for (const auto& s : streams) run.fog_packet_counts.push_back(s.size());
        auto analyze = [&](std::uint32_t i) {
            return fog_node_analyze(FogNodeId{i}, streams[i], config.detector, responses[i]);
        };
        if (options.serial) {
            for (std::uint32_t i = 0; i < config.n_fog_nodes; ++i) run.fog_reports.push_back(analyze(i));
        } else {
            std::vector<std::future<FogReport>> jobs;
            for (std::uint32_t i = 0; i < config.n_fog_nodes; ++i) jobs.push_back(std::async(std::launch::async, analyze, i));
            for (auto& j : jobs) run.fog_reports.push_back(j.get());
        }
        return 0;
    });

    run.cloud = detail::stage("cloud", [&] {
        return run_cloud_stage(run.fog_reports, run.firewall.forwarded_stream, config.policy, mitigation_rules);
    });

    detail::stage("metrics", [&] {
        double fog_time = 0;
        for (const auto& r : run.fog_reports)
            fog_time = options.serial ? fog_time + r.analysis_wall_time_s : std::max(fog_time, r.analysis_wall_time_s);
        run.detection = detection_metrics(run.cloud.view.flagged_packets, run.firewall.forwarded_stream, fog_time);
        run.delivered_final = run.firewall.forwarded - run.cloud.mitigation.mitigated_packets;
        const auto bad = conservation_violations(run);
        if (!bad.empty()) throw PreconditionError("conservation check failed: " + bad.front());
        return 0;
    });

    if (sampler) {
        auto res = sampler->finish();
        if (!run.resources.warning) run.resources = std::move(res);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Report

namespace detail {

inline Json pct(const std::optional<Ratio>& r) {
    if (!r) return nullptr;
    return text::round_to(to_percent(*r).to_double(), 2);
}

inline Json secs(double s) { return text::round_to(s, 3); }

inline Json ratio_text(const std::optional<Ratio>& r) {
    if (!r) return nullptr;
    return r->to_string();
}

struct ResourceStats {
    std::optional<double> cpu_mean, cpu_max, mem_mean, mem_max;
};

inline ResourceStats resource_stats(const std::vector<ResourceSample>& s) {
    ResourceStats out;
    if (s.empty()) return out;
    double cs = 0, ms = 0, cm = 0, mm = 0;
    for (const auto& x : s) {
        cs += x.cpu_percent;
        ms += x.memory_percent;
        cm = std::max(cm, x.cpu_percent);
        mm = std::max(mm, x.memory_percent);
    }
    const auto n = static_cast<double>(s.size());
    out.cpu_mean = cs / n;
    out.mem_mean = ms / n;
    out.cpu_max = cm;
    out.mem_max = mm;
    return out;
}

inline Json opt_pct(const std::optional<double>& v) {
    if (!v) return nullptr;
    return text::round_to(*v, 2);
}

}  // namespace detail

inline Json report_json(const ScenarioRun& run) {
    const auto& c = run.config;
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["scenario"] = c.name;
    j["seed"] = c.seed();
    j["execution_mode"] = run.serial ? "serial" : "parallel";

    Json cfg = Json::object();
    for (const auto& k : detail::config_keys()) cfg[std::string(k.key)] = k.get(c);
    j["config"] = cfg;

    Json topo;
    topo["devices"] = c.n_devices;
    topo["fog_nodes"] = c.n_fog_nodes;
    topo["cloud_servers"] = c.n_cloud_servers;
    Json assign = Json::array();
    for (const auto& [d, f] : run.assignment) assign.push_back({{"device", d.value}, {"fog_node", f.value}});
    topo["assignment"] = assign;
    j["topology"] = topo;

    Json tr;
    tr["total"] = run.traffic.packets.size();
    tr["benign"] = run.generated.benign_count;
    tr["attack"] = run.generated.attack_count;
    tr["responses"] = run.traffic.responses.size();
    j["traffic"] = tr;

    const auto& fw = run.firewall;
    Json fj;
    fj["total"] = fw.total;
    fj["forwarded"] = fw.forwarded;
    fj["detected_dos"] = fw.detected_dos;
    fj["dropped"] = fw.dropped;
    fj["alerted"] = fw.alerted;
    std::optional<Ratio> pdr;
    if (fw.total > 0) pdr = packet_delivery_ratio(fw);
    fj["pdr_pct"] = detail::pct(pdr);
    fj["pdr_exact"] = detail::ratio_text(pdr);
    Json per = Json::array();
    for (const auto& [d, dd] : fw.per_device) {
        std::optional<Ratio> r;
        if (dd.sent > 0) r = Ratio::of(dd.delivered, dd.sent);
        per.push_back({{"device", d.value}, {"sent", dd.sent}, {"delivered", dd.delivered}, {"pdr_pct", detail::pct(r)}});
    }
    fj["per_device"] = per;
    j["firewall"] = fj;

    Json fog = Json::array();
    for (std::size_t i = 0; i < run.fog_reports.size(); ++i) {
        const auto& r = run.fog_reports[i];
        std::map<std::string, std::uint64_t> reasons;
        for (const auto& e : r.evidence) reasons[std::string(to_string(e.reason))] += e.seq_nos.size();
        Json devs = Json::array();
        for (const auto& [d, f] : run.assignment)
            if (f == r.fog_node_id) devs.push_back(d.value);
        Json suspects = Json::array();
        for (auto d : r.suspect_devices) suspects.push_back(d.value);
        Json rj;
        rj["fog_node"] = r.fog_node_id.value;
        rj["devices"] = devs;
        rj["packets"] = run.fog_packet_counts.at(i);
        rj["evidence"] = r.evidence.size();
        rj["flagged"] = r.flagged_packets.size();
        rj["suspect_devices"] = suspects;
        rj["flagged_by_reason"] = reasons;
        rj["analysis_wall_time_s"] = detail::secs(r.analysis_wall_time_s);
        fog.push_back(rj);
    }
    j["fog"] = fog;

    const auto& m = run.detection;
    Json dj;
    dj["true_positives"] = m.true_positives;
    dj["false_positives"] = m.false_positives;
    dj["true_negatives"] = m.true_negatives;
    dj["false_negatives"] = m.false_negatives;
    dj["detection_rate_pct"] = detail::pct(m.detection_rate);
    dj["accuracy_pct"] = detail::pct(m.accuracy);
    dj["false_positive_rate_pct"] = detail::pct(m.false_positive_rate);
    dj["detection_wall_time_s"] = detail::secs(m.detection_wall_time_s);
    j["detection"] = dj;

    const auto& cl = run.cloud;
    const auto& mit = cl.mitigation;
    Json cj;
    Json corr = Json::array();
    for (const auto& [d, fams] : cl.view.families) {
        Json names = Json::array();
        for (auto a : fams) names.push_back(std::string(to_string(a)));
        corr.push_back({{"device", d.value}, {"families", names}, {"count", fams.size()}});
    }
    cj["correlation"] = corr;
    Json confirmed = Json::array(), blocked = Json::array();
    for (auto d : cl.confirmation.confirmed_devices) confirmed.push_back(d.value);
    for (auto d : mit.blocked_devices) blocked.push_back(d.value);
    cj["confirmed_devices"] = confirmed;
    cj["blocked_devices"] = blocked;
    cj["flagged_packets"] = cl.view.flagged_packets.size();
    cj["confirmed_packets"] = mit.confirmed_packets;
    cj["released_packets"] = mit.false_resume_count;
    cj["mitigated_packets"] = mit.mitigated_packets;
    cj["rule_drops"] = mit.rule_drops;
    cj["block_drops"] = mit.block_drops;
    cj["rule_actions"] = mit.action_log.size();
    cj["mitigation_status"] = mit.mitigation_rate ? "APPLIED" : "NOT_APPLICABLE";
    cj["mitigation_rate_pct"] = detail::pct(mit.mitigation_rate);
    cj["mitigation_wall_time_s"] = detail::secs(mit.mitigation_wall_time_s);
    j["cloud"] = cj;

    j["delivery"] = {{"forwarded", fw.forwarded},
                     {"mitigated", mit.mitigated_packets},
                     {"delivered_final", run.delivered_final}};

    const auto rs = detail::resource_stats(run.resources.samples);
    Json res;
    res["samples"] = run.resources.samples.size();
    res["cpu_mean_pct"] = detail::opt_pct(rs.cpu_mean);
    res["cpu_max_pct"] = detail::opt_pct(rs.cpu_max);
    res["memory_mean_pct"] = detail::opt_pct(rs.mem_mean);
    res["memory_max_pct"] = detail::opt_pct(rs.mem_max);
    res["warning"] = run.resources.warning ? Json(*run.resources.warning) : Json(nullptr);
    j["resources"] = res;
    return j;
}

/// Drops wall-clock timings and resource samples, the only run-dependent
/// parts of a report.
inline void mask_nondeterministic(Json& j) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end();) {
            const std::string& k = it.key();
            if (k == "resources" || k.ends_with("wall_time_s") || k == "execution_mode") it = j.erase(it);
            else mask_nondeterministic(*it++);
        }
    } else if (j.is_array()) {
        for (auto& x : j) mask_nondeterministic(x);
    }
}

/// Re-checks the conservation identities from a report's counters alone.
inline std::vector<std::string> report_violations(const Json& j) {
    std::vector<std::string> v;
    try {
        auto u = [](const Json& x, const char* k) { return x.at(k).get<std::uint64_t>(); };
        const auto& fw = j.at("firewall");
        const auto total = u(fw, "total"), fwd = u(fw, "forwarded"), det = u(fw, "detected_dos");
        if (total != u(j.at("traffic"), "total")) v.push_back("firewall total differs from traffic total");
        if (fwd + det != total) v.push_back("forwarded + detected_dos != total");
        if (u(fw, "dropped") + u(fw, "alerted") != det) v.push_back("dropped + alerted != detected_dos");
        std::uint64_t sent = 0, delivered = 0;
        for (const auto& d : fw.at("per_device")) {
            sent += u(d, "sent");
            delivered += u(d, "delivered");
        }
        if (sent != total || delivered != fwd) v.push_back("per-device counts do not sum to the totals");
        if (total > 0 && fw.at("pdr_exact").get<std::string>() != Ratio::of(fwd, total).to_string())
            v.push_back("pdr_exact does not match the counters");
        std::uint64_t fog_packets = 0;
        for (const auto& f : j.at("fog")) fog_packets += u(f, "packets");
        if (fog_packets != fwd) v.push_back("fog packets do not partition the forwarded stream");
        const auto& d = j.at("detection");
        const auto tp = u(d, "true_positives"), fp = u(d, "false_positives");
        if (tp + fp + u(d, "true_negatives") + u(d, "false_negatives") != fwd)
            v.push_back("confusion matrix does not cover the forwarded stream");
        const auto& c = j.at("cloud");
        if (tp + fp != u(c, "flagged_packets")) v.push_back("TP + FP != flagged");
        if (u(c, "confirmed_packets") + u(c, "released_packets") != u(c, "flagged_packets"))
            v.push_back("confirmed + released != flagged");
        if (u(c, "rule_drops") + u(c, "block_drops") != u(c, "mitigated_packets"))
            v.push_back("rule_drops + block_drops != mitigated");
        if (u(c, "mitigated_packets") > u(c, "confirmed_packets")) v.push_back("mitigated exceeds confirmed");
        if ((u(c, "confirmed_packets") == 0) != (c.at("mitigation_status") == "NOT_APPLICABLE"))
            v.push_back("mitigation status inconsistent with confirmed count");
        const auto& dl = j.at("delivery");
        if (u(dl, "delivered_final") + u(dl, "mitigated") != u(dl, "forwarded") || u(dl, "forwarded") != fwd)
            v.push_back("delivered_final + mitigated != forwarded");
    } catch (const nlohmann::json::exception& e) {
        v.push_back(std::string("malformed report: ") + e.what());
    }
    return v;
}

inline ScenarioSummary summary_of(const ScenarioRun& run) {
    ScenarioSummary s;
    s.name = run.config.name;
    s.n_devices = run.config.n_devices;
    s.n_fog_nodes = run.config.n_fog_nodes;
    s.detection_time_s = run.detection.detection_wall_time_s;
    s.detection_rate = run.detection.detection_rate;
    s.mitigation_time_s = run.cloud.mitigation.mitigation_wall_time_s;
    s.mitigation_rate = run.cloud.mitigation.mitigation_rate;
    const auto rs = detail::resource_stats(run.resources.samples);
    s.cpu_percent = rs.cpu_mean;
    s.memory_percent = rs.mem_mean;
    return s;
}

/// Rebuilds the comparison summary from a report, recomputing rates from
/// the raw counters.
inline ScenarioSummary summary_from_json(const Json& j) {
    try {
        if (j.at("schema_version").get<int>() != kReportSchemaVersion)
            throw ConfigError("unsupported report schema_version");
        ScenarioSummary s;
        s.name = j.at("scenario").get<std::string>();
        s.n_devices = j.at("topology").at("devices").get<std::uint32_t>();
        s.n_fog_nodes = j.at("topology").at("fog_nodes").get<std::uint32_t>();
        const auto& d = j.at("detection");
        const auto tp = d.at("true_positives").get<std::uint64_t>();
        const auto fn = d.at("false_negatives").get<std::uint64_t>();
        if (tp + fn > 0) s.detection_rate = Ratio::of(tp, tp + fn);
        s.detection_time_s = d.value("detection_wall_time_s", 0.0);
        const auto& c = j.at("cloud");
        const auto confirmed = c.at("confirmed_packets").get<std::uint64_t>();
        if (confirmed > 0) s.mitigation_rate = Ratio::of(c.at("mitigated_packets").get<std::uint64_t>(), confirmed);
        s.mitigation_time_s = c.value("mitigation_wall_time_s", 0.0);
        if (j.contains("resources")) {
            const auto& r = j.at("resources");
            if (r.contains("cpu_mean_pct") && !r.at("cpu_mean_pct").is_null()) s.cpu_percent = r.at("cpu_mean_pct").get<double>();
            if (r.contains("memory_mean_pct") && !r.at("memory_mean_pct").is_null())
                s.memory_percent = r.at("memory_mean_pct").get<double>();
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
}

inline ScenarioSummary load_report_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read report " + path.string());
    try {
        return summary_from_json(Json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Comparison across runs

struct Comparison {
    std::vector<ScenarioSummary> scenarios;  // ascending device count
    ComparisonTable table;
    std::string smallest;
    std::string largest;
    std::optional<Ratio> detection_scalability;   // percentage points per device
    std::optional<Ratio> mitigation_scalability;
};

inline Comparison compare_runs(std::vector<ScenarioSummary> summaries) {
    if (summaries.size() < 2) throw ConfigError("compare needs at least two reports");
    std::stable_sort(summaries.begin(), summaries.end(),
                     [](const auto& a, const auto& b) { return a.n_devices < b.n_devices; });
    const auto& lo = summaries.front();
    const auto& hi = summaries.back();
    if (lo.n_devices == hi.n_devices) throw UndefinedRatioError("all reports share the same device count");
    Comparison out;
    out.smallest = lo.name;
    out.largest = hi.name;
    if (lo.detection_rate && hi.detection_rate)
        out.detection_scalability =
            scalability_ratio({to_percent(*lo.detection_rate), to_percent(*hi.detection_rate), lo.n_devices, hi.n_devices});
    if (lo.mitigation_rate && hi.mitigation_rate)
        out.mitigation_scalability = scalability_ratio(
            {to_percent(*lo.mitigation_rate), to_percent(*hi.mitigation_rate), lo.n_devices, hi.n_devices});
    std::vector<std::optional<ScenarioSummary>> slots(summaries.begin(), summaries.end());
    out.table = build_comparison_table(slots);
    out.scenarios = std::move(summaries);
    return out;
}

inline Json comparison_json(const Comparison& c) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["smallest"] = c.smallest;
    j["largest"] = c.largest;
    auto ratio = [](const std::optional<Ratio>& r) -> Json {
        if (!r) return nullptr;
        return Json{{"value", text::round_to(r->to_double(), 4)}, {"exact", r->to_string()}};
    };
    j["detection_scalability_pct_per_device"] = ratio(c.detection_scalability);
    j["mitigation_scalability_pct_per_device"] = ratio(c.mitigation_scalability);
    Json rows = Json::array();
    for (const auto& r : c.table.rows) {
        const auto cells = render_cells(r);
        Json row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[std::string(kComparisonColumns[i])] = cells[i];
        rows.push_back(row);
    }
    j["table"] = rows;
    return j;
}

// ---------------------------------------------------------------------------
// Artifacts

enum class OutputFormat { JSON, CSV, TEXT };

inline std::optional<OutputFormat> parse_output_format(std::string_view s) {
    if (s == "json") return OutputFormat::JSON;
    if (s == "csv") return OutputFormat::CSV;
    if (s == "text") return OutputFormat::TEXT;
    return std::nullopt;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << content;
    if (!out) throw Error("write failed for " + p.string());
}

inline std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (!j.is_array()) {
        out.emplace_back(prefix, cell(j));
    }
}

}  // namespace detail

inline std::string report_text(const ScenarioRun& run) {
    const auto j = report_json(run);
    std::string out;
    auto line = [&](const std::string& k, const Json& v) {
        std::string shown = v.is_null() ? "n/a" : detail::cell(v);
        if (v.is_number_float()) shown = k.ends_with(" s") ? render_time(v.get<double>()) : render_rate(v.get<double>());
        out += k + ": " + shown + "\n";
    };
    out += "scenario " + run.config.name + " (" + std::to_string(run.config.n_devices) + " devices, " +
           std::to_string(run.config.n_fog_nodes) + " fog nodes, seed " + std::to_string(run.config.seed()) + ")\n";
    line("packets", j["traffic"]["total"]);
    line("forwarded", j["firewall"]["forwarded"]);
    line("detected at device layer", j["firewall"]["detected_dos"]);
    line("packet delivery ratio %", j["firewall"]["pdr_pct"]);
    line("detection rate %", j["detection"]["detection_rate_pct"]);
    line("false positive rate %", j["detection"]["false_positive_rate_pct"]);
    line("detection time s", j["detection"]["detection_wall_time_s"]);
    line("confirmed packets", j["cloud"]["confirmed_packets"]);
    line("mitigation", j["cloud"]["mitigation_status"]);
    line("mitigation rate %", j["cloud"]["mitigation_rate_pct"]);
    line("mitigation time s", j["cloud"]["mitigation_wall_time_s"]);
    line("delivered after mitigation", j["delivery"]["delivered_final"]);
    if (run.resources.warning) out += "warning: " + *run.resources.warning + "\n";
    std::vector<std::optional<ScenarioSummary>> one{summary_of(run)};
    out += "\n" + render_table_text(build_comparison_table(one));
    return out;
}

/// Writes the report in the chosen format plus plot-ready CSVs, the block
/// list and the rule action log. Returns the files written.
inline std::vector<std::filesystem::path> emit_report(const ScenarioRun& run, OutputFormat format,
                                                      const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto base = out_dir / run.config.name;
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& suffix, const std::string& content) {
        auto p = base;
        p += suffix;
        detail::write_file(p, content);
        written.push_back(p);
    };
    const auto j = report_json(run);
    switch (format) {
        case OutputFormat::JSON:
            put(".report.json", j.dump(2) + "\n");
            break;
        case OutputFormat::CSV: {
            std::vector<std::pair<std::string, std::string>> rows;
            detail::flatten(j, "", rows);
            std::string csv = "key,value\n";
            for (const auto& [k, v] : rows) csv += k + "," + detail::csv_field(v) + "\n";
            put(".report.csv", csv);
            break;
        }
        case OutputFormat::TEXT:
            put(".report.txt", report_text(run));
            break;
    }

    const auto& fw = run.firewall;
    put(".plot_packet_stats.csv", "category,count\ntotal," + std::to_string(fw.total) + "\nforwarded," +
                                      std::to_string(fw.forwarded) + "\ndetected_dos," + std::to_string(fw.detected_dos) +
                                      "\n");
    std::string pdr = "device,sent,delivered,pdr_pct\n";
    for (std::uint32_t i = 0; i < run.config.n_devices; ++i) {
        auto it = fw.per_device.find(DeviceId{i});
        const auto dd = it == fw.per_device.end() ? DeviceDelivery{} : it->second;
        const std::string pct =
            dd.sent ? render_rate(100.0 * static_cast<double>(dd.delivered) / static_cast<double>(dd.sent)) : "";
        pdr += std::to_string(i) + "," + std::to_string(dd.sent) + "," + std::to_string(dd.delivered) + "," + pct + "\n";
    }
    put(".plot_device_pdr.csv", pdr);
    std::ostringstream res;
    write_resource_csv(res, run.resources.samples);
    put(".plot_resources.csv", res.str());
    std::ostringstream blocks;
    write_block_list(blocks, run.cloud.mitigation);
    put(".blocklist.txt", blocks.str());
    std::ostringstream actions;
    write_action_log(actions, run.cloud.mitigation.action_log);
    put(".actions.ndjson", actions.str());
    return written;
}

inline std::vector<std::filesystem::path> emit_comparison(const Comparison& c, OutputFormat format,
                                                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::string& name, const std::string& content) {
        detail::write_file(out_dir / name, content);
        written.push_back(out_dir / name);
    };
    switch (format) {
        case OutputFormat::JSON: put("comparison.json", comparison_json(c).dump(2) + "\n"); break;
        case OutputFormat::CSV: put("comparison.csv", render_table_csv(c.table)); break;
        case OutputFormat::TEXT: {
            auto txt = render_table_text(c.table);
            auto ratio = [](const std::optional<Ratio>& r) { return r ? render_ratio(*r) : std::string("n/a"); };
            txt += "\ndetection scalability (" + c.smallest + " -> " + c.largest + "): " +
                   ratio(c.detection_scalability) + " %/device\n";
            txt += "mitigation scalability (" + c.smallest + " -> " + c.largest + "): " +
                   ratio(c.mitigation_scalability) + " %/device\n";
            put("comparison.txt", txt);
            break;
        }
    }
    // One file per figure: x = approach, y = value; rows without the value are skipped.
    auto series = [&](const std::string& name, auto get, bool time) {
        std::string csv = "approach,kind,value\n";
        for (const auto& r : c.table.rows) {
            const std::optional<double> v = get(r);
            if (!v) continue;
            csv += r.label + "," + (r.measured ? "measured" : "reference") + "," +
                   (time ? render_time(*v) : render_rate(*v)) + "\n";
        }
        put(name, csv);
    };
    series("plot_detection_time.csv", [](const ComparisonRow& r) { return r.detection_time_s; }, true);
    series("plot_detection_rate.csv", [](const ComparisonRow& r) { return r.detection_rate_pct; }, false);
    series("plot_mitigation_time.csv", [](const ComparisonRow& r) { return r.mitigation_time_s; }, true);
    series("plot_mitigation_rate.csv", [](const ComparisonRow& r) { return r.mitigation_rate_pct; }, false);
    return written;
}

}  // namespace fogddos
