#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace fogddos;
namespace fs = std::filesystem;

namespace {

RunOptions quiet() {
    RunOptions o;
    o.sample_resources = false;
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("fogddos_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, PresetTopologies) {
    const auto s1 = preset_config("scenario1");
    EXPECT_EQ(s1.n_devices, 3u);
    EXPECT_EQ(s1.n_fog_nodes, 2u);
    EXPECT_EQ(s1.seed(), 101u);
    const auto s2 = preset_config("scenario2");
    EXPECT_EQ(s2.n_devices, 5u);
    EXPECT_EQ(s2.n_fog_nodes, 3u);
    const auto s3 = preset_config("scenario3");
    EXPECT_EQ(s3.n_devices, 10u);
    EXPECT_EQ(s3.n_fog_nodes, 5u);
    EXPECT_EQ(s3.traffic.attacker_devices, (std::vector<DeviceId>{DeviceId{0}, DeviceId{3}, DeviceId{7}}));
    EXPECT_THROW(preset_config("scenario4"), ConfigError);
}

TEST(Config, SerializeRoundTrip) {
    for (const auto& [name, text] : preset_texts()) {
        const auto c = preset_config(name);
        EXPECT_EQ(parse_config(serialize_config(c)), c) << name;
    }
}

TEST(Config, ShippedFilesEqualPresets) {
    for (const auto& [file, preset] : std::vector<std::pair<std::string, std::string>>{
             {"scenario1.conf", "scenario1"},
             {"scenario2.conf", "scenario2"},
             {"scenario3.conf", "scenario3"},
             {"scenario1_device_layer.conf", "scenario1-device-layer"}}) {
        auto c = load_config(fs::path(FOGDDOS_SOURCE_DIR) / "configs" / file);
        EXPECT_EQ(load_firewall_rules(c.firewall_ruleset), default_firewall_ruleset());
        EXPECT_EQ(load_mitigation_rules(c.mitigation_ruleset), default_mitigation_ruleset());
        c.firewall_ruleset = c.mitigation_ruleset = "default";
        EXPECT_EQ(c, preset_config(preset)) << file;
    }
}

TEST(Config, ErrorsNameTheLine) {
    auto msg = [](const std::string& text) {
        try {
            parse_config(text, "x.conf");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string base = "name = t\ntopology.devices = 3\ntopology.fog_nodes = 2\ntraffic.total_packets = 100\n";
    EXPECT_NE(msg(base + "bogus = 1\n").find("x.conf:5: unknown key 'bogus'"), std::string::npos);
    EXPECT_NE(msg(base + "name = u\n").find("x.conf:5: duplicate key"), std::string::npos);
    EXPECT_NE(msg(base + "topology.cloud_servers = 2\n").find("cloud_servers"), std::string::npos);
    EXPECT_NE(msg("name = t\n").find("missing required key"), std::string::npos);
    EXPECT_NE(msg(base + "seed = -4\n").find("x.conf:5"), std::string::npos);
    EXPECT_NE(msg(base + "no equals sign\n").find("x.conf:5"), std::string::npos);
    EXPECT_EQ(msg(base), "no error");
}

TEST(Config, ZeroFogNodesFailsInConfigStage) {
    auto c = preset_config("scenario1");
    c.n_fog_nodes = 0;
    try {
        run_scenario(c, quiet());
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "config");
    }
}

TEST(Runner, MissingRuleFileFailsInFirewallStage) {
    auto c = preset_config("scenario1");
    c.firewall_ruleset = "/nonexistent/fw.rules";
    try {
        run_scenario(c, quiet());
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "firewall");
    }
}

TEST(Runner, PresetsConserveAndDetect) {
    for (const auto* name : {"scenario1", "scenario2", "scenario3"}) {
        const auto run = run_scenario(preset_config(name), quiet());
        EXPECT_TRUE(conservation_violations(run).empty()) << name;
        EXPECT_EQ(run.firewall.forwarded, 9882u) << name;
        ASSERT_TRUE(run.detection.detection_rate) << name;
        EXPECT_GE(to_percent(*run.detection.detection_rate).to_double(), 99.5) << name;
        ASSERT_TRUE(run.cloud.mitigation.mitigation_rate) << name;
        EXPECT_GE(to_percent(*run.cloud.mitigation.mitigation_rate).to_double(), 95.0) << name;
        EXPECT_EQ(run.fog_reports.size(), run.config.n_fog_nodes);
    }
}

TEST(Runner, NoAttackMeansNothingToMitigate) {
    auto c = preset_config("scenario1");
    c.traffic.attack_ratio = 0;
    const auto run = run_scenario(c, quiet());
    EXPECT_EQ(packet_delivery_ratio(run.firewall), Ratio(1, 1));
    EXPECT_FALSE(run.detection.detection_rate);
    const auto j = report_json(run);
    EXPECT_EQ(j["cloud"]["mitigation_status"], "NOT_APPLICABLE");
    EXPECT_TRUE(j["cloud"]["mitigation_rate_pct"].is_null());
    EXPECT_TRUE(report_violations(j).empty());
}

TEST(Runner, SerialAndParallelAgree) {
    const auto cfg = preset_config("scenario2");
    auto serial = quiet();
    serial.serial = true;
    auto a = report_json(run_scenario(cfg, serial));
    auto b = report_json(run_scenario(cfg, quiet()));
    EXPECT_EQ(a["execution_mode"], "serial");
    EXPECT_EQ(b["execution_mode"], "parallel");
    mask_nondeterministic(a);
    mask_nondeterministic(b);
    EXPECT_EQ(a, b);
}

TEST(Report, RevalidatesAndDetectsTampering) {
    auto j = report_json(run_scenario(preset_config("scenario1"), quiet()));
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_TRUE(report_violations(j).empty());
    EXPECT_EQ(j["firewall"]["pdr_pct"], 98.82);
    j["firewall"]["dropped"] = j["firewall"]["dropped"].get<std::uint64_t>() + 1;
    EXPECT_FALSE(report_violations(j).empty());
    j.erase("cloud");
    EXPECT_FALSE(report_violations(j).empty());
}

TEST(Report, EmitIsByteIdenticalAcrossRuns) {
    const auto cfg = preset_config("scenario1");
    const auto d1 = scratch("emit1"), d2 = scratch("emit2");
    const auto f1 = emit_report(run_scenario(cfg, quiet()), OutputFormat::JSON, d1);
    const auto f2 = emit_report(run_scenario(cfg, quiet()), OutputFormat::JSON, d2);
    ASSERT_EQ(f1.size(), f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
        EXPECT_EQ(f1[i].filename(), f2[i].filename());
        auto a = slurp(f1[i]), b = slurp(f2[i]);
        if (f1[i].filename().string().ends_with(".report.json")) {
            auto ja = Json::parse(a), jb = Json::parse(b);
            mask_nondeterministic(ja);
            mask_nondeterministic(jb);
            EXPECT_EQ(ja.dump(), jb.dump());
        } else {
            EXPECT_EQ(a, b) << f1[i];
        }
    }
    const auto pdr = slurp(d1 / "scenario1.plot_device_pdr.csv");
    EXPECT_EQ(std::count(pdr.begin(), pdr.end(), '\n'), 1 + 3);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST(Report, CsvAndTextFormats) {
    const auto run = run_scenario(preset_config("scenario1"), quiet());
    const auto dir = scratch("formats");
    emit_report(run, OutputFormat::CSV, dir);
    emit_report(run, OutputFormat::TEXT, dir);
    const auto csv = slurp(dir / "scenario1.report.csv");
    EXPECT_EQ(csv.rfind("key,value\n", 0), 0u);
    EXPECT_NE(csv.find("firewall.forwarded,9882\n"), std::string::npos);
    const auto txt = slurp(dir / "scenario1.report.txt");
    EXPECT_NE(txt.find("packet delivery ratio %: 98.82"), std::string::npos);
    fs::remove_all(dir);
}

TEST(Compare, ThreeReportsGiveTableAndRatios) {
    const auto dir = scratch("compare");
    std::vector<ScenarioSummary> sums;
    for (const auto* name : {"scenario3", "scenario1", "scenario2"}) {
        const auto files = emit_report(run_scenario(preset_config(name), quiet()), OutputFormat::JSON, dir);
        sums.push_back(load_report_summary(files.front()));
    }
    const auto c = compare_runs(sums);
    EXPECT_EQ(c.smallest, "scenario1");
    EXPECT_EQ(c.largest, "scenario3");
    ASSERT_EQ(c.table.rows.size(), 5u);
    EXPECT_EQ(c.table.rows[2].label, "scenario1");
    EXPECT_EQ(c.table.rows[4].label, "scenario3");
    ASSERT_TRUE(c.detection_scalability);
    const auto& lo = c.scenarios.front();
    const auto& hi = c.scenarios.back();
    EXPECT_EQ(*c.detection_scalability,
              (to_percent(*hi.detection_rate) - to_percent(*lo.detection_rate)) / Ratio(10 - 3, 1));

    const auto files = emit_comparison(c, OutputFormat::JSON, dir);
    EXPECT_EQ(files.size(), 5u);
    const auto j = Json::parse(slurp(dir / "comparison.json"));
    EXPECT_EQ(j["table"].size(), 5u);
    fs::remove_all(dir);
}

TEST(Compare, IdenticalRatesGiveZeroAndEqualCountsAreUndefined) {
    ScenarioSummary a;
    a.name = "a";
    a.n_devices = 3;
    a.detection_rate = Ratio(1, 1);
    a.mitigation_rate = Ratio(1, 1);
    auto b = a;
    b.name = "b";
    b.n_devices = 10;
    const auto c = compare_runs({a, b});
    EXPECT_EQ(c.detection_scalability, Ratio(0, 1));
    EXPECT_EQ(c.mitigation_scalability, Ratio(0, 1));
    b.n_devices = 3;
    EXPECT_THROW(compare_runs({a, b}), UndefinedRatioError);
    EXPECT_THROW(compare_runs({a}), ConfigError);
}

TEST(Compare, RejectsUnknownSchema) {
    Json j = {{"schema_version", 99}};
    EXPECT_THROW(summary_from_json(j), ConfigError);
    EXPECT_THROW(summary_from_json(Json::object()), ConfigError);
}
