#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fogddos/fogddos.hpp"

namespace fs = std::filesystem;
using namespace fogddos;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string format = "json";
    bool quiet = false;
    bool serial = false;
};

ScenarioConfig resolve_config(const std::string& arg, const Globals& g) {
    ScenarioConfig c = fs::exists(arg) ? load_config(arg) : is_preset(arg) ? preset_config(arg)
                                                                          : throw ConfigError("no config file or preset named '" + arg + "'");
    if (g.seed) c.traffic.seed = *g.seed;
    return c;
}

OutputFormat resolve_format(const Globals& g) {
    auto f = parse_output_format(g.format);
    if (!f) throw ConfigError("unknown format '" + g.format + "' (json, csv, text)");
    return *f;
}

int cmd_run(const std::vector<std::string>& configs, const Globals& g, bool no_resources) {
    const auto fmt = resolve_format(g);
    std::vector<ScenarioConfig> cs;
    for (const auto& a : configs) cs.push_back(resolve_config(a, g));
    RunOptions opts;
    opts.serial = g.serial;
    opts.sample_resources = !no_resources;
    for (const auto& c : cs) {
        const auto run = run_scenario(c, opts);
        const auto files = emit_report(run, fmt, g.out);
        if (!g.quiet) {
            std::cout << report_text(run);
            for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
        }
        if (run.resources.warning) std::cerr << "warning: " << *run.resources.warning << '\n';
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& reports, const Globals& g) {
    const auto fmt = resolve_format(g);
    std::vector<ScenarioSummary> ss;
    for (const auto& r : reports) ss.push_back(load_report_summary(r));
    const auto cmp = compare_runs(ss);
    const auto files = emit_comparison(cmp, fmt, g.out);
    if (!g.quiet) {
        std::cout << render_table_text(cmp.table);
        auto ratio = [](const std::optional<Ratio>& r) { return r ? render_ratio(*r) : std::string("n/a"); };
        std::cout << "detection scalability " << ratio(cmp.detection_scalability) << " %/device\n"
                  << "mitigation scalability " << ratio(cmp.mitigation_scalability) << " %/device\n";
        for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    }
    return 0;
}

int cmd_gen_trace(const std::string& config, const std::string& output, const Globals& g) {
    const auto c = resolve_config(config, g);
    const auto traffic = generate_trace(c.traffic, c.flood);
    fs::path out = output.empty() ? fs::path(g.out) / (c.name + ".trace") : fs::path(output);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream t(out);
    write_trace(t, traffic.packets);
    auto side = out;
    side += ".responses";
    std::ofstream r(side);
    write_responses(r, traffic.responses);
    if (!t || !r) throw Error("cannot write " + out.string());
    if (!g.quiet) {
        const auto s = trace_label_stats(traffic.packets);
        std::cout << "wrote " << out.string() << " (" << traffic.packets.size() << " packets, " << s.attack_count
                  << " attack) and " << side.string() << '\n';
    }
    return 0;
}

int cmd_lint(const std::vector<std::string>& files, const std::string& kind, const Globals& g) {
    int bad = 0;
    for (const auto& f : files) {
        try {
            std::size_t n = 0;
            if (kind == "firewall") n = load_firewall_rules(f).size();
            else n = load_mitigation_rules(f).size();
            if (!g.quiet) std::cout << f << ": ok, " << n << " rules\n";
        } catch (const ParseError& e) {
            std::cerr << e.what() << '\n';
            ++bad;
        }
    }
    return bad ? 1 : 0;
}

int cmd_replay(const std::string& file, const Globals& g) {
    auto probe = ReplayProbe::from_file(file);
    const auto res = sample_resources(probe);
    if (res.warning) std::cerr << "warning: " << *res.warning << '\n';
    double cpu = 0, mem = 0, cpu_max = 0, mem_max = 0;
    for (const auto& s : res.samples) {
        cpu += s.cpu_percent;
        mem += s.memory_percent;
        cpu_max = std::max(cpu_max, s.cpu_percent);
        mem_max = std::max(mem_max, s.memory_percent);
    }
    const double n = res.samples.empty() ? 1.0 : static_cast<double>(res.samples.size());
    if (!g.quiet) {
        std::cout << "samples " << res.samples.size() << "\ncpu mean " << render_rate(cpu / n) << " max "
                  << render_rate(cpu_max) << "\nmemory mean " << render_rate(mem / n) << " max " << render_rate(mem_max)
                  << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-layer DDoS detection and mitigation simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Override the scenario seed");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "json, csv or text")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Only print warnings and errors");
    app.add_flag("--serial", g.serial, "Analyze fog nodes one at a time");

    std::vector<std::string> run_configs;
    bool no_resources = false;
    auto* run = app.add_subcommand("run", "Run scenarios (config files or preset names)");
    run->add_option("configs", run_configs, "Config file or preset: scenario1, scenario2, scenario3, scenario1-device-layer")
        ->required();
    run->add_flag("--no-resources", no_resources, "Skip CPU/memory sampling");

    std::vector<std::string> reports;
    auto* compare = app.add_subcommand("compare", "Compare recorded JSON reports");
    compare->add_option("reports", reports, "Report files")->required();

    std::string gen_config, gen_output;
    auto* gen = app.add_subcommand("gen-trace", "Write a scenario's synthetic trace");
    gen->add_option("config", gen_config, "Config file or preset")->required();
    gen->add_option("-o,--output", gen_output, "Trace file (default <out>/<name>.trace)");

    std::vector<std::string> rule_files;
    std::string kind = "mitigation";
    auto* lint = app.add_subcommand("lint-rules", "Check rule files");
    lint->add_option("files", rule_files, "Rule files")->required();
    lint->add_option("--kind", kind, "mitigation or firewall")
        ->check(CLI::IsMember({"mitigation", "firewall"}))
        ->capture_default_str();

    std::string replay_file;
    auto* replay = app.add_subcommand("replay-resources", "Summarize a recorded resource CSV");
    replay->add_option("file", replay_file, "CSV with t,cpu,mem")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(run_configs, g, no_resources);
        if (*compare) return cmd_compare(reports, g);
        if (*gen) return cmd_gen_trace(gen_config, gen_output, g);
        if (*lint) return cmd_lint(rule_files, kind, g);
        if (*replay) return cmd_replay(replay_file, g);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
