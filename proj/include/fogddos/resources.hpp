#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "fogddos/error.hpp"
#include "fogddos/text_util.hpp"

namespace fogddos {

struct ResourceSample {
    double wall_timestamp_s = 0.0;
    double cpu_percent = 0.0;
    double memory_percent = 0.0;

    friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

class ResourceProbe {
public:
    virtual ~ResourceProbe() = default;
    /// Next sample, or nullopt when the probe is exhausted. Throws on failure.
    virtual std::optional<ResourceSample> sample() = 0;
};

/// Reads this process's CPU time and resident set from /proc.
class HostProbe final : public ResourceProbe {
public:
    HostProbe() : start_(std::chrono::steady_clock::now()) {
        last_wall_ = 0.0;
        last_cpu_ = process_cpu_seconds();
        mem_total_kb_ = mem_total_kb();
    }

    std::optional<ResourceSample> sample() override {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const double cpu = process_cpu_seconds();
        const double dt = wall - last_wall_;
        double cpu_pct = dt > 0 ? 100.0 * (cpu - last_cpu_) / dt : 0.0;
        last_wall_ = wall;
        last_cpu_ = cpu;
        const double mem_pct = 100.0 * static_cast<double>(rss_kb()) / static_cast<double>(mem_total_kb_);
        return ResourceSample{wall, clamp(cpu_pct), clamp(mem_pct)};
    }

private:
    static double clamp(double v) { return v < 0 ? 0 : (v > 100 ? 100 : v); }

    static double process_cpu_seconds() {
        std::ifstream in("/proc/self/stat");
        std::string content;
        if (!std::getline(in, content)) throw Error("cannot read /proc/self/stat");
        const auto close = content.rfind(')');
        if (close == std::string::npos) throw Error("malformed /proc/self/stat");
        std::istringstream rest(content.substr(close + 2));
        std::string field;
        unsigned long utime = 0, stime = 0;
        // Fields after the command name start at field 3 (state); utime is 14, stime 15.
        for (int i = 3; i <= 15 && rest >> field; ++i) {
            if (i == 14) utime = std::stoul(field);
            if (i == 15) stime = std::stoul(field);
        }
        return static_cast<double>(utime + stime) / static_cast<double>(sysconf(_SC_CLK_TCK));
    }

    static long rss_kb() {
        std::ifstream in("/proc/self/statm");
        long size = 0, resident = 0;
        if (!(in >> size >> resident)) throw Error("cannot read /proc/self/statm");
        return resident * (sysconf(_SC_PAGESIZE) / 1024);
    }

    static long mem_total_kb() {
        std::ifstream in("/proc/meminfo");
        std::string key;
        long value = 0;
        std::string unit;
        while (in >> key >> value >> unit)
            if (key == "MemTotal:") return value;
        throw Error("MemTotal not found in /proc/meminfo");
    }

    std::chrono::steady_clock::time_point start_;
    double last_wall_ = 0.0;
    double last_cpu_ = 0.0;
    long mem_total_kb_ = 1;
};

/// CSV with header `t,cpu,mem`.
inline std::vector<ResourceSample> read_resource_csv(std::istream& is) {
    std::vector<ResourceSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (line_no == 1 && t.substr(0, 1) == "t") continue;
        const auto f = text::split(t, ',');
        if (f.size() != 3) throw ParseError("expected t,cpu,mem", line_no, 0);
        auto ts = text::parse_number<double>(text::trim(f[0]));
        auto cpu = text::parse_number<double>(text::trim(f[1]));
        auto mem = text::parse_number<double>(text::trim(f[2]));
        if (!ts || !cpu || !mem) throw ParseError("malformed resource sample", line_no, 0);
        if (*cpu < 0 || *cpu > 100 || *mem < 0 || *mem > 100)
            throw ParseError("resource percentage outside [0,100]", line_no, 0);
        if (!out.empty() && *ts <= out.back().wall_timestamp_s)
            throw ParseError("timestamps must increase", line_no, 0);
        out.push_back({*ts, *cpu, *mem});
    }
    return out;
}

inline void write_resource_csv(std::ostream& os, const std::vector<ResourceSample>& samples) {
    os << "t,cpu,mem\n";
    for (const auto& s : samples)
        os << text::fixed(s.wall_timestamp_s, 3) << ',' << text::fixed(s.cpu_percent, 2) << ','
           << text::fixed(s.memory_percent, 2) << '\n';
}

/// Plays back a recorded sample file.
class ReplayProbe final : public ResourceProbe {
public:
    explicit ReplayProbe(std::vector<ResourceSample> samples) : samples_(std::move(samples)) {}

    static ReplayProbe from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open resource file " + path);
        return ReplayProbe(read_resource_csv(in));
    }

    std::optional<ResourceSample> sample() override {
        if (next_ >= samples_.size()) return std::nullopt;
        return samples_[next_++];
    }

private:
    std::vector<ResourceSample> samples_;
    std::size_t next_ = 0;
};

struct SamplingResult {
    std::vector<ResourceSample> samples;
    std::optional<std::string> warning;
};

/// Drains a finite probe synchronously.
inline SamplingResult sample_resources(ResourceProbe& probe) {
    SamplingResult out;
    try {
        while (auto s = probe.sample()) out.samples.push_back(*s);
    } catch (const std::exception& e) {
        out.warning = std::string("resource sampling disabled: ") + e.what();
    }
    return out;
}

/// Samples a probe periodically on a background thread between construction
/// and finish(). The buffer is only read after the thread has joined.
class ResourceSampler {
public:
    ResourceSampler(std::unique_ptr<ResourceProbe> probe, std::chrono::milliseconds interval)
        : probe_(std::move(probe)), interval_(interval) {
        take();
        thread_ = std::thread([this] { loop(); });
    }

    ResourceSampler(const ResourceSampler&) = delete;
    ResourceSampler& operator=(const ResourceSampler&) = delete;

    ~ResourceSampler() { stop(); }

    SamplingResult finish() {
        stop();
        take();
        return std::move(result_);
    }

private:
    void loop() {
        std::unique_lock lock(mutex_);
        while (!stopping_) {
            if (cv_.wait_for(lock, interval_, [this] { return stopping_; })) break;
            lock.unlock();
            take();
            lock.lock();
        }
    }

    void stop() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
        if (thread_.joinable()) thread_.join();
    }

    void take() {
        if (result_.warning) return;
        try {
            auto s = probe_->sample();
            if (!s) return;
            if (!result_.samples.empty() && s->wall_timestamp_s <= result_.samples.back().wall_timestamp_s) return;
            result_.samples.push_back(*s);
        } catch (const std::exception& e) {
            result_.warning = std::string("resource sampling disabled: ") + e.what();
        }
    }

    std::unique_ptr<ResourceProbe> probe_;
    std::chrono::milliseconds interval_;
    SamplingResult result_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopping_ = false;
    std::thread thread_;
};

}  // namespace fogddos
