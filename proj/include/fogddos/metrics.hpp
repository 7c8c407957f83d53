#pragma once

#include <array>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fogddos/core_model.hpp"
#include "fogddos/ratio.hpp"
#include "fogddos/text_util.hpp"

namespace fogddos {

struct DetectionMetrics {
    double detection_wall_time_s = 0.0;
    std::uint64_t true_positives = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t true_negatives = 0;
    std::uint64_t false_negatives = 0;
    /// Attack recall TP / (TP + FN); nullopt when no attack packet was forwarded.
    std::optional<Ratio> detection_rate;
    /// (TP + TN) / forwarded; nullopt on an empty stream.
    std::optional<Ratio> accuracy;
    /// FP / (FP + TN); nullopt when no benign packet was forwarded.
    std::optional<Ratio> false_positive_rate;

    std::uint64_t total() const { return true_positives + false_positives + true_negatives + false_negatives; }
};

/// Confusion counts of the fog-flagged set against the ground-truth labels of
/// the firewall-forwarded stream.
inline DetectionMetrics detection_metrics(const std::set<std::uint64_t>& flagged, std::span<const Packet> forwarded,
                                          double fog_wall_time_s) {
    DetectionMetrics m;
    m.detection_wall_time_s = fog_wall_time_s;
    std::uint64_t matched = 0;
    for (const auto& p : forwarded) {
        const bool hit = flagged.count(p.seq_no) > 0;
        matched += hit;
        if (p.label == Label::ATTACK) (hit ? m.true_positives : m.false_negatives)++;
        else (hit ? m.false_positives : m.true_negatives)++;
    }
    if (matched != flagged.size()) throw PreconditionError("flagged set is not a subset of the forwarded stream");
    if (m.true_positives + m.false_negatives > 0)
        m.detection_rate = Ratio::of(m.true_positives, m.true_positives + m.false_negatives);
    if (!forwarded.empty()) m.accuracy = Ratio::of(m.true_positives + m.true_negatives, forwarded.size());
    if (m.false_positives + m.true_negatives > 0)
        m.false_positive_rate = Ratio::of(m.false_positives, m.false_positives + m.true_negatives);
    return m;
}

/// Rates are percentages (e.g. 99.86); n_* are device counts.
struct ScalabilityInput {
    Ratio rate_a;
    Ratio rate_b;
    std::uint32_t n_a = 0;
    std::uint32_t n_b = 0;
};

/// (rate_b - rate_a) / (n_b - n_a), in percentage points per device.
inline Ratio scalability_ratio(const ScalabilityInput& in) {
    if (in.n_a == in.n_b) throw UndefinedRatioError("scalability ratio needs two different device counts");
    return (in.rate_b - in.rate_a) / Ratio(static_cast<std::int64_t>(in.n_b) - static_cast<std::int64_t>(in.n_a), 1);
}

inline Ratio to_percent(const Ratio& r) { return r * Ratio(100, 1); }

// ---------------------------------------------------------------------------
// Presentation precision: times 3 dp, rates 2 dp, ratios 4 dp.

inline std::string render_time(double s) { return text::fixed(s, 3); }
inline std::string render_rate(double pct) { return text::fixed(pct, 2); }
inline std::string render_ratio(const Ratio& r) { return text::fixed(r.to_double(), 4); }

// ---------------------------------------------------------------------------
// Comparison table

/// The subset of a scenario report the comparison needs.
struct ScenarioSummary {
    std::string name;
    std::uint32_t n_devices = 0;
    std::uint32_t n_fog_nodes = 0;
    double detection_time_s = 0.0;
    std::optional<Ratio> detection_rate;   // fraction
    double mitigation_time_s = 0.0;
    std::optional<Ratio> mitigation_rate;  // fraction
    std::optional<double> cpu_percent;
    std::optional<double> memory_percent;
};

struct ComparisonRow {
    std::string label;
    bool measured = true;
    std::optional<double> detection_time_s;
    std::optional<double> detection_rate_pct;
    std::optional<double> mitigation_time_s;
    std::optional<double> mitigation_rate_pct;
    std::optional<double> cpu_pct;
    std::optional<double> memory_pct;
};

/// Published figures for two earlier approaches; embedded data, never measured.
inline std::vector<ComparisonRow> reference_rows() {
    return {
        {"Reference approach A (detection)", false, 0.246, 99.56, std::nullopt, std::nullopt, std::nullopt, std::nullopt},
        {"Reference approach B (mitigation)", false, std::nullopt, std::nullopt, std::nullopt, 86.66, 55.60, 53.22},
    };
}

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

inline ComparisonRow row_from(const ScenarioSummary& s) {
    ComparisonRow r;
    r.label = s.name;
    r.detection_time_s = s.detection_time_s;
    if (s.detection_rate) r.detection_rate_pct = to_percent(*s.detection_rate).to_double();
    r.mitigation_time_s = s.mitigation_time_s;
    if (s.mitigation_rate) r.mitigation_rate_pct = to_percent(*s.mitigation_rate).to_double();
    r.cpu_pct = s.cpu_percent;
    r.memory_pct = s.memory_percent;
    return r;
}

/// Reference rows first, then one row per scenario slot; a missing scenario
/// becomes a row of gap markers.
inline ComparisonTable build_comparison_table(std::span<const std::optional<ScenarioSummary>> scenarios,
                                              std::vector<ComparisonRow> references = reference_rows()) {
    ComparisonTable t;
    t.rows = std::move(references);
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (scenarios[i]) {
            t.rows.push_back(row_from(*scenarios[i]));
        } else {
            ComparisonRow gap;
            gap.label = "scenario" + std::to_string(i + 1) + " (missing)";
            t.rows.push_back(gap);
        }
    }
    return t;
}

inline constexpr std::array<std::string_view, 8> kComparisonColumns = {
    "approach", "kind", "detection_time_s", "detection_rate_pct", "mitigation_time_s", "mitigation_rate_pct",
    "cpu_pct", "memory_pct"};

inline std::vector<std::string> render_cells(const ComparisonRow& r) {
    auto cell = [](const std::optional<double>& v, bool time) {
        if (!v) return std::string("---");
        return time ? render_time(*v) : render_rate(*v);
    };
    return {r.label,
            r.measured ? "measured" : "reference",
            cell(r.detection_time_s, true),
            cell(r.detection_rate_pct, false),
            cell(r.mitigation_time_s, true),
            cell(r.mitigation_rate_pct, false),
            cell(r.cpu_pct, false),
            cell(r.memory_pct, false)};
}

inline std::string render_table_csv(const ComparisonTable& t) {
    std::string out;
    for (std::size_t i = 0; i < kComparisonColumns.size(); ++i) {
        if (i) out += ',';
        out += kComparisonColumns[i];
    }
    out += '\n';
    for (const auto& r : t.rows) {
        const auto cells = render_cells(r);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    }
    return out;
}

inline std::string render_table_text(const ComparisonTable& t) {
    std::vector<std::vector<std::string>> grid;
    grid.emplace_back(kComparisonColumns.begin(), kComparisonColumns.end());
    for (const auto& r : t.rows) grid.push_back(render_cells(r));
    std::vector<std::size_t> width(kComparisonColumns.size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::string out;
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += "  ";
            if (i == 0) out += row[i] + std::string(width[i] - row[i].size(), ' ');
            else out += std::string(width[i] - row[i].size(), ' ') + row[i];
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

}  // namespace fogddos
