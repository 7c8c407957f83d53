#pragma once

// Snort-compatible rule subset used for cloud-level mitigation.
//
//   <action> [<proto>] <src> <sport> -> <dst> <dport> ( <option>; ... )
//
//   action   drop | alert
//   proto    tcp | udp | icmp | ip | any   (omitted means any)
//   src/dst  any | a.b.c.d | a.b.c.d/n
//   ports    any | 0-65535
//
// Options (each at most once, order irrelevant, `key: value` or `key value`):
//
//   flags: S            exact TCP flag set
//   msg: "text"
//   sid: 100001         required
//   count N             with `seconds S`: gate, see below
//   seconds: S
//   threshold: type both, track by_dst|by_src, count C, seconds S
//   detection_filter: track by_dst|by_src [, count C] [, seconds S]
//
// A prose fragment glued to the action with a period ("... activity.alert any
// any -> ...") is discarded and kept in `discarded_prefix`.
//
// Evaluation semantics. All windows are sliding: an event at time e is inside
// the window of length S at time t when t - e < S. Per rule, per packet:
//
//   1. The header (protocol, addresses, ports, flags) must match; every
//      matching packet is an event for that rule.
//   2. detection_filter: eligible when the number of events for the tracked
//      address inside the filter window, current one included, exceeds C.
//      Missing C / S fall back to the rule-level `count` / `seconds`
//      (window default 1 s). Rule-level count/seconds are then not a
//      separate gate.
//      Otherwise, `count N` gates: eligible when at least N events to the
//      same destination are inside the trailing `seconds` window (default 1).
//   3. threshold type both: eligible packets are counted per tracked address;
//      a log entry is emitted when the count inside the window reaches C and
//      the rule has not logged for that address during the last S seconds.
//      Without a threshold every eligible packet is logged.
//   4. DROP rules drop every eligible packet (log entries may be rate limited)
//      and end evaluation of that packet. ALERT rules never consume a packet.

#include <cctype>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fogddos/core_model.hpp"
#include "fogddos/text_util.hpp"

namespace fogddos {

enum class RuleAction : std::uint8_t { DROP, ALERT };
enum class Track : std::uint8_t { BY_SRC, BY_DST };
enum class ThresholdType : std::uint8_t { BOTH };

inline std::string_view to_string(RuleAction a) { return a == RuleAction::DROP ? "drop" : "alert"; }
inline std::string_view to_string(Track t) { return t == Track::BY_DST ? "by_dst" : "by_src"; }

struct Threshold {
    ThresholdType type = ThresholdType::BOTH;
    Track track = Track::BY_DST;
    std::uint32_t count = 1;
    std::uint32_t seconds = 1;

    friend bool operator==(const Threshold&, const Threshold&) = default;
};

struct DetectionFilter {
    Track track = Track::BY_DST;
    std::uint32_t count = 1;
    std::uint32_t window_s = 1;

    friend bool operator==(const DetectionFilter&, const DetectionFilter&) = default;
};

struct MitigationRule {
    RuleAction action = RuleAction::DROP;
    std::optional<Protocol> protocol;  // nullopt = any
    std::optional<Ipv4Prefix> src_ip;
    std::optional<std::uint16_t> src_port;
    std::optional<Ipv4Prefix> dst_ip;
    std::optional<std::uint16_t> dst_port;
    std::optional<FlagSet> flags;
    std::optional<std::uint32_t> count;
    std::optional<std::uint32_t> seconds;
    std::optional<Threshold> threshold;
    std::optional<DetectionFilter> detection_filter;
    std::string msg;
    std::uint32_t sid = 0;
    std::string discarded_prefix;

    friend bool operator==(const MitigationRule&, const MitigationRule&) = default;
};

inline bool header_matches(const MitigationRule& r, const Packet& p) {
    if (r.protocol && *r.protocol != p.protocol) return false;
    if (r.src_ip && !r.src_ip->contains(p.src_ip)) return false;
    if (r.src_port && *r.src_port != p.src_port) return false;
    if (r.dst_ip && !r.dst_ip->contains(p.dst_ip)) return false;
    if (r.dst_port && *r.dst_port != p.dst_port) return false;
    if (r.flags && *r.flags != p.tcp_flags) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class RuleLexer {
public:
    RuleLexer(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

    [[noreturn]] void fail(const std::string& what, std::size_t at) const { throw ParseError(what, line_no_, at); }

    std::size_t offset(std::string_view part) const { return static_cast<std::size_t>(part.data() - line_.data()); }

private:
    std::string_view line_;
    std::size_t line_no_;
};

inline bool is_action_word(std::string_view w) { return w == "drop" || w == "alert"; }

inline std::optional<std::uint32_t> positive_int(std::string_view s) {
    auto v = text::parse_number<std::uint32_t>(text::trim(s));
    if (!v || *v == 0) return std::nullopt;
    return v;
}

/// Splits `body` on ';' outside double quotes.
inline std::vector<std::string_view> split_options(std::string_view body) {
    std::vector<std::string_view> out;
    bool quoted = false;
    std::size_t b = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '\\' && quoted && i + 1 < body.size()) {
            ++i;
            continue;
        }
        if (c == '"') quoted = !quoted;
        if (c == ';' && !quoted) {
            out.push_back(body.substr(b, i - b));
            b = i + 1;
        }
    }
    out.push_back(body.substr(b));
    return out;
}

/// "type both, track by_dst, count 50, seconds 1" -> {{type,both}, ...}
inline std::vector<std::pair<std::string_view, std::string_view>> split_pairs(std::string_view v) {
    std::vector<std::pair<std::string_view, std::string_view>> out;
    for (auto item : text::split(v, ',')) {
        const auto t = text::trim(item);
        const auto parts = text::split_ws(t);
        if (parts.size() == 2) out.emplace_back(parts[0], parts[1]);
        else out.emplace_back(t, std::string_view{});
    }
    return out;
}

}  // namespace detail

/// Parses a single rule line. Byte offsets in errors are relative to `line`.
inline MitigationRule parse_rule(std::string_view line, std::size_t line_no = 0) {
    detail::RuleLexer lex(line, line_no);
    MitigationRule rule;

    const auto open = line.find('(');
    if (open == std::string_view::npos) lex.fail("missing option list '('", line.size());
    const auto close = line.rfind(')');
    if (close == std::string_view::npos || close < open) lex.fail("missing closing ')'", line.size());
    if (!text::trim(line.substr(close + 1)).empty()) lex.fail("trailing text after ')'", close + 1);

    auto header = text::split_ws(line.substr(0, open));
    if (header.empty()) lex.fail("missing action", 0);

    // Action, possibly glued to a prose fragment by a period.
    std::string_view action_word = header.front();
    if (!detail::is_action_word(action_word)) {
        bool recovered = false;
        for (std::size_t i = 0; i < header.size() && !recovered; ++i) {
            const auto dot = header[i].rfind('.');
            if (dot == std::string_view::npos) continue;
            const auto tail = header[i].substr(dot + 1);
            if (!detail::is_action_word(tail)) continue;
            rule.discarded_prefix = std::string(text::trim(line.substr(0, lex.offset(header[i]) + dot + 1)));
            action_word = tail;
            header.erase(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(i));
            header.front() = tail;
            recovered = true;
        }
        if (!recovered) lex.fail("unknown action '" + std::string(header.front()) + "'", lex.offset(header.front()));
    }
    rule.action = action_word == "drop" ? RuleAction::DROP : RuleAction::ALERT;
    header.erase(header.begin());

    // [proto] src sport -> dst dport
    if (header.size() == 6) {
        const auto proto = header.front();
        if (proto == "any" || proto == "ip") {
            rule.protocol.reset();
        } else if (auto p = parse_protocol(proto)) {
            rule.protocol = *p;
        } else {
            lex.fail("unknown protocol '" + std::string(proto) + "'", lex.offset(proto));
        }
        header.erase(header.begin());
    } else if (header.size() != 5) {
        lex.fail("rule header must be '[proto] src sport -> dst dport'", 0);
    }
    if (header[2] != "->") lex.fail("expected '->'", lex.offset(header[2]));
    auto addr = [&](std::string_view s) -> std::optional<Ipv4Prefix> {
        if (s == "any") return std::nullopt;
        auto p = Ipv4Prefix::parse(s);
        if (!p) lex.fail("bad address '" + std::string(s) + "'", lex.offset(s));
        return p;
    };
    auto port = [&](std::string_view s) -> std::optional<std::uint16_t> {
        if (s == "any") return std::nullopt;
        auto p = text::parse_number<std::uint16_t>(s);
        if (!p) lex.fail("bad port '" + std::string(s) + "'", lex.offset(s));
        return p;
    };
    rule.src_ip = addr(header[0]);
    rule.src_port = port(header[1]);
    rule.dst_ip = addr(header[3]);
    rule.dst_port = port(header[4]);

    // Options.
    std::set<std::string, std::less<>> seen;
    bool have_sid = false;
    std::optional<std::pair<std::optional<std::uint32_t>, std::optional<std::uint32_t>>> df_raw;
    Track df_track = Track::BY_DST;
    std::size_t df_at = 0;

    for (auto raw : detail::split_options(line.substr(open + 1, close - open - 1))) {
        const auto opt = text::trim(raw);
        if (opt.empty()) continue;
        const std::size_t at = lex.offset(opt);
        std::size_t k = 0;
        while (k < opt.size() && (std::isalnum(static_cast<unsigned char>(opt[k])) || opt[k] == '_')) ++k;
        const auto key = opt.substr(0, k);
        auto value = text::trim(opt.substr(k));
        if (!value.empty() && value.front() == ':') value = text::trim(value.substr(1));
        if (key.empty()) lex.fail("malformed option '" + std::string(opt) + "'", at);
        if (!seen.insert(std::string(key)).second) lex.fail("duplicate option '" + std::string(key) + "'", at);
        const std::size_t value_at = value.empty() ? at + opt.size() : lex.offset(value);

        if (key == "flags") {
            try {
                rule.flags = parse_flag_set(value);
            } catch (const ParseError& e) {
                lex.fail(e.message(), value_at + e.offset());
            }
        } else if (key == "msg") {
            if (value.size() < 2 || value.front() != '"' || value.back() != '"')
                lex.fail("msg must be a quoted string", value_at);
            std::string msg;
            for (std::size_t i = 1; i + 1 < value.size(); ++i) {
                if (value[i] == '\\' && i + 2 < value.size()) ++i;
                msg.push_back(value[i]);
            }
            rule.msg = std::move(msg);
        } else if (key == "sid") {
            if (value.empty()) lex.fail("empty sid", value_at);
            auto sid = detail::positive_int(value);
            if (!sid) lex.fail("sid must be a positive integer", value_at);
            rule.sid = *sid;
            have_sid = true;
        } else if (key == "count") {
            auto c = detail::positive_int(value);
            if (!c) lex.fail("count must be a positive integer", value_at);
            rule.count = *c;
        } else if (key == "seconds") {
            auto s = detail::positive_int(value);
            if (!s) lex.fail("seconds must be a positive integer", value_at);
            rule.seconds = *s;
        } else if (key == "threshold") {
            Threshold th;
            bool type = false, track = false, count = false, secs = false;
            for (auto [k2, v2] : detail::split_pairs(value)) {
                if (k2 == "type" && v2 == "both" && !type) {
                    type = true;
                } else if (k2 == "track" && (v2 == "by_dst" || v2 == "by_src") && !track) {
                    th.track = v2 == "by_dst" ? Track::BY_DST : Track::BY_SRC;
                    track = true;
                } else if (k2 == "count" && !count) {
                    auto c = detail::positive_int(v2);
                    if (!c) lex.fail("malformed threshold count", value_at);
                    th.count = *c;
                    count = true;
                } else if (k2 == "seconds" && !secs) {
                    auto s = detail::positive_int(v2);
                    if (!s) lex.fail("malformed threshold seconds", value_at);
                    th.seconds = *s;
                    secs = true;
                } else {
                    lex.fail("malformed threshold clause '" + std::string(k2) + "'", value_at);
                }
            }
            if (!(type && track && count && secs))
                lex.fail("threshold requires type both, track, count and seconds", value_at);
            rule.threshold = th;
        } else if (key == "detection_filter") {
            std::optional<std::uint32_t> c, s;
            bool track = false;
            for (auto [k2, v2] : detail::split_pairs(value)) {
                if (k2 == "track" && (v2 == "by_dst" || v2 == "by_src") && !track) {
                    df_track = v2 == "by_dst" ? Track::BY_DST : Track::BY_SRC;
                    track = true;
                } else if (k2 == "count" && !c) {
                    c = detail::positive_int(v2);
                    if (!c) lex.fail("malformed detection_filter count", value_at);
                } else if (k2 == "seconds" && !s) {
                    s = detail::positive_int(v2);
                    if (!s) lex.fail("malformed detection_filter seconds", value_at);
                } else {
                    lex.fail("malformed detection_filter clause '" + std::string(k2) + "'", value_at);
                }
            }
            if (!track) lex.fail("detection_filter requires track", value_at);
            df_raw.emplace(c, s);
            df_at = value_at;
        } else {
            lex.fail("unknown option '" + std::string(key) + "'", at);
        }
    }
    if (!have_sid) lex.fail("missing sid", open);

    if (df_raw) {
        DetectionFilter df;
        df.track = df_track;
        const auto c = df_raw->first ? df_raw->first : rule.count;
        if (!c) lex.fail("detection_filter needs a count (inline or rule-level)", df_at);
        df.count = *c;
        df.window_s = df_raw->second ? *df_raw->second : rule.seconds.value_or(1);
        rule.detection_filter = df;
    }
    return rule;
}

/// Rules in file order. Blank lines and `#` comments are skipped. Every bad
/// line is reported in one aggregate ParseError; duplicate sids are errors.
inline std::vector<MitigationRule> parse_ruleset(std::istream& is) {
    std::vector<MitigationRule> out;
    std::vector<std::string> errors;
    std::map<std::uint32_t, std::size_t> sid_line;
    std::string line;
    std::size_t line_no = 0;
    std::size_t first_bad = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        try {
            auto rule = parse_rule(line, line_no);
            auto [it, fresh] = sid_line.emplace(rule.sid, line_no);
            if (!fresh) {
                throw ParseError("duplicate sid " + std::to_string(rule.sid) + " (first on line " +
                                     std::to_string(it->second) + ")",
                                 line_no, 0);
            }
            out.push_back(std::move(rule));
        } catch (const ParseError& e) {
            if (first_bad == 0) first_bad = line_no;
            errors.emplace_back(e.what());
        }
    }
    if (!errors.empty()) {
        std::string all = std::to_string(errors.size()) + " bad rule line(s)";
        for (const auto& e : errors) all += "\n  " + e;
        throw ParseError(all, first_bad, 0);
    }
    return out;
}

inline std::vector<MitigationRule> parse_ruleset(std::string_view text_in) {
    std::istringstream is{std::string(text_in)};
    return parse_ruleset(is);
}

/// The four mitigation rules shipped by default (SYN flood drop, response
/// time alert, excessive SYN drop, half-open drop).
inline constexpr std::string_view kDefaultMitigationRules =
    "drop tcp any any -> any any (flags: S; msg:\"TCP SYN flood detected!\"; sid:100001;)\n"
    "alert any any -> any any (threshold: type both, track by_dst, count 50, seconds 1; "
    "msg:\"Abnormal response time detected!\"; sid:100002;)\n"
    "drop tcp any any -> any any (flags: S; count 10; seconds: 1; threshold: type both, track by_dst, count 50, "
    "seconds 1; msg:\"TCP SYN flood detected!\"; sid:100008;)\n"
    "drop tcp any any -> any any (flags: SA; count 5; detection_filter: track by_dst; "
    "msg:\"Drop TCP packets with a high number of half-open connections\"; sid:100003;)\n";

inline std::vector<MitigationRule> default_mitigation_ruleset() { return parse_ruleset(kDefaultMitigationRules); }

// ---------------------------------------------------------------------------
// Evaluation

struct RuleActionRecord {
    std::uint64_t seq_no = 0;
    std::uint32_t sid = 0;
    RuleAction action = RuleAction::DROP;
    std::string msg;
    double timestamp = 0.0;

    friend bool operator==(const RuleActionRecord&, const RuleActionRecord&) = default;
};

/// Per-rule sliding-window state. Empty at trace start; carry it across calls
/// to evaluate a trace in pieces.
class RuleEngineState {
public:
    struct PerRule {
        std::map<std::uint32_t, std::deque<double>> events;     // gate / detection_filter
        std::map<std::uint32_t, std::deque<double>> eligible;   // threshold
        std::map<std::uint32_t, double> last_fire;
    };

    std::vector<PerRule> rules;
    std::optional<double> last_timestamp;

    friend bool operator==(const RuleEngineState&, const RuleEngineState&) = default;
};

class RuleEngine {
public:
    explicit RuleEngine(std::vector<MitigationRule> rules, RuleEngineState state = {})
        : rules_(std::move(rules)), state_(std::move(state)) {
        state_.rules.resize(rules_.size());
    }

    const RuleEngineState& state() const { return state_; }
    const std::vector<MitigationRule>& rules() const { return rules_; }

    /// Evaluates one packet, appending any log entries to `log`.
    Verdict process(const Packet& p, std::vector<RuleActionRecord>& log) {
        if (state_.last_timestamp && p.timestamp < *state_.last_timestamp)
            throw PreconditionError("packet seq " + std::to_string(p.seq_no) + " arrives out of timestamp order");
        state_.last_timestamp = p.timestamp;

        bool alerted = false;
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            const auto& r = rules_[i];
            if (!header_matches(r, p)) continue;
            auto& st = state_.rules[i];
            const double t = p.timestamp;

            bool eligible = true;
            if (r.detection_filter) {
                const auto& df = *r.detection_filter;
                auto& h = st.events[key(df.track, p)];
                push(h, t, df.window_s);
                eligible = h.size() > df.count;
            } else if (r.count) {
                auto& h = st.events[p.dst_ip.bits()];
                push(h, t, r.seconds.value_or(1));
                eligible = h.size() >= *r.count;
            }
            if (!eligible) continue;

            bool log_it = true;
            if (r.threshold) {
                const auto& th = *r.threshold;
                const auto k = key(th.track, p);
                auto& h = st.eligible[k];
                push(h, t, th.seconds);
                auto last = st.last_fire.find(k);
                const bool suppressed = last != st.last_fire.end() && t - last->second < th.seconds;
                log_it = !suppressed && h.size() >= th.count;
                if (log_it) st.last_fire[k] = t;
            }
            if (log_it) log.push_back({p.seq_no, r.sid, r.action, r.msg, t});
            if (r.action == RuleAction::DROP) return Verdict::DROP;
            alerted = alerted || log_it;
        }
        return alerted ? Verdict::ALERT : Verdict::FORWARD;
    }

private:
    static std::uint32_t key(Track track, const Packet& p) {
        return track == Track::BY_DST ? p.dst_ip.bits() : p.src_ip.bits();
    }

    static void push(std::deque<double>& h, double t, std::uint32_t window) {
        h.push_back(t);
        while (!h.empty() && t - h.front() >= window) h.pop_front();
    }

    std::vector<MitigationRule> rules_;
    RuleEngineState state_;
};

struct EvaluationResult {
    std::vector<Verdict> verdicts;  // parallel to the input packets
    std::vector<RuleActionRecord> log;
};

/// Evaluates a timestamp-ordered packet sequence with fresh state.
inline EvaluationResult evaluate_trace(const std::vector<MitigationRule>& ruleset, const Trace& packets) {
    RuleEngine engine(ruleset);
    EvaluationResult out;
    out.verdicts.reserve(packets.size());
    for (const auto& p : packets) out.verdicts.push_back(engine.process(p, out.log));
    return out;
}

/// One JSON object per line: {seq_no, sid, action, msg, timestamp}.
inline void write_action_log(std::ostream& os, const std::vector<RuleActionRecord>& log) {
    for (const auto& a : log) {
        nlohmann::ordered_json j;
        j["seq_no"] = a.seq_no;
        j["sid"] = a.sid;
        j["action"] = to_string(a.action);
        j["msg"] = a.msg;
        j["timestamp"] = a.timestamp;
        os << j.dump() << '\n';
    }
}

}  // namespace fogddos
