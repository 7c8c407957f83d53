#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "fogddos/error.hpp"

namespace fogddos {

/// Exact rational number, always normalized (den > 0, gcd(num, den) = 1).
/// Metric rates are kept in this form and only rounded when rendered.
class Ratio {
public:
    constexpr Ratio() = default;
    Ratio(std::int64_t num, std::int64_t den) {
        if (den == 0) throw UndefinedRatioError("ratio with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        num_ = num / (g == 0 ? 1 : g);
        den_ = den / (g == 0 ? 1 : g);
    }

    static Ratio of(std::uint64_t part, std::uint64_t whole) {
        return Ratio(static_cast<std::int64_t>(part), static_cast<std::int64_t>(whole));
    }

    /// Parses a plain decimal such as "99.86" or "-0.5" exactly.
    static std::optional<Ratio> parse_decimal(std::string_view s) {
        if (s.empty()) return std::nullopt;
        bool neg = false;
        std::size_t i = 0;
        if (s[0] == '-' || s[0] == '+') {
            neg = s[0] == '-';
            i = 1;
        }
        std::int64_t num = 0;
        std::int64_t den = 1;
        bool seen_dot = false;
        bool any_digit = false;
        for (; i < s.size(); ++i) {
            const char c = s[i];
            if (c == '.') {
                if (seen_dot) return std::nullopt;
                seen_dot = true;
                continue;
            }
            if (c < '0' || c > '9') return std::nullopt;
            if (num > 100'000'000'000'000LL) return std::nullopt;
            num = num * 10 + (c - '0');
            if (seen_dot) den *= 10;
            any_digit = true;
        }
        if (!any_digit) return std::nullopt;
        return Ratio(neg ? -num : num, den);
    }

    constexpr std::int64_t num() const { return num_; }
    constexpr std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Ratio operator+(const Ratio& a, const Ratio& b) { return Ratio(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_); }
    friend Ratio operator-(const Ratio& a, const Ratio& b) { return Ratio(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_); }
    friend Ratio operator*(const Ratio& a, const Ratio& b) { return Ratio(a.num_ * b.num_, a.den_ * b.den_); }
    friend Ratio operator/(const Ratio& a, const Ratio& b) {
        if (b.num_ == 0) throw UndefinedRatioError("division by zero ratio");
        return Ratio(a.num_ * b.den_, a.den_ * b.num_);
    }
    Ratio operator-() const { return Ratio(-num_, den_); }

    friend bool operator==(const Ratio&, const Ratio&) = default;
    friend bool operator<(const Ratio& a, const Ratio& b) { return a.num_ * b.den_ < b.num_ * a.den_; }
    friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }

    std::string to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace fogddos
