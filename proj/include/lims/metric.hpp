#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lims {

/// Distance functions supported by the index. The numeric values are part of
/// the on-disk format.
enum class Metric : std::uint8_t {
    L2 = 0,
    L1 = 1,
    Edit = 2,
};

inline const char* metric_name(Metric m) {
    switch (m) {
        case Metric::L2: return "l2";
        case Metric::L1: return "l1";
        case Metric::Edit: return "edit";
    }
    return "?";
}

/// A data object: either a dense real vector or a character string
/// (edit distance). Strings must be non-empty and at most 71 characters so
/// they fit the fixed on-disk slot.
using Payload = std::variant<std::vector<double>, std::string>;

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("l2_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("l1_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(a[i] - b[i]);
    return sum;
}

/// Levenshtein distance with unit-cost insert/delete/substitute.
inline std::size_t edit_distance(std::string_view s, std::string_view t) {
    if (s.size() > t.size())
        std::swap(s, t);
    // Two-row DP over the shorter string.
    std::vector<std::size_t> prev(s.size() + 1), cur(s.size() + 1);
    for (std::size_t i = 0; i <= s.size(); ++i)
        prev[i] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
        cur[0] = j;
        for (std::size_t i = 1; i <= s.size(); ++i) {
            const std::size_t sub = prev[i - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[i] = std::min({prev[i] + 1, cur[i - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[s.size()];
}

/// Evaluates the tagged metric on two payloads. Distances are carried as
/// 64-bit reals throughout; edit distance is widened.
inline double distance(Metric metric, const Payload& a, const Payload& b) {
    switch (metric) {
        case Metric::L2:
            return l2_distance(std::get<std::vector<double>>(a), std::get<std::vector<double>>(b));
        case Metric::L1:
            return l1_distance(std::get<std::vector<double>>(a), std::get<std::vector<double>>(b));
        case Metric::Edit:
            return static_cast<double>(
                edit_distance(std::get<std::string>(a), std::get<std::string>(b)));
    }
    throw std::invalid_argument("distance: unknown metric tag");
}

/// Exact equality, used for the identity axiom and duplicate detection.
inline bool payload_equal(const Payload& a, const Payload& b) {
    return a == b;
}

} // namespace lims
