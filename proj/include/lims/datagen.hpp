#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lims/dataset.hpp"

namespace lims {
namespace detail {

// Hand-rolled transforms: std::*_distribution output is implementation
// defined, and generated files must be byte-identical under a fixed seed.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(std::mt19937_64& rng) {
    // Box-Muller; one draw per call keeps the stream simple.
    double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    if (u1 <= 0.0)
        u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace detail

inline constexpr std::uint32_t kGaussMixComponents = 150;

/// Equal-weight mixture of 150 axis-aligned Gaussians with sigma 0.05 and
/// uniform means in [0,1]^d. Values are clipped to [0,1] and then min-max
/// normalized per coordinate. Record i draws from component i % 150.
/// L2 metric.
inline MetricDataset gen_gaussmix(std::size_t n, std::uint32_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> means(kGaussMixComponents, std::vector<double>(d));
    for (auto& mean : means)
        for (auto& x : mean)
            x = detail::uniform01(rng);

    MetricDataset ds;
    ds.metric = Metric::L2;
    ds.dim = d;
    ds.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mean = means[i % kGaussMixComponents];
        std::vector<double> v(d);
        for (std::uint32_t j = 0; j < d; ++j)
            v[j] = std::clamp(mean[j] + 0.05 * detail::standard_normal(rng), 0.0, 1.0);
        ds.records.push_back({i, std::move(v)});
    }

    for (std::uint32_t j = 0; j < d; ++j) {
        double lo = 1.0, hi = 0.0;
        for (const auto& rec : ds.records) {
            const double x = std::get<std::vector<double>>(rec.payload)[j];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        const double span = hi - lo;
        if (span <= 0.0)
            continue;
        for (auto& rec : ds.records) {
            auto& x = std::get<std::vector<double>>(rec.payload)[j];
            x = (x - lo) / span;
        }
    }
    return ds;
}

/// Uniform base values raised to their coordinate's power: coordinate j
/// (1-based) becomes u^j. L1 metric.
inline MetricDataset gen_skewed(std::size_t n, std::uint32_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MetricDataset ds;
    ds.metric = Metric::L1;
    ds.dim = d;
    ds.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (std::uint32_t j = 0; j < d; ++j)
            v[j] = std::pow(detail::uniform01(rng), static_cast<double>(j + 1));
        ds.records.push_back({i, std::move(v)});
    }
    return ds;
}

inline constexpr std::size_t kSignatureAnchors = 25;
inline constexpr std::size_t kSignaturePerAnchor = 4000;
inline constexpr std::size_t kSignatureLength = 65;

/// 100,000 signatures of 65 lowercase letters: 25 random anchors, each
/// spawning 4000 objects by mutating x ~ U{1..30} distinct positions to
/// different random letters. Edit metric.
inline MetricDataset gen_signature(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MetricDataset ds;
    ds.metric = Metric::Edit;
    ds.dim = 0;
    ds.records.reserve(kSignatureAnchors * kSignaturePerAnchor);

    std::uint64_t id = 0;
    std::vector<std::size_t> positions(kSignatureLength);
    for (std::size_t a = 0; a < kSignatureAnchors; ++a) {
        std::string anchor(kSignatureLength, 'a');
        for (auto& c : anchor)
            c = static_cast<char>('a' + rng() % 26);
        for (std::size_t obj = 0; obj < kSignaturePerAnchor; ++obj) {
            const std::size_t x = 1 + static_cast<std::size_t>(rng() % 30);
            // Partial Fisher-Yates picks x distinct positions.
            for (std::size_t p = 0; p < kSignatureLength; ++p)
                positions[p] = p;
            std::string s = anchor;
            for (std::size_t p = 0; p < x; ++p) {
                const std::size_t pick = p + static_cast<std::size_t>(rng() % (kSignatureLength - p));
                std::swap(positions[p], positions[pick]);
                char& c = s[positions[p]];
                char repl = static_cast<char>('a' + rng() % 25);
                if (repl >= c)
                    ++repl;
                c = repl;
            }
            ds.records.push_back({id++, std::move(s)});
        }
    }
    return ds;
}

/// Seeded uniform subsample without replacement; original ids are kept.
inline MetricDataset subsample(const MetricDataset& ds, std::size_t n, std::uint64_t seed) {
    if (n >= ds.size())
        return ds;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    for (std::size_t i = order.size(); i-- > 1;)
        std::swap(order[i], order[rng() % (i + 1)]);

    MetricDataset out;
    out.metric = ds.metric;
    out.dim = ds.dim;
    out.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.records.push_back(ds.records[order[i]]);
    return out;
}

} // namespace lims
