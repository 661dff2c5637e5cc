#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lims/dataset.hpp"
#include "lims/query.hpp"

namespace lims {

/// Linear-scan range answer, in dataset order.
inline std::vector<Match> oracle_range(const MetricDataset& ds, const Payload& q, double r) {
    std::vector<Match> out;
    for (const auto& rec : ds.records) {
        const double d = ds.dist(rec.payload, q);
        if (d <= r)
            out.push_back({rec.id, d});
    }
    return out;
}

/// Linear-scan kNN: full sort by distance with stable tie order (dataset
/// order breaks ties). Returns min(k, n) matches.
inline std::vector<Match> oracle_knn(const MetricDataset& ds, const Payload& q, std::size_t k) {
    std::vector<Match> all;
    all.reserve(ds.size());
    for (const auto& rec : ds.records)
        all.push_back({rec.id, ds.dist(rec.payload, q)});
    std::stable_sort(all.begin(), all.end(),
                     [](const Match& a, const Match& b) { return a.dist < b.dist; });
    all.resize(std::min(k, all.size()));
    return all;
}

} // namespace lims
