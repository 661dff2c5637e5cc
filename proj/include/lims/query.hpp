#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "lims/index.hpp"

namespace lims {

/// Counters owned by one query. pages_read covers record pages only (cluster
/// regions and insert buffers); metadata lookups touch no pages.
struct QueryStats {
    std::uint64_t pages_read = 0;
    std::uint64_t distance_computations = 0;
    std::uint64_t clusters_pruned = 0;
    std::uint64_t intervals_generated = 0;
    std::uint64_t range_calls = 0;
};

struct Match {
    std::uint64_t id = 0;
    double dist = 0.0;
};

struct RangeResult {
    std::vector<Match> matches; // ascending id
    QueryStats stats;
};

struct KnnResult {
    std::vector<Match> neighbors; // ascending (distance, id)
    QueryStats stats;
};

/// Ring band of one pivot, inclusive.
struct RidBounds {
    std::uint32_t rid_min = 0;
    std::uint32_t rid_max = 0;
};

/// Inclusive LIMS-key range.
struct KeyInterval {
    std::uint64_t left = 0;
    std::uint64_t right = 0;
};

/// Distances from the query to every pivot, filled lazily by tri_prune.
/// dist[i] holds the pivots probed before cluster i was kept or pruned;
/// pivot 0 (the centroid) is always present.
struct PivotDistances {
    std::vector<std::vector<double>> dist;
};

/// TriPrune: keeps cluster i iff for every pivot j the query distance lies
/// in [dist_min_j - r, dist_max_j + r]. Probing stops at the first failing
/// pivot.
inline std::vector<std::uint32_t> tri_prune(const LimsIndex& idx, const Payload& q, double r,
                                            PivotDistances& pd, QueryStats& stats) {
    std::vector<std::uint32_t> kept;
    pd.dist.assign(idx.clusters.size(), {});
    for (std::uint32_t i = 0; i < idx.clusters.size(); ++i) {
        const auto& cluster = idx.clusters[i];
        bool keep = true;
        pd.dist[i].reserve(cluster.pivots.size());
        for (const auto& col : cluster.pivots) {
            const double d = distance(idx.metric, col.pivot, q);
            ++stats.distance_computations;
            pd.dist[i].push_back(d);
            if (d > col.dist_max + r || d < col.dist_min - r) {
                keep = false;
                break;
            }
        }
        if (keep)
            kept.push_back(i);
        else
            ++stats.clusters_pruned;
    }
    return kept;
}

/// AreaLocate: clips the query ball to each pivot's live distance envelope
/// and maps the band to ring bounds. Returns nothing when any pivot's band
/// is empty (the cluster holds no candidate).
inline std::optional<std::vector<RidBounds>> area_locate(const LimsIndex& idx,
                                                         std::uint32_t cluster_idx,
                                                         double r,
                                                         std::span<const double> pivot_dists,
                                                         Locator locator) {
    const auto& cluster = idx.clusters[cluster_idx];
    std::vector<RidBounds> bounds;
    bounds.reserve(cluster.pivots.size());
    for (std::size_t j = 0; j < cluster.pivots.size(); ++j) {
        const auto& col = cluster.pivots[j];
        const double r_min = std::max(pivot_dists[j] - r, col.dist_min);
        const double r_max = std::min(pivot_dists[j] + r, col.dist_max);
        if (r_min > r_max)
            return std::nullopt;
        const auto br = query_boundary_ranks(cluster, j, r_min, r_max, idx.config.num_rings,
                                             locator);
        if (!br)
            return std::nullopt;
        bounds.push_back({br->rid_min, br->rid_max});
    }
    return bounds;
}

/// IntervalGen: one inclusive key range per path through the ring bands of
/// pivots 1..m-1, each spanning the last digit from rid_min to rid_max.
inline std::vector<KeyInterval> interval_gen(std::span<const RidBounds> bounds,
                                             std::uint32_t num_rings) {
    const std::size_t m = bounds.size();
    std::vector<KeyInterval> intervals;
    std::vector<std::uint32_t> digits(m);
    for (std::size_t j = 0; j + 1 < m; ++j)
        digits[j] = bounds[j].rid_min;

    while (true) {
        digits[m - 1] = bounds[m - 1].rid_min;
        KeyInterval iv;
        iv.left = encode_lims(digits, num_rings);
        digits[m - 1] = bounds[m - 1].rid_max;
        iv.right = encode_lims(digits, num_rings);
        intervals.push_back(iv);

        // Odometer over the first m-1 digits.
        std::size_t j = m - 1;
        while (j-- > 0) {
            if (digits[j] < bounds[j].rid_max) {
                ++digits[j];
                break;
            }
            digits[j] = bounds[j].rid_min;
        }
        if (j == static_cast<std::size_t>(-1))
            break;
    }
    return intervals;
}

/// PosLocate: maps key intervals to cluster-local page indices. The upper
/// bound extends through the last occurrence of the right endpoint when it
/// is present; empty intervals are dropped.
inline std::vector<std::uint64_t> pos_locate(const ClusterIndex& cluster,
                                             std::span<const KeyInterval> intervals,
                                             std::uint32_t omega, Locator locator) {
    const std::span<const std::uint64_t> keys(cluster.lims_keys);
    std::vector<std::uint64_t> pages;
    for (const auto& iv : intervals) {
        const std::size_t lbound = detail::locate_first_geq(keys, cluster.addr_model, iv.left,
                                                            locator);
        if (lbound >= keys.size())
            continue;
        const std::size_t geq_right = detail::locate_first_geq(keys, cluster.addr_model, iv.right,
                                                               locator);
        std::size_t ubound;
        if (geq_right < keys.size() && keys[geq_right] == iv.right) {
            if (locator == Locator::Binary)
                ubound = static_cast<std::size_t>(
                             std::upper_bound(keys.begin(), keys.end(), iv.right) - keys.begin()) -
                         1;
            else
                ubound = *search_last_occurrence(keys, static_cast<double>(geq_right), iv.right);
        } else if (geq_right == 0) {
            continue;
        } else {
            ubound = geq_right - 1;
        }
        if (lbound > ubound)
            continue;
        for (std::uint64_t p = lbound / omega; p <= ubound / omega; ++p)
            pages.push_back(p);
    }
    std::sort(pages.begin(), pages.end());
    pages.erase(std::unique(pages.begin(), pages.end()), pages.end());
    return pages;
}

namespace detail {

// One filter-phase pass: TriPrune -> AreaLocate -> IntervalGen -> PosLocate
// plus the centroid-distance band over each insert buffer. Returns the
// global ids of candidate pages not yet in `visited` (and adds them to it),
// in ascending order.
inline std::vector<std::uint64_t> collect_unvisited_pages(
    const LimsIndex& idx, const Payload& q, double r, Locator locator,
    std::unordered_set<std::uint64_t>& visited, QueryStats& stats) {
    PivotDistances pd;
    const auto kept = tri_prune(idx, q, r, pd, stats);

    std::vector<std::uint64_t> fresh;
    const auto add_page = [&](std::uint64_t page) {
        if (visited.insert(page).second)
            fresh.push_back(page);
    };

    for (const std::uint32_t i : kept) {
        const auto& cluster = idx.clusters[i];
        if (cluster.lims_keys.empty())
            continue;
        const auto bounds = area_locate(idx, i, r, pd.dist[i], locator);
        if (!bounds)
            continue;
        const auto intervals = interval_gen(*bounds, idx.config.num_rings);
        stats.intervals_generated += intervals.size();
        for (const std::uint64_t local : pos_locate(cluster, intervals, idx.omega(), locator))
            add_page(cluster.first_page + local);
    }

    // Buffered inserts only carry a centroid distance, so their triangle
    // filter is independent of TriPrune's per-pivot envelopes.
    for (std::uint32_t i = 0; i < idx.clusters.size(); ++i) {
        const auto& cluster = idx.clusters[i];
        if (cluster.buffer.empty())
            continue;
        const double d0 = pd.dist[i][0];
        const double lo = d0 - r, hi = d0 + r;
        const auto begin = std::lower_bound(
            cluster.buffer.begin(), cluster.buffer.end(), lo,
            [](const BufferEntry& e, double v) { return e.centroid_dist < v; });
        const auto end = std::upper_bound(
            cluster.buffer.begin(), cluster.buffer.end(), hi,
            [](double v, const BufferEntry& e) { return v < e.centroid_dist; });
        for (auto it = begin; it != end; ++it)
            add_page(cluster.buffer_pages[it->slot / idx.omega()]);
    }

    std::sort(fresh.begin(), fresh.end());
    return fresh;
}

} // namespace detail

/// Exact range query (Algorithm: TriPrune, AreaLocate, IntervalGen,
/// PosLocate, then distance refinement over every retrieved page).
inline RangeResult range_query(const LimsIndex& idx, const Payload& q, double r,
                               Locator locator = Locator::Learned) {
    if (r < 0.0)
        throw std::invalid_argument("range_query: radius must be non-negative");
    RangeResult res;
    std::unordered_set<std::uint64_t> visited;
    AccessCounter counter;
    for (const std::uint64_t page : detail::collect_unvisited_pages(idx, q, r, locator, visited,
                                                                    res.stats)) {
        for (const auto& rec : idx.store->read_page(page, counter)) {
            if (idx.tombstones.contains(rec.id))
                continue;
            const double d = distance(idx.metric, rec.payload, q);
            ++res.stats.distance_computations;
            if (d <= r)
                res.matches.push_back({rec.id, d});
        }
    }
    res.stats.pages_read = counter.pages_read;
    std::sort(res.matches.begin(), res.matches.end(),
              [](const Match& a, const Match& b) { return a.id < b.id; });
    return res;
}

/// Point query: range with r = 0; the identity axiom makes the match unique.
inline std::optional<Match> point_query(const LimsIndex& idx, const Payload& q,
                                        Locator locator = Locator::Learned) {
    auto res = range_query(idx, q, 0.0, locator);
    if (res.matches.empty())
        return std::nullopt;
    return res.matches.front();
}

/// Exact kNN by range queries with radius growing in delta_r steps
/// (index default when delta_r == 0). Pages are never re-read across the
/// internal range calls; the call count is ceil(d_k / delta_r) + 1, d_k
/// being the distance of the k-th neighbor.
inline KnnResult knn_query(const LimsIndex& idx, const Payload& q, std::size_t k,
                           double delta_r = 0.0, Locator locator = Locator::Learned) {
    if (k == 0)
        throw std::invalid_argument("knn_query: k must be positive");
    if (delta_r < 0.0)
        throw std::invalid_argument("knn_query: delta_r must be positive");
    const double step = delta_r > 0.0 ? delta_r : idx.delta_r;
    if (step <= 0.0)
        throw std::invalid_argument("knn_query: delta_r must be positive");

    KnnResult res;
    const std::uint64_t live = idx.live_count();
    const std::size_t k_eff = std::min<std::uint64_t>(k, live);
    if (k_eff == 0)
        return res;

    // Max-heap of the best k candidates, seeded with infinity sentinels.
    using Entry = std::pair<double, std::uint64_t>;
    std::priority_queue<Entry> queue;
    for (std::size_t i = 0; i < k_eff; ++i)
        queue.push({std::numeric_limits<double>::infinity(), 0});

    std::unordered_set<std::uint64_t> visited;
    AccessCounter counter;
    for (std::uint64_t round = 1;; ++round) {
        const double r = static_cast<double>(round) * step;
        ++res.stats.range_calls;
        for (const std::uint64_t page :
             detail::collect_unvisited_pages(idx, q, r, locator, visited, res.stats)) {
            for (const auto& rec : idx.store->read_page(page, counter)) {
                if (idx.tombstones.contains(rec.id))
                    continue;
                const double d = distance(idx.metric, rec.payload, q);
                ++res.stats.distance_computations;
                if (d < queue.top().first) {
                    queue.pop();
                    queue.push({d, rec.id});
                }
            }
        }
        // Done once the furthest candidate fell inside the previously
        // confirmed radius: this round's call proved no expansion can
        // change the answer.
        if (queue.top().first <= static_cast<double>(round - 1) * step)
            break;
    }
    res.stats.pages_read = counter.pages_read;

    res.neighbors.resize(k_eff);
    for (std::size_t i = k_eff; i-- > 0;) {
        res.neighbors[i] = {queue.top().second, queue.top().first};
        queue.pop();
    }
    std::sort(res.neighbors.begin(), res.neighbors.end(), [](const Match& a, const Match& b) {
        if (a.dist != b.dist)
            return a.dist < b.dist;
        return a.id < b.id;
    });
    return res;
}

} // namespace lims
