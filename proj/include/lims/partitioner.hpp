#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "lims/dataset.hpp"

namespace lims {

/// Greedy farthest-point clustering result. Centers are dataset positions
/// (actual members, never synthetic points); assignment maps every record
/// position to a cluster in [0, k).
struct Clustering {
    std::uint32_t k = 0;
    std::vector<std::size_t> center_indices;
    std::vector<std::uint32_t> assignment;

    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(k);
        for (std::size_t i = 0; i < assignment.size(); ++i)
            out[assignment[i]].push_back(i);
        return out;
    }
};

/// Gonzalez k-center: seeded first center, then each next center is the
/// point farthest from the chosen set. 2-approximates the optimal max
/// radius. Deterministic given (dataset order, K, seed).
inline Clustering k_center(const MetricDataset& ds, std::uint32_t k, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (k == 0 || k > n)
        throw std::invalid_argument("k_center: need 1 <= K <= |P|");

    Clustering out;
    out.k = k;
    out.assignment.assign(n, 0);

    std::mt19937_64 rng(seed);
    const std::size_t first = static_cast<std::size_t>(rng() % n);
    out.center_indices.push_back(first);

    std::vector<double> min_dist(n);
    for (std::size_t i = 0; i < n; ++i)
        min_dist[i] = ds.dist(ds.records[i].payload, ds.records[first].payload);

    for (std::uint32_t c = 1; c < k; ++c) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (min_dist[i] > min_dist[far])
                far = i;
        out.center_indices.push_back(far);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ds.dist(ds.records[i].payload, ds.records[far].payload);
            if (d < min_dist[i]) {
                min_dist[i] = d;
                out.assignment[i] = c;
            }
        }
        // A duplicate payload ties at distance 0; the center still owns itself.
        out.assignment[far] = c;
        min_dist[far] = 0.0;
    }
    return out;
}

/// Farthest-first-traversal pivot selection inside one cluster. The first
/// pivot is the cluster's k-center centroid; each next pivot maximizes the
/// minimum distance to the pivots chosen so far (ties to the earliest
/// member). Returns dataset positions.
inline std::vector<std::size_t> fft_pivots(const MetricDataset& ds,
                                           std::span<const std::size_t> members,
                                           std::size_t center, std::uint32_t m) {
    if (m == 0)
        throw std::invalid_argument("fft_pivots: m must be positive");
    if (m > members.size())
        throw std::invalid_argument("fft_pivots: m exceeds cluster size");

    std::vector<std::size_t> pivots{center};
    std::vector<double> min_dist(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
        min_dist[i] = ds.dist(ds.records[members[i]].payload, ds.records[center].payload);

    while (pivots.size() < m) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < members.size(); ++i)
            if (min_dist[i] > min_dist[far])
                far = i;
        pivots.push_back(members[far]);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const double d =
                ds.dist(ds.records[members[i]].payload, ds.records[members[far]].payload);
            min_dist[i] = std::min(min_dist[i], d);
        }
    }
    return pivots;
}

/// Centroid ball of one cluster: the centroid payload plus the nearest and
/// furthest member distances from it.
struct ClusterBall {
    Payload centroid;
    double dist_min = 0.0;
    double dist_max = 0.0;
};

/// Overlap rate across clusters: mean of pairwise overlap lengths normalized
/// by the first cluster's radius. Negative overlap (disjoint balls) clamps
/// to zero; a zero-radius cluster contributes nothing.
inline double overlap_rate(Metric metric, std::span<const ClusterBall> balls) {
    const std::size_t k = balls.size();
    if (k < 2)
        throw std::invalid_argument("overlap_rate: need at least 2 clusters");
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (balls[i].dist_max <= 0.0)
            continue;
        for (std::size_t o = 0; o < k; ++o) {
            if (o == i)
                continue;
            const double d = distance(metric, balls[i].centroid, balls[o].centroid);
            const double upper = std::min(d + balls[o].dist_max, balls[i].dist_max);
            const double lower = std::max(d - balls[o].dist_max, balls[i].dist_min);
            const double r = upper - lower;
            if (r > 0.0)
                total += r / balls[i].dist_max;
        }
    }
    return total / (static_cast<double>(k) * static_cast<double>(k - 1));
}

namespace detail {

// Least-squares line through {(x, rank(x))} over a sorted multiset, with
// rank = first-occurrence index. All-equal keys degrade to the horizontal
// line through the mean rank.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LinearFit fit_rank_line(std::span<const double> sorted) {
    const auto n = static_cast<double>(sorted.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t first = 0;
    for (std::size_t t = 0; t < sorted.size(); ++t) {
        if (t > 0 && sorted[t] != sorted[t - 1])
            first = t;
        const double x = sorted[t];
        const auto y = static_cast<double>(first);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    LinearFit fit;
    if (denom > 0.0) {
        fit.slope = (n * sxy - sx * sy) / denom;
        fit.intercept = (sy - fit.slope * sx) / n;
    } else {
        fit.intercept = sy / n;
    }
    return fit;
}

} // namespace detail

/// Mean absolute error of per-pivot linear rank fits, averaged over all
/// pivot lists and all records. `total_records` is |P|; empty clusters are
/// skipped.
inline double mean_absolute_fit_error(
    std::span<const std::vector<std::vector<double>>> cluster_pivot_dists,
    std::size_t total_records) {
    if (total_records == 0)
        return 0.0;
    double sum = 0.0;
    std::size_t m = 0;
    for (const auto& pivot_lists : cluster_pivot_dists) {
        m = std::max(m, pivot_lists.size());
        for (const auto& sorted : pivot_lists) {
            if (sorted.empty())
                continue;
            const auto fit = detail::fit_rank_line(sorted);
            std::size_t first = 0;
            for (std::size_t t = 0; t < sorted.size(); ++t) {
                if (t > 0 && sorted[t] != sorted[t - 1])
                    first = t;
                sum += std::abs(fit.slope * sorted[t] + fit.intercept -
                                static_cast<double>(first));
            }
        }
    }
    if (m == 0)
        return 0.0;
    return sum / (static_cast<double>(m) * static_cast<double>(total_records));
}

/// OR + lambda*MAE scores for a sweep of cluster counts, with
/// lambda = 1 / max MAE over the sweep.
struct KSweepPoint {
    std::uint32_t k = 0;
    double overlap = 0.0;
    double mae = 0.0;
    double score = 0.0;
};

namespace detail {

inline KSweepPoint evaluate_k(const MetricDataset& ds, std::uint32_t k, std::uint32_t m,
                              std::uint64_t seed) {
    const auto clustering = k_center(ds, k, seed);
    const auto members = clustering.members();

    std::vector<ClusterBall> balls;
    balls.reserve(k);
    std::vector<std::vector<std::vector<double>>> dists(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto& mem = members[i];
        const std::size_t center = clustering.center_indices[i];
        const auto m_eff = static_cast<std::uint32_t>(std::min<std::size_t>(m, mem.size()));
        const auto pivots = fft_pivots(ds, mem, center, m_eff);
        dists[i].resize(pivots.size());
        for (std::size_t j = 0; j < pivots.size(); ++j) {
            auto& col = dists[i][j];
            col.reserve(mem.size());
            for (const std::size_t rec : mem)
                col.push_back(ds.dist(ds.records[rec].payload, ds.records[pivots[j]].payload));
            std::sort(col.begin(), col.end());
        }
        ClusterBall ball;
        ball.centroid = ds.records[center].payload;
        ball.dist_min = dists[i][0].front();
        ball.dist_max = dists[i][0].back();
        balls.push_back(std::move(ball));
    }

    KSweepPoint pt;
    pt.k = k;
    pt.overlap = overlap_rate(ds.metric, balls);
    pt.mae = mean_absolute_fit_error(dists, ds.size());
    return pt;
}

} // namespace detail

inline std::vector<KSweepPoint> k_sweep_scores(const MetricDataset& ds,
                                               std::span<const std::uint32_t> candidates,
                                               std::uint32_t m, std::uint64_t seed) {
    std::vector<KSweepPoint> pts;
    pts.reserve(candidates.size());
    for (const std::uint32_t k : candidates)
        pts.push_back(detail::evaluate_k(ds, k, m, seed));
    double max_mae = 0.0;
    for (const auto& pt : pts)
        max_mae = std::max(max_mae, pt.mae);
    const double lambda = max_mae > 0.0 ? 1.0 / max_mae : 0.0;
    for (auto& pt : pts)
        pt.score = pt.overlap + lambda * pt.mae;
    return pts;
}

/// Elbow of a (K, score) curve: the interior point with maximum
/// perpendicular distance to the chord joining the first and last points.
/// Ties break to the smallest K.
inline std::uint32_t elbow_k(std::span<const KSweepPoint> pts) {
    if (pts.size() < 3)
        throw std::invalid_argument("elbow_k: need at least 3 candidates");
    const double x1 = pts.front().k, y1 = pts.front().score;
    const double x2 = pts.back().k, y2 = pts.back().score;
    std::size_t best = 1;
    double best_num = -1.0;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double num = std::abs((y2 - y1) * pts[i].k - (x2 - x1) * pts[i].score +
                                    x2 * y1 - y2 * x1);
        if (num > best_num) {
            best_num = num;
            best = i;
        }
    }
    return pts[best].k;
}

/// Picks the cluster count from ascending candidates by the OR + lambda*MAE
/// elbow criterion.
inline std::uint32_t select_k(const MetricDataset& ds, std::span<const std::uint32_t> candidates,
                              std::uint32_t m, std::uint64_t seed) {
    if (candidates.size() < 3)
        throw std::invalid_argument("select_k: need at least 3 candidates");
    if (!std::is_sorted(candidates.begin(), candidates.end()))
        throw std::invalid_argument("select_k: candidates must be ascending");
    const auto pts = k_sweep_scores(ds, candidates, m, seed);
    return elbow_k(pts);
}

} // namespace lims
