#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lims/query.hpp"

namespace lims {

enum class InsertOutcome { Inserted, Duplicate };
enum class DeleteOutcome { Deleted, Absent };

struct RebuildPolicy {
    double max_buffer_fraction = 0.1; // beta
};

namespace detail {

inline void require_updatable(const LimsIndex& idx) {
    if (!idx.updatable())
        throw std::logic_error("index is file-backed read-only; load with StoreBacking::Memory");
}

// Cluster whose centroid is nearest to the payload; ties to the lowest index.
inline std::uint32_t nearest_cluster(const LimsIndex& idx, const Payload& p) {
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < idx.clusters.size(); ++i) {
        const double d = distance(idx.metric, p, idx.clusters[i].pivots[0].pivot);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

} // namespace detail

/// Inserts a record unless an equal payload is already reachable. The record
/// goes to the insert buffer of the nearest-centroid cluster; pages stay
/// fully utilized and the buffer's centroid-distance array stays sorted.
inline InsertOutcome insert(LimsIndex& idx, const Record& rec) {
    detail::require_updatable(idx);
    if (point_query(idx, rec.payload))
        return InsertOutcome::Duplicate;

    auto& cluster = idx.clusters[detail::nearest_cluster(idx, rec.payload)];
    const double d0 = distance(idx.metric, rec.payload, cluster.pivots[0].pivot);

    const std::uint64_t slot = cluster.buffer.size();
    idx.store->append_record(cluster.buffer_pages, rec);

    BufferEntry entry{d0, slot};
    const auto pos = std::upper_bound(
        cluster.buffer.begin(), cluster.buffer.end(), entry,
        [](const BufferEntry& a, const BufferEntry& b) { return a.centroid_dist < b.centroid_dist; });
    cluster.buffer.insert(pos, entry);
    return InsertOutcome::Inserted;
}

/// Tombstones the record equal to `p`, if reachable, and tightens the owning
/// cluster's per-pivot min/max envelopes over the survivors. Ring boundaries
/// and models stay frozen until rebuild.
inline DeleteOutcome erase(LimsIndex& idx, const Payload& p) {
    detail::require_updatable(idx);
    const auto hit = point_query(idx, p);
    if (!hit)
        return DeleteOutcome::Absent;
    const std::uint64_t id = hit->id;

    // Owning cluster: the id lives either in a region or in a buffer.
    std::uint32_t owner = 0;
    bool in_region = false;
    bool found = false;
    for (std::uint32_t i = 0; i < idx.clusters.size() && !found; ++i) {
        const auto& c = idx.clusters[i];
        if (std::find(c.record_ids.begin(), c.record_ids.end(), id) != c.record_ids.end()) {
            owner = i;
            in_region = true;
            found = true;
        } else if (!c.buffer_pages.empty()) {
            for (const std::uint64_t page : c.buffer_pages) {
                for (const auto& rec : idx.store->read_page_uncounted(page)) {
                    if (rec.id == id) {
                        owner = i;
                        found = true;
                        break;
                    }
                }
                if (found)
                    break;
            }
        }
    }
    if (!found)
        throw std::logic_error("erase: reachable record missing from all clusters");

    idx.tombstones.insert(id);
    idx.clusters[owner].tombstone_ids.push_back(id);

    if (in_region) {
        for (auto& col : idx.clusters[owner].pivots) {
            const double d = distance(idx.metric, p, col.pivot);
            col.deleted.insert(
                std::upper_bound(col.deleted.begin(), col.deleted.end(), d), d);
            col.refresh_envelope();
        }
    }
    return DeleteOutcome::Deleted;
}

/// Merges a cluster's surviving region records with its buffer, re-sorts,
/// retrains the models, and writes a fresh page region. Other clusters'
/// pages are never touched.
inline void rebuild_cluster(LimsIndex& idx, std::uint32_t cluster_idx) {
    detail::require_updatable(idx);
    auto& cluster = idx.clusters.at(cluster_idx);

    std::vector<Record> records;
    records.reserve(cluster.size() + cluster.buffer.size());
    for (std::uint64_t p = 0; p < cluster.page_count; ++p)
        for (auto& rec : idx.store->read_page_uncounted(cluster.first_page + p))
            if (!idx.tombstones.contains(rec.id))
                records.push_back(std::move(rec));
    for (const std::uint64_t page : cluster.buffer_pages)
        for (auto& rec : idx.store->read_page_uncounted(page))
            if (!idx.tombstones.contains(rec.id))
                records.push_back(std::move(rec));

    for (const std::uint64_t id : cluster.tombstone_ids)
        idx.tombstones.erase(id);
    cluster.tombstone_ids.clear();

    const std::uint64_t old_region = cluster.size();
    const std::uint64_t new_region = records.size();
    idx.rebuild_cluster_payload(cluster_idx, std::move(records));
    idx.base_count = idx.base_count - old_region + new_region;
}

/// Rebuild trigger: the buffer has outgrown `max_buffer_fraction` of the
/// cluster's indexed size.
inline bool should_rebuild(const LimsIndex& idx, std::uint32_t cluster_idx,
                           RebuildPolicy policy = {}) {
    const auto& cluster = idx.clusters.at(cluster_idx);
    return static_cast<double>(cluster.buffer.size()) >
           policy.max_buffer_fraction * static_cast<double>(cluster.size());
}

} // namespace lims
