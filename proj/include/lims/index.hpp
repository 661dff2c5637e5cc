#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "lims/dataset.hpp"
#include "lims/partitioner.hpp"
#include "lims/rank_model.hpp"
#include "lims/storage.hpp"

namespace lims {

struct IndexConfig {
    std::uint32_t num_clusters = 1;  // K
    std::uint32_t num_pivots = 3;    // m
    std::uint32_t num_rings = 20;    // N
    std::uint32_t rank_degree = 20;  // degree of the per-pivot rank models
    std::uint32_t addr_degree = 1;   // degree of the per-cluster address model
    std::uint32_t page_size = 4096;
    std::uint64_t seed = 0;

    void validate() const {
        if (num_clusters < 1 || num_pivots < 1 || num_rings < 1)
            throw std::invalid_argument("IndexConfig: K, m, N must be positive");
        // Keys are m base-N digits in a u64.
        if (num_pivots * std::log2(static_cast<double>(num_rings)) > 64.0)
            throw std::invalid_argument("IndexConfig: N^m exceeds the 64-bit key space");
        if (page_size < 64)
            throw std::invalid_argument("IndexConfig: page size too small");
    }
};

/// Ring index for a rank: floor(rank / bucket_width), clamped to the last
/// ring so boundary ranks (rank == |D_j|) stay valid.
inline std::uint32_t ring_id_for_rank(std::size_t rank, std::uint64_t bucket_width,
                                      std::uint32_t num_rings) {
    const auto ring = static_cast<std::uint32_t>(rank / bucket_width);
    return std::min(ring, num_rings - 1);
}

/// Base-N positional encoding of the m ring IDs. Integer order of the keys
/// realizes the lexicographic order on ring-ID tuples.
inline std::uint64_t encode_lims(std::span<const std::uint32_t> rids, std::uint32_t num_rings) {
    std::uint64_t key = 0;
    for (const std::uint32_t rid : rids) {
        if (rid >= num_rings)
            throw std::invalid_argument("encode_lims: ring id out of range");
        key = key * num_rings + rid;
    }
    return key;
}

inline std::vector<std::uint32_t> decode_lims(std::uint64_t key, std::uint32_t num_rings,
                                              std::uint32_t num_pivots) {
    std::vector<std::uint32_t> rids(num_pivots);
    for (std::uint32_t j = num_pivots; j-- > 0;) {
        rids[j] = static_cast<std::uint32_t>(key % num_rings);
        key /= num_rings;
    }
    return rids;
}

/// One pivot's view of a cluster: the pivot object, the sorted distance
/// multiset of all members, its learned rank model, and the live min/max
/// envelope (shrunk by deletions, while the multiset stays frozen until
/// rebuild).
struct PivotColumn {
    Payload pivot;
    std::vector<double> dists; // D_j, ascending, frozen between rebuilds
    double dist_min = std::numeric_limits<double>::infinity();
    double dist_max = -std::numeric_limits<double>::infinity();
    std::uint64_t bucket_width = 1;
    RankModel model;
    std::vector<double> deleted; // ascending distances of tombstoned members

    /// Recomputes the live envelope: the multiset difference dists \ deleted.
    void refresh_envelope() {
        if (deleted.empty()) {
            if (dists.empty()) {
                dist_min = std::numeric_limits<double>::infinity();
                dist_max = -std::numeric_limits<double>::infinity();
            } else {
                dist_min = dists.front();
                dist_max = dists.back();
            }
            return;
        }
        std::size_t hi = dists.size(), dhi = deleted.size();
        while (hi > 0 && dhi > 0 && dists[hi - 1] == deleted[dhi - 1]) {
            --hi;
            --dhi;
        }
        std::size_t lo = 0, dlo = 0;
        while (lo < hi && dlo < dhi && dists[lo] == deleted[dlo]) {
            ++lo;
            ++dlo;
        }
        if (lo >= hi) {
            dist_min = std::numeric_limits<double>::infinity();
            dist_max = -std::numeric_limits<double>::infinity();
        } else {
            dist_min = dists[lo];
            dist_max = dists[hi - 1];
        }
    }
};

/// A buffered insert: distance to the cluster centroid plus the arrival slot
/// that locates the record inside the buffer pages.
struct BufferEntry {
    double centroid_dist = 0.0;
    std::uint64_t slot = 0;
};

struct ClusterIndex {
    std::vector<PivotColumn> pivots;        // [0] is the k-center centroid
    std::vector<std::uint64_t> lims_keys;   // ascending, one per stored record
    std::vector<std::uint64_t> record_ids;  // parallel to lims_keys, page order
    RankModel addr_model;
    std::uint64_t first_page = 0;
    std::uint64_t page_count = 0;
    std::vector<std::uint64_t> buffer_pages;
    std::vector<BufferEntry> buffer;        // ascending centroid_dist
    std::vector<std::uint64_t> tombstone_ids;

    std::size_t size() const { return lims_keys.size(); }

    std::uint32_t ring_id(std::size_t pivot_idx, std::size_t rank, std::uint32_t num_rings) const {
        return ring_id_for_rank(rank, pivots[pivot_idx].bucket_width, num_rings);
    }
};

/// How the page region of a loaded index is served.
enum class StoreBacking {
    Memory, // pages copied into memory; required for updates
    File,   // pages pread from the index file on demand, read-only
};

struct BoundaryRanks {
    std::size_t rank_min = 0;
    std::size_t rank_max = 0;
    std::uint32_t rid_min = 0;
    std::uint32_t rid_max = 0;
};

enum class Locator {
    Learned, // rank model prediction corrected by exponential search
    Binary,  // plain binary search (the N-LIMS ablation)
};

namespace detail {

template <typename Key>
std::size_t locate_first_geq(std::span<const Key> keys, const RankModel& model, Key x,
                             Locator locator) {
    if (locator == Locator::Binary)
        return exact_rank(keys, x);
    return search_first_geq(keys, model.predict(static_cast<double>(x)), x).index;
}

} // namespace detail

/// Ranks and ring bounds of the distance band [r_min, r_max] on pivot j of a
/// cluster. Returns nothing when no stored distance falls in the band (the
/// cluster is discarded for this query). The upper ring comes from rank_max
/// itself when the band boundary hits a stored distance exactly, otherwise
/// from the previous rank.
inline std::optional<BoundaryRanks> query_boundary_ranks(const ClusterIndex& cluster,
                                                         std::size_t pivot_idx, double r_min,
                                                         double r_max, std::uint32_t num_rings,
                                                         Locator locator = Locator::Learned) {
    if (r_min > r_max)
        throw std::invalid_argument("query_boundary_ranks: r_min > r_max");
    const auto& col = cluster.pivots[pivot_idx];
    const std::span<const double> keys(col.dists);
    if (keys.empty())
        return std::nullopt;

    BoundaryRanks out;
    out.rank_min = detail::locate_first_geq(keys, col.model, r_min, locator);
    out.rank_max = detail::locate_first_geq(keys, col.model, r_max, locator);
    if (out.rank_min >= keys.size())
        return std::nullopt;

    std::size_t upper_rank;
    if (out.rank_max < keys.size() && keys[out.rank_max] == r_max) {
        upper_rank = out.rank_max;
    } else if (out.rank_max == 0) {
        return std::nullopt; // every stored distance exceeds r_max
    } else {
        upper_rank = out.rank_max - 1;
    }
    if (upper_rank < out.rank_min)
        return std::nullopt;

    out.rid_min = cluster.ring_id(pivot_idx, out.rank_min, num_rings);
    out.rid_max = cluster.ring_id(pivot_idx, upper_rank, num_rings);
    return out;
}

/// Initial kNN radius step: the 1st percentile of 1000 seeded random
/// pairwise distances. Degenerate all-zero samples fall back to the smallest
/// positive sampled distance, or 1.0 if none exists.
inline double default_delta_r(const MetricDataset& ds, std::uint64_t seed) {
    const std::size_t n = ds.size();
    if (n < 2)
        throw std::invalid_argument("default_delta_r: need at least 2 records");
    std::mt19937_64 rng(seed);
    constexpr std::size_t kPairs = 1000;
    std::vector<double> dists;
    dists.reserve(kPairs);
    for (std::size_t i = 0; i < kPairs; ++i) {
        const std::size_t a = static_cast<std::size_t>(rng() % n);
        std::size_t b = static_cast<std::size_t>(rng() % (n - 1));
        if (b >= a)
            ++b;
        dists.push_back(ds.dist(ds.records[a].payload, ds.records[b].payload));
    }
    std::sort(dists.begin(), dists.end());
    const double p1 = dists[kPairs / 100];
    if (p1 > 0.0)
        return p1;
    for (const double d : dists)
        if (d > 0.0)
            return d;
    return 1.0;
}

inline constexpr char kIndexMagic[4] = {'L', 'I', 'M', 'S'};
inline constexpr std::uint32_t kIndexVersion = 1;

/// The built index: per-cluster learned structures plus the paged record
/// store. Immutable under queries; the maintenance API is the only mutation
/// path and requires exclusive access.
class LimsIndex {
public:
    IndexConfig config;
    Metric metric = Metric::L2;
    std::uint32_t dim = 0;
    std::uint64_t base_count = 0; // records in cluster regions (incl. tombstoned)
    double delta_r = 1.0;
    std::vector<ClusterIndex> clusters;
    std::unordered_set<std::uint64_t> tombstones;
    std::shared_ptr<PagedStore> store;

    std::uint32_t omega() const { return store->omega(); }

    bool updatable() const { return store->device().writable(); }

    /// Records reachable by queries: base minus tombstones plus buffered.
    std::uint64_t live_count() const {
        std::uint64_t buffered = 0;
        for (const auto& c : clusters)
            buffered += c.buffer.size();
        return base_count + buffered - tombstones.size();
    }

    static LimsIndex build(const MetricDataset& ds, const IndexConfig& cfg);

    void save(const std::filesystem::path& path) const;
    static LimsIndex load(const std::filesystem::path& path,
                          StoreBacking backing = StoreBacking::Memory);

    std::vector<std::byte> to_bytes() const;

    /// Rebuilds one cluster's learned structures from scratch over `records`
    /// (its surviving + buffered members) and writes them as a fresh page
    /// region. Shared by build() and rebuild_cluster().
    void rebuild_cluster_payload(std::uint32_t cluster_idx, std::vector<Record> records);
};

namespace detail {

inline void train_cluster_models(ClusterIndex& cluster, const IndexConfig& cfg) {
    for (auto& col : cluster.pivots) {
        col.bucket_width = std::max<std::uint64_t>(
            1, (col.dists.size() + cfg.num_rings - 1) / cfg.num_rings);
        if (!col.dists.empty())
            col.model = train_rank_model(std::span<const double>(col.dists), cfg.rank_degree);
        col.refresh_envelope();
    }
    if (!cluster.lims_keys.empty())
        cluster.addr_model =
            train_rank_model(std::span<const std::uint64_t>(cluster.lims_keys), cfg.addr_degree);
}

} // namespace detail

inline void LimsIndex::rebuild_cluster_payload(std::uint32_t cluster_idx,
                                               std::vector<Record> records) {
    auto& cluster = clusters[cluster_idx];
    const std::uint32_t m = config.num_pivots;

    for (auto& col : cluster.pivots) {
        col.dists.clear();
        col.deleted.clear();
        col.model = RankModel{};
    }
    cluster.lims_keys.clear();
    cluster.record_ids.clear();
    cluster.addr_model = RankModel{};
    cluster.buffer.clear();
    cluster.buffer_pages.clear();

    if (records.empty()) {
        cluster.page_count = 0;
        detail::train_cluster_models(cluster, config);
        return;
    }

    // Distance matrix: per pivot, members in record order, then sorted.
    std::vector<std::vector<double>> by_pivot(m);
    for (std::uint32_t j = 0; j < m; ++j) {
        by_pivot[j].reserve(records.size());
        for (const auto& rec : records)
            by_pivot[j].push_back(distance(metric, rec.payload, cluster.pivots[j].pivot));
        cluster.pivots[j].dists = by_pivot[j];
        std::sort(cluster.pivots[j].dists.begin(), cluster.pivots[j].dists.end());
    }
    detail::train_cluster_models(cluster, config);

    // Ring IDs from first-occurrence ranks, then keys, then page order.
    std::vector<std::uint64_t> keys(records.size());
    std::vector<std::uint32_t> rids(m);
    for (std::size_t t = 0; t < records.size(); ++t) {
        for (std::uint32_t j = 0; j < m; ++j) {
            const auto rank =
                exact_rank(std::span<const double>(cluster.pivots[j].dists), by_pivot[j][t]);
            rids[j] = cluster.ring_id(j, rank, config.num_rings);
        }
        keys[t] = encode_lims(rids, config.num_rings);
    }

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b])
            return keys[a] < keys[b];
        return records[a].id < records[b].id;
    });

    std::vector<Record> sorted;
    sorted.reserve(records.size());
    cluster.lims_keys.reserve(records.size());
    cluster.record_ids.reserve(records.size());
    for (const std::size_t t : order) {
        sorted.push_back(std::move(records[t]));
        cluster.lims_keys.push_back(keys[t]);
        cluster.record_ids.push_back(sorted.back().id);
    }

    const auto [first, pages] = store->write_region(sorted);
    cluster.first_page = first;
    cluster.page_count = pages;
    if (!cluster.lims_keys.empty())
        cluster.addr_model =
            train_rank_model(std::span<const std::uint64_t>(cluster.lims_keys), config.addr_degree);
}

inline LimsIndex LimsIndex::build(const MetricDataset& ds, const IndexConfig& cfg) {
    cfg.validate();
    if (ds.records.empty())
        throw std::invalid_argument("LimsIndex::build: empty dataset");

    LimsIndex idx;
    idx.config = cfg;
    idx.metric = ds.metric;
    idx.dim = ds.metric == Metric::Edit ? 0 : ds.dim;
    idx.base_count = ds.size();
    idx.store = std::make_shared<PagedStore>(
        std::make_shared<MemoryPageDevice>(cfg.page_size), ds.metric,
        ds.metric == Metric::Edit ? 1 : ds.dim);

    const auto clustering = k_center(ds, cfg.num_clusters, cfg.seed);
    const auto members = clustering.members();

    idx.clusters.resize(cfg.num_clusters);
    for (std::uint32_t i = 0; i < cfg.num_clusters; ++i) {
        auto& cluster = idx.clusters[i];
        const auto& mem = members[i];
        const std::size_t center = clustering.center_indices[i];

        // Clusters smaller than m repeat the centroid in the tail pivot
        // slots; the copies add no pruning power but keep keys m digits wide.
        const auto m_eff = static_cast<std::uint32_t>(
            std::min<std::size_t>(cfg.num_pivots, mem.size()));
        const auto pivot_positions = fft_pivots(ds, mem, center, m_eff);
        cluster.pivots.resize(cfg.num_pivots);
        for (std::uint32_t j = 0; j < cfg.num_pivots; ++j) {
            const std::size_t pos = j < m_eff ? pivot_positions[j] : center;
            cluster.pivots[j].pivot = ds.records[pos].payload;
        }

        std::vector<Record> records;
        records.reserve(mem.size());
        for (const std::size_t pos : mem)
            records.push_back(ds.records[pos]);
        idx.rebuild_cluster_payload(i, std::move(records));
    }

    idx.delta_r = ds.size() >= 2 ? default_delta_r(ds, cfg.seed) : 1.0;
    return idx;
}

// ---- serialization ---------------------------------------------------------

namespace detail {

inline void put_payload(std::vector<std::byte>& out, const Payload& payload, Metric metric,
                        std::uint32_t dim) {
    Record rec{0, payload};
    serialize_record(rec, metric, dim, out);
}

inline Payload get_payload(std::span<const std::byte> in, std::size_t& off, Metric metric,
                           std::uint32_t dim) {
    const std::size_t bytes = record_size(metric, dim);
    check_room(in, off, bytes);
    Record rec = deserialize_record(in.subspan(off, bytes), metric, dim);
    off += bytes;
    return std::move(rec.payload);
}

} // namespace detail

inline std::vector<std::byte> LimsIndex::to_bytes() const {
    const std::uint32_t store_dim = metric == Metric::Edit ? 1 : dim;

    std::vector<std::byte> meta;
    for (const auto& cluster : clusters) {
        put_u64(meta, cluster.first_page);
        put_u64(meta, cluster.page_count);
        put_u32(meta, static_cast<std::uint32_t>(cluster.pivots.size()));
        for (const auto& col : cluster.pivots) {
            detail::put_payload(meta, col.pivot, metric, store_dim);
            put_f64(meta, col.dist_min);
            put_f64(meta, col.dist_max);
            put_u64(meta, col.bucket_width);
            serialize_model(col.model, meta);
            put_u64(meta, col.dists.size());
            for (const double d : col.dists)
                put_f64(meta, d);
            put_u64(meta, col.deleted.size());
            for (const double d : col.deleted)
                put_f64(meta, d);
        }
        put_u64(meta, cluster.lims_keys.size());
        for (const std::uint64_t k : cluster.lims_keys)
            put_u64(meta, k);
        for (const std::uint64_t id : cluster.record_ids)
            put_u64(meta, id);
        serialize_model(cluster.addr_model, meta);
        put_u64(meta, cluster.buffer_pages.size());
        for (const std::uint64_t p : cluster.buffer_pages)
            put_u64(meta, p);
        put_u64(meta, cluster.buffer.size());
        for (const auto& e : cluster.buffer) {
            put_f64(meta, e.centroid_dist);
            put_u64(meta, e.slot);
        }
        put_u64(meta, cluster.tombstone_ids.size());
        for (const std::uint64_t id : cluster.tombstone_ids)
            put_u64(meta, id);
    }

    std::vector<std::byte> out;
    put_u8(out, static_cast<std::uint8_t>(kIndexMagic[0]));
    put_u8(out, static_cast<std::uint8_t>(kIndexMagic[1]));
    put_u8(out, static_cast<std::uint8_t>(kIndexMagic[2]));
    put_u8(out, static_cast<std::uint8_t>(kIndexMagic[3]));
    put_u32(out, kIndexVersion);
    put_u8(out, static_cast<std::uint8_t>(metric));
    put_u32(out, dim);
    put_u64(out, base_count);
    put_u32(out, config.num_clusters);
    put_u32(out, config.num_pivots);
    put_u32(out, config.num_rings);
    put_u32(out, omega());
    put_u32(out, config.page_size);
    put_u32(out, config.rank_degree);
    put_u32(out, config.addr_degree);
    put_u64(out, config.seed);
    put_f64(out, delta_r);
    put_u64(out, store->page_count());
    put_u64(out, meta.size());
    if (out.size() > config.page_size)
        throw std::runtime_error("LimsIndex::to_bytes: header overflow");
    out.resize(config.page_size); // header occupies the first page slot

    // Page region dumped verbatim, metadata after it.
    const auto* mem = dynamic_cast<const MemoryPageDevice*>(&store->device());
    if (mem != nullptr) {
        const auto bytes = mem->bytes();
        out.insert(out.end(), bytes.begin(), bytes.end());
    } else {
        std::vector<std::byte> page(config.page_size);
        for (std::uint64_t p = 0; p < store->page_count(); ++p) {
            store->device().read(p, page);
            out.insert(out.end(), page.begin(), page.end());
        }
    }
    out.insert(out.end(), meta.begin(), meta.end());
    return out;
}

inline void LimsIndex::save(const std::filesystem::path& path) const {
    const auto bytes = to_bytes();
    write_file_bytes(path, bytes, "LimsIndex::save");
}

inline LimsIndex LimsIndex::load(const std::filesystem::path& path, StoreBacking backing) {
    const auto buf = read_file_bytes(path, "LimsIndex::load");
    if (buf.size() < 64 || std::memcmp(buf.data(), kIndexMagic, 4) != 0)
        throw std::runtime_error("LimsIndex::load: bad magic in " + path.string());

    LimsIndex idx;
    std::size_t off = 4;
    const std::uint32_t version = get_u32(buf, off);
    if (version != kIndexVersion)
        throw std::runtime_error("LimsIndex::load: unsupported version");
    idx.metric = static_cast<Metric>(get_u8(buf, off));
    idx.dim = get_u32(buf, off);
    idx.base_count = get_u64(buf, off);
    idx.config.num_clusters = get_u32(buf, off);
    idx.config.num_pivots = get_u32(buf, off);
    idx.config.num_rings = get_u32(buf, off);
    get_u32(buf, off); // omega, derived from metric/dim/page_size
    idx.config.page_size = get_u32(buf, off);
    idx.config.rank_degree = get_u32(buf, off);
    idx.config.addr_degree = get_u32(buf, off);
    idx.config.seed = get_u64(buf, off);
    idx.delta_r = get_f64(buf, off);
    const std::uint64_t page_count = get_u64(buf, off);
    const std::uint64_t meta_size = get_u64(buf, off);

    const std::uint64_t region_offset = idx.config.page_size;
    const std::uint64_t region_bytes = page_count * idx.config.page_size;
    if (buf.size() != region_offset + region_bytes + meta_size)
        throw std::runtime_error("LimsIndex::load: size mismatch in " + path.string());

    const std::uint32_t store_dim = idx.metric == Metric::Edit ? 1 : idx.dim;
    std::shared_ptr<PageDevice> device;
    if (backing == StoreBacking::Memory) {
        auto mem = std::make_shared<MemoryPageDevice>(idx.config.page_size);
        mem->assign(std::span<const std::byte>(buf).subspan(region_offset, region_bytes));
        device = std::move(mem);
    } else {
        device = std::make_shared<FilePageDevice>(path, region_offset, page_count,
                                                  idx.config.page_size);
    }
    idx.store = std::make_shared<PagedStore>(std::move(device), idx.metric, store_dim);

    off = region_offset + region_bytes;
    const std::span<const std::byte> span(buf);
    idx.clusters.resize(idx.config.num_clusters);
    for (auto& cluster : idx.clusters) {
        cluster.first_page = get_u64(span, off);
        cluster.page_count = get_u64(span, off);
        const std::uint32_t m = get_u32(span, off);
        cluster.pivots.resize(m);
        for (auto& col : cluster.pivots) {
            col.pivot = detail::get_payload(span, off, idx.metric, store_dim);
            col.dist_min = get_f64(span, off);
            col.dist_max = get_f64(span, off);
            col.bucket_width = get_u64(span, off);
            col.model = deserialize_model(span, off);
            col.dists.resize(get_u64(span, off));
            for (auto& d : col.dists)
                d = get_f64(span, off);
            col.deleted.resize(get_u64(span, off));
            for (auto& d : col.deleted)
                d = get_f64(span, off);
        }
        const std::uint64_t count = get_u64(span, off);
        cluster.lims_keys.resize(count);
        for (auto& k : cluster.lims_keys)
            k = get_u64(span, off);
        cluster.record_ids.resize(count);
        for (auto& id : cluster.record_ids)
            id = get_u64(span, off);
        cluster.addr_model = deserialize_model(span, off);
        cluster.buffer_pages.resize(get_u64(span, off));
        for (auto& p : cluster.buffer_pages)
            p = get_u64(span, off);
        cluster.buffer.resize(get_u64(span, off));
        for (auto& e : cluster.buffer) {
            e.centroid_dist = get_f64(span, off);
            e.slot = get_u64(span, off);
        }
        cluster.tombstone_ids.resize(get_u64(span, off));
        for (auto& id : cluster.tombstone_ids) {
            id = get_u64(span, off);
            idx.tombstones.insert(id);
        }
    }
    return idx;
}

} // namespace lims
