#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lims/datagen.hpp"
#include "lims/index.hpp"
#include "lims/maintenance.hpp"
#include "lims/oracle.hpp"
#include "lims/query.hpp"

namespace lims {

/// N-LIMS locator: the plain binary-search rank, pluggable wherever the
/// learned prediction + exponential search path runs (Locator::Binary).
template <typename Key>
std::size_t nlims_locate(std::span<const Key> keys, Key x) {
    return exact_rank(keys, x);
}

struct WorkloadSpec {
    std::size_t query_count = 200;
    std::size_t repetitions = 20;
    std::vector<double> selectivities; // fractions of |P|
    std::vector<std::size_t> ks;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::string dataset;
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::string metric;
    std::string variant; // lims | nlims
    std::string params;
    double mean_query_time_ms = 0.0;
    double mean_pages_read = 0.0;
    double build_time_ms = 0.0;
    std::uint64_t index_size_bytes = 0;
};

/// A full bench run: the dataset, the config sweep, and the workload.
struct BenchPlan {
    std::string dataset_path;
    std::string dataset_name;
    IndexConfig base;
    std::string sweep;                      // "none" | "K" | "m" | "N"
    std::vector<std::uint32_t> sweep_values;
    std::vector<std::string> variants{"lims", "nlims"};
    WorkloadSpec workload;
};

namespace detail {

inline Locator variant_locator(const std::string& variant) {
    if (variant == "lims")
        return Locator::Learned;
    if (variant == "nlims")
        return Locator::Binary;
    throw std::invalid_argument("unknown index variant: " + variant);
}

inline std::vector<std::size_t> sample_query_positions(std::size_t n, std::size_t count,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out(count);
    for (auto& q : out)
        q = static_cast<std::size_t>(rng() % n);
    return out;
}

inline void require_set_equal(const std::vector<Match>& got, const std::vector<Match>& want,
                              const std::string& what) {
    std::vector<std::uint64_t> a, b;
    a.reserve(got.size());
    b.reserve(want.size());
    for (const auto& m : got)
        a.push_back(m.id);
    for (const auto& m : want)
        b.push_back(m.id);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b)
        throw std::runtime_error("bench exactness gate failed (" + what + "): got " +
                                 std::to_string(a.size()) + " ids, oracle " +
                                 std::to_string(b.size()));
}

inline void require_multiset_equal(const std::vector<Match>& got, const std::vector<Match>& want,
                                   const std::string& what) {
    if (got.size() != want.size())
        throw std::runtime_error("bench exactness gate failed (" + what + "): size " +
                                 std::to_string(got.size()) + " vs " +
                                 std::to_string(want.size()));
    std::vector<double> a, b;
    a.reserve(got.size());
    b.reserve(want.size());
    for (const auto& m : got)
        a.push_back(m.dist);
    for (const auto& m : want)
        b.push_back(m.dist);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b)
        throw std::runtime_error("bench exactness gate failed (" + what +
                                 "): distance multisets differ");
}

} // namespace detail

/// Runs the workload for one built index and one variant, appending one row
/// per selectivity and per k. Every query is checked against the linear-scan
/// oracle; any mismatch aborts the run.
inline void run_workload_rows(const MetricDataset& ds, const LimsIndex& idx,
                              const std::string& dataset_name, const std::string& variant,
                              const std::string& param_prefix, double build_time_ms,
                              std::uint64_t index_size, const WorkloadSpec& spec,
                              std::vector<BenchRow>& rows) {
    const Locator locator = detail::variant_locator(variant);
    const std::size_t n = ds.size();
    const auto queries = detail::sample_query_positions(n, spec.query_count, spec.seed);

    // One sorted distance array per query serves every selectivity and k.
    std::vector<std::vector<double>> sorted_dists(queries.size());
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        auto& dists = sorted_dists[qi];
        dists.reserve(n);
        const auto& q = ds.records[queries[qi]].payload;
        for (const auto& rec : ds.records)
            dists.push_back(ds.dist(rec.payload, q));
        std::sort(dists.begin(), dists.end());
    }

    const auto base_row = [&]() {
        BenchRow row;
        row.dataset = dataset_name;
        row.n = n;
        row.d = ds.dim;
        row.metric = metric_name(ds.metric);
        row.variant = variant;
        row.build_time_ms = build_time_ms;
        row.index_size_bytes = index_size;
        return row;
    };

    using clock = std::chrono::steady_clock;
    for (const double sel : spec.selectivities) {
        const auto want = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(sel * static_cast<double>(n))));
        std::uint64_t pages = 0;
        double elapsed_ms = 0.0;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            const auto& q = ds.records[queries[qi]].payload;
            const double radius = sorted_dists[qi][want - 1];
            const auto expect = oracle_range(ds, q, radius);
            RangeResult res;
            const auto t0 = clock::now();
            for (std::size_t rep = 0; rep < spec.repetitions; ++rep)
                res = range_query(idx, q, radius, locator);
            elapsed_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count() /
                          static_cast<double>(spec.repetitions);
            detail::require_set_equal(res.matches, expect, "range sel=" + std::to_string(sel));
            pages += res.stats.pages_read;
        }
        auto row = base_row();
        std::ostringstream params;
        params << param_prefix << ";sel=" << sel;
        row.params = params.str();
        row.mean_query_time_ms = elapsed_ms / static_cast<double>(queries.size());
        row.mean_pages_read = static_cast<double>(pages) / static_cast<double>(queries.size());
        rows.push_back(std::move(row));
    }

    for (const std::size_t k : spec.ks) {
        std::uint64_t pages = 0;
        double elapsed_ms = 0.0;
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            const auto& q = ds.records[queries[qi]].payload;
            const auto expect = oracle_knn(ds, q, k);
            KnnResult res;
            const auto t0 = clock::now();
            for (std::size_t rep = 0; rep < spec.repetitions; ++rep)
                res = knn_query(idx, q, k, 0.0, locator);
            elapsed_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count() /
                          static_cast<double>(spec.repetitions);
            detail::require_multiset_equal(res.neighbors, expect, "knn k=" + std::to_string(k));
            pages += res.stats.pages_read;
        }
        auto row = base_row();
        std::ostringstream params;
        params << param_prefix << ";k=" << k;
        row.params = params.str();
        row.mean_query_time_ms = elapsed_ms / static_cast<double>(queries.size());
        row.mean_pages_read = static_cast<double>(pages) / static_cast<double>(queries.size());
        rows.push_back(std::move(row));
    }
}

/// Executes the plan: one build per sweep value, both variants over each.
inline std::vector<BenchRow> run_bench(const MetricDataset& ds, const BenchPlan& plan) {
    std::vector<IndexConfig> configs;
    if (plan.sweep == "none" || plan.sweep.empty()) {
        configs.push_back(plan.base);
    } else {
        for (const std::uint32_t v : plan.sweep_values) {
            IndexConfig cfg = plan.base;
            if (plan.sweep == "K")
                cfg.num_clusters = v;
            else if (plan.sweep == "m")
                cfg.num_pivots = v;
            else if (plan.sweep == "N")
                cfg.num_rings = v;
            else
                throw std::invalid_argument("unknown sweep parameter: " + plan.sweep);
            configs.push_back(cfg);
        }
    }

    std::vector<BenchRow> rows;
    using clock = std::chrono::steady_clock;
    for (const auto& cfg : configs) {
        const auto t0 = clock::now();
        const auto idx = LimsIndex::build(ds, cfg);
        const double build_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        const std::uint64_t size = idx.to_bytes().size();

        std::ostringstream prefix;
        prefix << "K=" << cfg.num_clusters << ";m=" << cfg.num_pivots << ";N=" << cfg.num_rings;
        for (const auto& variant : plan.variants)
            run_workload_rows(ds, idx, plan.dataset_name, variant, prefix.str(), build_ms, size,
                              plan.workload, rows);
    }
    return rows;
}

inline void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
    out << "dataset,n,d,metric,variant,params,mean_query_time_ms,mean_pages_read,"
           "build_time_ms,index_size_bytes\n";
    for (const auto& row : rows) {
        out << row.dataset << ',' << row.n << ',' << row.d << ',' << row.metric << ','
            << row.variant << ',' << row.params << ',' << row.mean_query_time_ms << ','
            << row.mean_pages_read << ',' << row.build_time_ms << ',' << row.index_size_bytes
            << '\n';
    }
}

/// Parses the bench plan from `key = value` lines; '#' starts a comment.
/// Lists are comma separated. Keys: data, name, queries, reps, seed, K, m,
/// N, deg-rp, deg-addr, build-seed, sweep, sweep-values, selectivities, ks,
/// variants.
inline BenchPlan parse_bench_spec(std::istream& in) {
    BenchPlan plan;
    plan.sweep = "none";
    plan.workload.selectivities = {0.0001};
    plan.workload.ks = {5};

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        if (eq == std::string::npos)
            throw std::invalid_argument("bench spec line " + std::to_string(line_no) +
                                        ": expected key = value");
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        const auto split = [&](auto convert) {
            std::vector<decltype(convert(value))> out;
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(convert(trim(item)));
            return out;
        };
        const auto to_u32 = [](const std::string& s) {
            return static_cast<std::uint32_t>(std::stoul(s));
        };
        const auto to_sz = [](const std::string& s) {
            return static_cast<std::size_t>(std::stoull(s));
        };
        const auto to_dbl = [](const std::string& s) { return std::stod(s); };
        const auto to_str = [](const std::string& s) { return s; };

        if (key == "data")
            plan.dataset_path = value;
        else if (key == "name")
            plan.dataset_name = value;
        else if (key == "queries")
            plan.workload.query_count = to_sz(value);
        else if (key == "reps")
            plan.workload.repetitions = to_sz(value);
        else if (key == "seed")
            plan.workload.seed = std::stoull(value);
        else if (key == "K")
            plan.base.num_clusters = to_u32(value);
        else if (key == "m")
            plan.base.num_pivots = to_u32(value);
        else if (key == "N")
            plan.base.num_rings = to_u32(value);
        else if (key == "deg-rp")
            plan.base.rank_degree = to_u32(value);
        else if (key == "deg-addr")
            plan.base.addr_degree = to_u32(value);
        else if (key == "build-seed")
            plan.base.seed = std::stoull(value);
        else if (key == "sweep")
            plan.sweep = value;
        else if (key == "sweep-values")
            plan.sweep_values = split(to_u32);
        else if (key == "selectivities")
            plan.workload.selectivities = split(to_dbl);
        else if (key == "ks")
            plan.workload.ks = split(to_sz);
        else if (key == "variants")
            plan.variants = split(to_str);
        else
            throw std::invalid_argument("bench spec line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
    }
    if (plan.dataset_path.empty())
        throw std::invalid_argument("bench spec: missing 'data' entry");
    if (plan.dataset_name.empty())
        plan.dataset_name = plan.dataset_path;
    return plan;
}

} // namespace lims
