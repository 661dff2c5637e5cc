#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "lims/lims.hpp"

namespace {

lims::Locator parse_locator(const std::string& name) {
    if (name == "lims")
        return lims::Locator::Learned;
    if (name == "nlims")
        return lims::Locator::Binary;
    throw CLI::ValidationError("--locator must be lims or nlims");
}

int cmd_gen(const std::string& kind, std::size_t n, std::uint32_t d, std::uint64_t seed,
            const std::string& out) {
    lims::MetricDataset ds;
    if (kind == "gaussmix") {
        ds = lims::gen_gaussmix(n, d, seed);
    } else if (kind == "skewed") {
        ds = lims::gen_skewed(n, d, seed);
    } else if (kind == "signature") {
        ds = lims::gen_signature(seed);
        if (n > 0 && n < ds.size())
            ds = lims::subsample(ds, n, seed);
    } else {
        std::cerr << "unknown --kind: " << kind << "\n";
        return 1;
    }
    lims::save_dataset(ds, out);
    std::cout << "wrote " << ds.size() << " records (" << lims::metric_name(ds.metric)
              << (ds.dim > 0 ? ", d=" + std::to_string(ds.dim) : "") << ") to " << out << "\n";
    return 0;
}

int cmd_build(const std::string& data, const std::string& out, lims::IndexConfig cfg) {
    const auto ds = lims::load_dataset(data);
    if (cfg.num_clusters == 0) {
        // Elbow sweep over the OR + lambda*MAE statistic.
        std::vector<std::uint32_t> candidates;
        for (std::uint32_t k = 20; k <= 150; k += 10)
            if (k <= ds.size())
                candidates.push_back(k);
        if (candidates.size() < 3) {
            candidates.clear();
            for (std::uint32_t k = 1; k <= std::min<std::size_t>(ds.size(), 8); ++k)
                candidates.push_back(k);
        }
        cfg.num_clusters = candidates.size() >= 3
                               ? lims::select_k(ds, candidates, cfg.num_pivots, cfg.seed)
                               : 1;
        std::cout << "selected K=" << cfg.num_clusters << " by elbow criterion\n";
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto idx = lims::LimsIndex::build(ds, cfg);
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                        .count();
    idx.save(out);
    std::cout << "built index: n=" << idx.base_count << " K=" << cfg.num_clusters
              << " m=" << cfg.num_pivots << " N=" << cfg.num_rings << " omega=" << idx.omega()
              << " delta_r=" << idx.delta_r << " build_ms=" << ms << " -> " << out << "\n";
    return 0;
}

void print_stats(const lims::QueryStats& stats) {
    std::cout << " pages=" << stats.pages_read << " dists=" << stats.distance_computations
              << " pruned=" << stats.clusters_pruned << " intervals=" << stats.intervals_generated;
    if (stats.range_calls > 0)
        std::cout << " range_calls=" << stats.range_calls;
    std::cout << "\n";
}

int cmd_query(const std::string& index_path, const std::string& mode, const std::string& q_file,
              double r, std::size_t k, double delta_r, const std::string& locator_name) {
    const auto locator = parse_locator(locator_name);
    const auto idx = lims::LimsIndex::load(index_path, lims::StoreBacking::File);
    const auto queries = lims::load_dataset(q_file);
    if (queries.metric != idx.metric) {
        std::cerr << "query file metric does not match the index\n";
        return 1;
    }

    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto& q = queries.records[i].payload;
        if (mode == "point") {
            const auto hit = lims::point_query(idx, q, locator);
            std::cout << "query " << i << ": "
                      << (hit ? "found id=" + std::to_string(hit->id) : "absent") << "\n";
        } else if (mode == "range") {
            const auto res = lims::range_query(idx, q, r, locator);
            std::cout << "query " << i << ": " << res.matches.size() << " matches r=" << r;
            print_stats(res.stats);
            for (const auto& m : res.matches)
                std::cout << "  id=" << m.id << " dist=" << m.dist << "\n";
        } else if (mode == "knn") {
            const auto res = lims::knn_query(idx, q, k, delta_r, locator);
            std::cout << "query " << i << ": k=" << k << " delta_r="
                      << (delta_r > 0.0 ? delta_r : idx.delta_r);
            print_stats(res.stats);
            for (const auto& m : res.neighbors)
                std::cout << "  id=" << m.id << " dist=" << m.dist << "\n";
        } else {
            std::cerr << "unknown --mode: " << mode << "\n";
            return 1;
        }
    }
    return 0;
}

int cmd_bench(const std::string& spec_path, const std::string& csv_path) {
    std::ifstream spec_in(spec_path);
    if (!spec_in) {
        std::cerr << "cannot open bench spec " << spec_path << "\n";
        return 1;
    }
    const auto plan = lims::parse_bench_spec(spec_in);
    const auto ds = lims::load_dataset(plan.dataset_path);
    const auto rows = lims::run_bench(ds, plan);

    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) {
        std::cerr << "cannot open csv output " << csv_path << "\n";
        return 1;
    }
    lims::write_csv(rows, csv);
    std::cout << "bench complete: " << rows.size() << " rows -> " << csv_path << "\n";
    return 0;
}

int cmd_stats(const std::string& index_path) {
    const auto idx = lims::LimsIndex::load(index_path, lims::StoreBacking::File);
    std::cout << "metric: " << lims::metric_name(idx.metric) << "\n"
              << "n (indexed): " << idx.base_count << "\n"
              << "live records: " << idx.live_count() << "\n";
    if (idx.dim > 0)
        std::cout << "dim: " << idx.dim << "\n";
    std::cout << "K: " << idx.config.num_clusters << "\n"
              << "m: " << idx.config.num_pivots << "\n"
              << "N: " << idx.config.num_rings << "\n"
              << "omega: " << idx.omega() << "\n"
              << "page size: " << idx.config.page_size << "\n"
              << "pages: " << idx.store->page_count() << "\n"
              << "delta_r: " << idx.delta_r << "\n"
              << "index bytes: " << std::filesystem::file_size(index_path) << "\n"
              << "per-cluster sizes (region/buffer/tombstones):\n";
    for (std::size_t i = 0; i < idx.clusters.size(); ++i) {
        const auto& c = idx.clusters[i];
        std::cout << "  cluster " << i << ": " << c.size() << "/" << c.buffer.size() << "/"
                  << c.tombstone_ids.size() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LIMS: learned index for exact similarity search in metric spaces"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a dataset file");
    std::string gen_kind, gen_out;
    std::size_t gen_n = 10000;
    std::uint32_t gen_d = 8;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "gaussmix|skewed|signature")->required();
    gen->add_option("--n", gen_n, "record count (signature: subsample of 100k)");
    gen->add_option("--d", gen_d, "dimensionality (vector kinds)");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output dataset path")->required();

    auto* build = app.add_subcommand("build", "build an index from a dataset");
    std::string build_data, build_out;
    lims::IndexConfig cfg;
    cfg.num_clusters = 0;
    build->add_option("--data", build_data, "dataset path")->required();
    build->add_option("--out", build_out, "output index path")->required();
    build->add_option("--K", cfg.num_clusters, "clusters (0 = pick by elbow)");
    build->add_option("--m", cfg.num_pivots, "pivots per cluster");
    build->add_option("--N", cfg.num_rings, "rings per pivot");
    build->add_option("--deg-rp", cfg.rank_degree, "rank model degree");
    build->add_option("--deg-addr", cfg.addr_degree, "address model degree");
    build->add_option("--seed", cfg.seed, "build seed");

    auto* query = app.add_subcommand("query", "run queries from a query file");
    std::string q_index, q_mode, q_file, q_locator = "lims";
    double q_r = 0.0, q_delta_r = 0.0;
    std::size_t q_k = 1;
    query->add_option("--index", q_index, "index path")->required();
    query->add_option("--mode", q_mode, "point|range|knn")->required();
    query->add_option("--q-file", q_file, "dataset file holding the query objects")->required();
    query->add_option("--r", q_r, "range radius");
    query->add_option("--k", q_k, "neighbor count");
    query->add_option("--delta-r", q_delta_r, "kNN radius step (default: stored in index)");
    query->add_option("--locator", q_locator, "lims|nlims");

    auto* bench = app.add_subcommand("bench", "run a benchmark plan");
    std::string bench_spec, bench_csv;
    bench->add_option("--spec", bench_spec, "key=value bench plan file")->required();
    bench->add_option("--csv", bench_csv, "CSV output path")->required();

    auto* stats = app.add_subcommand("stats", "print index statistics");
    std::string stats_index;
    stats->add_option("--index", stats_index, "index path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_kind, gen_n, gen_d, gen_seed, gen_out);
        if (build->parsed())
            return cmd_build(build_data, build_out, cfg);
        if (query->parsed())
            return cmd_query(q_index, q_mode, q_file, q_r, q_k, q_delta_r, q_locator);
        if (bench->parsed())
            return cmd_bench(bench_spec, bench_csv);
        if (stats->parsed())
            return cmd_stats(stats_index);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
