#include "lims/bench.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "lims/datagen.hpp"

namespace {

using lims::BenchPlan;
using lims::BenchRow;

TEST(NlimsLocate, AgreesWithExactRankOnRandomProbes) {
    std::mt19937_64 rng(3);
    std::vector<double> keys(5000);
    for (auto& k : keys)
        k = static_cast<double>(rng() % 1000);
    std::sort(keys.begin(), keys.end());
    for (int probe = 0; probe < 100000; ++probe) {
        const double x = static_cast<double>(rng() % 1100) - 50.0;
        ASSERT_EQ(lims::nlims_locate<double>(keys, x), lims::exact_rank<double>(keys, x));
    }
}

TEST(NlimsLocate, EmptyArrayIsRankZero) {
    const std::vector<double> empty;
    EXPECT_EQ(lims::nlims_locate<double>(empty, 3.0), 0u);
}

TEST(NlimsLocate, FirstOccurrenceOnDuplicateHeavyArray) {
    const std::vector<double> keys{1, 1, 1, 2, 2, 5, 5, 5, 5};
    // Linear-scan check of first-occurrence semantics.
    for (const double x : {0.5, 1.0, 1.5, 2.0, 5.0, 9.0}) {
        std::size_t scan = 0;
        for (const double k : keys)
            scan += k < x ? 1 : 0;
        EXPECT_EQ(lims::nlims_locate<double>(keys, x), scan);
    }
}

TEST(BenchSpec, ParsesKeysAndLists) {
    std::istringstream in(R"(# range/knn workload
data = /tmp/ds.lmsd
name = gaussmix-10k
queries = 50
reps = 2
seed = 9
K = 20
m = 3
N = 10
build-seed = 4
sweep = m
sweep-values = 1, 2, 3
selectivities = 0.001, 0.01
ks = 1, 5
variants = lims, nlims
)");
    const auto plan = lims::parse_bench_spec(in);
    EXPECT_EQ(plan.dataset_path, "/tmp/ds.lmsd");
    EXPECT_EQ(plan.dataset_name, "gaussmix-10k");
    EXPECT_EQ(plan.workload.query_count, 50u);
    EXPECT_EQ(plan.workload.repetitions, 2u);
    EXPECT_EQ(plan.workload.seed, 9u);
    EXPECT_EQ(plan.base.num_clusters, 20u);
    EXPECT_EQ(plan.base.num_rings, 10u);
    EXPECT_EQ(plan.base.seed, 4u);
    EXPECT_EQ(plan.sweep, "m");
    EXPECT_EQ(plan.sweep_values, (std::vector<std::uint32_t>{1, 2, 3}));
    EXPECT_EQ(plan.workload.selectivities, (std::vector<double>{0.001, 0.01}));
    EXPECT_EQ(plan.workload.ks, (std::vector<std::size_t>{1, 5}));
    EXPECT_EQ(plan.variants, (std::vector<std::string>{"lims", "nlims"}));
}

TEST(BenchSpec, RejectsUnknownKeysAndMissingData) {
    std::istringstream bad("bogus = 1\n");
    EXPECT_THROW(lims::parse_bench_spec(bad), std::invalid_argument);
    std::istringstream empty("queries = 10\n");
    EXPECT_THROW(lims::parse_bench_spec(empty), std::invalid_argument);
}

BenchPlan small_plan() {
    BenchPlan plan;
    plan.dataset_name = "unit";
    plan.base.num_clusters = 5;
    plan.base.num_pivots = 3;
    plan.base.num_rings = 10;
    plan.base.seed = 2;
    plan.workload.query_count = 10;
    plan.workload.repetitions = 1;
    plan.workload.selectivities = {0.01};
    plan.workload.ks = {3};
    plan.workload.seed = 5;
    return plan;
}

TEST(RunBench, MSweepEmitsARowPerValuePerVariantPerSetting) {
    const auto ds = lims::gen_gaussmix(600, 4, 43);
    auto plan = small_plan();
    plan.sweep = "m";
    plan.sweep_values = {1, 2, 3, 4, 5};
    const auto rows = lims::run_bench(ds, plan);
    // 5 sweep values x 2 variants x (1 selectivity + 1 k).
    EXPECT_EQ(rows.size(), 20u);
    for (const auto& row : rows) {
        EXPECT_GT(row.mean_pages_read, 0.0);
        EXPECT_GT(row.index_size_bytes, 0u);
    }
}

TEST(RunBench, PageCountsIdenticalAcrossRunsAndVariants) {
    const auto ds = lims::gen_gaussmix(500, 4, 47);
    const auto plan = small_plan();
    const auto a = lims::run_bench(ds, plan);
    const auto b = lims::run_bench(ds, plan);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a[i].mean_pages_read, b[i].mean_pages_read);

    // lims and nlims rows pair up with identical page counts.
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a[i].params == a[j].params && a[i].variant == "lims" && a[j].variant == "nlims")
                EXPECT_EQ(a[i].mean_pages_read, a[j].mean_pages_read);
}

TEST(ExactnessGate, MismatchAbortsWithDiagnostic) {
    const std::vector<lims::Match> got{{1, 0.5}, {2, 0.7}};
    const std::vector<lims::Match> want{{1, 0.5}, {3, 0.7}};
    EXPECT_THROW(lims::detail::require_set_equal(got, want, "unit"), std::runtime_error);
    EXPECT_THROW(lims::detail::require_multiset_equal(got, {{9, 0.5}, {8, 0.9}}, "unit"),
                 std::runtime_error);
    EXPECT_NO_THROW(lims::detail::require_set_equal(got, got, "unit"));
    EXPECT_NO_THROW(lims::detail::require_multiset_equal(got, {{9, 0.7}, {8, 0.5}}, "unit"));
}

TEST(WriteCsv, ColumnsFollowBenchRowOrder) {
    BenchRow row;
    row.dataset = "unit";
    row.n = 10;
    row.d = 2;
    row.metric = "l2";
    row.variant = "lims";
    row.params = "K=5;m=3;N=10;sel=0.01";
    row.mean_query_time_ms = 0.5;
    row.mean_pages_read = 3.25;
    row.build_time_ms = 12.0;
    row.index_size_bytes = 4096;
    std::ostringstream out;
    lims::write_csv({row}, out);
    EXPECT_EQ(out.str(),
              "dataset,n,d,metric,variant,params,mean_query_time_ms,mean_pages_read,"
              "build_time_ms,index_size_bytes\n"
              "unit,10,2,l2,lims,K=5;m=3;N=10;sel=0.01,0.5,3.25,12,4096\n");
}

} // namespace
