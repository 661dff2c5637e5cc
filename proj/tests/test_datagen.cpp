#include "lims/datagen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lims/metric.hpp"

namespace {

using lims::Metric;

TEST(GaussMix, ReproducibleBytesUnderSeed) {
    const auto a = lims::gen_gaussmix(2000, 4, 42);
    const auto b = lims::gen_gaussmix(2000, 4, 42);
    const auto c = lims::gen_gaussmix(2000, 4, 43);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
        ASSERT_EQ(a.records[i].payload, b.records[i].payload);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        any_diff = any_diff || a.records[i].payload != c.records[i].payload;
    EXPECT_TRUE(any_diff);
}

TEST(GaussMix, ValuesInUnitCube) {
    const auto ds = lims::gen_gaussmix(5000, 8, 7);
    for (const auto& rec : ds.records)
        for (const double x : std::get<std::vector<double>>(rec.payload)) {
            EXPECT_GE(x, 0.0);
            EXPECT_LE(x, 1.0);
        }
    EXPECT_EQ(ds.metric, Metric::L2);
}

TEST(GaussMix, PerComponentSigmaNearNominal) {
    // Component of record i is i % 150. sigma is checked per coordinate on
    // interior components (means 3+ sigma from the cube walls), where
    // clipping is negligible; the min-max normalization step is undone by
    // rescaling with the recovered span.
    const std::size_t n = 100000;
    const std::uint32_t d = 2;
    const auto ds = lims::gen_gaussmix(n, d, 11);

    for (std::uint32_t comp = 0; comp < 8; ++comp) {
        std::vector<std::vector<double>> values(d);
        for (std::size_t i = comp; i < n; i += lims::kGaussMixComponents)
            for (std::uint32_t j = 0; j < d; ++j)
                values[j].push_back(std::get<std::vector<double>>(ds.records[i].payload)[j]);
        for (std::uint32_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (const double x : values[j])
                mean += x;
            mean /= static_cast<double>(values[j].size());
            if (mean < 0.2 || mean > 0.8)
                continue; // clipped tail would bias the estimate
            double var = 0.0;
            for (const double x : values[j])
                var += (x - mean) * (x - mean);
            var /= static_cast<double>(values[j].size() - 1);
            const double sigma = std::sqrt(var);
            EXPECT_NEAR(sigma, 0.05, 0.05 * 0.2)
                << "component " << comp << " coordinate " << j;
        }
    }
}

TEST(Skewed, OneDimensionalIsPlainUniform) {
    const auto ds = lims::gen_skewed(20000, 1, 13);
    double mean = 0.0;
    for (const auto& rec : ds.records)
        mean += std::get<std::vector<double>>(rec.payload)[0];
    mean /= static_cast<double>(ds.size());
    EXPECT_NEAR(mean, 0.5, 0.01);
    EXPECT_EQ(ds.metric, Metric::L1);
}

TEST(Skewed, CoordinateMeansFollowPowerMoments) {
    // E[u^j] = 1/(j+1) for the j-th power.
    const std::uint32_t d = 8;
    const auto ds = lims::gen_skewed(100000, d, 17);
    for (std::uint32_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& rec : ds.records)
            mean += std::get<std::vector<double>>(rec.payload)[j];
        mean /= static_cast<double>(ds.size());
        const double expect = 1.0 / static_cast<double>(j + 2);
        EXPECT_NEAR(mean, expect, expect * 0.05) << "coordinate " << j;
    }
}

TEST(Skewed, ReproducibleUnderSeed) {
    const auto a = lims::gen_skewed(500, 4, 19);
    const auto b = lims::gen_skewed(500, 4, 19);
    for (std::size_t i = 0; i < a.records.size(); ++i)
        ASSERT_EQ(a.records[i].payload, b.records[i].payload);
}

TEST(Signature, CardinalityAndShape) {
    const auto ds = lims::gen_signature(23);
    EXPECT_EQ(ds.size(), 100000u);
    EXPECT_EQ(ds.metric, Metric::Edit);
    for (std::size_t i = 0; i < ds.size(); i += 9973) {
        const auto& s = std::get<std::string>(ds.records[i].payload);
        ASSERT_EQ(s.size(), lims::kSignatureLength);
        for (const char c : s)
            ASSERT_TRUE(c >= 'a' && c <= 'z');
    }
}

TEST(Signature, HammingToAnchorWithinMutationBudget) {
    const auto ds = lims::gen_signature(29);
    // Anchor of cluster a is recoverable as the majority string; cheaper and
    // exact: objects 4000*a .. 4000*a+3999 share anchor a, and at most 30 of
    // 65 positions were mutated, so Hamming distance between two cluster
    // members is at most 60. Check distance to a reconstructed anchor via
    // majority vote per position over a sample.
    for (const std::size_t cluster : {0u, 7u, 24u}) {
        const std::size_t base = cluster * lims::kSignaturePerAnchor;
        std::string anchor(lims::kSignatureLength, 'a');
        for (std::size_t pos = 0; pos < lims::kSignatureLength; ++pos) {
            std::array<int, 26> votes{};
            for (std::size_t i = 0; i < 400; ++i) {
                const auto& s = std::get<std::string>(ds.records[base + i].payload);
                ++votes[static_cast<std::size_t>(s[pos] - 'a')];
            }
            anchor[pos] = static_cast<char>(
                'a' + std::distance(votes.begin(), std::max_element(votes.begin(), votes.end())));
        }
        for (std::size_t i = 0; i < 200; ++i) {
            const auto& s = std::get<std::string>(ds.records[base + i].payload);
            std::size_t hamming = 0;
            for (std::size_t pos = 0; pos < lims::kSignatureLength; ++pos)
                hamming += s[pos] != anchor[pos] ? 1 : 0;
            EXPECT_GE(hamming, 1u);
            EXPECT_LE(hamming, 30u);
            // Edit distance never exceeds Hamming distance.
            EXPECT_LE(lims::edit_distance(s, anchor), hamming);
        }
    }
}

TEST(Subsample, KeepsOriginalIdsAndIsSeeded) {
    const auto ds = lims::gen_skewed(2000, 2, 31);
    const auto a = lims::subsample(ds, 300, 5);
    const auto b = lims::subsample(ds, 300, 5);
    ASSERT_EQ(a.size(), 300u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a.records[i].id, b.records[i].id);
        EXPECT_EQ(a.records[i].payload, ds.records[a.records[i].id].payload);
    }
}

TEST(DatasetFile, SaveLoadRoundTrip) {
    const auto ds = lims::gen_gaussmix(300, 4, 37);
    const auto path = std::filesystem::temp_directory_path() / "lims_dataset.lmsd";
    lims::save_dataset(ds, path);
    const auto back = lims::load_dataset(path);
    EXPECT_EQ(back.metric, ds.metric);
    EXPECT_EQ(back.dim, ds.dim);
    ASSERT_EQ(back.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(back.records[i].id, ds.records[i].id);
        EXPECT_EQ(back.records[i].payload, ds.records[i].payload);
    }
    std::filesystem::remove(path);
}

TEST(DatasetFile, StringDatasetRoundTrip) {
    auto ds = lims::gen_signature(41);
    ds.records.resize(500);
    const auto path = std::filesystem::temp_directory_path() / "lims_sig.lmsd";
    lims::save_dataset(ds, path);
    const auto back = lims::load_dataset(path);
    ASSERT_EQ(back.size(), 500u);
    for (std::size_t i = 0; i < back.size(); ++i)
        EXPECT_EQ(back.records[i].payload, ds.records[i].payload);
    std::filesystem::remove(path);
}

} // namespace
