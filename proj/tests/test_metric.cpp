#include "lims/metric.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

namespace {

using lims::Metric;
using lims::Payload;

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t d) {
    std::vector<double> v(d);
    for (auto& x : v)
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return v;
}

// Independent componentwise oracle: accumulate in long double, no library
// reuse.
double l2_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<long double>(a[i] - b[i]) * static_cast<long double>(a[i] - b[i]);
    return static_cast<double>(std::sqrt(s));
}

double l1_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::abs(static_cast<long double>(a[i]) - static_cast<long double>(b[i]));
    return static_cast<double>(s);
}

// Full-matrix Levenshtein, coded independently of the two-row version.
std::size_t edit_oracle(const std::string& s, const std::string& t) {
    std::vector<std::vector<std::size_t>> dp(s.size() + 1,
                                             std::vector<std::size_t>(t.size() + 1, 0));
    for (std::size_t i = 0; i <= s.size(); ++i)
        dp[i][0] = i;
    for (std::size_t j = 0; j <= t.size(); ++j)
        dp[0][j] = j;
    for (std::size_t i = 1; i <= s.size(); ++i)
        for (std::size_t j = 1; j <= t.size(); ++j)
            dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                                 dp[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1)});
    return dp[s.size()][t.size()];
}

TEST(L2Distance, PythagoreanTriple) {
    EXPECT_DOUBLE_EQ(lims::l2_distance(std::vector{0.0, 0.0}, std::vector{3.0, 4.0}), 5.0);
}

TEST(L2Distance, IdentityIsZero) {
    const std::vector v{0.3, 0.7, 0.1};
    EXPECT_DOUBLE_EQ(lims::l2_distance(v, v), 0.0);
}

TEST(L2Distance, MatchesComponentwiseOracle) {
    std::mt19937_64 rng(7);
    const auto a = random_vec(rng, 8);
    const auto b = random_vec(rng, 8);
    EXPECT_NEAR(lims::l2_distance(a, b), l2_oracle(a, b), 1e-12);
}

TEST(L2Distance, DimensionMismatchThrows) {
    EXPECT_THROW(lims::l2_distance(std::vector{1.0}, std::vector{1.0, 2.0}),
                 std::invalid_argument);
}

TEST(L1Distance, Manhattan) {
    EXPECT_DOUBLE_EQ(lims::l1_distance(std::vector{0.0, 0.0}, std::vector{3.0, 4.0}), 7.0);
}

TEST(L1Distance, IdentityIsZero) {
    const std::vector v{0.5, 0.25};
    EXPECT_DOUBLE_EQ(lims::l1_distance(v, v), 0.0);
}

TEST(L1Distance, MatchesComponentwiseOracle) {
    std::mt19937_64 rng(11);
    const auto a = random_vec(rng, 8);
    const auto b = random_vec(rng, 8);
    EXPECT_NEAR(lims::l1_distance(a, b), l1_oracle(a, b), 1e-12);
}

TEST(EditDistance, SingleSubstitution) {
    EXPECT_EQ(lims::edit_distance("game", "fame"), 1u);
    EXPECT_EQ(edit_oracle("game", "fame"), 1u);
}

TEST(EditDistance, IdentityIsZero) {
    EXPECT_EQ(lims::edit_distance("signature", "signature"), 0u);
}

TEST(EditDistance, GameVsAim) {
    EXPECT_EQ(lims::edit_distance("game", "aim"), 3u);
    EXPECT_EQ(edit_oracle("game", "aim"), 3u);
}

TEST(EditDistance, RandomPairsMatchOracle) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s(1 + rng() % 12, 'a'), t(1 + rng() % 12, 'a');
        for (auto& c : s)
            c = static_cast<char>('a' + rng() % 4);
        for (auto& c : t)
            c = static_cast<char>('a' + rng() % 4);
        EXPECT_EQ(lims::edit_distance(s, t), edit_oracle(s, t)) << s << " vs " << t;
    }
}

class MetricAxioms : public ::testing::TestWithParam<Metric> {};

TEST_P(MetricAxioms, HoldOnRandomTriples) {
    const Metric metric = GetParam();
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 300; ++trial) {
        Payload a, b, c;
        if (metric == Metric::Edit) {
            const auto make = [&] {
                std::string s(1 + rng() % 10, 'a');
                for (auto& ch : s)
                    ch = static_cast<char>('a' + rng() % 3);
                return Payload{s};
            };
            a = make();
            b = make();
            c = make();
        } else {
            a = random_vec(rng, 4);
            b = random_vec(rng, 4);
            c = random_vec(rng, 4);
        }
        const double ab = lims::distance(metric, a, b);
        const double ba = lims::distance(metric, b, a);
        const double ac = lims::distance(metric, a, c);
        const double bc = lims::distance(metric, b, c);
        EXPECT_GE(ab, 0.0);
        EXPECT_DOUBLE_EQ(ab, ba);
        EXPECT_LE(ac, ab + bc + 1e-12);
        EXPECT_EQ(ab == 0.0, lims::payload_equal(a, b));
        EXPECT_DOUBLE_EQ(lims::distance(metric, a, a), 0.0);
    }
}

INSTANTIATE_TEST_SUITE_P(AllMetrics, MetricAxioms,
                         ::testing::Values(Metric::L2, Metric::L1, Metric::Edit));

} // namespace
