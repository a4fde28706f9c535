#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "tactile/stats.hpp"

using namespace tactile;

namespace {

std::vector<double> iota_values(int from, int count)
{
    std::vector<double> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), from);
    return v;
}

}  // namespace

TEST(Stats, SummarizeExamples)
{
    const SummaryStats a = summarize(std::vector<double>{2, 4});
    EXPECT_EQ(a.n, 2u);
    EXPECT_DOUBLE_EQ(a.mean, 3.0);
    ASSERT_TRUE(a.sd.has_value());
    EXPECT_NEAR(*a.sd, std::sqrt(2.0), 1e-15);

    const SummaryStats b = summarize(std::vector<double>{5, 5, 5});
    EXPECT_DOUBLE_EQ(b.mean, 5.0);
    EXPECT_EQ(*b.sd, 0.0);

    const SummaryStats c = summarize(std::vector<double>{7});
    EXPECT_DOUBLE_EQ(c.mean, 7.0);
    EXPECT_FALSE(c.sd.has_value());

    EXPECT_THROW(summarize(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(summarize(std::vector<double>{1, NAN}), std::invalid_argument);
}

TEST(Stats, SummarizeMatchesTwoPass)
{
    oracle::Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> v;
        for (int i = 0; i < 40; ++i) v.push_back(rng.uniform(0, 180));
        const SummaryStats s = summarize(v);
        const oracle::MeanSd ref = oracle::two_pass(v);
        EXPECT_NEAR(s.mean, ref.mean, 1e-12 * std::abs(ref.mean));
        EXPECT_NEAR(*s.sd, ref.sd, 1e-12 * ref.sd);
    }
}

TEST(Stats, WilcoxonExamples)
{
    const WilcoxonResult a = wilcoxon_rank_sum({1, 2}, {3, 4});
    EXPECT_EQ(a.W, 0.0);
    EXPECT_DOUBLE_EQ(a.p_value, 1.0 / 3.0);
    EXPECT_EQ(a.method, WilcoxonMethod::Exact);

    const WilcoxonResult b = wilcoxon_rank_sum({3, 4}, {1, 2});
    EXPECT_EQ(b.W, 4.0);
    EXPECT_DOUBLE_EQ(b.p_value, 1.0 / 3.0);

    const WilcoxonResult c = wilcoxon_rank_sum({1}, {2});
    EXPECT_EQ(c.W, 0.0);
    EXPECT_EQ(c.p_value, 1.0);

    EXPECT_THROW(wilcoxon_rank_sum({}, {1}), std::invalid_argument);
    EXPECT_THROW(wilcoxon_rank_sum({1}, {}), std::invalid_argument);
    EXPECT_THROW(wilcoxon_rank_sum({INFINITY}, {1}), std::invalid_argument);
}

TEST(Stats, WilcoxonOneSampleAgainstItself)
{
    std::vector<double> v = {10, 20, 20, 35, 50, 50, 50, 90};
    const WilcoxonResult r = wilcoxon_rank_sum(v, v);
    EXPECT_EQ(r.W, 32.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.method, WilcoxonMethod::NormalApprox);

    const WilcoxonResult same = wilcoxon_rank_sum({5, 5}, {5, 5, 5});
    EXPECT_EQ(same.W, 3.0);
    EXPECT_EQ(same.p_value, 1.0);
}

TEST(Stats, WilcoxonNormalApproxOracle)
{
    // Large tie-free samples: z with continuity correction, no tie term.
    const std::vector<double> x = iota_values(1, 30);
    std::vector<double> y = iota_values(16, 25);
    for (double& v : y) v += 0.5;
    const WilcoxonResult r = wilcoxon_rank_sum(x, y);
    EXPECT_EQ(r.method, WilcoxonMethod::NormalApprox);
    EXPECT_EQ(r.W, oracle::pair_count_u(x, y));
    const double n = 30, m = 25;
    const double z = (std::abs(r.W - n * m / 2) - 0.5) / std::sqrt(n * m * (n + m + 1) / 12);
    EXPECT_NEAR(r.p_value, std::erfc(z / std::sqrt(2.0)), 1e-14);

    // With ties the variance shrinks by the tie term.
    const std::vector<double> tx = {1, 2, 2, 3, 3, 3, 4, 5, 6, 7, 8};
    const std::vector<double> ty = {2, 3, 5, 5, 9, 9, 9, 10};
    const WilcoxonResult t = wilcoxon_rank_sum(tx, ty);
    EXPECT_EQ(t.W, oracle::pair_count_u(tx, ty));
    const double tn = 11, tm = 8, big = 19;
    const double ties = (27 - 3) + (64 - 4) + (27 - 3) + (27 - 3);  // 2s, 3s, 5s, 9s
    const double var = tn * tm / 12 * ((big + 1) - ties / (big * (big - 1)));
    const double tz = (std::abs(t.W - tn * tm / 2) - 0.5) / std::sqrt(var);
    EXPECT_NEAR(t.p_value, std::erfc(tz / std::sqrt(2.0)), 1e-14);
}

TEST(Stats, ExactSizeLimit)
{
    EXPECT_EQ(wilcoxon_rank_sum(iota_values(0, 10), iota_values(100, 10)).method, WilcoxonMethod::Exact);
    EXPECT_EQ(wilcoxon_rank_sum(iota_values(0, 11), iota_values(100, 10)).method, WilcoxonMethod::NormalApprox);
    const WilcoxonResult r = wilcoxon_rank_sum(iota_values(0, 10), iota_values(100, 10));
    EXPECT_NEAR(r.p_value, 2.0 / 184756.0, 1e-18);  // 2 / C(20, 10)
}

TEST(Stats, Formatting)
{
    EXPECT_EQ(format_2dp(95.954), "95.95");
    EXPECT_EQ(format_2dp(0.425), "0.42");
    EXPECT_EQ(format_w(878), "878");
    EXPECT_EQ(format_w(881.5), "881.5");
    const SummaryStats t{40, 95.95, 42.77};
    EXPECT_EQ(format_mean_sd(t, "s"), "95.95s (sd=42.77s)");
    const SummaryStats c{40, 5.85, 1.28};
    EXPECT_EQ(format_mean_sd(c, "", "/7"), "5.85/7 (sd=1.28)");
    EXPECT_EQ(format_mean_sd(SummaryStats{1, 3, std::nullopt}), "3.00 (sd=NA)");
    EXPECT_EQ(format_wilcoxon({881.5, 0.4321, WilcoxonMethod::NormalApprox}), "W=881.5, p=0.43");
}

TEST(StatsProperty, SummarizePermutationInvariant)
{
    oracle::Rng rng(42);
    std::vector<double> v;
    for (int i = 0; i < 40; ++i) v.push_back(rng.uniform(-1e3, 1e3));
    const SummaryStats base = summarize(v);
    for (int rep = 0; rep < 50; ++rep) {
        std::shuffle(v.begin(), v.end(), rng.engine());
        const SummaryStats s = summarize(v);
        EXPECT_EQ(s.mean, base.mean);
        EXPECT_EQ(*s.sd, *base.sd);
    }
}

TEST(StatsProperty, ExactCountsMatchEnumeration)
{
    for (int n = 1; n <= 6; ++n) {
        for (int m = 1; m <= 6; ++m) {
            const auto counts = detail::mann_whitney_counts(n, m);
            const auto ref = oracle::enumerate_u_counts(n, m);
            ASSERT_EQ(counts.size(), ref.size());
            for (std::size_t u = 0; u < ref.size(); ++u) ASSERT_EQ(counts[u], static_cast<double>(ref[u]));
        }
    }
}

TEST(StatsProperty, ExactPMatchesEnumerationForEveryRankPattern)
{
    for (int n = 1; n <= 6; ++n) {
        for (int m = 1; m <= 6; ++m) {
            for (std::uint32_t mask = 0; mask < (1u << (n + m)); ++mask) {
                if (__builtin_popcount(mask) != n) continue;
                std::vector<double> x, y;
                for (int i = 0; i < n + m; ++i) ((mask >> i) & 1 ? x : y).push_back(i + 1);
                const WilcoxonResult r = wilcoxon_rank_sum(x, y);
                const double u = oracle::pair_count_u(x, y);
                ASSERT_EQ(r.method, WilcoxonMethod::Exact);
                ASSERT_EQ(r.W, u);
                ASSERT_NEAR(r.p_value, oracle::enumerated_p(n, m, static_cast<int>(u)), 1e-15);
            }
        }
    }
}

TEST(StatsProperty, SwapIdentity)
{
    oracle::Rng rng(43);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = rng.integer(1, 10), m = rng.integer(1, 10);
        std::vector<double> pool(static_cast<std::size_t>(n + m));
        std::iota(pool.begin(), pool.end(), 0.0);
        for (double& v : pool) v = v * 1.7 + rng.uniform(0, 1);
        std::shuffle(pool.begin(), pool.end(), rng.engine());
        const std::vector<double> x(pool.begin(), pool.begin() + n), y(pool.begin() + n, pool.end());
        const WilcoxonResult a = wilcoxon_rank_sum(x, y);
        const WilcoxonResult b = wilcoxon_rank_sum(y, x);
        EXPECT_EQ(a.W + b.W, n * m);
        EXPECT_EQ(a.p_value, b.p_value);
    }
}

TEST(StatsProperty, ShiftInvariance)
{
    oracle::Rng rng(44);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(static_cast<std::size_t>(rng.integer(1, 15))), y(static_cast<std::size_t>(rng.integer(1, 15)));
        for (double& v : x) v = rng.integer(0, 20);
        for (double& v : y) v = rng.integer(0, 20);
        const WilcoxonResult a = wilcoxon_rank_sum(x, y);
        const double c = rng.integer(-1000, 1000);
        for (double& v : x) v += c;
        for (double& v : y) v += c;
        const WilcoxonResult b = wilcoxon_rank_sum(x, y);
        EXPECT_EQ(a.W, b.W);
        EXPECT_EQ(a.p_value, b.p_value);
    }
}

TEST(StatsProperty, WMatchesPairCountWithTies)
{
    oracle::Rng rng(45);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(static_cast<std::size_t>(rng.integer(1, 30))), y(static_cast<std::size_t>(rng.integer(1, 30)));
        for (double& v : x) v = rng.integer(0, 6);
        for (double& v : y) v = rng.integer(0, 6);
        const WilcoxonResult r = wilcoxon_rank_sum(x, y);
        EXPECT_EQ(r.W, oracle::pair_count_u(x, y));
        EXPECT_GE(r.p_value, 0.0);
        EXPECT_LE(r.p_value, 1.0);
    }
}
