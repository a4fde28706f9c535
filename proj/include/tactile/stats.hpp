#pragma once

// Descriptive statistics and the Wilcoxon rank-sum (Mann-Whitney) test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> sd;  // sample sd (n - 1 denominator); absent for n == 1
};

inline SummaryStats summarize(std::span<const double> values)
{
    if (values.empty()) throw std::invalid_argument("summarize: empty sample");
    SummaryStats s;
    s.n = values.size();
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (!std::isfinite(v)) throw std::invalid_argument("summarize: non-finite value");
    }
    std::sort(sorted.begin(), sorted.end());
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t k = 0;
    for (double v : sorted) {
        ++k;
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    s.mean = mean;
    if (s.n >= 2) s.sd = std::sqrt(std::max(0.0, m2 / static_cast<double>(s.n - 1)));
    return s;
}

enum class WilcoxonMethod { Exact, NormalApprox };

inline constexpr std::string_view to_string(WilcoxonMethod m)
{
    return m == WilcoxonMethod::Exact ? "exact" : "normal_approx";
}

struct WilcoxonResult {
    double W = 0.0;  // Mann-Whitney U of the first sample
    double p_value = 1.0;
    WilcoxonMethod method = WilcoxonMethod::Exact;
};

namespace detail {

/// Midranks (1-based) of the pooled sample; also returns sum(t^3 - t) over tie groups.
inline std::vector<double> midranks(std::span<const double> pooled, double& tie_term)
{
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(pooled.size());
    tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
        const auto t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    return ranks;
}

/// counts[u] = number of ways n ranks out of n + m (no ties) give U = u.
inline std::vector<double> mann_whitney_counts(std::size_t n, std::size_t m)
{
    // table[i][j][u] via f(i, j, u) = f(i - 1, j, u - j) + f(i, j - 1, u);
    // rolled over j for a fixed i using the previous i layer.
    const std::size_t max_u = n * m;
    std::vector<std::vector<double>> prev(m + 1, std::vector<double>(max_u + 1, 0.0));
    for (std::size_t j = 0; j <= m; ++j) prev[j][0] = 1.0;  // i = 0: only U = 0
    for (std::size_t i = 1; i <= n; ++i) {
        std::vector<std::vector<double>> cur(m + 1, std::vector<double>(max_u + 1, 0.0));
        cur[0][0] = 1.0;  // j = 0: only U = 0
        for (std::size_t j = 1; j <= m; ++j) {
            for (std::size_t u = 0; u <= i * j; ++u) {
                double v = cur[j - 1][u];
                if (u >= j) v += prev[j][u - j];
                cur[j][u] = v;
            }
        }
        prev = std::move(cur);
    }
    return prev[m];
}

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

inline constexpr std::size_t kExactWilcoxonMaxSize = 10;

/// Two-sided rank-sum test. Exact when both samples have at most 10 values
/// and there are no ties; otherwise normal approximation with tie and
/// continuity corrections.
inline WilcoxonResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y)
{
    if (x.empty() || y.empty()) throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    for (double v : pooled) {
        if (!std::isfinite(v)) throw std::invalid_argument("wilcoxon_rank_sum: non-finite value");
    }

    double tie_term = 0.0;
    const std::vector<double> ranks = detail::midranks(pooled, tie_term);
    const auto n = static_cast<double>(x.size());
    const auto m = static_cast<double>(y.size());
    double rank_sum_x = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) rank_sum_x += ranks[i];

    WilcoxonResult res;
    res.W = rank_sum_x - n * (n + 1.0) / 2.0;

    if (x.size() <= kExactWilcoxonMaxSize && y.size() <= kExactWilcoxonMaxSize && tie_term == 0.0) {
        res.method = WilcoxonMethod::Exact;
        const std::vector<double> counts = detail::mann_whitney_counts(x.size(), y.size());
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto w = static_cast<std::size_t>(std::llround(res.W));
        double lower = 0.0;
        double upper = 0.0;
        for (std::size_t u = 0; u < counts.size(); ++u) {
            if (u <= w) lower += counts[u];
            if (u >= w) upper += counts[u];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
        return res;
    }

    res.method = WilcoxonMethod::NormalApprox;
    const double big_n = n + m;
    const double mu = n * m / 2.0;
    const double var = n * m / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (!(var > 0.0)) {
        res.p_value = 1.0;
        return res;
    }
    const double z = std::max(0.0, std::abs(res.W - mu) - 0.5) / std::sqrt(var);
    res.p_value = std::clamp(2.0 * detail::normal_upper_tail(z), 0.0, 1.0);
    return res;
}

inline WilcoxonResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y)
{
    return wilcoxon_rank_sum(std::span<const double>(x), std::span<const double>(y));
}

inline SummaryStats summarize(const std::vector<double>& values)
{
    return summarize(std::span<const double>(values));
}

// ---------------------------------------------------------------------------
// Report formatting

/// Fixed-point with two decimals, e.g. 95.95.
inline std::string format_2dp(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

/// W as the shortest exact decimal: 878, 881.5.
inline std::string format_w(double w)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", w);
    return buf;
}

/// "95.95s (sd=42.77s)" style; `unit` is appended to both numbers.
inline std::string format_mean_sd(const SummaryStats& s, std::string_view unit = "", std::string_view mean_suffix = "")
{
    std::string out = format_2dp(s.mean);
    out += unit;
    out += mean_suffix;
    out += " (sd=";
    out += s.sd ? format_2dp(*s.sd) + std::string(unit) : std::string("NA");
    out += ")";
    return out;
}

inline std::string format_wilcoxon(const WilcoxonResult& r)
{
    return "W=" + format_w(r.W) + ", p=" + format_2dp(r.p_value);
}

}  // namespace tactile
