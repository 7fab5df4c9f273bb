#ifndef GAZEFILT_STATS_HPP
#define GAZEFILT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gazefilt/errors.hpp"

namespace gazefilt {

/// Rows are blocks (subjects), columns are treatments (filter conditions).
using RankMatrix = std::vector<std::vector<double>>;

struct AcfResult {
    std::vector<double> r;           /// lags 0..max_lag, r[0] = 1
    std::size_t         n{0};
    std::vector<bool>   significant; /// |r[k]| > z_{α/2}/√n; lag 0 is always flagged false
    double              alpha{0.05};
};

struct FriedmanResult {
    double              chi2{0.0};
    std::size_t         df{0};
    double              p{1.0};
    std::vector<double> mean_ranks;
};

struct TukeyComparison {
    std::size_t first{0};
    std::size_t second{0};
    double      difference{0.0}; /// mean_rank[first] - mean_rank[second]
    double      q{0.0};          /// studentized range statistic
    double      p{1.0};          /// family-wise adjusted
};

[[nodiscard]] inline double normal_quantile_upper(double tail) {
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>{}, tail));
}

/// Sample autocorrelation r[k] = Σ(x_t - x̄)(x_{t+k} - x̄) / Σ(x_t - x̄)² with
/// large-sample white-noise significance flags at level alpha.
[[nodiscard]] inline AcfResult acf(std::span<const double> signal, std::size_t max_lag = 5, double alpha = 0.05) {
    const std::size_t n = signal.size();
    detail::require(n >= max_lag + 2, "acf: need at least max_lag + 2 samples");
    detail::require(alpha > 0.0 && alpha < 1.0, "acf: alpha must be in (0, 1)");
    const double mean = std::reduce(signal.begin(), signal.end()) / static_cast<double>(n);
    std::vector<double> centered(n);
    std::ranges::transform(signal, centered.begin(), [mean](double v) { return v - mean; });
    const double denom = std::inner_product(centered.begin(), centered.end(), centered.begin(), 0.0);
    if (!(denom > 0.0)) {
        throw DegenerateInput("acf: signal has zero variance");
    }

    AcfResult result;
    result.n     = n;
    result.alpha = alpha;
    result.r.resize(max_lag + 1);
    result.significant.resize(max_lag + 1, false);
    const double bound = normal_quantile_upper(alpha / 2.0) / std::sqrt(static_cast<double>(n));
    result.r[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += centered[t] * centered[t + k];
        }
        result.r[k]           = acc / denom;
        result.significant[k] = std::abs(result.r[k]) > bound;
    }
    return result;
}

/// atanh(r), defined for |r| < 1.
[[nodiscard]] inline double fisher_z(double r) {
    detail::require(std::abs(r) < 1.0, "fisher_z: |r| must be < 1, got " + std::to_string(r));
    return std::atanh(r);
}

/// Average ranks (1-based) of a row; tied values share the mean of their positions.
[[nodiscard]] inline std::vector<double> average_ranks(std::span<const double> row) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), 0U);
    std::ranges::stable_sort(order, [&](std::size_t i, std::size_t j) { return row[i] < row[j]; });
    std::vector<double> ranks(row.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i + 1;
        while (j < order.size() && row[order[j]] == row[order[i]]) {
            ++j;
        }
        const double rank = 0.5 * static_cast<double>(i + j + 1); // mean of positions i+1 .. j
        for (std::size_t m = i; m < j; ++m) {
            ranks[order[m]] = rank;
        }
        i = j;
    }
    return ranks;
}

/// Upper tail of the chi-square distribution.
[[nodiscard]] inline double chi_square_sf(double x, double df) {
    if (x <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

namespace detail {

inline void check_rank_matrix(const RankMatrix& values, const char* who) {
    require(values.size() >= 2, std::string(who) + ": need at least 2 rows (blocks)");
    const std::size_t k = values.front().size();
    require(k >= 2, std::string(who) + ": need at least 2 treatments");
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i].size() == k, std::string(who) + ": row " + std::to_string(i) + " has " +
                                           std::to_string(values[i].size()) + " columns, expected " +
                                           std::to_string(k));
        for (double v : values[i]) {
            require(std::isfinite(v), std::string(who) + ": non-finite value in row " + std::to_string(i));
        }
    }
}

inline std::vector<double> mean_ranks(const RankMatrix& values) {
    const std::size_t   k = values.front().size();
    std::vector<double> sums(k, 0.0);
    for (const auto& row : values) {
        const auto ranks = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) {
            sums[j] += ranks[j];
        }
    }
    for (auto& s : sums) {
        s /= static_cast<double>(values.size());
    }
    return sums;
}

} // namespace detail

/// Friedman rank test with the standard tie correction.
[[nodiscard]] inline FriedmanResult friedman_test(const RankMatrix& values) {
    detail::check_rank_matrix(values, "friedman_test");
    const auto n  = static_cast<double>(values.size());
    const auto kk = values.front().size();
    const auto k  = static_cast<double>(kk);

    std::vector<double> rank_sums(kk, 0.0);
    double              tie_term = 0.0; // Σ (t³ - t) over tie groups
    for (const auto& row : values) {
        const auto ranks = average_ranks(row);
        for (std::size_t j = 0; j < kk; ++j) {
            rank_sums[j] += ranks[j];
        }
        std::vector<double> sorted(row.begin(), row.end());
        std::ranges::sort(sorted);
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i + 1;
            while (j < sorted.size() && sorted[j] == sorted[i]) {
                ++j;
            }
            const auto t = static_cast<double>(j - i);
            tie_term += t * t * t - t;
            i = j;
        }
    }

    FriedmanResult result;
    result.df = kk - 1;
    for (const double r : rank_sums) {
        result.mean_ranks.push_back(r / n);
    }
    const double sum_sq     = std::inner_product(rank_sums.begin(), rank_sums.end(), rank_sums.begin(), 0.0);
    const double raw        = 12.0 / (n * k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
    const double correction = 1.0 - tie_term / (n * k * (k * k - 1.0));
    if (correction <= 1e-12) {
        result.chi2 = 0.0;
        result.p    = 1.0;
        return result;
    }
    result.chi2 = std::max(0.0, raw / correction);
    result.p    = std::clamp(chi_square_sf(result.chi2, static_cast<double>(result.df)), 0.0, 1.0);
    return result;
}

/// Upper tail of the range of k independent standard normals:
/// P(range > q) = 1 - k·∫φ(z)[Φ(z) - Φ(z - q)]^{k-1} dz.
[[nodiscard]] inline double studentized_range_sf(double q, std::size_t k) {
    detail::require(k >= 2, "studentized_range_sf: k must be >= 2");
    detail::require(q >= 0.0 && !std::isnan(q), "studentized_range_sf: q must be >= 0");
    if (q == 0.0) {
        return 1.0;
    }
    if (std::isinf(q)) {
        return 0.0;
    }
    const boost::math::normal_distribution<double> normal;
    const double                                   exponent = static_cast<double>(k - 1);
    auto integrand = [&](double z) {
        const double inner = boost::math::cdf(normal, z) - boost::math::cdf(normal, z - q);
        return boost::math::pdf(normal, z) * std::pow(inner, exponent);
    };
    double error = 0.0;
    // φ(z) < 1e-22 outside [-10, 10 + q]; the tails contribute nothing measurable
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, -10.0, 10.0 + q, 15, 1e-13, &error);
    return std::clamp(1.0 - static_cast<double>(k) * integral, 0.0, 1.0);
}

/// All pairwise comparisons of Friedman mean ranks, adjusted with the
/// studentized range (infinite df). SE of a mean rank is √(k(k+1)/(12n)).
[[nodiscard]] inline std::vector<TukeyComparison> tukey_hsd_on_ranks(const RankMatrix& values) {
    detail::check_rank_matrix(values, "tukey_hsd_on_ranks");
    const auto        ranks = detail::mean_ranks(values);
    const std::size_t k     = ranks.size();
    const double      n     = static_cast<double>(values.size());
    const double      se    = std::sqrt(static_cast<double>(k) * static_cast<double>(k + 1) / (12.0 * n));

    std::vector<TukeyComparison> out;
    out.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            TukeyComparison c;
            c.first      = i;
            c.second     = j;
            c.difference = ranks[i] - ranks[j];
            c.q          = std::abs(c.difference) / se;
            c.p          = studentized_range_sf(c.q, k);
            out.push_back(c);
        }
    }
    return out;
}

/// Median; averages the two middle values for even sizes.
[[nodiscard]] inline double median(std::vector<double> values) {
    detail::require(!values.empty(), "median: empty input");
    const std::size_t mid = values.size() / 2;
    std::ranges::nth_element(values, values.begin() + static_cast<std::ptrdiff_t>(mid));
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

struct Condition {
    std::string                      name;
    std::vector<std::vector<double>> blocks;
};

struct LagComparison {
    std::size_t                  lag{1};
    FriedmanResult               friedman;
    std::vector<TukeyComparison> tukey;
};

struct AcfStudy {
    std::vector<std::string>              conditions;
    std::size_t                           n_blocks{0};
    std::size_t                           max_lag{5};
    double                                alpha{0.05};
    std::vector<std::vector<AcfResult>>   acfs;               /// [condition][block]
    std::vector<std::vector<double>>      median_acf;         /// [condition][lag 0..max_lag]
    std::vector<std::vector<double>>      median_fisher_z;    /// [condition][lag 0..max_lag], lag 0 is NaN
    std::vector<std::vector<std::size_t>> significant_counts; /// [condition][lag 0..max_lag]
    std::vector<LagComparison>            comparisons;        /// lags 1..min(3, max_lag)
};

/// Per-block ACFs for every condition, then for lags 1..3 a Friedman test on
/// the Fisher-Z matrix (blocks × conditions) followed by Tukey HSD on mean ranks.
[[nodiscard]] inline AcfStudy run_acf_study(std::span<const Condition> conditions, std::size_t max_lag = 5,
                                            double alpha = 0.05) {
    detail::require(conditions.size() >= 2, "run_acf_study: need at least 2 conditions");
    const std::size_t n_blocks = conditions.front().blocks.size();
    detail::require(n_blocks >= 2, "run_acf_study: need at least 2 blocks per condition");
    for (const auto& c : conditions) {
        detail::require(c.blocks.size() == n_blocks, "run_acf_study: condition '" + c.name + "' has " +
                                                         std::to_string(c.blocks.size()) + " blocks, expected " +
                                                         std::to_string(n_blocks));
        for (std::size_t b = 0; b < n_blocks; ++b) {
            detail::require(c.blocks[b].size() == conditions.front().blocks[b].size(),
                            "run_acf_study: block " + std::to_string(b) + " of '" + c.name + "' is misaligned");
        }
    }
    detail::require(max_lag >= 1, "run_acf_study: max_lag must be >= 1");

    AcfStudy study;
    study.n_blocks = n_blocks;
    study.max_lag  = max_lag;
    study.alpha    = alpha;
    for (const auto& c : conditions) {
        study.conditions.push_back(c.name);
        std::vector<AcfResult> per_block;
        per_block.reserve(n_blocks);
        for (const auto& block : c.blocks) {
            per_block.push_back(acf(block, max_lag, alpha));
        }
        std::vector<double>      medians(max_lag + 1);
        std::vector<double>      z_medians(max_lag + 1, std::nan(""));
        std::vector<std::size_t> counts(max_lag + 1, 0);
        for (std::size_t lag = 0; lag <= max_lag; ++lag) {
            std::vector<double> column;
            std::vector<double> z_column;
            for (const auto& a : per_block) {
                column.push_back(a.r[lag]);
                if (lag > 0) {
                    z_column.push_back(fisher_z(a.r[lag]));
                }
                counts[lag] += a.significant[lag] ? 1U : 0U;
            }
            medians[lag] = median(column);
            if (lag > 0) {
                z_medians[lag] = median(z_column);
            }
        }
        study.acfs.push_back(std::move(per_block));
        study.median_acf.push_back(std::move(medians));
        study.median_fisher_z.push_back(std::move(z_medians));
        study.significant_counts.push_back(std::move(counts));
    }

    for (std::size_t lag = 1; lag <= std::min<std::size_t>(3, max_lag); ++lag) {
        RankMatrix matrix(n_blocks, std::vector<double>(conditions.size()));
        for (std::size_t b = 0; b < n_blocks; ++b) {
            for (std::size_t c = 0; c < conditions.size(); ++c) {
                matrix[b][c] = fisher_z(study.acfs[c][b].r[lag]);
            }
        }
        study.comparisons.push_back({lag, friedman_test(matrix), tukey_hsd_on_ranks(matrix)});
    }
    return study;
}

} // namespace gazefilt

#endif // GAZEFILT_STATS_HPP
