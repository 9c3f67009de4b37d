#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "tickvar/core/time.hpp"
#include "tickvar/vol/linalg.hpp"

namespace tickvar::backtest {

struct TestReport {
    std::string test;
    std::optional<double> statistic; // empty when not applicable
    std::optional<double> p_value;
    double significance = 0.05;
    bool reject = false;
    int group = -1;
    std::size_t samples = 0;

    bool applicable() const { return statistic.has_value(); }
};

// Upper tail P(X >= observed) for X ~ Binomial(n, p).
inline double binomial_coverage(std::size_t n, double p, std::size_t observed) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("binomial_coverage: p must lie in (0, 1)");
    if (observed > n) throw DomainError("binomial_coverage: observed exceeds sample count");
    if (observed == 0) return 1.0;
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(observed - 1)));
}

inline TestReport coverage_test(std::size_t n, double p, std::size_t observed, double significance = 0.01) {
    TestReport r;
    r.test = "binomial";
    r.statistic = static_cast<double>(observed);
    r.p_value = binomial_coverage(n, p, observed);
    r.significance = significance;
    r.reject = *r.p_value < significance;
    r.samples = n;
    return r;
}

// Upper critical values of chi-square(1) at the levels used in the tables.
inline double chi2_critical(double significance) {
    if (std::abs(significance - 0.10) < 1e-12) return 2.706;
    if (std::abs(significance - 0.05) < 1e-12) return 3.841;
    if (std::abs(significance - 0.01) < 1e-12) return 6.635;
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared_distribution<double>(1.0), significance));
}

struct TransitionCounts {
    std::size_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
};

inline TransitionCounts transition_counts(std::span<const int> indicators) {
    TransitionCounts c;
    for (std::size_t t = 1; t < indicators.size(); ++t) {
        const bool a = indicators[t - 1] != 0, b = indicators[t] != 0;
        if (!a && !b) ++c.n00;
        else if (!a && b) ++c.n01;
        else if (a && !b) ++c.n10;
        else ++c.n11;
    }
    return c;
}

namespace detail {

// n * ln(p) with 0 * ln(0) = 0.
inline double xlogy(std::size_t n, double p) { return n == 0 ? 0.0 : static_cast<double>(n) * std::log(p); }

} // namespace detail

// Christoffersen first-order Markov independence statistic; empty when no
// violation occurs. A conditional row with no observations contributes 1.
inline std::optional<double> christoffersen_statistic(const TransitionCounts& c) {
    const std::size_t total = c.n00 + c.n01 + c.n10 + c.n11;
    if (total == 0 || c.n01 + c.n11 == 0) return std::nullopt;
    const double pi = static_cast<double>(c.n01 + c.n11) / static_cast<double>(total);
    const double ll0 = detail::xlogy(c.n00 + c.n10, 1.0 - pi) + detail::xlogy(c.n01 + c.n11, pi);
    double ll1 = 0.0;
    if (const auto row0 = c.n00 + c.n01; row0 > 0) {
        const double pi0 = static_cast<double>(c.n01) / static_cast<double>(row0);
        ll1 += detail::xlogy(c.n00, 1.0 - pi0) + detail::xlogy(c.n01, pi0);
    }
    if (const auto row1 = c.n10 + c.n11; row1 > 0) {
        const double pi1 = static_cast<double>(c.n11) / static_cast<double>(row1);
        ll1 += detail::xlogy(c.n10, 1.0 - pi1) + detail::xlogy(c.n11, pi1);
    }
    return std::max(0.0, -2.0 * (ll0 - ll1));
}

inline double chi2_1_survival(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x)); }

inline TestReport christoffersen_lr(std::span<const int> indicators, double significance = 0.05) {
    if (indicators.size() < 2) throw InsufficientData("christoffersen_lr: need at least 2 indicators");
    TestReport r;
    r.test = "christoffersen_lr";
    r.significance = significance;
    r.samples = indicators.size();
    r.statistic = christoffersen_statistic(transition_counts(indicators));
    if (r.statistic) {
        r.p_value = chi2_1_survival(*r.statistic);
        r.reject = *r.statistic > chi2_critical(significance);
    }
    return r;
}

// Upper tail of F(d1, d2) via the regularized incomplete beta function.
inline double f_survival(double f, double d1, double d2) {
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    const double x = d2 / (d2 + d1 * f);
    return boost::math::ibeta(0.5 * d2, 0.5 * d1, x);
}

// Regression of I_t on a constant and k lags; F-test of all lag
// coefficients being zero. Empty when the response has no violations.
inline TestReport regression_f_test(std::span<const int> indicators, int k = 4, double significance = 0.05) {
    if (k < 1) throw DomainError("regression_f_test: k must be positive");
    const auto uk = static_cast<std::size_t>(k);
    if (indicators.size() <= uk + 5)
        throw InsufficientData("regression_f_test: need more than " + std::to_string(uk + 5) + " indicators");
    TestReport r;
    r.test = "regression_f";
    r.significance = significance;
    r.samples = indicators.size();

    const std::size_t n = indicators.size() - uk;
    vol::Vector y(static_cast<Eigen::Index>(n));
    vol::Matrix x(static_cast<Eigen::Index>(n), k + 1);
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        y(row) = indicators[t + uk];
        x(row, 0) = 1.0;
        for (int i = 1; i <= k; ++i) x(row, i) = indicators[t + uk - static_cast<std::size_t>(i)];
    }
    const double mean = y.mean();
    const double rss_r = (y.array() - mean).square().sum();
    if (rss_r == 0.0 || y.sum() == 0.0) return r; // no violations or no variation

    // Least squares by orthogonal decomposition: lag columns can be
    // collinear or constant in small samples.
    const Eigen::CompleteOrthogonalDecomposition<vol::Matrix> cod(x);
    const vol::Vector beta = cod.solve(y);
    const double rss_f = (y - x * beta).squaredNorm();
    const double d1 = k;
    const double d2 = static_cast<double>(n) - k - 1;
    const double tol = 1e-12 * rss_r;
    const double f = rss_f <= tol ? std::numeric_limits<double>::infinity()
                                  : std::max(0.0, (rss_r - rss_f) / d1) / (rss_f / d2);
    r.statistic = f;
    r.p_value = f_survival(f, d1, d2);
    r.reject = *r.p_value < significance;
    return r;
}

// Hour-of-day bucket: a sample at hour h goes to group h mod g.
inline int group_of(TimestampMs t, int groups) {
    const auto hour = (t - day_of(t)) / kMsPerHour;
    return static_cast<int>(hour % groups);
}

// Indices of the samples in each group, in input order.
inline std::vector<std::vector<std::size_t>> split_groups(std::span<const TimestampMs> times, int groups = 6) {
    if (groups < 1) throw DomainError("split_groups: need at least one group");
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(groups));
    for (std::size_t i = 0; i < times.size(); ++i) out[static_cast<std::size_t>(group_of(times[i], groups))].push_back(i);
    return out;
}

// Sample-weighted mean of group statistics. `na_as_zero` counts groups
// without a statistic as 0 (the LR convention: no violations gives LR = 0);
// otherwise such groups are left out and the weights renormalized.
inline std::optional<double> weighted_average(std::span<const TestReport> groups, bool na_as_zero) {
    double num = 0.0, den = 0.0;
    for (const auto& g : groups) {
        const double w = static_cast<double>(g.samples);
        if (g.statistic) {
            num += w * *g.statistic;
            den += w;
        } else if (na_as_zero) {
            den += w;
        }
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
}

} // namespace tickvar::backtest
