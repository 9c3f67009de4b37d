#pragma once

#include <map>
#include <string>
#include <vector>

#include "tickvar/core/market_data.hpp"
#include "tickvar/vol/covariance.hpp"

namespace tickvar::vol {

struct EwmaParams {
    double lambda = 0.94;
    int lookback_days = 5;
    TimestampMs bar_interval = 30 * kMsPerMinute;
};

// Number of bar intervals per day; 48 for 30-minute bars.
inline double bars_per_day(TimestampMs bar_interval) {
    return static_cast<double>(kMsPerDay) / static_cast<double>(bar_interval);
}

// Exponentially weighted (co)variance of two aligned return series, seeded
// with the sample (co)variance over the lookback, scaled to `horizon_days`.
inline double ewma_forecast(const ReturnSeries& r1, const ReturnSeries& r2, double lambda, double horizon_days) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("ewma_forecast: lambda must lie in (0, 1)");
    if (r1.interval != r2.interval) throw ContractViolation("ewma_forecast: return intervals differ");
    const auto [a, b] = align_returns(r1, r2);
    const std::size_t n = a.size();
    if (n < 2) throw InsufficientData("ewma_forecast: need at least 2 aligned returns, got " + std::to_string(n));

    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a.values[i];
        mb += b.values[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sigma = 0.0;
    for (std::size_t i = 0; i < n; ++i) sigma += (a.values[i] - ma) * (b.values[i] - mb);
    sigma /= static_cast<double>(n - 1);

    for (std::size_t i = 0; i < n; ++i) sigma = lambda * sigma + (1.0 - lambda) * a.values[i] * b.values[i];

    return bars_per_day(r1.interval) * horizon_days * sigma;
}

inline CovarianceForecast ewma_covariance_matrix(const std::vector<ReturnSeries>& returns, double lambda,
                                                 double horizon_days) {
    CovarianceForecast out;
    out.model = Model::ewma;
    out.horizon_days = horizon_days;
    const auto n = static_cast<Eigen::Index>(returns.size());
    out.sigma = Matrix::Zero(n, n);
    for (const auto& r : returns) out.syms.push_back(r.sym);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = ewma_forecast(returns[static_cast<std::size_t>(i)],
                                           returns[static_cast<std::size_t>(j)], lambda, horizon_days);
            out.sigma(i, j) = v;
            out.sigma(j, i) = v;
        }
    return out;
}

} // namespace tickvar::vol
