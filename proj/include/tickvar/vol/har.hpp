#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tickvar/core/market_data.hpp"
#include "tickvar/vol/covariance.hpp"
#include "tickvar/vol/linalg.hpp"

namespace tickvar::vol {

inline constexpr int kHarPeriodMinutes = 720;      // 12-hour realized measures
inline constexpr int kHarShortPeriods = 4;         // 2 days of 12-hour periods
inline constexpr int kHarLongPeriods = 10;         // 5 days of 12-hour periods
inline constexpr int kHarLookbackDays = 15;
inline constexpr std::size_t kHarExtraRows = 5;    // rows required beyond the regressor count

// One 12-hour period of realized measures; absent when the period had gaps.
struct RealizedPeriod {
    TimestampMs end_time = 0;
    std::optional<double> rv;
    std::optional<double> rq;
    std::optional<double> ret;
};

struct HarFit {
    std::vector<double> coefficients;
    std::vector<bool> dropped;       // constant regressors excluded from the fit
    double r_squared = 0.0;
    double residual_variance = 0.0;
    double condition_number = 0.0;
    std::size_t rows = 0;
    std::vector<double> residuals;
    Matrix design;                   // rows actually used, all columns
    Vector response;
};

namespace detail {

// OLS that excludes regressors with zero sample variance (their
// coefficient is reported as 0); column 0 is the intercept.
inline HarFit fit_with_constant_columns_dropped(const Matrix& x, const Vector& y) {
    HarFit fit;
    const Eigen::Index p = x.cols();
    fit.dropped.assign(static_cast<std::size_t>(p), false);
    std::vector<Eigen::Index> keep{0};
    for (Eigen::Index j = 1; j < p; ++j) {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
        if (sd <= 1e-12 * (1.0 + std::abs(mean)))
            fit.dropped[static_cast<std::size_t>(j)] = true;
        else
            keep.push_back(j);
    }
    Matrix xk(x.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) xk.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
    const OlsResult ols = ols_solve(xk, y);

    fit.coefficients.assign(static_cast<std::size_t>(p), 0.0);
    for (std::size_t k = 0; k < keep.size(); ++k)
        fit.coefficients[static_cast<std::size_t>(keep[k])] = ols.coefficients(static_cast<Eigen::Index>(k));
    fit.r_squared = ols.r_squared;
    fit.residual_variance = ols.residual_variance;
    fit.condition_number = ols.condition_number;
    fit.rows = static_cast<std::size_t>(x.rows());
    fit.residuals.assign(ols.residuals.data(), ols.residuals.data() + ols.residuals.size());
    fit.design = x;
    fit.response = y;
    return fit;
}

inline double mean_of_last(std::span<const std::optional<double>> v, std::size_t t, int k, bool& ok) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
        if (t < static_cast<std::size_t>(i) || !v[t - static_cast<std::size_t>(i)]) {
            ok = false;
            return 0.0;
        }
        s += *v[t - static_cast<std::size_t>(i)];
    }
    return s / k;
}

} // namespace detail

// LHARQ regressors for period t:
//   1, min(r_t, 0), log RV_t, log(sqrt(RQ_t) RV_t), log mean RV(2d), log mean RV(5d)
inline std::optional<std::vector<double>> lharq_regressors(std::span<const std::optional<double>> rv,
                                                           std::span<const std::optional<double>> ret,
                                                           std::span<const std::optional<double>> rq,
                                                           std::size_t t) {
    if (!rv[t] || !ret[t] || !rq[t] || !(*rv[t] > 0.0) || !(*rq[t] > 0.0)) return std::nullopt;
    bool ok = true;
    const double avg2 = detail::mean_of_last(rv, t, kHarShortPeriods, ok);
    const double avg5 = detail::mean_of_last(rv, t, kHarLongPeriods, ok);
    if (!ok || !(avg2 > 0.0) || !(avg5 > 0.0)) return std::nullopt;
    return std::vector<double>{1.0,
                               std::min(*ret[t], 0.0),
                               std::log(*rv[t]),
                               std::log(std::sqrt(*rq[t]) * *rv[t]),
                               std::log(avg2),
                               std::log(avg5)};
}

// Log-variance regression on 12-hour measures; row t predicts period t+1.
inline HarFit fit_lharq(std::span<const std::optional<double>> rv, std::span<const std::optional<double>> ret,
                        std::span<const std::optional<double>> rq) {
    if (rv.size() != ret.size() || rv.size() != rq.size())
        throw ContractViolation("fit_lharq: realized series lengths differ");
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (std::size_t t = 0; t + 1 < rv.size(); ++t) {
        if (!rv[t + 1] || !(*rv[t + 1] > 0.0)) continue;
        auto reg = lharq_regressors(rv, ret, rq, t);
        if (!reg) continue;
        rows.push_back(std::move(*reg));
        ys.push_back(std::log(*rv[t + 1]));
    }
    constexpr std::size_t regressors = 6;
    if (rows.size() < regressors + kHarExtraRows)
        throw InsufficientData("fit_lharq: " + std::to_string(rows.size()) + " usable rows, need " +
                               std::to_string(regressors + kHarExtraRows));
    Matrix x(static_cast<Eigen::Index>(rows.size()), regressors);
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < regressors; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    return detail::fit_with_constant_columns_dropped(x, y);
}

inline std::optional<std::vector<double>> har_corr_regressors(std::span<const std::optional<double>> rc, std::size_t t) {
    if (!rc[t]) return std::nullopt;
    bool ok = true;
    const double avg2 = detail::mean_of_last(rc, t, kHarShortPeriods, ok);
    const double avg5 = detail::mean_of_last(rc, t, kHarLongPeriods, ok);
    if (!ok) return std::nullopt;
    return std::vector<double>{1.0, *rc[t], avg2, avg5};
}

// Untransformed HAR on realized correlation.
inline HarFit fit_har_corr(std::span<const std::optional<double>> rcorr) {
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    for (std::size_t t = 0; t + 1 < rcorr.size(); ++t) {
        if (!rcorr[t + 1]) continue;
        auto reg = har_corr_regressors(rcorr, t);
        if (!reg) continue;
        rows.push_back(std::move(*reg));
        ys.push_back(*rcorr[t + 1]);
    }
    constexpr std::size_t regressors = 4;
    if (rows.size() < regressors + kHarExtraRows)
        throw InsufficientData("fit_har_corr: " + std::to_string(rows.size()) + " usable rows, need " +
                               std::to_string(regressors + kHarExtraRows));
    Matrix x(static_cast<Eigen::Index>(rows.size()), regressors);
    Vector y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < regressors; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    return detail::fit_with_constant_columns_dropped(x, y);
}

inline double predict(const HarFit& fit, const std::vector<double>& regressors) {
    double s = 0.0;
    for (std::size_t j = 0; j < regressors.size(); ++j) s += fit.coefficients[j] * regressors[j];
    return s;
}

// 12-hour realized measures for the `count` periods ending at `end`
// (period k covers (end - (k+1)*12h, end - k*12h]), oldest first.
inline std::vector<RealizedPeriod> realized_periods(const ReturnSeries& r5, TimestampMs end, int count) {
    std::vector<RealizedPeriod> out(static_cast<std::size_t>(count));
    const TimestampMs len = kHarPeriodMinutes * kMsPerMinute;
    for (int k = 0; k < count; ++k) {
        auto& p = out[static_cast<std::size_t>(count - 1 - k)];
        const TimestampMs to = end - k * len;
        p.end_time = to;
        const ReturnSeries w = slice_returns(r5, to - len, to);
        try {
            p.rv = realized_variance(w, kHarPeriodMinutes);
            p.rq = realized_quarticity(w, kHarPeriodMinutes);
            double s = 0.0;
            for (double v : w.values) s += v;
            p.ret = s;
        } catch (const InsufficientData&) {
            // incomplete period stays empty
        }
    }
    return out;
}

inline std::vector<std::optional<double>> realized_correlation_periods(const ReturnSeries& a, const ReturnSeries& b,
                                                                       TimestampMs end, int count) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(count));
    const TimestampMs len = kHarPeriodMinutes * kMsPerMinute;
    for (int k = 0; k < count; ++k) {
        const TimestampMs to = end - k * len;
        try {
            out[static_cast<std::size_t>(count - 1 - k)] =
                realized_correlation(slice_returns(a, to - len, to), slice_returns(b, to - len, to), kHarPeriodMinutes);
        } catch (const InsufficientData&) {
        } catch (const DegenerateCorrelation&) {
        }
    }
    return out;
}

struct HarDiagnostics {
    std::map<std::string, HarFit> variance_fits;
    std::map<std::string, HarFit> correlation_fits;   // key "A/B"
    std::map<std::string, double> raw_correlation_forecasts;
    std::vector<std::string> replaced_correlations;
};

// HAR-DRD covariance: per-sym LHARQ variance forecasts, per-pair HAR
// correlation forecasts, composed as D^1/2 R D^1/2. `one_minute_bars`
// holds trailing 1-minute TWAP bars per sym; `as_of` is the forecast origin.
inline CovarianceForecast har_forecast_covariance(const std::vector<std::vector<TwapBar>>& one_minute_bars,
                                                  const std::vector<std::string>& syms, TimestampMs as_of,
                                                  double horizon_days, HarDiagnostics* diag = nullptr) {
    if (syms.size() != one_minute_bars.size()) throw ContractViolation("har_forecast_covariance: syms/bars mismatch");
    const int periods = kHarLookbackDays * 2;
    const TimestampMs end = floor_to(as_of, 5 * kMsPerMinute);
    const auto n = static_cast<Eigen::Index>(syms.size());

    std::vector<ReturnSeries> r5(syms.size());
    Vector var(n);
    for (std::size_t i = 0; i < syms.size(); ++i) {
        r5[i] = log_returns(one_minute_bars[i], 5 * kMsPerMinute);
        r5[i].sym = syms[i];
        const auto per = realized_periods(r5[i], end, periods);
        std::vector<std::optional<double>> rv, rq, ret;
        for (const auto& p : per) {
            rv.push_back(p.rv);
            rq.push_back(p.rq);
            ret.push_back(p.ret);
        }
        HarFit fit;
        try {
            fit = fit_lharq(rv, ret, rq);
        } catch (const InsufficientData& e) {
            throw InsufficientData("HAR variance for '" + syms[i] + "': " + e.what());
        }
        const auto reg = lharq_regressors(rv, ret, rq, rv.size() - 1);
        if (!reg) throw InsufficientData("HAR variance for '" + syms[i] + "': latest 12-hour period incomplete");
        // 12-hour variance, t days = 2t periods
        var(static_cast<Eigen::Index>(i)) = std::exp(predict(fit, *reg)) * 2.0 * horizon_days;
        if (diag) diag->variance_fits[syms[i]] = std::move(fit);
    }

    Matrix corr = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto rc = realized_correlation_periods(r5[static_cast<std::size_t>(i)], r5[static_cast<std::size_t>(j)], end, periods);
            const std::string key = syms[static_cast<std::size_t>(i)] + "/" + syms[static_cast<std::size_t>(j)];
            HarFit fit;
            try {
                fit = fit_har_corr(rc);
            } catch (const InsufficientData& e) {
                throw InsufficientData("HAR correlation for " + key + ": " + e.what());
            }
            const auto reg = har_corr_regressors(rc, rc.size() - 1);
            if (!reg) throw InsufficientData("HAR correlation for " + key + ": latest 12-hour period incomplete");
            double rho = predict(fit, *reg);
            if (diag) diag->raw_correlation_forecasts[key] = rho;
            if (!(rho >= -1.0 && rho <= 1.0)) {
                rho = std::clamp((*reg)[3], -1.0, 1.0); // trailing 5-day average realized correlation
                if (diag) diag->replaced_correlations.push_back(key);
            }
            corr(i, j) = corr(j, i) = rho;
            if (diag) diag->correlation_fits[key] = std::move(fit);
        }

    const Vector sd = var.cwiseSqrt();
    Matrix sigma = sd.asDiagonal() * corr * sd.asDiagonal();
    sigma = 0.5 * (sigma + sigma.transpose());
    const PsdResult psd = ensure_psd(sigma);

    CovarianceForecast out;
    out.syms = syms;
    out.sigma = psd.matrix;
    out.horizon_days = horizon_days;
    out.model = Model::har;
    out.psd_adjusted = psd.adjusted;
    return out;
}

} // namespace tickvar::vol
