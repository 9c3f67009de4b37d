#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tickvar/core/error.hpp"
#include "tickvar/core/types.hpp"

namespace tickvar {

// Folds a batch of ticks (one symbol, one minute bucket) into a running
// per-minute mean. Equivalent to averaging every contributing price at once.
inline TwapBar aggregate_twap(std::span<const Tick> ticks, const std::optional<TwapBar>& existing = {}) {
    TwapBar bar;
    double sum = 0.0;
    std::int64_t count = 0;
    if (existing) {
        bar = *existing;
        sum = existing->twap * static_cast<double>(existing->count);
        count = existing->count;
    } else if (!ticks.empty()) {
        bar.sym = ticks.front().instrument;
        bar.minute = minute_of(ticks.front().time);
    } else {
        throw ContractViolation("aggregate_twap: empty batch and no existing bar");
    }

    for (const Tick& t : ticks) {
        if (t.instrument != bar.sym)
            throw ContractViolation("aggregate_twap: mixed symbols '" + bar.sym + "' and '" + t.instrument + "'");
        if (minute_of(t.time) != bar.minute)
            throw ContractViolation("aggregate_twap: tick at " + format_iso8601(t.time) +
                                    " outside minute " + format_iso8601(bar.minute));
        const auto px = valuation_price(t);
        if (!px) throw ContractViolation("aggregate_twap: tick for '" + t.instrument + "' has no price");
        sum += *px;
        ++count;
    }
    bar.count = count;
    bar.twap = count > 0 ? sum / static_cast<double>(count) : 0.0;
    return bar;
}

// Coarser TWAP bars from 1-min bars: every minute bar carries equal weight
// (time weighting across minutes). Bars are labelled by bucket start.
inline std::vector<TwapBar> resample_twap(std::span<const TwapBar> bars, TimestampMs interval) {
    if (interval <= 0 || interval % kMsPerMinute != 0)
        throw DomainError("resample_twap: interval must be a positive multiple of 1 minute");
    std::vector<TwapBar> out;
    double sum = 0.0;
    std::int64_t n = 0;
    std::int64_t ticks = 0;
    for (const TwapBar& b : bars) {
        const TimestampMs bucket = floor_to(b.minute, interval);
        if (out.empty() || out.back().minute != bucket) {
            if (!out.empty()) out.back().twap = sum / static_cast<double>(n);
            out.push_back(TwapBar{b.sym, bucket, 0.0, 0});
            sum = 0.0;
            n = 0;
            ticks = 0;
        }
        sum += b.twap;
        ++n;
        ticks += b.count;
        out.back().count = ticks;
    }
    if (!out.empty()) out.back().twap = sum / static_cast<double>(n);
    return out;
}

// Log returns between bars on the `interval` grid. Pairs broken by a missing
// grid bar are dropped, never filled.
inline ReturnSeries log_returns(std::span<const TwapBar> bars, TimestampMs interval) {
    if (interval <= 0 || interval % kMsPerMinute != 0)
        throw DomainError("log_returns: interval must be a positive multiple of 1 minute");
    ReturnSeries out;
    out.interval = interval;
    if (!bars.empty()) out.sym = bars.front().sym;

    const TwapBar* prev = nullptr;
    for (const TwapBar& b : bars) {
        if (b.minute % interval != 0) continue;
        if (!(b.twap > 0.0))
            throw DomainError("log_returns: non-positive price for '" + b.sym + "' at " + format_iso8601(b.minute));
        if (prev && b.minute <= prev->minute)
            throw ContractViolation("log_returns: bars not sorted by minute");
        if (prev && b.minute - prev->minute == interval) {
            out.timestamps.push_back(b.minute);
            out.values.push_back(std::log(b.twap / prev->twap));
        }
        prev = &b;
    }
    return out;
}

// Keeps only the points whose timestamps appear in both series.
inline std::pair<ReturnSeries, ReturnSeries> align_returns(const ReturnSeries& a, const ReturnSeries& b) {
    ReturnSeries oa{a.sym, a.interval, {}, {}};
    ReturnSeries ob{b.sym, b.interval, {}, {}};
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a.timestamps[i] < b.timestamps[j]) {
            ++i;
        } else if (b.timestamps[j] < a.timestamps[i]) {
            ++j;
        } else {
            oa.timestamps.push_back(a.timestamps[i]);
            oa.values.push_back(a.values[i]);
            ob.timestamps.push_back(b.timestamps[j]);
            ob.values.push_back(b.values[j]);
            ++i;
            ++j;
        }
    }
    return {std::move(oa), std::move(ob)};
}

namespace detail {

inline std::size_t window_count(const ReturnSeries& r, int window_minutes, const char* who) {
    if (r.interval != 5 * kMsPerMinute)
        throw ContractViolation(std::string(who) + ": expects 5-minute returns");
    if (window_minutes <= 0 || window_minutes % 5 != 0)
        throw DomainError(std::string(who) + ": window must be a positive multiple of 5 minutes");
    const auto n = static_cast<std::size_t>(window_minutes / 5);
    if (r.size() != n)
        throw InsufficientData(std::string(who) + ": window of " + std::to_string(window_minutes) +
                               " min needs " + std::to_string(n) + " returns, got " + std::to_string(r.size()));
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r.timestamps[i] - r.timestamps[i - 1] != r.interval)
            throw InsufficientData(std::string(who) + ": window has a gap at " + format_iso8601(r.timestamps[i]));
    return n;
}

} // namespace detail

inline double realized_variance(const ReturnSeries& r, int window_minutes) {
    detail::window_count(r, window_minutes, "realized_variance");
    double rv = 0.0;
    for (double x : r.values) rv += x * x;
    return rv;
}

inline double realized_quarticity(const ReturnSeries& r, int window_minutes) {
    const auto n = detail::window_count(r, window_minutes, "realized_quarticity");
    double s = 0.0;
    for (double x : r.values) s += x * x * x * x;
    return static_cast<double>(n) / 3.0 * s;
}

inline double realized_covariance(const ReturnSeries& r1, const ReturnSeries& r2, int window_minutes) {
    const auto [a, b] = align_returns(r1, r2);
    detail::window_count(a, window_minutes, "realized_covariance");
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += a.values[i] * b.values[i];
    return c;
}

inline double realized_correlation(const ReturnSeries& r1, const ReturnSeries& r2, int window_minutes) {
    const auto [a, b] = align_returns(r1, r2);
    const double cov = realized_covariance(a, b, window_minutes);
    const double v1 = realized_variance(a, window_minutes);
    const double v2 = realized_variance(b, window_minutes);
    if (v1 <= 0.0 || v2 <= 0.0)
        throw DegenerateCorrelation("realized_correlation: zero realized variance for '" +
                                    (v1 <= 0.0 ? a.sym : b.sym) + "'");
    return std::clamp(cov / std::sqrt(v1 * v2), -1.0, 1.0);
}

struct RealizedWindow {
    std::string sym;
    int window_minutes = 0;
    double rv = 0.0;
    double rq = 0.0;
    std::optional<double> rcov;
    std::optional<double> rcorr;
    TimestampMs end_time = 0;
};

// Subseries of `r` with end timestamps in (from, to].
inline ReturnSeries slice_returns(const ReturnSeries& r, TimestampMs from, TimestampMs to) {
    ReturnSeries out{r.sym, r.interval, {}, {}};
    const auto lo = std::upper_bound(r.timestamps.begin(), r.timestamps.end(), from);
    const auto hi = std::upper_bound(r.timestamps.begin(), r.timestamps.end(), to);
    const auto i0 = static_cast<std::size_t>(lo - r.timestamps.begin());
    const auto i1 = static_cast<std::size_t>(hi - r.timestamps.begin());
    out.timestamps.assign(r.timestamps.begin() + static_cast<std::ptrdiff_t>(i0),
                          r.timestamps.begin() + static_cast<std::ptrdiff_t>(i1));
    out.values.assign(r.values.begin() + static_cast<std::ptrdiff_t>(i0),
                      r.values.begin() + static_cast<std::ptrdiff_t>(i1));
    return out;
}

} // namespace tickvar
