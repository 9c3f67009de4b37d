#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "tickvar/core/market_data.hpp"
#include "tickvar/var/moments.hpp"
#include "tickvar/vol/dcc.hpp"
#include "tickvar/vol/ewma.hpp"
#include "tickvar/vol/garch.hpp"
#include "tickvar/vol/har.hpp"

namespace tickvar::var {

// Read side of the tick engine as seen by the VaR workflow.
class MarketDataSource {
public:
    virtual ~MarketDataSource() = default;

    // 1-minute TWAP bars of `sym` with minute in [from, to), sorted.
    virtual std::vector<TwapBar> inference_bars(const std::string& sym, TimestampMs from, TimestampMs to) = 0;

    // Latest index and product quotes for the given symbols.
    virtual MarketSnapshot snapshot(const std::vector<std::string>& indices,
                                    const std::vector<std::string>& products) = 0;

    // Reference clock for staleness and inference windows.
    virtual TimestampMs now() const = 0;
};

// Stage timings in milliseconds on the monotonic clock.
struct LatencyReport {
    double t1 = 0.0;        // inference, including data sourcing
    double t2 = 0.0;        // mapping, including snapshot read
    double t3 = 0.0;        // transformation
    double t_epsilon = 0.0; // everything else
    double total = 0.0;
    std::size_t space_bytes = 0;
};

struct VaRResult {
    std::string pid;
    double confidence = 0.0;
    double horizon_days = 0.0;
    vol::Model model = vol::Model::har;
    double z_cf = 0.0;
    double q_return = 0.0;
    double var_value = 0.0;
    double portfolio_value = 0.0;
    Moments moments;
    bool valid = true;
    bool psd_adjusted = false;
    std::vector<std::string> syms;
    TimestampMs as_of = 0;
    LatencyReport latency;
};

struct EngineConfig {
    vol::EwmaParams ewma;
    vol::Innovation garch_dist = vol::Innovation::student_t;
    TimestampMs stale_after = kStaleAfterMs;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

template <class F>
decltype(auto) in_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

} // namespace detail

// 1-minute bar window feeding the 30-minute models: the last `lookback_days`
// of complete buckets plus the bucket that seeds the first return.
inline std::pair<TimestampMs, TimestampMs> bar_model_window(TimestampMs as_of, const vol::EwmaParams& p) {
    const TimestampMs to = floor_to(as_of, p.bar_interval);
    const auto buckets = static_cast<TimestampMs>(vol::bars_per_day(p.bar_interval)) * p.lookback_days + 1;
    return {to - buckets * p.bar_interval, to};
}

// The HAR window ends at the last complete 5-minute grid bar.
inline std::pair<TimestampMs, TimestampMs> har_window(TimestampMs as_of) {
    const TimestampMs end = floor_to(minute_of(as_of) - kMsPerMinute, 5 * kMsPerMinute);
    return {end - vol::kHarLookbackDays * kMsPerDay, end + kMsPerMinute};
}

inline vol::CovarianceForecast infer(MarketDataSource& src, const std::vector<std::string>& syms, vol::Model model,
                                     double horizon_days, TimestampMs as_of, const EngineConfig& cfg = {},
                                     std::size_t* bytes = nullptr) {
    std::size_t used = 0;
    vol::CovarianceForecast f;
    switch (model) {
    case vol::Model::ewma:
    case vol::Model::garch: {
        const auto [from, to] = bar_model_window(as_of, cfg.ewma);
        std::vector<ReturnSeries> returns;
        for (const auto& s : syms) {
            const auto bars = src.inference_bars(s, from, to);
            used += bars.size() * sizeof(TwapBar);
            const auto coarse = resample_twap(bars, cfg.ewma.bar_interval);
            auto r = log_returns(coarse, cfg.ewma.bar_interval);
            r.sym = s;
            returns.push_back(std::move(r));
        }
        if (model == vol::Model::ewma) {
            f = vol::ewma_covariance_matrix(returns, cfg.ewma.lambda, horizon_days);
        } else {
            std::vector<vol::GarchFit> fits;
            std::vector<std::vector<double>> z;
            for (const auto& r : returns) {
                fits.push_back(vol::fit_garch11(r, cfg.garch_dist));
                z.push_back(fits.back().std_residuals);
            }
            if (fits.size() > 1) {
                // the correlation stage needs residuals on common timestamps
                const std::size_t m = std::min_element(z.begin(), z.end(), [](const auto& a, const auto& b) {
                                          return a.size() < b.size();
                                      })->size();
                for (auto& v : z) v.erase(v.begin(), v.end() - static_cast<std::ptrdiff_t>(m));
                const vol::DccParams dcc = vol::fit_dcc(z);
                f = vol::dcc_forecast(fits, &dcc, horizon_days);
            } else {
                f = vol::dcc_forecast(fits, nullptr, horizon_days);
            }
        }
        break;
    }
    case vol::Model::har: {
        const auto [from, to] = har_window(as_of);
        std::vector<std::vector<TwapBar>> bars;
        for (const auto& s : syms) {
            bars.push_back(src.inference_bars(s, from, to));
            used += bars.back().size() * sizeof(TwapBar);
        }
        f = vol::har_forecast_covariance(bars, syms, to - kMsPerMinute, horizon_days);
        break;
    }
    case vol::Model::realized:
        throw ValidationError("the realized model is a backtest benchmark, not a forecast");
    }
    if (bytes) *bytes += used;
    return f;
}

// Mapping and transformation for a known covariance forecast.
inline VaRResult value_at_risk(const std::vector<Position>& positions, const MarketSnapshot& snap,
                               const vol::CovarianceForecast& sigma, double confidence, double horizon_days,
                               TimestampMs as_of, TimestampMs stale_after = kStaleAfterMs) {
    const AdjustedGreeks adj = adjust_greeks(positions, snap, horizon_days, as_of, stale_after);
    const MappedCoefficients c = compress_by_underlying(adj);
    const Moments m = central_moments(c, sigma);
    const Quantile q = transform(m, confidence, c.portfolio_value);
    VaRResult r;
    r.confidence = confidence;
    r.horizon_days = horizon_days;
    r.model = sigma.model;
    r.z_cf = q.z_cf;
    r.q_return = q.q_return;
    r.var_value = q.var_value;
    r.portfolio_value = c.portfolio_value;
    r.moments = m;
    r.valid = q.valid;
    r.psd_adjusted = sigma.psd_adjusted;
    r.syms = c.syms;
    r.as_of = as_of;
    return r;
}

inline void validate_request(double confidence, double horizon_days) {
    if (!(confidence > 0.5 && confidence < 1.0)) throw ValidationError("confidence must lie in (0.5, 1)");
    if (!(horizon_days > 0.0) || !std::isfinite(horizon_days)) throw ValidationError("horizon_days must be positive");
}

// Portfolio VaR workflow: positions, underlyings, inference, mapping,
// transformation. Errors carry the stage in which they were raised.
class VarEngine {
public:
    VarEngine(PortfolioBook& book, MarketDataSource& source, EngineConfig cfg = {})
        : book_(book), source_(source), cfg_(cfg) {}

    VaRResult estimate_var(const std::string& pid, double confidence, double horizon_days, vol::Model model) {
        const auto start = detail::Clock::now();
        validate_request(confidence, horizon_days);
        if (!book_.has_portfolio(pid)) throw NotFound("unknown portfolio '" + pid + "'");
        const std::vector<Position> positions = book_.list_portfolio(pid);
        if (positions.empty()) throw DegeneratePortfolio("portfolio '" + pid + "' is empty");
        const std::vector<std::string> syms = extract_indices(positions);
        const TimestampMs as_of = source_.now();

        std::size_t bytes = 0;
        const auto t1s = detail::Clock::now();
        const vol::CovarianceForecast sigma = detail::in_stage(
            "inference", [&] { return infer(source_, syms, model, horizon_days, as_of, cfg_, &bytes); });
        const auto t1e = detail::Clock::now();

        std::vector<std::string> products;
        for (const auto& p : positions) products.push_back(p.instrument.id);
        const auto t2s = detail::Clock::now();
        const MappedCoefficients coeffs = detail::in_stage("mapping", [&] {
            const MarketSnapshot snap = source_.snapshot(syms, products);
            return compress_by_underlying(adjust_greeks(positions, snap, horizon_days, as_of, cfg_.stale_after));
        });
        const auto t2e = detail::Clock::now();

        const auto [moments, q] = detail::in_stage("transformation", [&] {
            const Moments m = central_moments(coeffs, sigma);
            return std::pair{m, transform(m, confidence, coeffs.portfolio_value)};
        });
        const auto t3e = detail::Clock::now();

        VaRResult r;
        r.pid = pid;
        r.confidence = confidence;
        r.horizon_days = horizon_days;
        r.model = model;
        r.z_cf = q.z_cf;
        r.q_return = q.q_return;
        r.var_value = q.var_value;
        r.portfolio_value = coeffs.portfolio_value;
        r.moments = moments;
        r.valid = q.valid;
        r.psd_adjusted = sigma.psd_adjusted;
        r.syms = coeffs.syms;
        r.as_of = as_of;

        const auto end = detail::Clock::now();
        auto& l = r.latency;
        l.t1 = detail::ms_between(t1s, t1e);
        l.t2 = detail::ms_between(t2s, t2e);
        l.t3 = detail::ms_between(t2e, t3e);
        l.total = detail::ms_between(start, end);
        l.t_epsilon = std::max(0.0, l.total - l.t1 - l.t2 - l.t3);
        l.space_bytes = bytes;
        return r;
    }

    PortfolioBook& book() { return book_; }
    MarketDataSource& source() { return source_; }
    const EngineConfig& config() const { return cfg_; }

private:
    PortfolioBook& book_;
    MarketDataSource& source_;
    EngineConfig cfg_;
};

} // namespace tickvar::var
