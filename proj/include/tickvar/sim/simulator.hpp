#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tickvar/core/types.hpp"
#include "tickvar/sim/black_scholes.hpp"

namespace tickvar::sim {

inline constexpr double kMinutesPerYear = kDaysPerYear * 24.0 * 60.0;

struct AssetSpec {
    std::string sym;
    double spot = 0.0;
    double annual_vol = 0.5;
    double strike_step = 0.0; // listing grid for option strikes
};

inline std::vector<AssetSpec> default_assets() {
    return {{"BTC", 30000.0, 0.45, 500.0}, {"ETH", 2000.0, 0.60, 25.0}};
}

// Log-variance AR(1) stochastic volatility at one-minute steps with
// correlated Gaussian shocks across assets.
struct SvConfig {
    std::vector<AssetSpec> assets = default_assets();
    double correlation = 0.75;
    double vol_half_life_days = 1.0;
    double log_var_sd = 0.4; // stationary sd of the log variance
    std::uint64_t seed = 1;
};

class SvSimulator {
public:
    explicit SvSimulator(SvConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) {
        const auto n = static_cast<Eigen::Index>(cfg_.assets.size());
        Eigen::MatrixXd c = Eigen::MatrixXd::Constant(n, n, cfg_.correlation);
        c.diagonal().setOnes();
        chol_ = Eigen::LLT<Eigen::MatrixXd>(c).matrixL();
        phi_ = std::exp(-std::log(2.0) / (cfg_.vol_half_life_days * 24.0 * 60.0));
        shock_sd_ = cfg_.log_var_sd * std::sqrt(1.0 - phi_ * phi_);
        for (const auto& a : cfg_.assets) {
            const double minute_var = a.annual_vol * a.annual_vol / kMinutesPerYear;
            // E[exp(h)] equals the target variance
            mean_h_.push_back(std::log(minute_var) - 0.5 * cfg_.log_var_sd * cfg_.log_var_sd);
            prices_.push_back(a.spot);
        }
        h_ = mean_h_;
        for (double& h : h_) h += cfg_.log_var_sd * normal_(rng_);
    }

    // Advances one minute and returns the new index levels.
    const std::vector<double>& step() {
        const auto n = static_cast<Eigen::Index>(prices_.size());
        Eigen::VectorXd e(n);
        for (Eigen::Index i = 0; i < n; ++i) e(i) = normal_(rng_);
        const Eigen::VectorXd z = chol_ * e;
        for (std::size_t i = 0; i < prices_.size(); ++i) {
            h_[i] = mean_h_[i] + phi_ * (h_[i] - mean_h_[i]) + shock_sd_ * normal_(rng_);
            const double var = std::exp(h_[i]);
            prices_[i] *= std::exp(-0.5 * var + std::sqrt(var) * z(static_cast<Eigen::Index>(i)));
        }
        return prices_;
    }

    const std::vector<double>& prices() const { return prices_; }
    const SvConfig& config() const { return cfg_; }

    // Current annualized instantaneous volatility of asset i.
    double annual_vol(std::size_t i) const { return std::sqrt(std::exp(h_[i]) * kMinutesPerYear); }

    std::mt19937_64& rng() { return rng_; }

private:
    SvConfig cfg_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    Eigen::MatrixXd chol_;
    double phi_ = 0.0;
    double shock_sd_ = 0.0;
    std::vector<double> mean_h_;
    std::vector<double> h_;
    std::vector<double> prices_;
};

// Listed products: futures and calls/puts on a strike grid per maturity.
struct UniverseConfig {
    std::vector<int> maturity_days = {2, 7, 14, 28, 56, 91, 182, 273};
    int strikes_each_side = 20;
    double strike_spacing = 0.025; // fraction of spot between listed strikes
    bool futures = true;
    bool options = true;
};

inline std::vector<Instrument> make_universe(const std::vector<AssetSpec>& assets, TimestampMs today,
                                             const UniverseConfig& cfg = {}) {
    std::vector<Instrument> out;
    for (const auto& a : assets) {
        for (int days : cfg.maturity_days) {
            Instrument fut;
            fut.underlying = a.sym;
            fut.kind = InstrumentKind::future;
            fut.maturity = date_of(day_of(today) + days * kMsPerDay);
            fut.id = format_instrument(fut);
            if (cfg.futures) out.push_back(fut);
            if (!cfg.options) continue;
            std::vector<double> strikes;
            for (int k = -cfg.strikes_each_side; k < cfg.strikes_each_side; ++k) {
                const double raw = a.spot * (1.0 + cfg.strike_spacing * k);
                const double step = a.strike_step > 0.0 ? a.strike_step : 1.0;
                const double s = std::max(step, std::round(raw / step) * step);
                if (strikes.empty() || strikes.back() != s) strikes.push_back(s);
            }
            for (double s : strikes)
                for (OptionType t : {OptionType::call, OptionType::put}) {
                    Instrument o = fut;
                    o.kind = InstrumentKind::option;
                    o.strike = s;
                    o.option_type = t;
                    o.id = format_instrument(o);
                    out.push_back(std::move(o));
                }
        }
    }
    return out;
}

// Implied volatility with a mild symmetric smile in log-moneyness, capped
// at twice the at-the-money level so short-dated wings stay plausible.
inline double smile_vol(double atm_vol, double spot, double strike, double years) {
    const double m = std::log(strike / spot) / std::sqrt(std::max(years, 1.0 / kDaysPerYear));
    return atm_vol * std::min(1.0 + 0.15 * m * m, 2.0);
}

inline double years_to(const Instrument& ins, TimestampMs t) {
    // expiry at 08:00 UTC on the maturity date
    const TimestampMs expiry = to_timestamp(*ins.maturity) + 8 * kMsPerHour;
    return std::max(0.0, static_cast<double>(expiry - t) / (kDaysPerYear * kMsPerDay));
}

inline Tick index_tick(const std::string& sym, TimestampMs t, double level) {
    Tick k;
    k.instrument = sym;
    k.time = t;
    k.index_price = level;
    return k;
}

// Product quote consistent with the given index level: futures trade at the
// index (zero carry), options carry crypto-denominated marks and USD greeks.
inline Tick product_tick(const Instrument& ins, TimestampMs t, double spot, double atm_vol) {
    Tick k;
    k.instrument = ins.id;
    k.time = t;
    k.index_price = spot;
    if (ins.is_future()) {
        k.mark_price = spot;
        return k;
    }
    const double years = years_to(ins, t);
    const double iv = smile_vol(atm_vol, spot, *ins.strike, years);
    const OptionGreeks g = black_scholes(spot, *ins.strike, years, iv, *ins.option_type);
    k.mark_price = std::max(g.price, 1e-8 * spot) / spot;
    k.delta = g.delta;
    k.gamma = g.gamma;
    k.theta = g.theta;
    k.implied_vol = iv;
    return k;
}

struct FeedConfig {
    SvConfig sv;
    TimestampMs start = 0;
    long minutes = 0;
    std::vector<Instrument> products; // quoted alongside the indices
    double product_quote_probability = 1.0; // per product per minute
    bool constant_option_vol = true;          // quote at the asset's long-run vol
};

// Produces one minute of ticks at a time, in time order, each at a random
// millisecond within its minute. `sink` receives std::span<const Tick>.
template <class Sink>
void generate_feed(const FeedConfig& cfg, Sink&& sink) {
    SvSimulator sim(cfg.sv);
    std::mt19937_64 rng(cfg.sv.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<TimestampMs> offset(0, kMsPerMinute - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> asset_of(cfg.products.size(), 0);
    for (std::size_t i = 0; i < cfg.products.size(); ++i)
        for (std::size_t a = 0; a < cfg.sv.assets.size(); ++a)
            if (cfg.sv.assets[a].sym == cfg.products[i].underlying) asset_of[i] = a;

    std::vector<Tick> ticks;
    for (long m = 0; m < cfg.minutes; ++m) {
        const TimestampMs minute = cfg.start + m * kMsPerMinute;
        const auto& px = sim.step();
        ticks.clear();
        for (std::size_t a = 0; a < px.size(); ++a)
            ticks.push_back(index_tick(cfg.sv.assets[a].sym, minute + offset(rng), px[a]));
        for (std::size_t i = 0; i < cfg.products.size(); ++i) {
            if (cfg.product_quote_probability < 1.0 && unit(rng) >= cfg.product_quote_probability) continue;
            const std::size_t a = asset_of[i];
            const double vol = cfg.constant_option_vol ? cfg.sv.assets[a].annual_vol : sim.annual_vol(a);
            ticks.push_back(product_tick(cfg.products[i], minute + offset(rng), px[a], vol));
        }
        std::stable_sort(ticks.begin(), ticks.end(), [](const Tick& x, const Tick& y) { return x.time < y.time; });
        sink(std::span<const Tick>(ticks));
    }
}

} // namespace tickvar::sim
