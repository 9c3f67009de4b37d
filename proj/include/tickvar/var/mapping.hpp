#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tickvar/core/quotes.hpp"
#include "tickvar/var/portfolio.hpp"

namespace tickvar::var {

inline constexpr TimestampMs kStaleAfterMs = 60 * kMsPerSecond;
inline constexpr double kDegenerateNetValue = 1e-9;

// Delta-gamma-theta coefficients of one holding, already weighted into
// portfolio-return units: delta w(P/V)d, gamma w(P^2/V)G, theta (w/V)th.
struct PositionCoefficients {
    std::string instrument;
    std::string underlying;
    double delta = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
    double value = 0.0; // V_i in USD
    double underlying_price = 0.0;
};

struct AdjustedGreeks {
    std::vector<PositionCoefficients> positions;
    double portfolio_value = 0.0;
    double tau_days = 0.0;
};

// Coefficients aggregated per underlying; gamma is the diagonal of the
// (diagonal) gamma matrix since cross gammas vanish.
struct MappedCoefficients {
    std::vector<std::string> syms;
    Eigen::VectorXd delta;
    Eigen::VectorXd gamma_diag;
    Eigen::VectorXd theta;
    double theta_sum = 0.0; // tau * sum(theta)
    double portfolio_value = 0.0;
    double tau_days = 0.0;
};

namespace detail {

inline void check_fresh(const std::string& what, TimestampMs quote_time, TimestampMs as_of, TimestampMs stale_after) {
    if (as_of - quote_time > stale_after)
        throw StaleData(what, "market data for '" + what + "' is " + std::to_string((as_of - quote_time) / 1000) +
                                  " s old (limit " + std::to_string(stale_after / 1000) + " s)");
}

} // namespace detail

// Maps each holding to portfolio-return coefficients from the latest marks
// and greeks. Options are valued in USD as quantity * crypto mark * index;
// futures are linear with unit delta and USD marks.
inline AdjustedGreeks adjust_greeks(const std::vector<Position>& positions, const MarketSnapshot& snap,
                                    double tau_days, TimestampMs as_of, TimestampMs stale_after = kStaleAfterMs) {
    if (positions.empty()) throw DegeneratePortfolio("portfolio is empty");

    struct Raw {
        double value, delta, gamma, theta, price;
    };
    std::vector<Raw> raw;
    raw.reserve(positions.size());
    double net = 0.0, gross = 0.0;
    for (const Position& pos : positions) {
        const auto& id = pos.instrument.id;
        const ProductQuote* q = snap.product(id);
        if (!q) throw StaleData(id, "no market data for '" + id + "'");
        const IndexQuote* ix = snap.index(pos.instrument.underlying);
        if (!ix) throw StaleData(pos.instrument.underlying, "no index price for '" + pos.instrument.underlying + "'");
        detail::check_fresh(id, q->time, as_of, stale_after);
        detail::check_fresh(pos.instrument.underlying, ix->time, as_of, stale_after);

        Raw r{};
        r.price = ix->price;
        if (pos.instrument.is_option()) {
            if (!q->delta || !q->gamma || !q->theta) throw StaleData(id, "missing greeks for '" + id + "'");
            r.value = pos.quantity * q->mark_price * ix->price;
            r.delta = pos.quantity * *q->delta;
            r.gamma = pos.quantity * *q->gamma;
            r.theta = pos.quantity * *q->theta;
        } else {
            r.value = pos.quantity * q->mark_price;
            r.delta = pos.quantity;
            r.gamma = 0.0;
            r.theta = 0.0;
        }
        net += r.value;
        gross += std::abs(r.value);
        raw.push_back(r);
    }
    if (!(gross > 0.0) || std::abs(net) < kDegenerateNetValue * gross)
        throw DegeneratePortfolio("net portfolio value " + std::to_string(net) + " is degenerate");

    AdjustedGreeks out;
    out.portfolio_value = net;
    out.tau_days = tau_days;
    out.positions.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Raw& r = raw[i];
        // w_i / V_i == 1 / sum(V); written this way a zero-valued holding
        // still contributes its sensitivities
        const double per_value = 1.0 / net;
        PositionCoefficients c;
        c.instrument = positions[i].instrument.id;
        c.underlying = positions[i].instrument.underlying;
        c.value = r.value;
        c.underlying_price = r.price;
        c.delta = per_value * r.price * r.delta;
        c.gamma = per_value * r.price * r.price * r.gamma;
        c.theta = per_value * r.theta;
        out.positions.push_back(std::move(c));
    }
    return out;
}

inline MappedCoefficients compress_by_underlying(const AdjustedGreeks& adjusted) {
    std::map<std::string, std::array<double, 3>> acc;
    for (const auto& c : adjusted.positions) {
        auto& a = acc[c.underlying];
        a[0] += c.delta;
        a[1] += c.gamma;
        a[2] += c.theta;
    }
    MappedCoefficients m;
    const auto n = static_cast<Eigen::Index>(acc.size());
    m.delta.resize(n);
    m.gamma_diag.resize(n);
    m.theta.resize(n);
    Eigen::Index i = 0;
    for (const auto& [sym, a] : acc) {
        m.syms.push_back(sym);
        m.delta(i) = a[0];
        m.gamma_diag(i) = a[1];
        m.theta(i) = a[2];
        ++i;
    }
    m.tau_days = adjusted.tau_days;
    m.theta_sum = adjusted.tau_days * m.theta.sum();
    m.portfolio_value = adjusted.portfolio_value;
    return m;
}

// Portfolio return implied by per-position coefficients for underlying
// returns keyed by sym.
inline double portfolio_return(const AdjustedGreeks& adjusted, const std::map<std::string, double>& underlying_returns) {
    double r = 0.0;
    for (const auto& c : adjusted.positions) {
        const double x = underlying_returns.at(c.underlying);
        r += c.delta * x + 0.5 * c.gamma * x * x + adjusted.tau_days * c.theta;
    }
    return r;
}

inline double portfolio_return(const MappedCoefficients& m, const Eigen::VectorXd& underlying_returns) {
    return m.delta.dot(underlying_returns) +
           0.5 * (m.gamma_diag.array() * underlying_returns.array().square()).sum() + m.theta_sum;
}

} // namespace tickvar::var
