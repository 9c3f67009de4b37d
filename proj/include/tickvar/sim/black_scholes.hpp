#pragma once

#include <algorithm>
#include <cmath>

#include "tickvar/core/instrument.hpp"
#include "tickvar/var/normal.hpp"

namespace tickvar::sim {

inline constexpr double kDaysPerYear = 365.0;

// Black-Scholes value and sensitivities in USD, zero rates. Theta is per
// calendar day; gamma is per USD of underlying move.
struct OptionGreeks {
    double price = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
    double vega = 0.0;
};

inline OptionGreeks black_scholes(double spot, double strike, double years, double vol, OptionType type) {
    OptionGreeks g;
    const bool call = type == OptionType::call;
    if (years <= 0.0 || vol <= 0.0) {
        g.price = std::max(0.0, call ? spot - strike : strike - spot);
        g.delta = call ? (spot > strike ? 1.0 : 0.0) : (spot < strike ? -1.0 : 0.0);
        return g;
    }
    const double sq = vol * std::sqrt(years);
    const double d1 = (std::log(spot / strike) + 0.5 * vol * vol * years) / sq;
    const double d2 = d1 - sq;
    const double pdf = var::normal_pdf(d1);
    if (call) {
        g.price = spot * var::normal_cdf(d1) - strike * var::normal_cdf(d2);
        g.delta = var::normal_cdf(d1);
    } else {
        g.price = strike * var::normal_cdf(-d2) - spot * var::normal_cdf(-d1);
        g.delta = var::normal_cdf(d1) - 1.0;
    }
    g.gamma = pdf / (spot * sq);
    g.theta = -spot * pdf * vol / (2.0 * std::sqrt(years)) / kDaysPerYear;
    g.vega = spot * pdf * std::sqrt(years);
    return g;
}

} // namespace tickvar::sim
