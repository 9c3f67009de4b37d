#pragma once

#include <optional>
#include <string>
#include <unordered_map>

#include "tickvar/core/time.hpp"

namespace tickvar {

struct IndexQuote {
    double price = 0.0;
    TimestampMs time = 0;

    friend bool operator==(const IndexQuote&, const IndexQuote&) = default;
};

// Latest valuation inputs for a tradable product. Marks of options are
// quoted in the underlying crypto; futures marks are in USD.
struct ProductQuote {
    double mark_price = 0.0;
    std::optional<double> delta;
    std::optional<double> gamma;
    std::optional<double> theta;
    std::optional<double> implied_vol;
    TimestampMs time = 0;

    friend bool operator==(const ProductQuote&, const ProductQuote&) = default;
};

// Immutable copy of latest-value caches used by one VaR request.
struct MarketSnapshot {
    std::unordered_map<std::string, IndexQuote> indices;
    std::unordered_map<std::string, ProductQuote> products;

    const IndexQuote* index(const std::string& sym) const {
        const auto it = indices.find(sym);
        return it == indices.end() ? nullptr : &it->second;
    }
    const ProductQuote* product(const std::string& sym) const {
        const auto it = products.find(sym);
        return it == products.end() ? nullptr : &it->second;
    }
};

} // namespace tickvar
