#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tickvar/core/time.hpp"

namespace tickvar {

struct Tick {
    std::string instrument;
    TimestampMs time = 0;
    std::optional<double> mark_price;
    std::optional<double> index_price;
    std::optional<double> bid;
    std::optional<double> ask;
    std::optional<double> last;
    std::optional<double> open_interest;
    // options only: per-contract sensitivities, theta per day
    std::optional<double> delta;
    std::optional<double> gamma;
    std::optional<double> theta;
    std::optional<double> implied_vol;

    friend bool operator==(const Tick&, const Tick&) = default;
};

// Price that enters the TWAP for a tick: the mark for products, the index
// level for index records (which carry no mark).
inline std::optional<double> valuation_price(const Tick& t) {
    if (t.mark_price) return t.mark_price;
    return t.index_price;
}

struct TwapBar {
    std::string sym;
    TimestampMs minute = 0;
    double twap = 0.0;
    std::int64_t count = 0;

    friend bool operator==(const TwapBar&, const TwapBar&) = default;
};

struct ReturnSeries {
    std::string sym;
    TimestampMs interval = 0;
    std::vector<TimestampMs> timestamps; // end time of each return
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

} // namespace tickvar
