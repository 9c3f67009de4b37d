#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tickvar/core/quotes.hpp"
#include "tickvar/tick/tickerplant.hpp"
#include "tickvar/tick/twap_table.hpp"

namespace tickvar::tick {

namespace detail {

// Parsed instrument ids, memoized; ingestion sees the same few thousand ids
// over and over.
class InstrumentCache {
public:
    const Instrument* lookup(const std::string& id) {
        {
            std::shared_lock lock(mutex_);
            const auto it = known_.find(id);
            if (it != known_.end()) return it->second ? &*it->second : nullptr;
        }
        std::optional<Instrument> ins;
        try {
            ins = parse_instrument(id);
        } catch (const ParseError&) {
        }
        std::unique_lock lock(mutex_);
        auto [it, _] = known_.emplace(id, std::move(ins));
        return it->second ? &*it->second : nullptr;
    }

private:
    std::shared_mutex mutex_;
    std::unordered_map<std::string, std::optional<Instrument>> known_;
};

inline bool positive_finite(const std::optional<double>& v) { return v && std::isfinite(*v) && *v > 0.0; }

} // namespace detail

// Aggregates every tick into the 1-minute TWAP table of its instrument kind.
class PriceSubscriber : public Subscriber {
public:
    PriceSubscriber()
        : tables_{TwapTable(TableId::indextwap), TwapTable(TableId::futuretwap), TwapTable(TableId::optiontwap)} {}

    void on_batch(std::span<const FeedRecord> batch) override {
        for (const auto& r : batch) {
            const Instrument* ins = instruments_.lookup(r.tick.instrument);
            if (!ins || !detail::positive_finite(valuation_price(r.tick))) {
                ++malformed_;
                continue;
            }
            if (table(table_for(ins->kind)).apply(r.tick) == TwapTable::Apply::late) ++late_;
        }
    }

    TwapTable& table(TableId id) { return tables_[static_cast<std::size_t>(id)]; }
    const TwapTable& table(TableId id) const { return tables_[static_cast<std::size_t>(id)]; }

    std::uint64_t malformed() const { return malformed_; }
    std::uint64_t late() const { return late_; }

    void clear() {
        for (auto& t : tables_) t.clear();
        malformed_ = 0;
        late_ = 0;
    }

private:
    std::array<TwapTable, 3> tables_;
    detail::InstrumentCache instruments_;
    std::atomic<std::uint64_t> malformed_{0};
    std::atomic<std::uint64_t> late_{0};
};

// Latest index levels and product marks/greeks; the newest tick per sym wins.
class LatestCache : public Subscriber {
public:
    void on_batch(std::span<const FeedRecord> batch) override {
        std::unique_lock lock(mutex_);
        for (const auto& r : batch) {
            const Tick& t = r.tick;
            const Instrument* ins = instruments_.lookup(t.instrument);
            if (!ins) continue;
            if (ins->is_index()) {
                const auto px = valuation_price(t);
                if (!detail::positive_finite(px)) continue;
                auto [it, fresh] = indices_.try_emplace(t.instrument, IndexQuote{*px, t.time});
                if (!fresh && t.time >= it->second.time) it->second = IndexQuote{*px, t.time};
            } else {
                if (!detail::positive_finite(t.mark_price)) continue;
                const ProductQuote q{*t.mark_price, t.delta, t.gamma, t.theta, t.implied_vol, t.time};
                auto [it, fresh] = products_.try_emplace(t.instrument, q);
                if (!fresh && t.time >= it->second.time) it->second = q;
            }
            latest_time_ = std::max(latest_time_, t.time);
        }
    }

    MarketSnapshot snapshot(const std::vector<std::string>& indices, const std::vector<std::string>& products) const {
        MarketSnapshot s;
        std::shared_lock lock(mutex_);
        for (const auto& sym : indices)
            if (const auto it = indices_.find(sym); it != indices_.end()) s.indices.emplace(sym, it->second);
        for (const auto& sym : products)
            if (const auto it = products_.find(sym); it != products_.end()) s.products.emplace(sym, it->second);
        return s;
    }

    MarketSnapshot snapshot_all() const {
        std::shared_lock lock(mutex_);
        return MarketSnapshot{indices_, products_};
    }

    std::optional<IndexQuote> index(const std::string& sym) const {
        std::shared_lock lock(mutex_);
        const auto it = indices_.find(sym);
        return it == indices_.end() ? std::nullopt : std::optional(it->second);
    }

    std::optional<ProductQuote> product(const std::string& sym) const {
        std::shared_lock lock(mutex_);
        const auto it = products_.find(sym);
        return it == products_.end() ? std::nullopt : std::optional(it->second);
    }

    std::vector<std::string> product_ids() const {
        std::shared_lock lock(mutex_);
        std::vector<std::string> out;
        for (const auto& [sym, _] : products_) out.push_back(sym);
        std::sort(out.begin(), out.end());
        return out;
    }

    // Newest data timestamp seen on any sym.
    TimestampMs latest_time() const {
        std::shared_lock lock(mutex_);
        return latest_time_;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        indices_.clear();
        products_.clear();
        latest_time_ = 0;
    }

private:
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, IndexQuote> indices_;
    std::unordered_map<std::string, ProductQuote> products_;
    TimestampMs latest_time_ = 0;
    detail::InstrumentCache instruments_;
};

struct OhlcBar {
    std::string sym;
    TimestampMs start = 0;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    std::size_t count = 0;

    friend bool operator==(const OhlcBar&, const OhlcBar&) = default;
};

struct SurfacePoint {
    std::string instrument;
    Date maturity;
    double strike = 0.0;
    OptionType type = OptionType::call;
    double implied_vol = 0.0;
    TimestampMs time = 0;
};

inline constexpr TimestampMs kStreamPurgeHorizon = kMsPerDay;

// Raw price rows for charting, purged on a rolling 24-hour horizon.
class StreamingSubscriber : public Subscriber {
public:
    explicit StreamingSubscriber(TimestampMs purge_horizon = kStreamPurgeHorizon) : horizon_(purge_horizon) {}

    void on_batch(std::span<const FeedRecord> batch) override {
        std::unique_lock lock(mutex_);
        for (const auto& r : batch) {
            const auto px = valuation_price(r.tick);
            if (!detail::positive_finite(px)) continue;
            auto& rows = rows_[r.tick.instrument];
            const Row row{r.tick.time, *px};
            if (rows.empty() || rows.back().time <= row.time) {
                rows.push_back(row);
            } else {
                const auto pos = std::upper_bound(rows.begin(), rows.end(), row.time,
                                                  [](TimestampMs t, const Row& x) { return t < x.time; });
                rows.insert(pos, row);
            }
            latest_ = std::max(latest_, r.tick.time);
        }
        purge_locked();
    }

    // OHLC bars of width `interval` (aligned to the epoch) over [from, to).
    std::vector<OhlcBar> ohlc(const std::string& sym, TimestampMs interval, TimestampMs from, TimestampMs to) const {
        if (interval <= 0) throw DomainError("ohlc: interval must be positive");
        std::vector<OhlcBar> out;
        std::shared_lock lock(mutex_);
        const auto it = rows_.find(sym);
        if (it == rows_.end()) return out;
        for (const Row& r : it->second) {
            if (r.time < from || r.time >= to) continue;
            const TimestampMs start = floor_to(r.time, interval);
            if (out.empty() || out.back().start != start) {
                out.push_back(OhlcBar{sym, start, r.price, r.price, r.price, r.price, 1});
            } else {
                auto& b = out.back();
                b.high = std::max(b.high, r.price);
                b.low = std::min(b.low, r.price);
                b.close = r.price;
                ++b.count;
            }
        }
        return out;
    }

    bool knows(const std::string& sym) const {
        std::shared_lock lock(mutex_);
        return rows_.count(sym) > 0;
    }

    std::size_t row_count() const {
        std::shared_lock lock(mutex_);
        std::size_t n = 0;
        for (const auto& [_, rows] : rows_) n += rows.size();
        return n;
    }

    TimestampMs latest_time() const {
        std::shared_lock lock(mutex_);
        return latest_;
    }

private:
    struct Row {
        TimestampMs time;
        double price;
    };

    void purge_locked() {
        const TimestampMs cutoff = latest_ - horizon_;
        for (auto& [_, rows] : rows_)
            while (!rows.empty() && rows.front().time < cutoff) rows.pop_front();
    }

    TimestampMs horizon_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::deque<Row>> rows_;
    TimestampMs latest_ = 0;
};

// Latest implied vols of the options on `underlying`, sorted by maturity
// then strike.
inline std::vector<SurfacePoint> vol_surface(const LatestCache& cache, const std::string& underlying) {
    std::vector<SurfacePoint> out;
    const MarketSnapshot snap = cache.snapshot_all();
    for (const auto& [id, q] : snap.products) {
        if (!q.implied_vol) continue;
        Instrument ins;
        try {
            ins = parse_instrument(id);
        } catch (const ParseError&) {
            continue;
        }
        if (!ins.is_option() || ins.underlying != underlying) continue;
        out.push_back(SurfacePoint{id, *ins.maturity, *ins.strike, *ins.option_type, *q.implied_vol, q.time});
    }
    std::sort(out.begin(), out.end(), [](const SurfacePoint& a, const SurfacePoint& b) {
        const auto ta = to_timestamp(a.maturity), tb = to_timestamp(b.maturity);
        if (ta != tb) return ta < tb;
        if (a.strike != b.strike) return a.strike < b.strike;
        return a.type < b.type;
    });
    return out;
}

} // namespace tickvar::tick
