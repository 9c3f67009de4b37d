#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tickvar/core/instrument.hpp"
#include "tickvar/core/market_data.hpp"

namespace tickvar::tick {

enum class TableId { indextwap, futuretwap, optiontwap };

inline constexpr TableId kAllTables[] = {TableId::indextwap, TableId::futuretwap, TableId::optiontwap};

inline const char* table_name(TableId t) {
    switch (t) {
    case TableId::indextwap: return "indextwap";
    case TableId::futuretwap: return "futuretwap";
    case TableId::optiontwap: return "optiontwap";
    }
    return "?";
}

inline TableId table_for(InstrumentKind k) {
    switch (k) {
    case InstrumentKind::index: return TableId::indextwap;
    case InstrumentKind::future: return TableId::futuretwap;
    case InstrumentKind::option: return TableId::optiontwap;
    }
    return TableId::indextwap;
}

// Keyed (sym, minute) -> TwapBar table. One writer, many readers. A row is
// sealed once a later minute has been seen for its sym; ticks for sealed
// minutes are rejected so that past rows never change.
class TwapTable {
public:
    explicit TwapTable(TableId id) : id_(id) {}

    TableId id() const { return id_; }
    const char* name() const { return table_name(id_); }

    enum class Apply { accepted, late };

    Apply apply(const Tick& t) {
        const TimestampMs m = minute_of(t.time);
        std::unique_lock lock(mutex_);
        Series& s = rows_[t.instrument];
        if (s.watermark && m < *s.watermark) return Apply::late;
        auto it = s.bars.find(m);
        std::optional<TwapBar> existing;
        if (it != s.bars.end()) existing = TwapBar{t.instrument, m, it->second.twap, it->second.count};
        const TwapBar bar = aggregate_twap(std::span<const Tick>(&t, 1), existing);
        s.bars[m] = Cell{bar.twap, bar.count};
        s.watermark = m;
        ++version_;
        return Apply::accepted;
    }

    // Bars of `sym` with minute in [from, to).
    std::vector<TwapBar> range(const std::string& sym, TimestampMs from, TimestampMs to) const {
        std::vector<TwapBar> out;
        if (from >= to) return out;
        std::shared_lock lock(mutex_);
        const auto it = rows_.find(sym);
        if (it == rows_.end()) return out;
        const auto& bars = it->second.bars;
        for (auto b = bars.lower_bound(from); b != bars.end() && b->first < to; ++b)
            out.push_back(TwapBar{sym, b->first, b->second.twap, b->second.count});
        return out;
    }

    // Latest minute seen for `sym`; earlier minutes are immutable.
    std::optional<TimestampMs> watermark(const std::string& sym) const {
        std::shared_lock lock(mutex_);
        const auto it = rows_.find(sym);
        if (it == rows_.end()) return std::nullopt;
        return it->second.watermark;
    }

    // All rows sorted by (sym, minute).
    std::vector<TwapBar> rows() const { return rows_between(std::nullopt, std::nullopt); }

    std::vector<TwapBar> rows_between(std::optional<TimestampMs> from, std::optional<TimestampMs> to) const {
        std::shared_lock lock(mutex_);
        std::vector<std::string> syms;
        for (const auto& [sym, _] : rows_) syms.push_back(sym);
        std::sort(syms.begin(), syms.end());
        std::vector<TwapBar> out;
        for (const auto& sym : syms) {
            const auto& bars = rows_.at(sym).bars;
            auto b = from ? bars.lower_bound(*from) : bars.begin();
            for (; b != bars.end() && (!to || b->first < *to); ++b)
                out.push_back(TwapBar{sym, b->first, b->second.twap, b->second.count});
        }
        return out;
    }

    // Drops rows with minute in [from, to); watermarks are kept so the
    // released minutes stay sealed.
    std::size_t release(TimestampMs from, TimestampMs to) {
        std::unique_lock lock(mutex_);
        std::size_t n = 0;
        for (auto& [_, s] : rows_) {
            auto a = s.bars.lower_bound(from);
            auto b = s.bars.lower_bound(to);
            n += static_cast<std::size_t>(std::distance(a, b));
            s.bars.erase(a, b);
        }
        ++version_;
        return n;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        std::size_t n = 0;
        for (const auto& [_, s] : rows_) n += s.bars.size();
        return n;
    }

    std::vector<std::string> syms() const {
        std::shared_lock lock(mutex_);
        std::vector<std::string> out;
        for (const auto& [sym, _] : rows_) out.push_back(sym);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::uint64_t version() const {
        std::shared_lock lock(mutex_);
        return version_;
    }

    void clear() {
        std::unique_lock lock(mutex_);
        rows_.clear();
        ++version_;
    }

private:
    struct Cell {
        double twap;
        std::int64_t count;
    };
    struct Series {
        std::map<TimestampMs, Cell> bars;
        std::optional<TimestampMs> watermark;
    };

    TableId id_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, Series> rows_;
    std::uint64_t version_ = 0;
};

} // namespace tickvar::tick
