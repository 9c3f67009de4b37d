#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tickvar/core/types.hpp"

namespace tickvar::tick {

// Trailing-window cache of 1-minute bars per sym. Only sealed minutes are
// kept; the still-open tail is re-queried on every call. Missing ranges are
// fetched from the backing query one UTC day at a time.
class InferenceCache {
public:
    using Query = std::function<std::vector<TwapBar>(const std::string&, TimestampMs, TimestampMs)>;
    using SealedBefore = std::function<std::optional<TimestampMs>(const std::string&)>;

    InferenceCache(Query query, SealedBefore sealed) : query_(std::move(query)), sealed_(std::move(sealed)) {}

    // Bars with minute in [from, to); identical to query(sym, from, to).
    std::vector<TwapBar> window(const std::string& sym, TimestampMs from, TimestampMs to) {
        if (from >= to) return {};
        std::lock_guard lock(mutex_);
        Entry& e = entries_[sym];
        const TimestampMs sealed = std::clamp(sealed_(sym).value_or(from), from, to);

        if (e.covered_from >= e.covered_to || from >= e.covered_to || sealed <= e.covered_from) {
            e = Entry{};
            fetch(sym, e, from, sealed);
            e.covered_from = from;
            e.covered_to = sealed;
        } else {
            if (from < e.covered_from) fetch(sym, e, from, e.covered_from);
            if (e.covered_to < sealed) fetch(sym, e, e.covered_to, sealed);
            e.bars.erase(e.bars.begin(), e.bars.lower_bound(from));
            e.covered_from = from;
            e.covered_to = std::max(e.covered_to, sealed);
        }

        std::vector<TwapBar> out;
        for (auto it = e.bars.begin(); it != e.bars.end() && it->first < sealed; ++it) out.push_back(it->second);
        if (sealed < to) {
            ++queries_;
            auto tail = query_(sym, sealed, to);
            out.insert(out.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
        }
        return out;
    }

    void evict(const std::string& sym) {
        std::lock_guard lock(mutex_);
        entries_.erase(sym);
    }

    void evict_all() {
        std::lock_guard lock(mutex_);
        entries_.clear();
    }

    // Backing queries issued so far.
    std::uint64_t queries() const {
        std::lock_guard lock(mutex_);
        return queries_;
    }

private:
    struct Entry {
        std::map<TimestampMs, TwapBar> bars;
        TimestampMs covered_from = 0;
        TimestampMs covered_to = 0;
    };

    void fetch(const std::string& sym, Entry& e, TimestampMs from, TimestampMs to) {
        for (TimestampMs a = from; a < to;) {
            const TimestampMs b = std::min(to, day_of(a) + kMsPerDay);
            ++queries_;
            for (auto& bar : query_(sym, a, b)) e.bars.insert_or_assign(bar.minute, std::move(bar));
            a = b;
        }
    }

    Query query_;
    SealedBefore sealed_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Entry> entries_;
    std::uint64_t queries_ = 0;
};

} // namespace tickvar::tick
