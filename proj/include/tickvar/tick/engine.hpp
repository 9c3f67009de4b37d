#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tickvar/tick/inference_cache.hpp"
#include "tickvar/tick/store.hpp"
#include "tickvar/tick/subscribers.hpp"
#include "tickvar/var/engine.hpp"

namespace tickvar::tick {

struct ReplayStats {
    std::uint64_t records = 0;
    std::uint64_t skipped_torn = 0;
    std::uint64_t last_seq = 0;
};

// Reads a recovery log and hands its records to `consume` in batches. A
// trailing line that does not decode (a torn append) is skipped; a bad line
// anywhere else is an error.
template <class Consume>
ReplayStats read_log(const std::filesystem::path& path, Consume&& consume, std::size_t batch_size = 4096) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log " + path.string());
    ReplayStats stats;
    std::vector<FeedRecord> batch;
    std::string line, pending_error;
    std::uint64_t line_no = 0, bad_line = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!pending_error.empty())
            throw ParseError("log " + path.string() + " line " + std::to_string(bad_line) + ": " + pending_error);
        try {
            FeedRecord r = decode_record(line);
            if (r.seq <= stats.last_seq && stats.records > 0)
                throw ParseError("sequence number " + std::to_string(r.seq) + " is not increasing");
            stats.last_seq = r.seq;
            ++stats.records;
            batch.push_back(std::move(r));
        } catch (const ParseError& e) {
            pending_error = e.what();
            bad_line = line_no;
            continue;
        }
        if (batch.size() >= batch_size) {
            consume(std::span<const FeedRecord>(batch));
            batch.clear();
        }
    }
    if (!batch.empty()) consume(std::span<const FeedRecord>(batch));
    if (!pending_error.empty()) stats.skipped_torn = 1;
    return stats;
}

// Reads a feed replay file (one tick per line, no sequence numbers) in
// batches, with the recovery log's torn-tail policy.
template <class Consume>
std::uint64_t read_feed(const std::filesystem::path& path, Consume&& consume, std::size_t batch_size = 4096) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feed " + path.string());
    std::vector<Tick> batch;
    std::string line, pending_error;
    std::uint64_t line_no = 0, bad_line = 0, ticks = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!pending_error.empty())
            throw ParseError("feed " + path.string() + " line " + std::to_string(bad_line) + ": " + pending_error);
        try {
            batch.push_back(decode_tick(line));
            ++ticks;
        } catch (const ParseError& e) {
            pending_error = e.what();
            bad_line = line_no;
            continue;
        }
        if (batch.size() >= batch_size) {
            consume(std::span<const Tick>(batch));
            batch.clear();
        }
    }
    if (!batch.empty()) consume(std::span<const Tick>(batch));
    return ticks;
}

struct TickEngineConfig {
    std::filesystem::path data_root = "tickvar-data";
    std::optional<std::filesystem::path> log_path; // defaults to <data_root>/tplog
    bool enable_log = true;
    TimestampMs stream_purge_horizon = kStreamPurgeHorizon;
};

// In-process tickerplant with its subscribers, the historical store and the
// inference cache; implements the VaR engine's market-data source.
class TickEngine : public var::MarketDataSource {
public:
    explicit TickEngine(TickEngineConfig cfg = {})
        : cfg_(std::move(cfg)),
          plant_(make_plant(cfg_)),
          streaming_(cfg_.stream_purge_horizon),
          store_(cfg_.data_root / "hdb"),
          cache_([this](const std::string& sym, TimestampMs a, TimestampMs b) { return query_twap(sym, a, b); },
                 [this](const std::string& sym) { return sealed_before(sym); }) {
        plant_->subscribe(&prices_);
        plant_->subscribe(&latest_);
        plant_->subscribe(&streaming_);
    }

    std::uint64_t publish(std::span<const Tick> ticks) { return plant_->publish(ticks); }
    void publish_records(std::span<const FeedRecord> records) { plant_->publish_records(records); }

    // Rebuilds in-memory state from a recovery log without re-logging it.
    ReplayStats replay(const std::filesystem::path& log) {
        const ReplayStats s = read_log(log, [this](std::span<const FeedRecord> b) { deliver_unlogged(b); });
        if (s.records) plant_->set_next_seq(std::max(plant_->next_seq(), s.last_seq + 1));
        cache_.evict_all();
        return s;
    }

    void deliver_unlogged(std::span<const FeedRecord> batch) {
        prices_.on_batch(batch);
        latest_.on_batch(batch);
        streaming_.on_batch(batch);
    }

    // Merged history of one sym over [from, to): finalized partitions plus
    // the intraday table, the intraday row winning on a shared key.
    std::vector<TwapBar> query_twap(const std::string& sym, TimestampMs from, TimestampMs to, bool with_counts = false) const {
        if (from >= to) return {};
        const TableId table = table_for(parse_instrument(sym).kind);
        auto disk = store_.read(table, sym, from, to, with_counts);
        auto live = prices_.table(table).range(sym, from, to);
        if (!with_counts)
            for (auto& b : live) b.count = 0;
        if (disk.empty()) return live;
        if (live.empty()) return disk;
        std::vector<TwapBar> out;
        out.reserve(disk.size() + live.size());
        auto d = disk.begin();
        auto l = live.begin();
        while (d != disk.end() || l != live.end()) {
            if (l == live.end() || (d != disk.end() && d->minute < l->minute)) {
                out.push_back(std::move(*d++));
            } else {
                if (d != disk.end() && d->minute == l->minute) ++d;
                out.push_back(std::move(*l++));
            }
        }
        return out;
    }

    std::vector<TwapBar> cached_inference_window(const std::string& sym, TimestampMs from, TimestampMs to) {
        return cache_.window(sym, from, to);
    }

    // Trailing `days` of bars ending at the current clock.
    std::vector<TwapBar> cached_inference_window(const std::string& sym, int days) {
        if (days <= 0) return {};
        const TimestampMs to = minute_of(now()) + kMsPerMinute;
        return cache_.window(sym, to - days * kMsPerDay, to);
    }

    // Writes `date` to the store (merged with any existing partition) and
    // releases its intraday rows.
    std::size_t persist_eod(const Date& date) {
        const TimestampMs day = to_timestamp(date);
        std::map<TableId, std::vector<TwapBar>> tables;
        std::size_t rows = 0;
        for (TableId id : kAllTables) {
            std::map<std::pair<std::string, TimestampMs>, TwapBar> merged;
            for (auto& b : store_.read_all(date, id)) merged.insert_or_assign({b.sym, b.minute}, std::move(b));
            for (auto& b : prices_.table(id).rows_between(day, day + kMsPerDay))
                merged.insert_or_assign({b.sym, b.minute}, std::move(b));
            auto& v = tables[id];
            for (auto& [_, b] : merged) v.push_back(std::move(b));
            rows += v.size();
        }
        store_.write_partition(date, tables);
        for (TableId id : kAllTables) prices_.table(id).release(day, day + kMsPerDay);
        return rows;
    }

    // var::MarketDataSource
    std::vector<TwapBar> inference_bars(const std::string& sym, TimestampMs from, TimestampMs to) override {
        return cache_.window(sym, from, to);
    }

    MarketSnapshot snapshot(const std::vector<std::string>& indices, const std::vector<std::string>& products) override {
        return latest_.snapshot(indices, products);
    }

    // Reference clock: the newest tick time, or a later heartbeat.
    TimestampMs now() const override { return std::max(latest_.latest_time(), heartbeat_.load()); }

    // Advances the clock without data, as a timer would between ticks.
    void heartbeat(TimestampMs t) {
        TimestampMs cur = heartbeat_.load();
        while (t > cur && !heartbeat_.compare_exchange_weak(cur, t)) {
        }
    }

    PriceSubscriber& prices() { return prices_; }
    const PriceSubscriber& prices() const { return prices_; }
    LatestCache& latest() { return latest_; }
    const LatestCache& latest() const { return latest_; }
    StreamingSubscriber& streaming() { return streaming_; }
    PartitionedStore& store() { return store_; }
    InferenceCache& inference_cache() { return cache_; }
    Tickerplant& plant() { return *plant_; }
    const TickEngineConfig& config() const { return cfg_; }

    std::filesystem::path log_path() const {
        return cfg_.log_path.value_or(cfg_.data_root / "tplog");
    }

private:
    static std::unique_ptr<Tickerplant> make_plant(const TickEngineConfig& cfg) {
        if (!cfg.enable_log) return std::make_unique<Tickerplant>();
        return std::make_unique<Tickerplant>(cfg.log_path.value_or(cfg.data_root / "tplog"));
    }

    std::optional<TimestampMs> sealed_before(const std::string& sym) const {
        Instrument ins;
        try {
            ins = parse_instrument(sym);
        } catch (const ParseError&) {
            return std::nullopt;
        }
        return prices_.table(table_for(ins.kind)).watermark(sym);
    }

    TickEngineConfig cfg_;
    std::unique_ptr<Tickerplant> plant_;
    PriceSubscriber prices_;
    LatestCache latest_;
    StreamingSubscriber streaming_;
    PartitionedStore store_;
    InferenceCache cache_;
    std::atomic<TimestampMs> heartbeat_{0};
};

// FNV-1a digest of the TWAP tables and latest-value caches; equal digests
// mean equal in-memory market state.
inline std::uint64_t state_digest(const TickEngine& e) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 1099511628211ULL;
    };
    auto mix_str = [&](const std::string& s) { mix(s.data(), s.size() + 1); };
    auto mix_opt = [&](const std::optional<double>& v) {
        const double x = v.value_or(std::numeric_limits<double>::quiet_NaN());
        mix(&x, sizeof x);
    };
    for (TableId id : kAllTables)
        for (const auto& b : e.prices().table(id).rows()) {
            mix_str(b.sym);
            mix(&b.minute, sizeof b.minute);
            mix(&b.twap, sizeof b.twap);
            mix(&b.count, sizeof b.count);
        }
    const MarketSnapshot snap = e.latest().snapshot_all();
    std::map<std::string, IndexQuote> idx(snap.indices.begin(), snap.indices.end());
    std::map<std::string, ProductQuote> prod(snap.products.begin(), snap.products.end());
    for (const auto& [sym, q] : idx) {
        mix_str(sym);
        mix(&q.price, sizeof q.price);
        mix(&q.time, sizeof q.time);
    }
    for (const auto& [sym, q] : prod) {
        mix_str(sym);
        mix(&q.mark_price, sizeof q.mark_price);
        mix_opt(q.delta);
        mix_opt(q.gamma);
        mix_opt(q.theta);
        mix_opt(q.implied_vol);
        mix(&q.time, sizeof q.time);
    }
    return h;
}

} // namespace tickvar::tick
