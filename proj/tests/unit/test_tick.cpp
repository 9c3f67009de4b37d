#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include <gtest/gtest.h>

#include "tickvar/sim/simulator.hpp"
#include "tickvar/tick/engine.hpp"

using namespace tickvar;
using namespace tickvar::tick;
namespace fs = std::filesystem;

namespace {

const TimestampMs kDay = parse_iso8601("2024-01-10T00:00:00Z");

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tickvar-unit-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Tick idx(const std::string& sym, TimestampMs t, double px) { return sim::index_tick(sym, t, px); }

Tick mark(const std::string& sym, TimestampMs t, double px) {
    Tick k;
    k.instrument = sym;
    k.time = t;
    k.mark_price = px;
    return k;
}

Tick option(const std::string& sym, TimestampMs t, double px, double iv) {
    Tick k = mark(sym, t, px);
    k.delta = 0.5;
    k.gamma = 1e-5;
    k.theta = -1e-4;
    k.implied_vol = iv;
    return k;
}

// A small random feed over `minutes` minutes from `start`.
std::vector<Tick> feed(TimestampMs start, int minutes, std::uint64_t seed) {
    sim::FeedConfig fc;
    fc.sv.seed = seed;
    fc.start = start;
    fc.minutes = minutes;
    auto universe = sim::make_universe(fc.sv.assets, start);
    universe.resize(6);
    fc.products = universe;
    std::vector<Tick> out;
    sim::generate_feed(fc, [&](std::span<const Tick> t) { out.insert(out.end(), t.begin(), t.end()); });
    return out;
}

TickEngineConfig config(const fs::path& root, bool log) {
    TickEngineConfig c;
    c.data_root = root;
    c.enable_log = log;
    return c;
}

class Counter : public Subscriber {
public:
    void on_batch(std::span<const FeedRecord> b) override {
        for (const auto& r : b) seqs.push_back(r.seq);
    }
    std::vector<std::uint64_t> seqs;
};

} // namespace

TEST(Tickerplant, FansOutInOrderWithSequenceNumbers) {
    Tickerplant tp;
    Counter a, b;
    tp.subscribe(&a);
    tp.subscribe(&b);
    const std::vector<Tick> t{idx("BTC", kDay, 1.0), idx("ETH", kDay, 2.0)};
    // sequence numbers start at 1; publish returns the next one
    EXPECT_EQ(tp.publish(t), 3u);
    EXPECT_EQ(tp.publish(t), 5u);
    EXPECT_EQ(a.seqs, (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(a.seqs, b.seqs);
    const std::vector<FeedRecord> stale{{1, t[0]}};
    EXPECT_THROW(tp.publish_records(stale), ContractViolation);
}

TEST(Tickerplant, LogFailureRejectsThePublish) {
    if (!fs::exists("/dev/full")) GTEST_SKIP() << "no /dev/full";
    Tickerplant tp("/dev/full");
    Counter c;
    tp.subscribe(&c);
    const std::vector<Tick> t{idx("BTC", kDay, 1.0)};
    EXPECT_THROW(tp.publish(t), IoError);
    EXPECT_TRUE(c.seqs.empty());
    EXPECT_EQ(tp.next_seq(), 1u);
}

TEST(TickEngine, ReplayRebuildsIdenticalState) {
    const auto root = scratch("replay");
    const auto ticks = feed(kDay, 90, 3);
    std::uint64_t live_digest = 0;
    {
        TickEngine live(config(root, true));
        for (std::size_t i = 0; i < ticks.size(); i += 37)
            live.publish(std::span<const Tick>(ticks).subspan(i, std::min<std::size_t>(37, ticks.size() - i)));
        live_digest = state_digest(live);
    }
    TickEngine again(config(root / "other", false));
    const auto s = again.replay(root / "tplog");
    EXPECT_EQ(s.records, ticks.size());
    EXPECT_EQ(s.skipped_torn, 0u);
    EXPECT_EQ(state_digest(again), live_digest);
    EXPECT_EQ(again.plant().next_seq(), ticks.size() + 1);
}

TEST(TickEngine, TornTailIsSkippedButInteriorCorruptionIsAnError) {
    const auto root = scratch("torn");
    {
        TickEngine e(config(root, true));
        const std::vector<Tick> t{idx("BTC", kDay, 100.0), idx("BTC", kDay + 1000, 101.0)};
        e.publish(t);
    }
    const auto log = root / "tplog";
    {
        std::ofstream out(log, std::ios::app);
        out << "{\"instrument\":\"BTC\",\"ti";
    }
    TickEngine r(config(root / "r", false));
    const auto s = r.replay(log);
    EXPECT_EQ(s.records, 2u);
    EXPECT_EQ(s.skipped_torn, 1u);

    {
        std::ofstream out(log, std::ios::app);
        out << "\n" << encode_record({5, idx("BTC", kDay + 2000, 102.0)}) << "\n";
    }
    TickEngine r2(config(root / "r2", false));
    EXPECT_THROW(r2.replay(log), ParseError);
}

TEST(PriceSubscriber, LateAndMalformedTicksAreCounted) {
    TickEngine e(config(scratch("late"), false));
    const std::vector<Tick> t{idx("BTC", kDay + 61000, 100.0), idx("BTC", kDay + 1000, 90.0), mark("BTC-29MAR24", kDay, -1.0),
                              mark("BTC-31FOO24", kDay, 1.0)};
    e.publish(t);
    EXPECT_EQ(e.prices().late(), 1u);
    EXPECT_EQ(e.prices().malformed(), 2u);
    EXPECT_EQ(e.prices().table(TableId::indextwap).size(), 1u);
}

TEST(LatestCache, NewestTimestampWinsRegardlessOfArrival) {
    TickEngine e(config(scratch("latest"), false));
    const std::vector<Tick> t{idx("BTC", kDay + 5000, 101.0), idx("BTC", kDay + 1000, 99.0),
                              mark("BTC-29MAR24", kDay + 2000, 100.5), mark("BTC-29MAR24", kDay + 2000, 100.7)};
    e.publish(t);
    EXPECT_EQ(e.latest().index("BTC")->price, 101.0);
    EXPECT_EQ(e.latest().product("BTC-29MAR24")->mark_price, 100.7);
    // a product tick carrying an index price does not move the index
    Tick p = mark("BTC-29MAR24", kDay + 9000, 100.9);
    p.index_price = 500.0;
    e.publish(std::span<const Tick>(&p, 1));
    EXPECT_EQ(e.latest().index("BTC")->price, 101.0);
    EXPECT_EQ(e.now(), kDay + 9000);
}

TEST(Store, RoundTripAndIncompletePartitionsStayHidden) {
    const auto root = scratch("store");
    PartitionedStore store(root);
    const Date d = date_of(kDay);
    std::vector<TwapBar> rows;
    for (int i = 0; i < 5; ++i) rows.push_back({"BTC", kDay + i * kMsPerMinute, 100.0 + i, i + 1});
    for (int i = 0; i < 3; ++i) rows.push_back({"ETH", kDay + i * kMsPerMinute, 10.0 + i, 1});
    store.write_partition(d, {{TableId::indextwap, rows}});
    EXPECT_TRUE(store.has_partition(d));
    EXPECT_EQ(store.read_all(d, TableId::indextwap), rows);

    const auto part = store.read(TableId::indextwap, "BTC", kDay + kMsPerMinute, kDay + 3 * kMsPerMinute, true);
    ASSERT_EQ(part.size(), 2u);
    EXPECT_EQ(part[0].twap, 101.0);
    EXPECT_EQ(part[1].count, 3);

    const auto before = store.stats();
    store.read(TableId::indextwap, "ETH", kDay, kDay + kMsPerDay);
    EXPECT_EQ(store.stats().column_reads - before.column_reads, 2u);
    EXPECT_EQ(store.stats().count_column_reads, before.count_column_reads);

    // a truncated column makes its partition invisible
    fs::resize_file(root / "2024.01.10" / "indextwap" / "twap", 10);
    store.refresh();
    EXPECT_FALSE(store.has_partition(d));

    // a partition directory without a manifest is ignored
    fs::create_directories(root / "2024.01.11" / "indextwap");
    store.refresh();
    EXPECT_TRUE(store.dates().empty());
}

TEST(Store, RejectsRowsOutsideTheDate) {
    PartitionedStore store(scratch("outside"));
    const std::vector<TwapBar> rows{{"BTC", kDay + kMsPerDay, 1.0, 1}};
    EXPECT_THROW(store.write_partition(date_of(kDay), {{TableId::indextwap, rows}}), ContractViolation);
}

TEST(TickEngine, PersistIsIdempotentAndQueriesMergeDiskAndLive) {
    const auto root = scratch("persist");
    TickEngine e(config(root, false));
    const auto ticks = feed(kDay + kMsPerDay - 30 * kMsPerMinute, 60, 5);
    e.publish(ticks);
    const auto before = e.query_twap("BTC", kDay, kDay + 2 * kMsPerDay, true);

    const auto rows = e.persist_eod(date_of(kDay));
    EXPECT_GT(rows, 0u);
    EXPECT_EQ(e.query_twap("BTC", kDay, kDay + 2 * kMsPerDay, true), before);
    EXPECT_EQ(e.persist_eod(date_of(kDay)), rows);
    EXPECT_EQ(e.query_twap("BTC", kDay, kDay + 2 * kMsPerDay, true), before);
    EXPECT_EQ(e.store().dates().size(), 1u);

    // a late tick for a persisted minute is rejected, so disk stays authoritative
    const Tick late = idx("BTC", kDay + kMsPerDay - kMsPerMinute, 1.0);
    e.publish(std::span<const Tick>(&late, 1));
    EXPECT_EQ(e.query_twap("BTC", kDay, kDay + 2 * kMsPerDay, true), before);
}

TEST(InferenceCache, WindowEqualsDirectQueryAndReusesSealedMinutes) {
    TickEngine e(config(scratch("cache"), false));
    const auto ticks = feed(kDay, 3 * 24 * 60, 9);
    const std::size_t half = ticks.size() / 2;
    e.publish(std::span<const Tick>(ticks).first(half));
    const TimestampMs from = kDay, to1 = minute_of(e.now()) + kMsPerMinute;
    EXPECT_EQ(e.cached_inference_window("BTC", from, to1), e.query_twap("BTC", from, to1));
    const auto q1 = e.inference_cache().queries();
    EXPECT_EQ(e.cached_inference_window("BTC", from, to1), e.query_twap("BTC", from, to1));
    EXPECT_EQ(e.inference_cache().queries() - q1, 1u); // only the open tail

    e.publish(std::span<const Tick>(ticks).subspan(half));
    const TimestampMs to2 = minute_of(e.now()) + kMsPerMinute;
    EXPECT_EQ(e.cached_inference_window("BTC", from + kMsPerDay, to2), e.query_twap("BTC", from + kMsPerDay, to2));
    e.persist_eod(date_of(kDay));
    EXPECT_EQ(e.cached_inference_window("BTC", from, to2), e.query_twap("BTC", from, to2));
}

TEST(Streaming, OhlcFromRawRows) {
    TickEngine e(config(scratch("ohlc"), false));
    std::vector<Tick> t;
    for (double px : {100.0, 99.0, 103.0, 101.0}) t.push_back(idx("BTC", kDay + static_cast<TimestampMs>(t.size()) * 10000, px));
    t.push_back(idx("BTC", kDay + kMsPerMinute, 105.0));
    e.publish(t);
    const auto bars = e.streaming().ohlc("BTC", kMsPerMinute, kDay, kDay + 2 * kMsPerMinute);
    ASSERT_EQ(bars.size(), 2u);
    EXPECT_EQ(bars[0], (OhlcBar{"BTC", kDay, 100.0, 103.0, 99.0, 101.0, 4}));
    EXPECT_EQ(bars[1].open, 105.0);
    EXPECT_TRUE(e.streaming().ohlc("ETH", kMsPerMinute, kDay, kDay + kMsPerDay).empty());
    EXPECT_THROW(e.streaming().ohlc("BTC", 0, kDay, kDay + 1), DomainError);
}

TEST(Streaming, RowsOlderThanTheHorizonArePurged) {
    TickEngineConfig c = config(scratch("purge"), false);
    c.stream_purge_horizon = 10 * kMsPerMinute;
    TickEngine e(c);
    const std::vector<Tick> t{idx("BTC", kDay, 1.0), idx("BTC", kDay + 20 * kMsPerMinute, 2.0)};
    e.publish(t);
    EXPECT_EQ(e.streaming().row_count(), 1u);
}

TEST(Streaming, VolSurfaceSortedByMaturityThenStrike) {
    TickEngine e(config(scratch("surface"), false));
    const std::vector<Tick> t{option("BTC-29MAR24-45000-C", kDay, 0.02, 0.7), option("BTC-23FEB24-40000-P", kDay, 0.03, 0.6),
                              option("BTC-29MAR24-40000-C", kDay, 0.05, 0.65), option("ETH-29MAR24-2500-C", kDay, 0.05, 0.8),
                              mark("BTC-29MAR24", kDay, 40000.0)};
    e.publish(t);
    const auto s = vol_surface(e.latest(), "BTC");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].instrument, "BTC-23FEB24-40000-P");
    EXPECT_EQ(s[1].instrument, "BTC-29MAR24-40000-C");
    EXPECT_EQ(s[2].implied_vol, 0.7);
}

TEST(Feed, EncodeDecodeRoundTrip) {
    Tick t = option("ETH-29MAR24-2500-C", kDay + 123, 0.05, 0.8);
    t.bid = 0.049;
    EXPECT_EQ(decode_tick(encode_tick(t)), t);
    EXPECT_EQ(decode_record(encode_record({42, t})).seq, 42u);
    EXPECT_THROW(decode_tick("{\"time\":1}"), ParseError);
    EXPECT_THROW(decode_record(encode_tick(t)), ParseError);
}
