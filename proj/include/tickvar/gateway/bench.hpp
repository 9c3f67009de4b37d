#pragma once

#include <algorithm>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tickvar/sim/simulator.hpp"
#include "tickvar/tick/engine.hpp"
#include "tickvar/var/engine.hpp"

namespace tickvar::gateway {

// A tick engine holding `history_days` of 1-minute index history and one
// fresh quote for every product of the synthetic universe.
struct BenchFixture {
    std::unique_ptr<tick::TickEngine> engine;
    var::PortfolioBook book;
    std::vector<Instrument> universe;
    TimestampMs now = 0;
};

inline std::unique_ptr<BenchFixture> make_bench_fixture(const std::filesystem::path& data_root, int history_days = 16,
                                                        std::uint64_t seed = 11,
                                                        TimestampMs start = parse_iso8601("2024-01-01T00:00:00Z")) {
    auto fx = std::make_unique<BenchFixture>();
    tick::TickEngineConfig cfg;
    cfg.data_root = data_root;
    cfg.enable_log = false;
    fx->engine = std::make_unique<tick::TickEngine>(cfg);

    sim::SvConfig sv;
    sv.seed = seed;
    sim::SvSimulator simulator(sv);
    const long minutes = static_cast<long>(history_days) * 24 * 60;
    std::vector<Tick> ticks;
    for (long m = 0; m < minutes; ++m) {
        const TimestampMs t = start + m * kMsPerMinute + kMsPerMinute / 2;
        const auto& px = simulator.step();
        ticks.clear();
        for (std::size_t a = 0; a < px.size(); ++a) ticks.push_back(sim::index_tick(sv.assets[a].sym, t, px[a]));
        fx->engine->publish(ticks);
    }
    const TimestampMs last = start + (minutes - 1) * kMsPerMinute + kMsPerMinute / 2;
    fx->universe = sim::make_universe(sv.assets, last);
    ticks.clear();
    for (const auto& ins : fx->universe) {
        std::size_t a = 0;
        while (sv.assets[a].sym != ins.underlying) ++a;
        ticks.push_back(sim::product_tick(ins, last, simulator.prices()[a], sv.assets[a].annual_vol));
    }
    fx->engine->publish(ticks);
    fx->now = last;
    return fx;
}

// Adds `holdings` distinct products of the universe to `pid`: long futures,
// options of either sign.
inline void fill_bench_portfolio(BenchFixture& fx, const std::string& pid, std::size_t holdings, std::uint64_t seed = 5) {
    std::mt19937_64 rng(seed);
    std::vector<const Instrument*> pool;
    for (const auto& i : fx.universe) pool.push_back(&i);
    std::shuffle(pool.begin(), pool.end(), rng);
    // keep a future first so small books are not pure option books
    const auto fut = std::find_if(pool.begin(), pool.end(), [](const Instrument* i) { return i->is_future(); });
    if (fut != pool.end()) std::iter_swap(pool.begin(), fut);
    std::uniform_real_distribution<double> qty(1.0, 5.0), coin(0.0, 1.0);
    fx.book.clear(pid);
    for (std::size_t k = 0; k < holdings && k < pool.size(); ++k) {
        const Instrument& ins = *pool[k];
        const double sign = ins.is_future() || coin(rng) < 0.6 ? 1.0 : -1.0;
        fx.book.add_position(pid, ins.id, sign * qty(rng));
    }
}

struct BenchRow {
    std::size_t holdings = 0;
    vol::Model model = vol::Model::har;
    var::LatencyReport mean;
    std::size_t reps = 0;
};

// Mean stage timings over `reps` estimates at the fixture clock, after one
// untimed call that warms the inference cache.
inline BenchRow run_bench(BenchFixture& fx, const std::string& pid, vol::Model model, std::size_t reps,
                          double confidence = 0.99, double horizon_days = 1.0) {
    var::VarEngine engine(fx.book, *fx.engine);
    engine.estimate_var(pid, confidence, horizon_days, model);
    BenchRow row;
    row.holdings = fx.book.list_portfolio(pid).size();
    row.model = model;
    row.reps = reps;
    for (std::size_t i = 0; i < reps; ++i) {
        const auto r = engine.estimate_var(pid, confidence, horizon_days, model);
        row.mean.t1 += r.latency.t1;
        row.mean.t2 += r.latency.t2;
        row.mean.t3 += r.latency.t3;
        row.mean.t_epsilon += r.latency.t_epsilon;
        row.mean.total += r.latency.total;
        row.mean.space_bytes = std::max(row.mean.space_bytes, r.latency.space_bytes);
    }
    if (reps) {
        const double n = static_cast<double>(reps);
        row.mean.t1 /= n;
        row.mean.t2 /= n;
        row.mean.t3 /= n;
        row.mean.t_epsilon /= n;
        row.mean.total /= n;
    }
    return row;
}

} // namespace tickvar::gateway
