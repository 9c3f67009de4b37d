#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tickvar/backtest/stats.hpp"
#include "tickvar/sim/simulator.hpp"
#include "tickvar/tick/engine.hpp"
#include "tickvar/var/engine.hpp"

namespace tickvar::backtest {

struct PnlSample {
    double value_start = 0.0;
    double value_end = 0.0;
    double ret = 0.0;
};

namespace detail {

// TWAP of the last complete minute before `t`.
inline std::optional<double> mark_before(tick::TickEngine& engine, const std::string& sym, TimestampMs t) {
    const TimestampMs m = minute_of(t) - kMsPerMinute;
    const auto bars = engine.query_twap(sym, m, m + kMsPerMinute);
    if (bars.empty()) return std::nullopt;
    return bars.front().twap;
}

inline std::optional<double> portfolio_value(tick::TickEngine& engine, const std::vector<var::Position>& positions,
                                             TimestampMs t) {
    double v = 0.0;
    for (const auto& p : positions) {
        const auto mark = mark_before(engine, p.instrument.id, t);
        if (!mark) return std::nullopt;
        if (p.instrument.is_option()) {
            const auto index = mark_before(engine, p.instrument.underlying, t);
            if (!index) return std::nullopt;
            v += p.quantity * *mark * *index;
        } else {
            v += p.quantity * *mark;
        }
    }
    return v;
}

} // namespace detail

// Portfolio revalued from 1-minute TWAP marks at t0 and t0 + horizon; empty
// when either endpoint lacks a price.
inline std::optional<PnlSample> realized_pnl(tick::TickEngine& engine, const std::vector<var::Position>& positions,
                                             TimestampMs t0, TimestampMs horizon) {
    const auto v0 = detail::portfolio_value(engine, positions, t0);
    const auto v1 = detail::portfolio_value(engine, positions, t0 + horizon);
    if (!v0 || !v1 || *v0 == 0.0) return std::nullopt;
    return PnlSample{*v0, *v1, (*v1 - *v0) / *v0};
}

// Realized covariance of 5-minute returns over (t0, t0 + horizon].
inline vol::CovarianceForecast expost_realized_covariance(tick::TickEngine& engine, const std::vector<std::string>& syms,
                                                          TimestampMs t0, TimestampMs horizon) {
    if (horizon <= 0 || horizon % (5 * kMsPerMinute) != 0)
        throw DomainError("expost_realized_covariance: horizon must be a positive multiple of 5 minutes");
    const int window = static_cast<int>(horizon / kMsPerMinute);
    std::vector<ReturnSeries> r;
    for (const auto& s : syms) {
        const auto bars = engine.query_twap(s, t0, t0 + horizon + kMsPerMinute);
        r.push_back(slice_returns(log_returns(bars, 5 * kMsPerMinute), t0, t0 + horizon));
    }
    const auto n = static_cast<Eigen::Index>(syms.size());
    vol::CovarianceForecast f;
    f.syms = syms;
    f.model = vol::Model::realized;
    f.horizon_days = static_cast<double>(horizon) / kMsPerDay;
    f.sigma = vol::Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
            f.sigma(i, j) = f.sigma(j, i) =
                i == j ? realized_variance(r[ui], window) : realized_covariance(r[ui], r[uj], window);
        }
    return f;
}

struct PortfolioSpec {
    std::uint64_t seed = 7;
    int futures = 2;
    int options = 6;
};

// Random book drawn from `universe`: long futures and options of either
// sign, sized so that the futures dominate the net value.
inline std::vector<var::Position> generate_portfolio(const std::vector<Instrument>& universe, const PortfolioSpec& spec,
                                                     const std::string& pid = "backtest") {
    std::mt19937_64 rng(spec.seed);
    std::vector<const Instrument*> futs, opts;
    for (const auto& i : universe) (i.is_future() ? futs : opts).push_back(&i);
    std::shuffle(futs.begin(), futs.end(), rng);
    std::shuffle(opts.begin(), opts.end(), rng);
    std::uniform_real_distribution<double> fut_qty(0.5, 3.0), opt_qty(1.0, 10.0), coin(0.0, 1.0);
    std::vector<var::Position> out;
    for (int i = 0; i < spec.futures && i < static_cast<int>(futs.size()); ++i)
        out.push_back({pid, *futs[static_cast<std::size_t>(i)], fut_qty(rng)});
    for (int i = 0; i < spec.options && i < static_cast<int>(opts.size()); ++i)
        out.push_back({pid, *opts[static_cast<std::size_t>(i)], (coin(rng) < 0.6 ? 1.0 : -1.0) * opt_qty(rng)});
    return out;
}

struct SimulationSource {
    sim::SvConfig sv;
    TimestampMs start = 0;
    int days = 33;
    sim::UniverseConfig universe{{56, 91, 182}, 4, 0.05, true, true};
    bool persist_daily = true;
};

struct CampaignConfig {
    std::vector<vol::Model> models = {vol::Model::ewma, vol::Model::garch, vol::Model::har, vol::Model::realized};
    std::vector<double> levels = {0.95, 0.975, 0.99};
    TimestampMs start = 0;
    TimestampMs end = 0;
    TimestampMs stride = kMsPerHour;
    double horizon_days = 1.0 / 24.0;
    PortfolioSpec portfolio;
    int groups = 6;
    int f_lags = 4;
    double coverage_significance = 0.01;
    double independence_significance = 0.05;
    std::optional<SimulationSource> simulate;
    std::optional<std::filesystem::path> log;
    std::filesystem::path data_root = "campaign-data";
    std::optional<std::filesystem::path> output_dir;
};

inline CampaignConfig parse_campaign_config(const nlohmann::json& j) {
    CampaignConfig c;
    try {
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j.at("models")) {
                const auto model = vol::parse_model(m.get<std::string>());
                if (!model) throw ValidationError("unknown model '" + m.get<std::string>() + "'");
                c.models.push_back(*model);
            }
        }
        if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<double>>();
        c.start = parse_iso8601(j.at("start").get<std::string>());
        c.end = parse_iso8601(j.at("end").get<std::string>());
        if (j.contains("stride_minutes")) c.stride = j.at("stride_minutes").get<long>() * kMsPerMinute;
        if (j.contains("horizon_days")) c.horizon_days = j.at("horizon_days").get<double>();
        if (j.contains("horizon_minutes")) c.horizon_days = j.at("horizon_minutes").get<double>() / (24.0 * 60.0);
        if (j.contains("portfolio")) {
            const auto& p = j.at("portfolio");
            c.portfolio.seed = p.value("seed", c.portfolio.seed);
            c.portfolio.futures = p.value("futures", c.portfolio.futures);
            c.portfolio.options = p.value("options", c.portfolio.options);
        }
        c.groups = j.value("groups", c.groups);
        c.f_lags = j.value("f_lags", c.f_lags);
        c.coverage_significance = j.value("coverage_significance", c.coverage_significance);
        c.independence_significance = j.value("independence_significance", c.independence_significance);
        c.data_root = j.value("data_root", c.data_root.string());
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        const auto& src = j.at("source");
        if (src.contains("simulate")) {
            const auto& s = src.at("simulate");
            SimulationSource sim;
            sim.sv.seed = s.value("seed", sim.sv.seed);
            sim.sv.correlation = s.value("correlation", sim.sv.correlation);
            sim.sv.vol_half_life_days = s.value("vol_half_life_days", sim.sv.vol_half_life_days);
            sim.sv.log_var_sd = s.value("log_var_sd", sim.sv.log_var_sd);
            sim.start = parse_iso8601(s.at("start").get<std::string>());
            sim.days = s.value("days", sim.days);
            sim.persist_daily = s.value("persist_daily", sim.persist_daily);
            c.simulate = sim;
        } else if (src.contains("log")) {
            c.log = src.at("log").get<std::string>();
        } else {
            throw ValidationError("campaign source must be 'simulate' or 'log'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("campaign config: ") + e.what());
    }
    if (c.end <= c.start) throw ValidationError("campaign config: end must follow start");
    if (c.stride <= 0) throw ValidationError("campaign config: stride must be positive");
    if (!(c.horizon_days > 0.0)) throw ValidationError("campaign config: horizon must be positive");
    return c;
}

struct SampleRecord {
    TimestampMs time = 0;
    int group = 0;
    std::optional<PnlSample> pnl;
    // model -> level -> q_return (empty when the estimate failed)
    std::map<vol::Model, std::map<double, std::optional<double>>> q_return;
    std::map<vol::Model, std::string> errors;
    MarketSnapshot snapshot; // latest values at the sample time
};

struct CellResult {
    vol::Model model;
    double level = 0.0;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double expected = 0.0;
    TestReport coverage;
    std::vector<TestReport> lr_groups;
    std::vector<TestReport> f_groups;
    std::optional<double> lr_average;
    std::optional<double> f_average;
    bool lr_pass = true;
    bool f_pass = true;
    double hit_rate = 0.0;
};

struct CampaignResult {
    std::vector<SampleRecord> samples;
    std::vector<CellResult> cells;
    std::vector<var::Position> portfolio;
    std::size_t dropped = 0;

    const CellResult* cell(vol::Model m, double level) const {
        for (const auto& c : cells)
            if (c.model == m && std::abs(c.level - level) < 1e-12) return &c;
        return nullptr;
    }

    int passes(vol::Model m) const {
        int n = 0;
        for (const auto& c : cells)
            if (c.model == m) n += !c.coverage.reject + c.lr_pass + c.f_pass;
        return n;
    }
};

// Evaluates the violation indicators of every (model, level) cell.
inline std::vector<CellResult> evaluate_cells(const std::vector<SampleRecord>& samples, const CampaignConfig& cfg) {
    std::vector<CellResult> out;
    for (vol::Model m : cfg.models)
        for (double level : cfg.levels) {
            CellResult c;
            c.model = m;
            c.level = level;
            std::vector<int> ind;
            std::vector<TimestampMs> times;
            for (const auto& s : samples) {
                if (!s.pnl) continue;
                const auto mit = s.q_return.find(m);
                if (mit == s.q_return.end()) continue;
                const auto lit = mit->second.find(level);
                if (lit == mit->second.end() || !lit->second) continue;
                // loss >= VaR, in money: -dV >= -q V
                const double dv = s.pnl->value_end - s.pnl->value_start;
                ind.push_back(-dv >= -*lit->second * s.pnl->value_start ? 1 : 0);
                times.push_back(s.time);
            }
            c.samples = ind.size();
            for (int v : ind) c.violations += static_cast<std::size_t>(v);
            const double p = 1.0 - level;
            c.expected = p * static_cast<double>(c.samples);
            c.hit_rate = c.samples ? static_cast<double>(c.violations) / static_cast<double>(c.samples) : 0.0;
            if (c.samples == 0) {
                c.coverage.test = "binomial";
                out.push_back(std::move(c));
                continue;
            }
            c.coverage = coverage_test(c.samples, p, c.violations, cfg.coverage_significance);

            const auto groups = split_groups(times, cfg.groups);
            double f_df2_sum = 0.0;
            std::size_t f_df2_n = 0;
            for (std::size_t g = 0; g < groups.size(); ++g) {
                std::vector<int> gi;
                for (std::size_t idx : groups[g]) gi.push_back(ind[idx]);
                TestReport lr;
                lr.test = "christoffersen_lr";
                lr.samples = gi.size();
                if (gi.size() >= 2) lr = christoffersen_lr(gi, cfg.independence_significance);
                lr.group = static_cast<int>(g);
                c.lr_groups.push_back(lr);

                TestReport f;
                f.test = "regression_f";
                f.samples = gi.size();
                if (gi.size() > static_cast<std::size_t>(cfg.f_lags) + 5)
                    f = regression_f_test(gi, cfg.f_lags, cfg.independence_significance);
                f.group = static_cast<int>(g);
                if (f.applicable()) {
                    f_df2_sum += static_cast<double>(gi.size()) - 2.0 * cfg.f_lags - 1.0;
                    ++f_df2_n;
                }
                c.f_groups.push_back(f);
            }
            c.lr_average = weighted_average(c.lr_groups, true);
            c.f_average = weighted_average(c.f_groups, false);
            c.lr_pass = !c.lr_average || *c.lr_average <= chi2_critical(cfg.independence_significance);
            if (c.f_average && f_df2_n > 0) {
                const double d2 = std::max(1.0, f_df2_sum / static_cast<double>(f_df2_n));
                c.f_pass = f_survival(*c.f_average, cfg.f_lags, d2) >= cfg.independence_significance;
            }
            out.push_back(std::move(c));
        }
    return out;
}

namespace detail {

// Fixed clock at a sample time over a live tick engine.
class PinnedClock : public var::MarketDataSource {
public:
    PinnedClock(tick::TickEngine& e, TimestampMs t) : e_(e), t_(t) {}
    std::vector<TwapBar> inference_bars(const std::string& s, TimestampMs a, TimestampMs b) override {
        return e_.inference_bars(s, a, b);
    }
    MarketSnapshot snapshot(const std::vector<std::string>& i, const std::vector<std::string>& p) override {
        return e_.snapshot(i, p);
    }
    TimestampMs now() const override { return t_; }

private:
    tick::TickEngine& e_;
    TimestampMs t_;
};

inline std::string fmt(std::optional<double> v, int precision = 2) {
    if (!v) return "N/A";
    if (std::isinf(*v)) return "inf";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << *v;
    return os.str();
}

} // namespace detail

// Runs the estimate-then-realize protocol over the sample grid. The source
// is replayed in time order; at each sample time every model estimates VaR
// for every level, then realized P&L is read once all data has arrived.
class Campaign {
public:
    using Progress = std::function<void(std::size_t done, std::size_t total)>;

    explicit Campaign(CampaignConfig cfg) : cfg_(std::move(cfg)) {}

    CampaignResult run(const Progress& progress = {}) {
        std::filesystem::remove_all(cfg_.data_root);
        tick::TickEngineConfig ec;
        ec.data_root = cfg_.data_root;
        ec.enable_log = false;
        tick::TickEngine engine(ec);

        std::vector<TimestampMs> times;
        for (TimestampMs t = cfg_.start; t <= cfg_.end; t += cfg_.stride) times.push_back(t);
        CampaignResult result;
        std::size_t next = 0;

        std::vector<Instrument> universe;
        if (cfg_.simulate) universe = sim::make_universe(cfg_.simulate->sv.assets, cfg_.simulate->start, cfg_.simulate->universe);

        auto sample = [&](TimestampMs t) {
            SampleRecord rec;
            rec.time = t;
            rec.group = group_of(t, cfg_.groups);
            engine.heartbeat(t);
            detail::PinnedClock clock(engine, t);
            const auto syms = var::extract_indices(result.portfolio);
            std::vector<std::string> products;
            for (const auto& p : result.portfolio) products.push_back(p.instrument.id);
            rec.snapshot = engine.snapshot(syms, products);
            for (vol::Model m : cfg_.models) {
                if (m == vol::Model::realized) continue;
                try {
                    const vol::CovarianceForecast f = var::infer(clock, syms, m, cfg_.horizon_days, t);
                    for (double level : cfg_.levels)
                        rec.q_return[m][level] =
                            var::value_at_risk(result.portfolio, rec.snapshot, f, level, cfg_.horizon_days, t).q_return;
                } catch (const Error& e) {
                    rec.errors[m] = e.what();
                    for (double level : cfg_.levels) rec.q_return[m][level] = std::nullopt;
                }
            }
            result.samples.push_back(std::move(rec));
            if (progress) progress(result.samples.size(), times.size());
        };

        auto advance_to = [&](TimestampMs t) {
            while (next < times.size() && times[next] <= t) sample(times[next++]);
        };

        if (cfg_.simulate) {
            const auto& s = *cfg_.simulate;
            result.portfolio = generate_portfolio(universe, cfg_.portfolio);
            sim::FeedConfig fc;
            fc.sv = s.sv;
            fc.start = s.start;
            fc.minutes = static_cast<long>(s.days) * 24 * 60;
            for (const auto& p : result.portfolio) fc.products.push_back(p.instrument);
            TimestampMs day = day_of(s.start);
            sim::generate_feed(fc, [&](std::span<const Tick> ticks) {
                if (ticks.empty()) return;
                advance_to(minute_of(ticks.front().time));
                if (s.persist_daily && day_of(ticks.front().time) > day + kMsPerDay) {
                    // keep one full intraday day in memory, persist the one before
                    engine.persist_eod(date_of(day));
                    day += kMsPerDay;
                }
                engine.publish(ticks);
            });
        } else if (cfg_.log) {
            std::vector<Instrument> seen;
            tick::read_log(*cfg_.log, [&](std::span<const tick::FeedRecord> batch) {
                std::size_t i = 0;
                while (i < batch.size()) {
                    std::size_t j = i;
                    const TimestampMs limit = next < times.size() ? times[next] : std::numeric_limits<TimestampMs>::max();
                    while (j < batch.size() && batch[j].tick.time < limit) ++j;
                    engine.deliver_unlogged(batch.subspan(i, j - i));
                    if (j < batch.size()) {
                        if (result.portfolio.empty()) result.portfolio = portfolio_from_cache(engine);
                        advance_to(batch[j].tick.time);
                    }
                    i = j;
                }
            });
            if (result.portfolio.empty()) result.portfolio = portfolio_from_cache(engine);
        } else {
            throw ValidationError("campaign has no data source");
        }
        advance_to(std::numeric_limits<TimestampMs>::max());

        const TimestampMs horizon = static_cast<TimestampMs>(std::llround(cfg_.horizon_days * kMsPerDay));
        const bool benchmark = std::find(cfg_.models.begin(), cfg_.models.end(), vol::Model::realized) != cfg_.models.end();
        for (auto& rec : result.samples) {
            rec.pnl = realized_pnl(engine, result.portfolio, rec.time, horizon);
            if (!rec.pnl) ++result.dropped;
            if (!benchmark) continue;
            try {
                const auto syms = var::extract_indices(result.portfolio);
                const auto f = expost_realized_covariance(engine, syms, rec.time, horizon);
                for (double level : cfg_.levels)
                    rec.q_return[vol::Model::realized][level] =
                        var::value_at_risk(result.portfolio, rec.snapshot, f, level, cfg_.horizon_days, rec.time)
                            .q_return;
            } catch (const Error& e) {
                rec.errors[vol::Model::realized] = e.what();
                for (double level : cfg_.levels) rec.q_return[vol::Model::realized][level] = std::nullopt;
            }
        }
        result.cells = evaluate_cells(result.samples, cfg_);
        if (cfg_.output_dir) write_outputs(result, *cfg_.output_dir);
        return result;
    }

    // Paper-style tables as text.
    std::string render(const CampaignResult& r) const {
        std::ostringstream os;
        os << "Coverage (binomial upper-tail p-values in brackets)\n";
        os << std::left << std::setw(8) << "level" << std::setw(8) << "n" << std::setw(10) << "expected";
        for (vol::Model m : cfg_.models) os << std::setw(16) << vol::to_string(m);
        os << "\n";
        for (double level : cfg_.levels) {
            const CellResult* any = r.cell(cfg_.models.front(), level);
            os << std::setw(8) << detail::fmt(level * 100.0, 1) << std::setw(8) << (any ? any->samples : 0)
               << std::setw(10) << detail::fmt(any ? any->expected : 0.0, 1);
            for (vol::Model m : cfg_.models) {
                const CellResult* c = r.cell(m, level);
                os << std::setw(16)
                   << (c ? std::to_string(c->violations) + " (" + detail::fmt(c->coverage.p_value, 3) + ")" : "-");
            }
            os << "\n";
        }
        for (const char* which : {"LR", "F"}) {
            const bool lr = std::string(which) == "LR";
            os << "\nIndependence by group: " << (lr ? "Christoffersen LR" : "regression F (k=" + std::to_string(cfg_.f_lags) + ")")
               << " (average is sample-weighted; decision on the average is heuristic)\n";
            os << std::setw(8) << "level" << std::setw(10) << "model";
            for (int g = 0; g < cfg_.groups; ++g) os << std::setw(9) << ("g" + std::to_string(g));
            os << std::setw(9) << "average" << "result\n";
            for (double level : cfg_.levels)
                for (vol::Model m : cfg_.models) {
                    const CellResult* c = r.cell(m, level);
                    if (!c) continue;
                    os << std::setw(8) << detail::fmt(level * 100.0, 1) << std::setw(10) << vol::to_string(m);
                    for (const auto& g : lr ? c->lr_groups : c->f_groups) os << std::setw(9) << detail::fmt(g.statistic);
                    os << std::setw(9) << detail::fmt(lr ? c->lr_average : c->f_average)
                       << ((lr ? c->lr_pass : c->f_pass) ? "accept" : "reject") << "\n";
                }
        }
        os << "\nHit rates and passes\n" << std::setw(10) << "model";
        for (double level : cfg_.levels) os << std::setw(10) << detail::fmt(level * 100.0, 1);
        os << "passes\n";
        for (vol::Model m : cfg_.models) {
            os << std::setw(10) << vol::to_string(m);
            for (double level : cfg_.levels) {
                const CellResult* c = r.cell(m, level);
                os << std::setw(10) << (c ? detail::fmt(c->hit_rate * 100.0) + "%" : "-");
            }
            os << r.passes(m) << "/" << 3 * cfg_.levels.size() << "\n";
        }
        return os.str();
    }

    const CampaignConfig& config() const { return cfg_; }

private:
    std::vector<var::Position> portfolio_from_cache(tick::TickEngine& engine) const {
        std::vector<Instrument> universe;
        for (const auto& id : engine.latest().product_ids()) universe.push_back(parse_instrument(id));
        return generate_portfolio(universe, cfg_.portfolio);
    }

    void write_outputs(const CampaignResult& r, const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        std::ofstream cov(dir / "coverage.csv");
        cov << "model,level,samples,expected,violations,p_value,reject\n";
        for (const auto& c : r.cells)
            cov << vol::to_string(c.model) << ',' << c.level << ',' << c.samples << ',' << c.expected << ','
                << c.violations << ',' << detail::fmt(c.coverage.p_value, 6) << ',' << c.coverage.reject << '\n';
        for (const char* which : {"lr", "f"}) {
            const bool lr = std::string(which) == "lr";
            std::ofstream out(dir / (std::string("independence_") + which + ".csv"));
            out << "model,level";
            for (int g = 0; g < cfg_.groups; ++g) out << ",group" << g;
            out << ",average,result\n";
            for (const auto& c : r.cells) {
                out << vol::to_string(c.model) << ',' << c.level;
                for (const auto& g : lr ? c.lr_groups : c.f_groups) out << ',' << detail::fmt(g.statistic, 6);
                out << ',' << detail::fmt(lr ? c.lr_average : c.f_average, 6) << ','
                    << ((lr ? c.lr_pass : c.f_pass) ? "accept" : "reject") << '\n';
            }
        }
        std::ofstream sum(dir / "summary.csv");
        sum << "model";
        for (double level : cfg_.levels) sum << ",hit_" << level;
        sum << ",passes,max_passes\n";
        for (vol::Model m : cfg_.models) {
            sum << vol::to_string(m);
            for (double level : cfg_.levels) {
                const CellResult* c = r.cell(m, level);
                sum << ',' << (c ? c->hit_rate : 0.0);
            }
            sum << ',' << r.passes(m) << ',' << 3 * cfg_.levels.size() << '\n';
        }
        std::ofstream log(dir / "samples.jsonl");
        for (const auto& s : r.samples) {
            nlohmann::json j;
            j["time"] = format_iso8601(s.time);
            j["group"] = s.group;
            if (s.pnl) {
                j["value_start"] = s.pnl->value_start;
                j["value_end"] = s.pnl->value_end;
                j["return"] = s.pnl->ret;
            }
            for (const auto& [m, levels] : s.q_return)
                for (const auto& [level, q] : levels)
                    j["q_return"][vol::to_string(m)][detail::fmt(level, 3)] = q ? nlohmann::json(*q) : nlohmann::json();
            for (const auto& [m, e] : s.errors) j["errors"][vol::to_string(m)] = e;
            log << j.dump() << '\n';
        }
    }

    CampaignConfig cfg_;
};

} // namespace tickvar::backtest
