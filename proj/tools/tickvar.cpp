#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tickvar/backtest/campaign.hpp"
#include "tickvar/gateway/bench.hpp"
#include "tickvar/gateway/server.hpp"

using namespace tickvar;

namespace {

std::filesystem::path default_data_root() {
    if (const char* v = std::getenv("TICKVAR_DATA_ROOT")) return v;
    return "tickvar-data";
}

// "max" or "xN"/"N": speed-up over feed time; 0 means as fast as possible.
double parse_speed(const std::string& s) {
    if (s == "max") return 0.0;
    std::string v = s;
    if (!v.empty() && (v.front() == 'x' || v.front() == 'X')) v.erase(0, 1);
    try {
        const double x = std::stod(v);
        if (x > 0.0) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("speed must be 'max' or xN with N > 0, got '" + s + "'");
}

// Publishes a feed file into `engine`, pacing batches by feed time when
// `speed` > 0.
std::uint64_t replay_feed(tick::TickEngine& engine, const std::filesystem::path& feed, double speed) {
    TimestampMs first_feed = -1;
    const auto wall0 = std::chrono::steady_clock::now();
    return tick::read_feed(
        feed,
        [&](std::span<const Tick> batch) {
            if (speed > 0.0) {
                // publish tick by tick so each arrives at its scaled time
                for (const Tick& t : batch) {
                    if (first_feed < 0) first_feed = t.time;
                    const auto due = wall0 + std::chrono::duration<double, std::milli>((t.time - first_feed) / speed);
                    std::this_thread::sleep_until(due);
                    engine.publish(std::span<const Tick>(&t, 1));
                }
            } else {
                engine.publish(batch);
            }
        },
        speed > 0.0 ? 256 : 4096);
}

void print_state(tick::TickEngine& e) {
    std::cout << "state digest " << std::hex << std::setw(16) << std::setfill('0') << tick::state_digest(e) << std::dec
              << std::setfill(' ') << "\n";
    for (auto id : tick::kAllTables)
        std::cout << std::left << std::setw(12) << tick::table_name(id) << " rows " << e.prices().table(id).size() << "\n";
    std::cout << "products " << e.latest().product_ids().size() << ", malformed " << e.prices().malformed()
              << ", late " << e.prices().late() << "\n";
    if (e.now() > 0) std::cout << "latest tick " << format_iso8601(e.now()) << "\n";
}

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tickvar: real-time crypto portfolio VaR engine"};
    app.require_subcommand(1);
    std::string data_root = default_data_root().string();
    app.add_option("--data-root", data_root, "Data directory (env TICKVAR_DATA_ROOT)");

    // replay
    auto* replay = app.add_subcommand("replay", "Replay a feed file through the tick engine");
    std::string feed_path, speed = "max";
    bool no_log = false;
    replay->add_option("feedfile", feed_path, "Line-delimited JSON ticks")->required();
    replay->add_option("--speed", speed, "xN or max");
    replay->add_flag("--no-log", no_log, "Do not write the recovery log");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP and WebSocket gateway");
    std::string host = "127.0.0.1", serve_feed, serve_speed = "x1";
    int port = 0;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "HTTP port (env TICKVAR_PORT, default 8080); WebSocket on port+1");
    serve->add_option("--feed", serve_feed, "Feed file replayed in the background");
    serve->add_option("--speed", serve_speed, "Replay speed for --feed");

    // backtest
    auto* bt = app.add_subcommand("backtest", "Run a backtest campaign from a JSON config");
    std::string config_path;
    bt->add_option("config", config_path, "Campaign config")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Latency decomposition per holdings count");
    std::vector<std::size_t> holdings{1, 5, 10, 50, 100, 500, 1000};
    std::vector<std::string> models{"HAR"};
    std::size_t reps = 100;
    bench->add_option("--holdings", holdings, "Holdings counts")->delimiter(',');
    bench->add_option("--model", models, "EWMA, GARCH or HAR")->delimiter(',');
    bench->add_option("--reps", reps, "Repetitions per row");

    // persist-eod
    auto* persist = app.add_subcommand("persist-eod", "Write one date from the recovery log to the store");
    std::string date_text;
    persist->add_option("date", date_text, "YYYY-MM-DD or YYYY.MM.DD")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic feed file");
    std::string out_path, sim_start = "2024-01-01T00:00:00Z";
    int sim_days = 1;
    std::uint64_t sim_seed = 1;
    std::size_t sim_products = 20;
    simulate->add_option("out", out_path, "Output feed file")->required();
    simulate->add_option("--days", sim_days, "Days of 1-minute data");
    simulate->add_option("--start", sim_start, "ISO-8601 start time");
    simulate->add_option("--seed", sim_seed, "Random seed");
    simulate->add_option("--products", sim_products, "Products quoted alongside the indices");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*replay) {
            tick::TickEngineConfig cfg;
            cfg.data_root = data_root;
            cfg.enable_log = !no_log;
            if (cfg.enable_log) std::filesystem::create_directories(cfg.data_root);
            tick::TickEngine engine(cfg);
            const auto t0 = std::chrono::steady_clock::now();
            const auto n = replay_feed(engine, feed_path, parse_speed(speed));
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cout << "replayed " << n << " ticks in " << std::fixed << std::setprecision(3) << secs << " s\n";
            std::cout.unsetf(std::ios::fixed);
            print_state(engine);
            return 0;
        }
        if (*serve) {
            tick::TickEngineConfig cfg;
            cfg.data_root = data_root;
            std::filesystem::create_directories(cfg.data_root);
            tick::TickEngine engine(cfg);
            if (std::filesystem::exists(engine.log_path())) {
                const auto s = engine.replay(engine.log_path());
                std::cout << "recovered " << s.records << " records from " << engine.log_path() << "\n";
            }
            var::PortfolioBook book;
            gateway::ServerConfig sc;
            sc.host = host;
            sc.port = port > 0 ? port : gateway::port_from_env();
            gateway::Server server(engine, book, sc);
            server.start();
            std::cout << "HTTP on " << host << ":" << server.http_port() << ", WebSocket on " << host << ":"
                      << server.ws_port() << std::endl;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::thread feeder;
            if (!serve_feed.empty())
                feeder = std::thread([&] {
                    try {
                        replay_feed(engine, serve_feed, parse_speed(serve_speed));
                        std::cout << "feed replay finished" << std::endl;
                    } catch (const std::exception& e) {
                        std::cerr << "feed replay failed: " << e.what() << std::endl;
                    }
                });
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
            server.stop();
            if (feeder.joinable()) feeder.join();
            return 0;
        }
        if (*bt) {
            std::ifstream in(config_path);
            if (!in) throw IoError("cannot open config " + config_path);
            const auto j = nlohmann::json::parse(in, nullptr, false);
            if (j.is_discarded()) throw ParseError("config " + config_path + " is not valid JSON");
            backtest::Campaign campaign(backtest::parse_campaign_config(j));
            const auto result = campaign.run([](std::size_t done, std::size_t total) {
                if (done % 50 == 0 || done == total) std::cerr << "sample " << done << "/" << total << "\r" << std::flush;
            });
            std::cerr << "\n";
            std::cout << campaign.render(result);
            if (result.dropped) std::cout << result.dropped << " samples dropped for missing prices\n";
            return 0;
        }
        if (*bench) {
            std::vector<vol::Model> ms;
            for (const auto& m : models) {
                const auto p = vol::parse_model(m);
                if (!p || *p == vol::Model::realized) throw ValidationError("unknown model '" + m + "'");
                ms.push_back(*p);
            }
            auto fx = gateway::make_bench_fixture(std::filesystem::path(data_root) / "bench");
            std::cout << "universe " << fx->universe.size() << " instruments, " << reps << " runs per row\n";
            std::cout << std::left << std::setw(10) << "holdings" << std::setw(8) << "model" << std::right
                      << std::setw(10) << "t1 ms" << std::setw(10) << "t2 ms" << std::setw(10) << "t3 ms"
                      << std::setw(10) << "teps ms" << std::setw(10) << "total ms" << std::setw(12) << "space B"
                      << "\n";
            std::cout << std::fixed << std::setprecision(3);
            for (auto m : ms)
                for (auto h : holdings) {
                    gateway::fill_bench_portfolio(*fx, "bench", h);
                    const auto row = gateway::run_bench(*fx, "bench", m, reps);
                    std::cout << std::left << std::setw(10) << row.holdings << std::setw(8) << vol::to_string(m)
                              << std::right << std::setw(10) << row.mean.t1 << std::setw(10) << row.mean.t2
                              << std::setw(10) << row.mean.t3 << std::setw(10) << row.mean.t_epsilon << std::setw(10)
                              << row.mean.total << std::setw(12) << row.mean.space_bytes << "\n";
                }
            return 0;
        }
        if (*persist) {
            std::string d = date_text;
            std::replace(d.begin(), d.end(), '.', '-');
            const TimestampMs day = parse_iso8601(d + "T00:00:00Z");
            tick::TickEngineConfig cfg;
            cfg.data_root = data_root;
            cfg.enable_log = false;
            tick::TickEngine engine(cfg);
            const auto log = cfg.data_root / "tplog";
            if (!std::filesystem::exists(log)) throw IoError("no recovery log at " + log.string());
            engine.replay(log);
            const auto rows = engine.persist_eod(date_of(day));
            std::cout << "persisted " << rows << " rows for " << d << "\n";
            return 0;
        }
        if (*simulate) {
            sim::FeedConfig fc;
            fc.sv.seed = sim_seed;
            fc.start = parse_iso8601(sim_start);
            fc.minutes = static_cast<long>(sim_days) * 24 * 60;
            auto universe = sim::make_universe(fc.sv.assets, fc.start);
            std::mt19937_64 rng(sim_seed);
            std::shuffle(universe.begin(), universe.end(), rng);
            universe.resize(std::min(universe.size(), sim_products));
            fc.products = universe;
            std::ofstream out(out_path);
            if (!out) throw IoError("cannot write " + out_path);
            std::uint64_t n = 0;
            sim::generate_feed(fc, [&](std::span<const Tick> ticks) {
                for (const auto& t : ticks) out << tick::encode_tick(t) << '\n';
                n += ticks.size();
            });
            std::cout << "wrote " << n << " ticks to " << out_path << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
