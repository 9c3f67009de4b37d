// Feeds six days of simulated ticks into an engine, books a small option
// portfolio and prints its one-day 99% VaR under EWMA and GARCH.
#include <cstdio>
#include <filesystem>
#include <map>

#include "tickvar/gateway/bench.hpp"

using namespace tickvar;

int main() {
    const auto root = std::filesystem::temp_directory_path() / "tickvar-quickstart";
    std::filesystem::remove_all(root);
    auto fx = gateway::make_bench_fixture(root, 6);

    // a BTC future plus a near-the-money call and put per underlying, two
    // to four weeks out
    const auto snap = fx->engine->latest().snapshot_all();
    std::map<std::string, int> picked;
    for (const auto& ins : fx->universe) {
        if (ins.is_future() && ins.underlying == "BTC" && !picked["future"]++) fx->book.add_position("demo", ins.id, 2.0);
        if (!ins.is_option()) continue;
        const double days = static_cast<double>(to_timestamp(*ins.maturity) - fx->now) / kMsPerDay;
        const double spot = snap.indices.at(ins.underlying).price;
        if (days < 14 || days > 28 || std::abs(*ins.strike / spot - 1.0) > 0.03) continue;
        const std::string key = ins.underlying + (*ins.option_type == OptionType::call ? "C" : "P");
        if (picked[key]++) continue;
        fx->book.add_position("demo", ins.id, *ins.option_type == OptionType::call ? 5.0 : -3.0);
    }
    for (const auto& p : fx->book.list_portfolio("demo")) std::printf("%-24s %8.2f\n", p.instrument.id.c_str(), p.quantity);

    var::VarEngine engine(fx->book, *fx->engine);
    for (auto model : {vol::Model::ewma, vol::Model::garch}) {
        const auto r = engine.estimate_var("demo", 0.99, 1.0, model);
        std::printf("%-5s VaR %12.2f USD  (q_return %.4f, valid CF %s, %.1f ms)\n", vol::to_string(model), r.var_value,
                    r.q_return, r.valid ? "yes" : "no", r.latency.total);
    }
    std::filesystem::remove_all(root);
}
