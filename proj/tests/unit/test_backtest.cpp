#include <filesystem>
#include <random>

#include <unistd.h>

#include <gtest/gtest.h>

#include "tickvar/backtest/campaign.hpp"

using namespace tickvar;
using namespace tickvar::backtest;
namespace fs = std::filesystem;

namespace {

std::vector<int> bits(const std::string& s) {
    std::vector<int> out;
    for (char c : s) out.push_back(c == '1');
    return out;
}

TestReport group(std::size_t samples, std::optional<double> stat) {
    TestReport r;
    r.samples = samples;
    r.statistic = stat;
    return r;
}

} // namespace

TEST(Binomial, ReproducesPublishedPValues) {
    EXPECT_NEAR(binomial_coverage(413, 0.05, 13), 0.974, 0.01);
    EXPECT_NEAR(binomial_coverage(413, 0.05, 23), 0.328, 0.01);
    EXPECT_NEAR(binomial_coverage(413, 0.05, 33), 0.006, 0.01);
    // upper tail P(X >= k)
    EXPECT_NEAR(binomial_coverage(413, 0.05, 33), 0.006052310797069868, 1e-9);
    EXPECT_DOUBLE_EQ(binomial_coverage(10, 0.05, 0), 1.0);
    EXPECT_THROW(binomial_coverage(10, 0.05, 11), DomainError);
    EXPECT_TRUE(coverage_test(413, 0.05, 33).reject);
    EXPECT_FALSE(coverage_test(413, 0.05, 23).reject);
}

TEST(Christoffersen, CriticalValues) {
    EXPECT_DOUBLE_EQ(chi2_critical(0.10), 2.706);
    EXPECT_DOUBLE_EQ(chi2_critical(0.05), 3.841);
    EXPECT_DOUBLE_EQ(chi2_critical(0.01), 6.635);
    EXPECT_NEAR(chi2_critical(0.025), 5.0239, 1e-4);
}

TEST(Christoffersen, MatchesHandComputedStatistic) {
    // n00=4 n01=2 n10=1 n11=3
    const auto seq = bits("00011100011");
    const auto c = transition_counts(seq);
    EXPECT_EQ(c.n00, 4u);
    EXPECT_EQ(c.n01, 2u);
    EXPECT_EQ(c.n10, 1u);
    EXPECT_EQ(c.n11, 3u);
    const auto r = christoffersen_lr(seq);
    EXPECT_NEAR(*r.statistic, 1.7260924347106847, 1e-12);
    EXPECT_FALSE(r.reject);

    const auto none = christoffersen_lr(bits("0000000"));
    EXPECT_FALSE(none.statistic.has_value());
    EXPECT_FALSE(none.reject);
    EXPECT_THROW(christoffersen_lr(bits("1")), InsufficientData);
}

TEST(RegressionF, MatchesLeastSquaresReference) {
    // reference computed with a generic least-squares solver and the F(4, 141) tail
    const auto seq = bits("000010011000000000010001000001010000000011100000101000000000000010000000000000000000000010"
                          "000000000100000001000110000000000000000110001000000000000000");
    ASSERT_EQ(seq.size(), 150u);
    const auto r = regression_f_test(seq, 4);
    EXPECT_NEAR(*r.statistic, 1.1334691634136516, 1e-9);
    EXPECT_NEAR(*r.p_value, 0.3432639289818445, 1e-9);
    EXPECT_FALSE(r.reject);

    EXPECT_FALSE(regression_f_test(std::vector<int>(50, 0)).statistic.has_value());
    EXPECT_THROW(regression_f_test(bits("0101")), InsufficientData);
}

TEST(Groups, HourOfDayBuckets) {
    const TimestampMs d = parse_iso8601("2024-01-02T00:00:00Z");
    EXPECT_EQ(group_of(d, 6), 0);
    EXPECT_EQ(group_of(d + 7 * kMsPerHour + 59 * kMsPerMinute, 6), 1);
    EXPECT_EQ(group_of(d + 23 * kMsPerHour, 6), 5);
    const std::vector<TimestampMs> times{d, d + kMsPerHour, d + 6 * kMsPerHour};
    const auto g = split_groups(times, 6);
    EXPECT_EQ(g[0], (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(g[1], (std::vector<std::size_t>{1}));
}

TEST(Groups, WeightedAverageConventions) {
    const std::vector<TestReport> g{group(10, 1.0), group(10, std::nullopt), group(20, 2.0)};
    EXPECT_DOUBLE_EQ(*weighted_average(g, true), 50.0 / 40.0);
    EXPECT_DOUBLE_EQ(*weighted_average(g, false), 50.0 / 30.0);
    const std::vector<TestReport> empty{group(10, std::nullopt)};
    EXPECT_DOUBLE_EQ(*weighted_average(empty, true), 0.0);
    EXPECT_FALSE(weighted_average(empty, false).has_value());
}

TEST(CampaignConfig, ParsesAndValidates) {
    const auto j = nlohmann::json::parse(R"({
        "models": ["EWMA", "HAR"], "levels": [0.95], "start": "2024-01-16T00:00:00Z",
        "end": "2024-01-17T00:00:00Z", "stride_minutes": 30, "horizon_minutes": 60,
        "portfolio": {"seed": 3, "futures": 1, "options": 2},
        "source": {"simulate": {"seed": 9, "start": "2024-01-01T00:00:00Z", "days": 17}}})");
    const auto c = parse_campaign_config(j);
    EXPECT_EQ(c.models, (std::vector<vol::Model>{vol::Model::ewma, vol::Model::har}));
    EXPECT_EQ(c.stride, 30 * kMsPerMinute);
    EXPECT_DOUBLE_EQ(c.horizon_days, 1.0 / 24.0);
    EXPECT_EQ(c.portfolio.options, 2);
    ASSERT_TRUE(c.simulate.has_value());
    EXPECT_EQ(c.simulate->days, 17);

    auto bad = j;
    bad["models"] = {"ARIMA"};
    EXPECT_THROW(parse_campaign_config(bad), ValidationError);
    bad = j;
    bad["end"] = "2024-01-01T00:00:00Z";
    EXPECT_THROW(parse_campaign_config(bad), ValidationError);
    bad = j;
    bad.erase("source");
    EXPECT_THROW(parse_campaign_config(bad), ValidationError);
    bad = j;
    bad["source"] = {{"nothing", 1}};
    EXPECT_THROW(parse_campaign_config(bad), ValidationError);
}

TEST(Campaign, SmallSimulatedRunProducesConsistentCells) {
    const fs::path root = fs::temp_directory_path() / ("tickvar-unit-campaign-" + std::to_string(::getpid()));
    CampaignConfig c;
    c.models = {vol::Model::ewma, vol::Model::realized};
    c.levels = {0.95, 0.99};
    c.start = parse_iso8601("2024-01-06T00:00:00Z");
    c.end = parse_iso8601("2024-01-06T11:00:00Z");
    c.stride = kMsPerHour;
    c.horizon_days = 1.0 / 24.0;
    c.portfolio = {7, 1, 2};
    SimulationSource s;
    s.sv.seed = 4;
    s.start = parse_iso8601("2024-01-01T00:00:00Z");
    s.days = 7;
    s.universe.maturity_days = {56};
    s.universe.strikes_each_side = 1;
    c.simulate = s;
    c.data_root = root / "data";
    c.output_dir = root / "out";

    Campaign campaign(c);
    const auto r = campaign.run();
    EXPECT_EQ(r.samples.size(), 12u);
    EXPECT_EQ(r.portfolio.size(), 3u);
    ASSERT_NE(r.cell(vol::Model::ewma, 0.95), nullptr);
    for (const auto& cell : r.cells) {
        EXPECT_EQ(cell.samples + r.dropped, 12u);
        EXPECT_NEAR(cell.expected, cell.samples * (1.0 - cell.level), 1e-12);
        EXPECT_EQ(cell.lr_groups.size(), 6u);
        EXPECT_LE(cell.violations, cell.samples);
    }
    // a violation at 99% is also a violation at 95%
    EXPECT_LE(r.cell(vol::Model::ewma, 0.99)->violations, r.cell(vol::Model::ewma, 0.95)->violations);
    for (const auto& rec : r.samples)
        if (rec.pnl) {
            EXPECT_NEAR(rec.pnl->ret, (rec.pnl->value_end - rec.pnl->value_start) / rec.pnl->value_start, 1e-12);
            EXPECT_TRUE(rec.q_return.at(vol::Model::ewma).at(0.95).has_value());
        }

    const std::string table = campaign.render(r);
    EXPECT_NE(table.find("EWMA"), std::string::npos);
    for (const char* f : {"coverage.csv", "independence_lr.csv", "independence_f.csv", "summary.csv", "samples.jsonl"})
        EXPECT_TRUE(fs::exists(root / "out" / f)) << f;
    fs::remove_all(root);
}
