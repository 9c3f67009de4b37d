#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tickvar/var/engine.hpp"

using namespace tickvar;
using namespace tickvar::var;

namespace {

const TimestampMs kNow = parse_iso8601("2024-01-20T12:00:30Z");

Position holding(const std::string& id, double qty) { return {"p", parse_instrument(id), qty}; }

MarketSnapshot snapshot_at(TimestampMs t) {
    MarketSnapshot s;
    s.indices["BTC"] = {40000.0, t};
    s.indices["ETH"] = {2500.0, t};
    s.products["BTC-29MAR24"] = {40100.0, {}, {}, {}, {}, t};
    s.products["BTC-29MAR24-40000-C"] = {0.05, 0.5, 2e-5, -0.0002, 0.6, t};
    s.products["ETH-29MAR24-2500-P"] = {0.06, -0.45, 4e-4, -0.0003, 0.7, t};
    return s;
}

// Random-walk 1-minute bars with a fixed per-minute vol.
class FakeSource : public MarketDataSource {
public:
    explicit FakeSource(TimestampMs now) : now_(now) {}

    std::vector<TwapBar> inference_bars(const std::string& sym, TimestampMs from, TimestampMs to) override {
        ++bar_calls;
        std::mt19937_64 rng(std::hash<std::string>{}(sym));
        std::normal_distribution<double> n(0.0, 0.0006);
        const TimestampMs origin = minute_of(kNow) - 20 * kMsPerDay;
        double lp = std::log(sym == "BTC" ? 40000.0 : 2500.0);
        std::vector<TwapBar> out;
        for (TimestampMs m = origin; m < to; m += kMsPerMinute) {
            lp += n(rng);
            if (m >= from) out.push_back({sym, m, std::exp(lp), 1});
        }
        return out;
    }

    MarketSnapshot snapshot(const std::vector<std::string>&, const std::vector<std::string>&) override {
        return snap;
    }

    TimestampMs now() const override { return now_; }

    MarketSnapshot snap = snapshot_at(kNow);
    int bar_calls = 0;

private:
    TimestampMs now_;
};

} // namespace

TEST(CornishFisher, GaussianCaseIsTheNormalQuantile) {
    for (double a : {0.001, 0.01, 0.025, 0.05, 0.5, 0.9})
        EXPECT_DOUBLE_EQ(cornish_fisher_quantile(0.0, 3.0, a), normal_quantile(a));
    EXPECT_NEAR(cornish_fisher_quantile(0.0, 3.0, 0.05), -1.6449, 1e-4);
}

TEST(CornishFisher, SkewedFatTailedExample) {
    // term by term with z = -1.6448536
    const double z = -1.6448536269514722;
    const double s = -0.5, k = 5.0;
    const double expected = z + (z * z - 1) * s / 6 + (z * z * z - 3 * z) * (k - 3) / 24 -
                            (2 * z * z * z - 5 * z) * s * s / 36;
    EXPECT_NEAR(expected, -1.7420, 1e-3);
    EXPECT_NEAR(cornish_fisher_quantile(s, k, 0.05), expected, 1e-12);
}

TEST(CornishFisher, ValidityRegion) {
    EXPECT_TRUE(validity_check(0.0, 0.0));
    EXPECT_TRUE(validity_check(-0.5, 2.0));
    EXPECT_FALSE(validity_check(2.0, 0.0));
}

TEST(Moments, GaussianPortfolioHasNoHigherMoments) {
    Eigen::VectorXd d(2), g = Eigen::VectorXd::Zero(2);
    d << 0.6, 0.4;
    vol::Matrix s{{4e-4, 1e-4}, {1e-4, 9e-4}};
    const Moments m = central_moments(d, g, 0.0, s);
    EXPECT_DOUBLE_EQ(m.mu1, 0.0);
    EXPECT_NEAR(m.mu2, d.dot(s * d), 1e-18);
    EXPECT_NEAR(m.skew, 0.0, 1e-12);
    EXPECT_NEAR(m.kurt, 3.0, 1e-12);
}

TEST(Moments, MatchMonteCarloOfQuadraticForm) {
    Eigen::VectorXd d(2), g(2);
    d << 0.8, -0.3;
    g << -6.0, 4.0;
    vol::Matrix s{{1e-3, 4e-4}, {4e-4, 2e-3}};
    const double theta = -1e-4;
    const Moments m = central_moments(d, g, theta, s);

    const Eigen::LLT<vol::Matrix> llt(s);
    const vol::Matrix l = llt.matrixL();
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n(0.0, 1.0);
    const int draws = 400000;
    std::vector<double> r(draws);
    double mean = 0;
    for (int i = 0; i < draws; ++i) {
        const Eigen::Vector2d x = l * Eigen::Vector2d(n(rng), n(rng));
        r[i] = d.dot(x) + 0.5 * (g.array() * x.array().square()).sum() + theta;
        mean += r[i];
    }
    mean /= draws;
    double c2 = 0, c3 = 0, c4 = 0;
    for (double v : r) {
        const double e = v - mean;
        c2 += e * e;
        c3 += e * e * e;
        c4 += e * e * e * e;
    }
    c2 /= draws;
    c3 /= draws;
    c4 /= draws;
    EXPECT_NEAR(m.mu1, mean, 4 * std::sqrt(c2 / draws));
    EXPECT_NEAR(m.mu2 / c2, 1.0, 0.02);
    EXPECT_NEAR(m.skew, c3 / std::pow(c2, 1.5), 0.05);
    EXPECT_NEAR(m.kurt, c4 / (c2 * c2), 0.15);
}

TEST(Moments, ZeroVarianceIsInvalid) {
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    EXPECT_THROW(central_moments(z, z, 0.0, vol::Matrix::Identity(1, 1)), InvalidMoments);
}

TEST(Mapping, OptionValuesAreCryptoMarkTimesIndex) {
    const std::vector<Position> pos{holding("BTC-29MAR24", 1.0), holding("BTC-29MAR24-40000-C", 2.0)};
    const AdjustedGreeks adj = adjust_greeks(pos, snapshot_at(kNow), 1.0, kNow);
    const double net = 40100.0 + 2.0 * 0.05 * 40000.0;
    EXPECT_DOUBLE_EQ(adj.portfolio_value, net);
    EXPECT_DOUBLE_EQ(adj.positions[1].value, 4000.0);
    EXPECT_NEAR(adj.positions[0].delta, 40000.0 / net, 1e-15);
    EXPECT_NEAR(adj.positions[1].delta, 40000.0 * 2.0 * 0.5 / net, 1e-15);
    EXPECT_NEAR(adj.positions[1].gamma, 40000.0 * 40000.0 * 2.0 * 2e-5 / net, 1e-12);
    EXPECT_NEAR(adj.positions[1].theta, 2.0 * -0.0002 / net, 1e-18);

    const MappedCoefficients c = compress_by_underlying(adj);
    ASSERT_EQ(c.syms, std::vector<std::string>{"BTC"});
    EXPECT_NEAR(c.delta(0), adj.positions[0].delta + adj.positions[1].delta, 1e-15);
    EXPECT_NEAR(c.theta_sum, adj.positions[1].theta, 1e-18);

    // the per-position and compressed return maps agree
    const double x = 0.013;
    EXPECT_NEAR(portfolio_return(adj, {{"BTC", x}}), portfolio_return(c, Eigen::VectorXd::Constant(1, x)), 1e-15);
}

TEST(Mapping, StaleMissingAndDegenerateInputs) {
    const std::vector<Position> pos{holding("BTC-29MAR24", 1.0)};
    EXPECT_THROW(adjust_greeks(pos, snapshot_at(kNow - 61 * kMsPerSecond), 1.0, kNow), StaleData);
    EXPECT_NO_THROW(adjust_greeks(pos, snapshot_at(kNow - 60 * kMsPerSecond), 1.0, kNow));
    EXPECT_THROW(adjust_greeks({holding("BTC-28JUN24", 1.0)}, snapshot_at(kNow), 1.0, kNow), StaleData);
    EXPECT_THROW(adjust_greeks({}, snapshot_at(kNow), 1.0, kNow), DegeneratePortfolio);
    auto snap = snapshot_at(kNow);
    snap.products["BTC-29MAR24-40000-C"].mark_price = 40100.0 / 40000.0;
    EXPECT_THROW(adjust_greeks({holding("BTC-29MAR24", 1.0), holding("BTC-29MAR24-40000-C", -1.0)}, snap, 1.0, kNow),
                 DegeneratePortfolio);
}

TEST(PortfolioBook, AddMergeAndRemove) {
    PortfolioBook b;
    b.add_position("a", "BTC-29MAR24", 2.0);
    const Position p = b.add_position("a", "BTC-29MAR24", 1.5);
    EXPECT_DOUBLE_EQ(p.quantity, 3.5);
    b.add_position("a", "ETH-29MAR24-2500-P", -1.0);
    EXPECT_EQ(b.list_portfolio("a").size(), 2u);
    EXPECT_EQ(extract_indices(b.list_portfolio("a")), (std::vector<std::string>{"BTC", "ETH"}));

    // netting to zero removes the holding
    EXPECT_DOUBLE_EQ(b.add_position("a", "ETH-29MAR24-2500-P", 1.0).quantity, 0.0);
    EXPECT_EQ(b.list_portfolio("a").size(), 1u);

    b.remove_position("a", "BTC-29MAR24");
    EXPECT_TRUE(b.list_portfolio("a").empty());
    EXPECT_TRUE(b.has_portfolio("a"));
    EXPECT_THROW(b.remove_position("a", "BTC-29MAR24"), NotFound);
    EXPECT_THROW(b.remove_position("zz", "BTC-29MAR24"), NotFound);
}

TEST(PortfolioBook, RejectsInvalidPositions) {
    PortfolioBook b;
    EXPECT_THROW(b.add_position("", "BTC-29MAR24", 1.0), ValidationError);
    EXPECT_THROW(b.add_position("a", "BTC-29MAR24", 0.0), ValidationError);
    EXPECT_THROW(b.add_position("a", "BTC-29MAR24", NAN), ValidationError);
    EXPECT_THROW(b.add_position("a", "BTC", 1.0), ValidationError);
    EXPECT_THROW(b.add_position("a", "not an id", 1.0), ParseError);
}

TEST(VarEngine, EwmaEstimateMatchesManualPipeline) {
    PortfolioBook book;
    book.add_position("p", "BTC-29MAR24", 1.0);
    book.add_position("p", "ETH-29MAR24-2500-P", 10.0);
    FakeSource src(kNow);
    VarEngine engine(book, src);
    const VaRResult r = engine.estimate_var("p", 0.99, 1.0, vol::Model::ewma);

    const auto sigma = infer(src, {"BTC", "ETH"}, vol::Model::ewma, 1.0, kNow);
    const VaRResult manual = value_at_risk(book.list_portfolio("p"), src.snap, sigma, 0.99, 1.0, kNow);
    EXPECT_NEAR(r.var_value, manual.var_value, 1e-9 * std::abs(manual.var_value));
    EXPECT_LT(r.q_return, 0.0);
    EXPECT_EQ(r.syms, (std::vector<std::string>{"BTC", "ETH"}));
    EXPECT_GE(r.latency.total, r.latency.t1);
    EXPECT_GT(r.latency.space_bytes, 0u);
}

TEST(VarEngine, HarAndGarchProduceFiniteEstimates) {
    PortfolioBook book;
    book.add_position("p", "BTC-29MAR24-40000-C", 3.0);
    book.add_position("p", "ETH-29MAR24-2500-P", -2.0);
    book.add_position("p", "BTC-29MAR24", 1.0);
    FakeSource src(kNow);
    VarEngine engine(book, src);
    for (auto m : {vol::Model::har, vol::Model::garch}) {
        const VaRResult r = engine.estimate_var("p", 0.975, 1.0, m);
        EXPECT_TRUE(std::isfinite(r.var_value)) << vol::to_string(m);
        EXPECT_LT(r.q_return, 0.0) << vol::to_string(m);
    }
}

TEST(VarEngine, ErrorsCarryTheirStage) {
    PortfolioBook book;
    FakeSource src(kNow);
    VarEngine engine(book, src);
    EXPECT_THROW(engine.estimate_var("p", 1.2, 1.0, vol::Model::ewma), ValidationError);
    EXPECT_THROW(engine.estimate_var("p", 0.99, 1.0, vol::Model::ewma), NotFound);

    book.add_position("p", "BTC-28JUN24", 1.0); // no quote for this product
    try {
        engine.estimate_var("p", 0.99, 1.0, vol::Model::ewma);
        FAIL() << "expected stale data";
    } catch (const StaleData& e) {
        EXPECT_EQ(e.stage(), "mapping");
    }

    book.clear("p");
    book.add_position("p", "BTC-29MAR24", 1.0);
    try {
        engine.estimate_var("p", 0.99, 1.0, vol::Model::realized);
        FAIL() << "expected validation error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.stage(), "inference");
    }
}
