#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tickvar/vol/dcc.hpp"
#include "tickvar/vol/har.hpp"

using namespace tickvar;
using namespace tickvar::vol;

namespace {

ReturnSeries series(const std::string& sym, TimestampMs interval, const std::vector<double>& v) {
    ReturnSeries r{sym, interval, {}, {}};
    for (std::size_t i = 0; i < v.size(); ++i) {
        r.timestamps.push_back(static_cast<TimestampMs>(i + 1) * interval);
        r.values.push_back(v[i]);
    }
    return r;
}

std::vector<double> gaussian(std::size_t n, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, sd);
    std::vector<double> out(n);
    for (auto& x : out) x = d(rng);
    return out;
}

std::vector<double> simulate_garch(std::size_t n, double omega, double alpha, double beta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(n);
    double s2 = omega / (1.0 - alpha - beta);
    double e = 0.0;
    for (std::size_t t = 0; t < n + 500; ++t) {
        s2 = omega + alpha * e * e + beta * s2;
        e = std::sqrt(s2) * z(rng);
        if (t >= 500) out[t - 500] = e;
    }
    return out;
}

} // namespace

TEST(Ewma, EqualsClosedFormWeightedSum) {
    const auto a = gaussian(240, 0.004, 1), b0 = gaussian(240, 0.004, 2);
    std::vector<double> b(240);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.3 * a[i] + b0[i];
    const TimestampMs bar = 30 * kMsPerMinute;
    const double lambda = 0.94;

    // sigma_n = lambda^n s0 + (1 - lambda) sum_k lambda^(n-1-k) a_k b_k
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= 240.0;
    mb /= 240.0;
    double s0 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s0 += (a[i] - ma) * (b[i] - mb);
    s0 /= 239.0;
    const auto n = static_cast<double>(a.size());
    double sum = std::pow(lambda, n) * s0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += (1 - lambda) * std::pow(lambda, n - 1 - k) * a[k] * b[k];

    const double one_day = ewma_forecast(series("BTC", bar, a), series("ETH", bar, b), lambda, 1.0);
    EXPECT_NEAR(one_day, 48.0 * sum, 1e-12 * std::abs(48.0 * sum));
    const double two_days = ewma_forecast(series("BTC", bar, a), series("ETH", bar, b), lambda, 2.0);
    EXPECT_NEAR(two_days, 96.0 * sum, 1e-12 * std::abs(96.0 * sum));
}

TEST(Ewma, RejectsBadInput) {
    const auto r = series("BTC", 30 * kMsPerMinute, {0.01, -0.01, 0.02});
    EXPECT_THROW(ewma_forecast(r, r, 1.0, 1.0), DomainError);
    EXPECT_THROW(ewma_forecast(r, series("ETH", 5 * kMsPerMinute, {0.1, 0.2}), 0.94, 1.0), ContractViolation);
    EXPECT_THROW(ewma_forecast(series("BTC", kMsPerMinute, {0.1}), series("BTC", kMsPerMinute, {0.1}), 0.94, 1),
                 InsufficientData);
}

TEST(Ewma, MatrixIsSymmetricWithVariancesOnDiagonal) {
    const TimestampMs bar = 30 * kMsPerMinute;
    const std::vector<ReturnSeries> rs{series("BTC", bar, gaussian(100, 0.01, 4)), series("ETH", bar, gaussian(100, 0.01, 5))};
    const auto f = ewma_covariance_matrix(rs, 0.94, 1.0);
    EXPECT_EQ(f.sigma(0, 1), f.sigma(1, 0));
    EXPECT_DOUBLE_EQ(f.sigma(0, 0), ewma_forecast(rs[0], rs[0], 0.94, 1.0));
    EXPECT_EQ(f.index_of("ETH"), 1);
}

TEST(Ols, MatchesOrthogonalDecomposition) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix x(200, 6);
    Vector y(200);
    for (int i = 0; i < 200; ++i) {
        x(i, 0) = 1.0;
        for (int j = 1; j < 6; ++j) x(i, j) = n(rng) * j;
        y(i) = 0.5 - x(i, 1) + 0.25 * x(i, 4) + 0.1 * n(rng);
    }
    const OlsResult r = ols_solve(x, y);
    const Vector ref = x.completeOrthogonalDecomposition().solve(y);
    EXPECT_LT((r.coefficients - ref).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GT(r.r_squared, 0.99);
    EXPECT_NEAR(r.rss, (y - x * ref).squaredNorm(), 1e-10);
}

TEST(Ols, RejectsCollinearDesign) {
    Matrix x(50, 3);
    Vector y = Vector::LinSpaced(50, 0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i;
        x(i, 2) = 2.0 * i + 1.0;
    }
    EXPECT_THROW(ols_solve(x, y), SingularDesign);
    EXPECT_THROW(ols_solve(Matrix::Ones(2, 3), Vector::Ones(2)), SingularDesign);
    EXPECT_THROW(ols_solve(Matrix::Ones(4, 1), Vector::Ones(3)), ContractViolation);
}

TEST(Psd, LeavesValidMatrixAlone) {
    Matrix s(2, 2);
    s << 1.0, 0.5, 0.5, 2.0;
    const auto r = ensure_psd(s);
    EXPECT_FALSE(r.adjusted);
    EXPECT_EQ(r.matrix, s);
}

TEST(Psd, RepairsIndefiniteMatrixKeepingDiagonal) {
    Matrix s(3, 3);
    s << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    const auto r = ensure_psd(s);
    EXPECT_TRUE(r.adjusted);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(r.matrix);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(r.matrix(i, i), 1.0, 1e-12);
    EXPECT_THROW(ensure_psd(Matrix{{1.0, 0.2}, {0.3, 1.0}}), ContractViolation);
}

TEST(Garch, RecoversSimulatedParameters) {
    const auto eps = simulate_garch(8000, 2e-6, 0.08, 0.90, 42);
    const auto fit = fit_garch11(series("BTC", 5 * kMsPerMinute, eps), Innovation::gaussian);
    EXPECT_NEAR(fit.params.alpha, 0.08, 0.03);
    EXPECT_NEAR(fit.params.beta, 0.90, 0.04);
    EXPECT_GT(fit.log_likelihood, fit.initial_log_likelihood);
    EXPECT_NEAR(fit.forecast_variance,
                fit.params.omega + fit.params.alpha * eps.back() * eps.back() + fit.params.beta * fit.last_variance, 1e-18);
    EXPECT_EQ(fit.std_residuals.size(), eps.size());
}

TEST(Garch, StudentTEstimatesFiniteDegreesOfFreedom) {
    const auto eps = simulate_garch(3000, 2e-6, 0.05, 0.90, 7);
    const auto fit = fit_garch11(series("ETH", 5 * kMsPerMinute, eps), Innovation::student_t);
    EXPECT_GT(fit.params.nu, kMinStudentNu);
    EXPECT_LT(fit.params.alpha + fit.params.beta, 1.0);
}

TEST(Garch, RejectsShortOrFlatSeries) {
    EXPECT_THROW(fit_garch11(series("BTC", kMsPerMinute, gaussian(50, 0.01, 1)), Innovation::gaussian), InsufficientData);
    EXPECT_THROW(fit_garch11(series("BTC", kMsPerMinute, std::vector<double>(300, 0.0)), Innovation::gaussian), DomainError);
}

TEST(Dcc, ConstantCorrelationRecoversLevel) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const double rho = 0.6;
    std::vector<std::vector<double>> z(2, std::vector<double>(3000));
    for (std::size_t t = 0; t < 3000; ++t) {
        const double u = n(rng), v = n(rng);
        z[0][t] = u;
        z[1][t] = rho * u + std::sqrt(1 - rho * rho) * v;
    }
    const DccParams p = fit_dcc(z);
    EXPECT_NEAR(p.unconditional(0, 1), rho, 0.05);
    EXPECT_LT(p.a + p.b, 1.0);
    const Matrix r = dcc_forecast_correlation(p);
    EXPECT_NEAR(r(0, 1), rho, 0.1);
    EXPECT_DOUBLE_EQ(r(0, 0), 1.0);
}

TEST(Dcc, ForecastScalesGarchVariances) {
    GarchFit a, b;
    a.sym = "BTC";
    b.sym = "ETH";
    a.interval = b.interval = 30 * kMsPerMinute;
    a.forecast_variance = 4e-6;
    b.forecast_variance = 9e-6;
    DccParams d;
    d.unconditional = Matrix{{1.0, 0.5}, {0.5, 1.0}};
    d.q_last = d.unconditional;
    d.z_last = Vector::Zero(2);
    d.a = 0.0;
    d.b = 0.0;
    const auto f = dcc_forecast({a, b}, &d, 2.0);
    EXPECT_NEAR(f.sigma(0, 0), 96.0 * 4e-6, 1e-15);
    EXPECT_NEAR(f.sigma(0, 1), 96.0 * 0.5 * 2e-3 * 3e-3, 1e-15);
    EXPECT_THROW(dcc_forecast({a, b}, nullptr, 1.0), ContractViolation);
}

TEST(Har, ConstantRegressorIsDropped) {
    // regressor 1 (negative return part) is zero everywhere when returns are positive
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 0.3);
    std::vector<std::optional<double>> rv, ret, rq;
    double lv = std::log(1e-4);
    for (int t = 0; t < 40; ++t) {
        lv = 0.5 * std::log(1e-4) + 0.5 * lv + n(rng);
        rv.push_back(std::exp(lv));
        rq.push_back(std::exp(2 * lv) * (1.0 + 0.1 * std::abs(n(rng))));
        ret.push_back(0.01);
    }
    const HarFit fit = fit_lharq(rv, ret, rq);
    EXPECT_TRUE(fit.dropped[1]);
    EXPECT_EQ(fit.coefficients[1], 0.0);
    EXPECT_FALSE(fit.dropped[2]);
    EXPECT_EQ(fit.rows, 40u - 10u);
}

TEST(Har, TooFewPeriodsIsInsufficient) {
    std::vector<std::optional<double>> rv(14, 1e-4), ret(14, 0.0), rq(14, 1e-8);
    EXPECT_THROW(fit_lharq(rv, ret, rq), InsufficientData);
    std::vector<std::optional<double>> rc(14, 0.5);
    EXPECT_THROW(fit_har_corr(rc), InsufficientData);
}

TEST(Har, CovarianceForecastTracksConstantVolatility) {
    // 16 days of 1-minute prices with constant per-minute vol and correlation
    const TimestampMs start = parse_iso8601("2024-01-01T00:00:00Z");
    const int minutes = 16 * 24 * 60;
    const double sd = 0.0005, rho = 0.5;
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<TwapBar>> bars(2);
    double la = std::log(40000.0), lb = std::log(2500.0);
    for (int m = 0; m < minutes; ++m) {
        const double u = n(rng), v = n(rng);
        la += sd * u;
        lb += sd * (rho * u + std::sqrt(1 - rho * rho) * v);
        bars[0].push_back({"BTC", start + m * kMsPerMinute, std::exp(la), 1});
        bars[1].push_back({"ETH", start + m * kMsPerMinute, std::exp(lb), 1});
    }
    HarDiagnostics diag;
    const auto f = har_forecast_covariance(bars, {"BTC", "ETH"}, start + (minutes - 1) * kMsPerMinute, 1.0, &diag);
    const double daily = sd * sd * 1440.0;
    EXPECT_NEAR(f.sigma(0, 0) / daily, 1.0, 0.35);
    EXPECT_NEAR(f.sigma(1, 1) / daily, 1.0, 0.35);
    EXPECT_NEAR(f.sigma(0, 1) / std::sqrt(f.sigma(0, 0) * f.sigma(1, 1)), rho, 0.15);
    EXPECT_EQ(diag.variance_fits.size(), 2u);
    EXPECT_EQ(diag.correlation_fits.count("BTC/ETH"), 1u);
}
