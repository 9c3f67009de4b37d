#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tickvar/core/market_data.hpp"
#include "tickvar/vol/nelder_mead.hpp"

namespace tickvar::vol {

enum class Innovation { gaussian, student_t };

struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    Innovation dist = Innovation::gaussian;
    double nu = 0.0; // student_t only

    double persistence() const { return alpha + beta; }
    double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

struct GarchFit {
    std::string sym;
    GarchParams params;
    double log_likelihood = 0.0;
    double initial_log_likelihood = 0.0;
    int iterations = 0;
    double last_variance = 0.0;     // sigma^2_T
    double forecast_variance = 0.0; // sigma^2_{T+1}, one bar ahead
    std::vector<double> std_residuals;
    TimestampMs interval = 0;
};

class FitError : public Error {
public:
    FitError(const std::string& what, GarchParams best, double best_ll, int iterations)
        : Error(ErrorKind::fit, what), best_(best), best_ll_(best_ll), iterations_(iterations) {}
    const GarchParams& best_params() const { return best_; }
    double best_log_likelihood() const { return best_ll_; }
    int iterations() const { return iterations_; }

private:
    GarchParams best_;
    double best_ll_;
    int iterations_;
};

inline constexpr std::size_t kGarchMinObservations = 200;
inline constexpr double kMinStudentNu = 2.05;

namespace detail {

inline double sample_variance(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace detail

// Conditional variance path: sigma2[0] is the sample variance, then the
// GARCH(1,1) recursion on zero-mean residuals.
inline std::vector<double> garch_variance_path(std::span<const double> eps, const GarchParams& p, double sigma2_0) {
    std::vector<double> s2(eps.size());
    if (eps.empty()) return s2;
    s2[0] = sigma2_0;
    for (std::size_t t = 1; t < eps.size(); ++t) s2[t] = p.omega + p.alpha * eps[t - 1] * eps[t - 1] + p.beta * s2[t - 1];
    return s2;
}

inline double garch_log_likelihood(std::span<const double> eps, const GarchParams& p, double sigma2_0) {
    constexpr double log_2pi = 1.8378770664093453;
    double ll = 0.0;
    double s2 = sigma2_0;
    double t_const = 0.0;
    if (p.dist == Innovation::student_t)
        t_const = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu) -
                  0.5 * std::log(std::numbers::pi * (p.nu - 2.0));
    for (std::size_t t = 0; t < eps.size(); ++t) {
        if (t > 0) s2 = p.omega + p.alpha * eps[t - 1] * eps[t - 1] + p.beta * s2;
        if (!(s2 > 0.0) || !std::isfinite(s2)) return -std::numeric_limits<double>::infinity();
        const double e2 = eps[t] * eps[t];
        if (p.dist == Innovation::gaussian)
            ll += -0.5 * (log_2pi + std::log(s2) + e2 / s2);
        else
            ll += t_const - 0.5 * std::log(s2) - 0.5 * (p.nu + 1.0) * std::log1p(e2 / ((p.nu - 2.0) * s2));
    }
    return ll;
}

// Quasi-maximum-likelihood GARCH(1,1) with zero conditional mean. Parameters
// are searched in an unconstrained space: log(omega / s^2), logit(alpha),
// logit(beta) with alpha + beta < 1 enforced as a barrier, and
// log(nu - 2.05) for Student-t innovations, all inside a wide box.
inline GarchFit fit_garch11(const ReturnSeries& returns, Innovation dist, const NelderMeadOptions& opt = {}) {
    const std::span<const double> eps(returns.values);
    if (eps.size() < kGarchMinObservations)
        throw InsufficientData("fit_garch11: need at least " + std::to_string(kGarchMinObservations) +
                               " observations, got " + std::to_string(eps.size()));
    const double s2 = detail::sample_variance(eps);
    if (!(s2 > 0.0)) throw DomainError("fit_garch11: zero-variance return series for '" + returns.sym + "'");

    auto decode = [&](const std::vector<double>& x) {
        GarchParams p;
        p.dist = dist;
        p.omega = s2 * std::exp(x[0]);
        p.alpha = detail::logistic(x[1]);
        p.beta = detail::logistic(x[2]);
        if (dist == Innovation::student_t) p.nu = kMinStudentNu + std::exp(x[3]);
        return p;
    };
    // box on the search space: near-iid series push alpha toward 0 and nu
    // toward infinity along flat ridges the simplex would otherwise chase
    auto in_box = [](const std::vector<double>& x) {
        if (x[0] < -30.0 || x[0] > 5.0 || std::abs(x[1]) > 12.0 || std::abs(x[2]) > 12.0) return false;
        return x.size() < 4 || x[3] <= std::log(500.0);
    };
    auto objective = [&](const std::vector<double>& x) {
        if (!in_box(x)) return std::numeric_limits<double>::infinity();
        const GarchParams p = decode(x);
        if (p.alpha + p.beta >= 1.0 - 1e-9) return std::numeric_limits<double>::infinity();
        const double ll = garch_log_likelihood(eps, p, s2);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    std::vector<double> x0 = {std::log(1.0 - 0.95), detail::logit(0.05), detail::logit(0.90)};
    if (dist == Innovation::student_t) x0.push_back(std::log(8.0 - kMinStudentNu));
    const double f0 = objective(x0);

    const NelderMeadResult nm = nelder_mead(objective, x0, opt);
    const GarchParams best = decode(nm.x);
    if (!nm.converged)
        throw FitError("fit_garch11: optimizer did not converge within " + std::to_string(opt.max_iterations) +
                           " iterations for '" + returns.sym + "'",
                       best, -nm.f, nm.iterations);

    GarchFit fit;
    fit.sym = returns.sym;
    fit.params = best;
    fit.log_likelihood = -nm.f;
    fit.initial_log_likelihood = -f0;
    fit.iterations = nm.iterations;
    fit.interval = returns.interval;
    const auto path = garch_variance_path(eps, best, s2);
    fit.last_variance = path.back();
    fit.forecast_variance = best.omega + best.alpha * eps.back() * eps.back() + best.beta * fit.last_variance;
    fit.std_residuals.resize(eps.size());
    for (std::size_t t = 0; t < eps.size(); ++t) fit.std_residuals[t] = eps[t] / std::sqrt(path[t]);
    return fit;
}

} // namespace tickvar::vol
