#pragma once

#include <cmath>
#include <vector>

#include "tickvar/vol/covariance.hpp"
#include "tickvar/vol/ewma.hpp"
#include "tickvar/vol/garch.hpp"

namespace tickvar::vol {

struct DccParams {
    double a = 0.0;
    double b = 0.0;
    Matrix unconditional;   // Qbar: sample correlation of standardized residuals
    Matrix q_last;          // Q_T
    Vector z_last;          // z_T
    double log_likelihood = 0.0;
    int iterations = 0;
};

namespace detail {

inline Matrix normalize_to_correlation(const Matrix& q) {
    const Vector d = q.diagonal().cwiseSqrt().cwiseInverse();
    Matrix r = d.asDiagonal() * q * d.asDiagonal();
    r.diagonal().setOnes();
    return r;
}

inline Matrix residual_matrix(const std::vector<std::vector<double>>& z) {
    const auto n = static_cast<Eigen::Index>(z.size());
    const auto t = static_cast<Eigen::Index>(z.front().size());
    Matrix m(t, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (static_cast<Eigen::Index>(z[static_cast<std::size_t>(j)].size()) != t)
            throw ContractViolation("fit_dcc: standardized residual series have different lengths");
        for (Eigen::Index i = 0; i < t; ++i) m(i, j) = z[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    return m;
}

// Correlation-stage quasi log-likelihood. Fills q_last when asked.
inline double dcc_log_likelihood(const Matrix& z, const Matrix& qbar, double a, double b, Matrix* q_last = nullptr) {
    const Eigen::Index t_len = z.rows();
    Matrix q = qbar;
    double ll = 0.0;
    for (Eigen::Index t = 0; t < t_len; ++t) {
        if (t > 0) {
            const Vector zp = z.row(t - 1).transpose();
            q = (1.0 - a - b) * qbar + a * zp * zp.transpose() + b * q;
        }
        const Matrix r = normalize_to_correlation(q);
        const Eigen::LLT<Matrix> llt(r);
        if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
        const Vector zt = z.row(t).transpose();
        const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double quad = zt.dot(llt.solve(zt));
        ll += -0.5 * (logdet + quad - zt.squaredNorm());
    }
    if (q_last) *q_last = q;
    return ll;
}

} // namespace detail

// Second stage of the two-step DCC estimation: correlation targeting with
// Qbar fixed at the sample correlation, (a, b) by quasi-likelihood.
inline DccParams fit_dcc(const std::vector<std::vector<double>>& std_residuals, const NelderMeadOptions& opt = {}) {
    if (std_residuals.size() < 2) throw ContractViolation("fit_dcc: need at least two series");
    const Matrix z = detail::residual_matrix(std_residuals);
    if (z.rows() < 2) throw InsufficientData("fit_dcc: need at least two observations");

    const Vector mean = z.colwise().mean();
    const Matrix centered = z.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(z.rows() - 1);
    if ((cov.diagonal().array() <= 0.0).any()) throw DegenerateCorrelation("fit_dcc: zero-variance residual series");
    const Matrix qbar = detail::normalize_to_correlation(cov);

    // perfectly collinear residuals: no correlation dynamics to estimate
    const Eigen::SelfAdjointEigenSolver<Matrix> qeig(qbar, Eigen::EigenvaluesOnly);
    if (qeig.eigenvalues().minCoeff() < 1e-10) {
        DccParams out;
        out.unconditional = qbar;
        out.q_last = qbar;
        out.z_last = z.row(z.rows() - 1).transpose();
        return out;
    }

    auto objective = [&](const std::vector<double>& x) {
        const double a = detail::logistic(x[0]);
        const double b = detail::logistic(x[1]);
        if (a + b >= 1.0 - 1e-9) return std::numeric_limits<double>::infinity();
        const double ll = detail::dcc_log_likelihood(z, qbar, a, b);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };
    const NelderMeadResult nm = nelder_mead(objective, {detail::logit(0.02), detail::logit(0.90)}, opt);
    if (!nm.converged) {
        GarchParams none;
        throw FitError("fit_dcc: optimizer did not converge", none, -nm.f, nm.iterations);
    }

    DccParams out;
    out.a = detail::logistic(nm.x[0]);
    out.b = detail::logistic(nm.x[1]);
    out.unconditional = qbar;
    out.log_likelihood = detail::dcc_log_likelihood(z, qbar, out.a, out.b, &out.q_last);
    out.z_last = z.row(z.rows() - 1).transpose();
    out.iterations = nm.iterations;
    return out;
}

// One-bar-ahead correlation from the DCC state.
inline Matrix dcc_forecast_correlation(const DccParams& dcc) {
    const Matrix q = (1.0 - dcc.a - dcc.b) * dcc.unconditional + dcc.a * dcc.z_last * dcc.z_last.transpose() +
                     dcc.b * dcc.q_last;
    return detail::normalize_to_correlation(q);
}

// Variances scale linearly with the horizon; the one-step correlation is held.
inline CovarianceForecast dcc_forecast(const std::vector<GarchFit>& garch, const DccParams* dcc, double horizon_days) {
    if (garch.empty()) throw ContractViolation("dcc_forecast: no univariate fits");
    const auto n = static_cast<Eigen::Index>(garch.size());
    CovarianceForecast out;
    out.model = Model::garch;
    out.horizon_days = horizon_days;
    for (const auto& g : garch) out.syms.push_back(g.sym);

    Matrix corr = Matrix::Identity(n, n);
    if (n > 1) {
        if (!dcc) throw ContractViolation("dcc_forecast: correlation stage required for more than one series");
        corr = dcc_forecast_correlation(*dcc);
    }
    Vector sd(n);
    for (Eigen::Index i = 0; i < n; ++i) sd(i) = std::sqrt(garch[static_cast<std::size_t>(i)].forecast_variance);
    const double scale = bars_per_day(garch.front().interval) * horizon_days;
    Matrix sigma = scale * sd.asDiagonal() * corr * sd.asDiagonal();
    sigma = 0.5 * (sigma + sigma.transpose());
    const PsdResult psd = ensure_psd(sigma);
    out.sigma = psd.matrix;
    out.psd_adjusted = psd.adjusted;
    return out;
}

} // namespace tickvar::vol
