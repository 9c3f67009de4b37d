#pragma once

#include <cmath>
#include <string>

#include "tickvar/var/mapping.hpp"
#include "tickvar/var/normal.hpp"
#include "tickvar/vol/covariance.hpp"

namespace tickvar::var {

// Central moments of r = d'R + 1/2 R'GR + tau*sum(theta) with R ~ N(0, S).
struct Moments {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double mu4 = 0.0;
    double skew = 0.0;
    double kurt = 3.0; // raw, not excess
    double sigma_v = 0.0;
};

inline constexpr double kPearsonSlack = 1e-9;

// Restricts the forecast to the coefficient syms, in coefficient order.
inline vol::Matrix aligned_sigma(const MappedCoefficients& c, const vol::CovarianceForecast& f) {
    const auto n = static_cast<Eigen::Index>(c.syms.size());
    std::vector<Eigen::Index> idx(c.syms.size());
    for (std::size_t i = 0; i < c.syms.size(); ++i) {
        idx[i] = f.index_of(c.syms[i]);
        if (idx[i] < 0) throw ContractViolation("covariance forecast has no entry for '" + c.syms[i] + "'");
    }
    vol::Matrix s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) s(i, j) = f.sigma(idx[i], idx[j]);
    return s;
}

inline Moments central_moments(const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma_diag, double theta_sum,
                               const vol::Matrix& sigma) {
    const vol::Matrix gs = gamma_diag.asDiagonal() * sigma;
    const vol::Matrix gs2 = gs * gs;
    const vol::Matrix gs3 = gs2 * gs;
    const Eigen::VectorXd sd = sigma * delta;

    Moments m;
    m.mu1 = 0.5 * gs.trace() + theta_sum;
    m.mu2 = delta.dot(sd) + 0.5 * gs2.trace();
    m.mu3 = 3.0 * sd.dot(gamma_diag.cwiseProduct(sd)) + gs3.trace();
    m.mu4 = 12.0 * sd.dot(gs2 * delta) + 3.0 * (gs3 * gs).trace() + 3.0 * m.mu2 * m.mu2;

    if (!(m.mu2 > 0.0) || !std::isfinite(m.mu2))
        throw InvalidMoments("second central moment " + std::to_string(m.mu2) + " is not positive");
    m.sigma_v = std::sqrt(m.mu2);
    m.skew = m.mu3 / (m.mu2 * m.sigma_v);
    m.kurt = m.mu4 / (m.mu2 * m.mu2);
    if (m.kurt < m.skew * m.skew + 1.0 - kPearsonSlack)
        throw InvalidMoments("moments violate the Pearson bound K >= S^2 + 1");
    return m;
}

inline Moments central_moments(const MappedCoefficients& c, const vol::CovarianceForecast& f) {
    return central_moments(c.delta, c.gamma_diag, c.theta_sum, aligned_sigma(c, f));
}

// Standardized quantile z + (z^2-1)S/6 + (z^3-3z)(K-3)/24 - (2z^3-5z)S^2/36.
inline double cornish_fisher_quantile(double skew, double kurt, double alpha) {
    const double z = normal_quantile(alpha);
    const double z2 = z * z;
    const double z3 = z2 * z;
    return z + (z2 - 1.0) * skew / 6.0 + (z3 - 3.0 * z) * (kurt - 3.0) / 24.0 -
           (2.0 * z3 - 5.0 * z) * skew * skew / 36.0;
}

// True when the expansion is a monotone function of z; takes excess kurtosis.
inline bool validity_check(double skew, double excess_kurt) {
    const double s2 = skew * skew;
    const double lhs = s2 / 9.0 - 4.0 * (excess_kurt / 8.0 - s2 / 6.0) * (1.0 - excess_kurt / 8.0 - 5.0 * s2 / 36.0);
    return lhs <= 0.0;
}

struct Quantile {
    double alpha = 0.0;
    double z_cf = 0.0;
    double q_return = 0.0;
    double var_value = 0.0;
    bool valid = true;
};

inline Quantile transform(const Moments& m, double confidence, double portfolio_value) {
    Quantile q;
    q.alpha = 1.0 - confidence;
    q.z_cf = cornish_fisher_quantile(m.skew, m.kurt, q.alpha);
    q.q_return = m.mu1 + m.sigma_v * q.z_cf;
    q.var_value = q.q_return * portfolio_value;
    q.valid = validity_check(m.skew, m.kurt - 3.0);
    return q;
}

} // namespace tickvar::var
