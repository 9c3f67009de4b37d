#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "tickvar/core/error.hpp"

namespace tickvar::vol {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Normal-equation matrices with a condition number above this are rejected:
// Cholesky on X'X squares the conditioning of X.
inline constexpr double kMaxNormalCondition = 1e10;

// In-place lower Cholesky factor of a symmetric positive-definite matrix.
// Returns false if a non-positive pivot is met.
inline bool cholesky_lower(Matrix& a) {
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
        for (Eigen::Index i = 0; i < j; ++i) a(i, j) = 0.0;
    }
    return true;
}

// Solves L L' x = b for a factor produced by cholesky_lower.
inline Vector cholesky_solve(const Matrix& l, const Vector& b) {
    const Eigen::Index n = l.rows();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = b(i);
        for (Eigen::Index k = 0; k < i; ++k) s -= l(i, k) * y(k);
        y(i) = s / l(i, i);
    }
    Vector x(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        double s = y(i);
        for (Eigen::Index k = i + 1; k < n; ++k) s -= l(k, i) * x(k);
        x(i) = s / l(i, i);
    }
    return x;
}

struct OlsResult {
    Vector coefficients;
    Vector residuals;
    double rss = 0.0;
    double r_squared = 0.0;
    double residual_variance = 0.0;
    // condition number of the column-equilibrated normal matrix
    double condition_number = 0.0;
};

// Least squares via the normal equations. Columns are equilibrated to unit
// norm before factorisation so the condition check is scale-free.
inline OlsResult ols_solve(const Matrix& x, const Vector& y) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (y.size() != n) throw ContractViolation("ols_solve: X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
    if (p == 0 || n < p) throw SingularDesign("ols_solve: need at least as many rows as columns");
    if (!x.allFinite() || !y.allFinite()) throw DomainError("ols_solve: non-finite input");

    Vector scale(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double norm = x.col(j).norm();
        if (norm == 0.0) throw SingularDesign("ols_solve: column " + std::to_string(j) + " is identically zero");
        scale(j) = 1.0 / norm;
    }
    const Matrix xs = x * scale.asDiagonal();
    Matrix normal = xs.transpose() * xs;

    const Eigen::SelfAdjointEigenSolver<Matrix> eig(normal, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxNormalCondition))
        throw SingularDesign("ols_solve: normal matrix condition number " + std::to_string(cond) + " exceeds 1e10");

    Matrix l = normal;
    if (!cholesky_lower(l)) throw SingularDesign("ols_solve: normal matrix is not positive definite");
    const Vector gamma = cholesky_solve(l, xs.transpose() * y);

    OlsResult out;
    out.coefficients = scale.asDiagonal() * gamma;
    out.residuals = y - x * out.coefficients;
    out.rss = out.residuals.squaredNorm();
    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    out.r_squared = tss > 0.0 ? 1.0 - out.rss / tss : 1.0;
    out.residual_variance = n > p ? out.rss / static_cast<double>(n - p) : 0.0;
    out.condition_number = cond;
    return out;
}

struct PsdResult {
    Matrix matrix;
    bool adjusted = false;
};

// Floors negative eigenvalues at zero, then rescales so the original
// diagonal is restored. Input must be symmetric to 1e-9.
inline PsdResult ensure_psd(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols()) throw ContractViolation("ensure_psd: matrix is not square");
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (sigma.size() > 0 && asym > 1e-9) throw ContractViolation("ensure_psd: matrix is not symmetric");
    if (sigma.size() == 0) return {sigma, false};

    const Matrix sym = 0.5 * (sigma + sigma.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    const Vector& vals = eig.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());
    if (vals.minCoeff() >= -tol) return {sym, false};

    const Vector floored = vals.cwiseMax(0.0);
    Matrix rebuilt = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
    Vector rescale(sym.rows());
    for (Eigen::Index i = 0; i < sym.rows(); ++i) {
        const double target = sym(i, i);
        const double got = rebuilt(i, i);
        rescale(i) = (got > 0.0 && target > 0.0) ? std::sqrt(target / got) : 0.0;
    }
    rebuilt = rescale.asDiagonal() * rebuilt * rescale.asDiagonal();
    rebuilt = 0.5 * (rebuilt + rebuilt.transpose());
    return {rebuilt, true};
}

} // namespace tickvar::vol
