#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace tickvar::vol {

struct NelderMeadOptions {
    int max_iterations = 2000;
    // convergence when the simplex spread of f falls below
    // tolerance * max(1, |f_best|)
    double tolerance = 1e-8;
    double initial_step = 0.5;
    int restarts = 1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Derivative-free minimiser. Infeasible points should return +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, const NelderMeadOptions& opt = {}) {
    const std::size_t n = start.size();
    NelderMeadResult res;
    res.x = start;
    res.f = f(start);

    auto run_once = [&](const std::vector<double>& x0, int budget, int& used) -> bool {
        std::vector<std::vector<double>> pts(n + 1, x0);
        std::vector<double> vals(n + 1);
        for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
        for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

        std::vector<std::size_t> order(n + 1);
        std::vector<double> centroid(n), trial(n), trial2(n);
        used = 0;
        while (used < budget) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
            if (std::isfinite(vals[worst]) &&
                vals[worst] - vals[best] <= opt.tolerance * std::max(1.0, std::abs(vals[best]))) {
                if (vals[best] < res.f) {
                    res.f = vals[best];
                    res.x = pts[best];
                }
                return true;
            }
            ++used;

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[order[k]][i] / static_cast<double>(n);

            for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + (centroid[i] - pts[worst][i]);
            const double fr = f(trial);
            if (fr < vals[best]) {
                for (std::size_t i = 0; i < n; ++i) trial2[i] = centroid[i] + 2.0 * (centroid[i] - pts[worst][i]);
                const double fe = f(trial2);
                if (fe < fr) {
                    pts[worst] = trial2;
                    vals[worst] = fe;
                } else {
                    pts[worst] = trial;
                    vals[worst] = fr;
                }
            } else if (fr < vals[second]) {
                pts[worst] = trial;
                vals[worst] = fr;
            } else {
                const bool outside = fr < vals[worst];
                for (std::size_t i = 0; i < n; ++i)
                    trial2[i] = outside ? centroid[i] + 0.5 * (trial[i] - centroid[i])
                                        : centroid[i] + 0.5 * (pts[worst][i] - centroid[i]);
                const double fc = f(trial2);
                if (fc < std::min(fr, vals[worst])) {
                    pts[worst] = trial2;
                    vals[worst] = fc;
                } else {
                    for (std::size_t k = 1; k <= n; ++k) {
                        auto& p = pts[order[k]];
                        for (std::size_t i = 0; i < n; ++i) p[i] = pts[best][i] + 0.5 * (p[i] - pts[best][i]);
                        vals[order[k]] = f(p);
                    }
                }
            }
        }
        const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
        if (vals[best] < res.f) {
            res.f = vals[best];
            res.x = pts[best];
        }
        return false;
    };

    int total = 0;
    for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
        const double before = res.f;
        int used = 0;
        const bool ok = run_once(res.x, opt.max_iterations - total, used);
        total += used;
        res.iterations = total;
        if (!ok) {
            res.converged = false;
            return res;
        }
        res.converged = true;
        // a restart that no longer moves the optimum confirms convergence
        if (attempt > 0 && before - res.f <= opt.tolerance * std::max(1.0, std::abs(res.f))) break;
    }
    return res;
}

} // namespace tickvar::vol
