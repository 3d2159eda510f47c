#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace mifisher {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double ftol = 1e-9;        // absolute spread of simplex values
    std::size_t max_evals = 2000;
    int restarts = 2;          // fresh simplices around the incumbent after convergence
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

// Minimizes f: R^n -> R. Standard coefficients (reflect 1, expand 2,
// contract 1/2, shrink 1/2). Non-finite objective values count as +inf.
template <class F>
NelderMeadResult nelder_mead(F &&f, std::vector<double> x0, const NelderMeadOptions &opts = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double> &x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    res.x = x0;
    res.fx = eval(x0);
    if (n == 0) {
        res.converged = true;
        return res;
    }

    double step = opts.initial_step;
    for (int round = 0; round <= opts.restarts; ++round) {
        std::vector<std::vector<double>> simplex(n + 1, res.x);
        std::vector<double> values(n + 1, res.fx);
        for (std::size_t i = 0; i < n; ++i) {
            simplex[i + 1][i] += step;
            values[i + 1] = eval(simplex[i + 1]);
        }

        std::vector<std::size_t> order(n + 1);
        bool round_converged = false;
        std::vector<double> centroid(n), trial(n), trial2(n);
        while (res.evaluations < opts.max_evals) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
            if (std::isfinite(values[worst]) && values[worst] - values[best] <= opts.ftol) {
                round_converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i <= n; ++i)
                    if (i != worst) centroid[k] += simplex[i][k] / static_cast<double>(n);

            for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[worst][k]);
            const double fr = eval(trial);
            if (fr < values[best]) {
                for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]);
                const double fe = eval(trial2);
                if (fe < fr) {
                    simplex[worst] = trial2;
                    values[worst] = fe;
                } else {
                    simplex[worst] = trial;
                    values[worst] = fr;
                }
                continue;
            }
            if (fr < values[second]) {
                simplex[worst] = trial;
                values[worst] = fr;
                continue;
            }
            const bool outside = fr < values[worst];
            for (std::size_t k = 0; k < n; ++k)
                trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                    : centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]);
            const double fc = eval(trial2);
            if (fc < std::min(fr, values[worst])) {
                simplex[worst] = trial2;
                values[worst] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == best) continue;
                for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                values[i] = eval(simplex[i]);
            }
        }

        const std::size_t best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
        const double improvement = res.fx - values[best];
        if (values[best] < res.fx) {
            res.fx = values[best];
            res.x = simplex[best];
        }
        res.converged = round_converged;
        if (!round_converged || res.evaluations >= opts.max_evals) break;
        if (round > 0 && improvement <= opts.ftol) break;
        step *= 0.5;
    }
    return res;
}

}  // namespace mifisher
