#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>

namespace newsfame::detail {

template <std::size_t N>
struct SimplexResult {
    std::array<double, N> x{};
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimiser with the standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5). Stops when both
/// the spread of vertex values and the simplex diameter fall below rel_tol.
template <std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> start, std::array<double, N> step,
                             std::size_t max_iter, double rel_tol) {
    using Point = std::array<double, N>;
    std::array<Point, N + 1> simplex;
    std::array<double, N + 1> values;
    simplex[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= N; ++i) values[i] = f(simplex[i]);

    std::array<std::size_t, N + 1> order;
    SimplexResult<N> out;
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[N - 1];

        double diameter = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i <= N; ++i) {
            for (std::size_t k = 0; k < N; ++k) {
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
                scale = std::max(scale, std::abs(simplex[best][k]));
            }
        }
        const double spread = std::abs(values[worst] - values[best]);
        if (spread <= rel_tol * (std::abs(values[best]) + rel_tol) && diameter <= rel_tol * (scale + 1.0)) {
            out.converged = true;
            break;
        }

        Point centroid{};
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < N; ++k) centroid[k] += simplex[i][k] / static_cast<double>(N);
        }
        auto along = [&](double t) {
            Point p;
            for (std::size_t k = 0; k < N; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return p;
        };

        const Point reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < values[best]) {
            const Point expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        const Point contracted = along(outside ? -0.5 : 0.5);
        const double fc = f(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = contracted;
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < N; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
            values[i] = f(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    out.x = simplex[best];
    out.value = values[best];
    return out;
}

} // namespace newsfame::detail
