#pragma once

// Reference solver for the dual problem, used only by tests. Projected
// gradient ascent with an exact bisection projection onto the feasible set
// {0 <= lambda <= C, sum(lambda_i y_i) = 0}. Deliberately shares no code
// with the production SMO solver so agreement between the two is evidence,
// not tautology.

#include <cmath>
#include <cstddef>
#include <vector>

#include "svmpso/common.hpp"

namespace oracle {

inline double dual_objective(const svmpso::Matrix& K, const std::vector<int>& y,
                             const std::vector<double>& a) {
    const std::size_t n = y.size();
    double sum = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += a[i];
        for (std::size_t j = 0; j < n; ++j)
            quad += a[i] * a[j] * y[i] * y[j] * K(i, j);
    }
    return sum - 0.5 * quad;
}

/// Euclidean projection onto the box-and-hyperplane feasible set: the
/// projection is clip(v_i - mu*y_i, 0, C) with mu the root of the monotone
/// function h(mu) = sum(y_i * clip(v_i - mu*y_i, 0, C)), found by bisection.
inline std::vector<double> project_feasible(std::vector<double> v, const std::vector<int>& y,
                                            double C) {
    const std::size_t n = v.size();
    auto h = [&](double mu) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = v[i] - mu * y[i];
            if (x < 0.0)
                x = 0.0;
            else if (x > C)
                x = C;
            s += y[i] * x;
        }
        return s;
    };
    double span = C;
    for (double vi : v)
        span = std::max(span, std::abs(vi));
    double lo = -(span + C + 1.0), hi = span + C + 1.0;  // h(lo) >= 0 >= h(hi)
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double mu = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < n; ++i) {
        double x = v[i] - mu * y[i];
        v[i] = x < 0.0 ? 0.0 : (x > C ? C : x);
    }
    return v;
}

/// Maximizes the dual objective for a positive semdefinite Gram matrix.
/// Fixed step 1/L with L an upper bound on the Hessian norm keeps every
/// iteration monotone, so the returned point is a global maximizer up to
/// the stopping tolerance.
inline std::vector<double> solve_dual(const svmpso::Matrix& K, const std::vector<int>& y,
                                      double C, std::size_t max_iters = 200000) {
    const std::size_t n = y.size();
    double L = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            row += std::abs(K(i, j));
        L = std::max(L, row);
    }
    const double step = L > 0.0 ? 1.0 / L : 1.0;

    std::vector<double> a = project_feasible(std::vector<double>(n, 0.0), y, C);
    std::vector<double> grad(n), next(n);
    for (std::size_t it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double g = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                g -= y[i] * y[j] * K(i, j) * a[j];
            grad[i] = g;
        }
        for (std::size_t i = 0; i < n; ++i)
            next[i] = a[i] + step * grad[i];
        next = project_feasible(std::move(next), y, C);
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            moved = std::max(moved, std::abs(next[i] - a[i]));
        a.swap(next);
        if (moved < 1e-14 * std::max(1.0, C))
            break;
    }
    return a;
}

}  // namespace oracle
