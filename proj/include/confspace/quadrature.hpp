#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "confspace/errors.hpp"
#include "confspace/geometry.hpp"

namespace confspace {

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
/// the Legendre recurrence and cached per order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& get(int n) {
        static std::mutex mu;
        static std::map<int, GaussLegendre> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        return cache.emplace(n, compute(n)).first->second;
    }

private:
    static GaussLegendre compute(int n) {
        if (n < 1) throw PreconditionError("GaussLegendre: order must be >= 1");
        GaussLegendre rule;
        rule.nodes.resize(n);
        rule.weights.resize(n);
        const double pi = 3.14159265358979323846;
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                // Legendre P_n(x) and derivative via the three-term recurrence.
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            rule.nodes[i] = -x;
            rule.nodes[n - 1 - i] = x;
            double w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.weights[i] = w;
            rule.weights[n - 1 - i] = w;
        }
        return rule;
    }
};

/// Tensor Gauss-Legendre rule over a box: `order` nodes per axis on each of
/// `panels`^D congruent sub-boxes. Exact on per-axis polynomials of degree
/// <= 2*order-1 when panels == 1.
template <int D>
struct QuadratureRule {
    int order = 16;
    int panels = 1;

    QuadratureRule() = default;
    QuadratureRule(int ord, int pan = 1) : order(ord), panels(pan) {
        if (ord < 1 || pan < 1) throw PreconditionError("QuadratureRule: order and panels must be >= 1");
    }

    template <class F>
    double integrate(const Window<D>& box, F&& f) const {
        const auto& gl = GaussLegendre::get(order);
        const int npts = order * panels;
        // Per-axis node/weight tables for the composite rule.
        std::array<std::vector<double>, D> xs, ws;
        for (int d = 0; d < D; ++d) {
            xs[d].resize(npts);
            ws[d].resize(npts);
            const double h = box.edge(d) / panels;
            for (int p = 0; p < panels; ++p) {
                const double a = box.lower[d] + p * h;
                for (int i = 0; i < order; ++i) {
                    xs[d][p * order + i] = a + 0.5 * h * (gl.nodes[i] + 1.0);
                    ws[d][p * order + i] = 0.5 * h * gl.weights[i];
                }
            }
        }
        std::array<int, D> idx{};
        Point<D> x{};
        double total = 0.0;
        while (true) {
            double w = 1.0;
            for (int d = 0; d < D; ++d) {
                x[d] = xs[d][idx[d]];
                w *= ws[d][idx[d]];
            }
            total += w * f(x);
            int d = 0;
            for (; d < D; ++d) {
                if (++idx[d] < npts) break;
                idx[d] = 0;
            }
            if (d == D) break;
        }
        return total;
    }

    /// Value at doubled order together with the order-doubling error estimate.
    template <class F>
    std::pair<double, double> integrate_with_error(const Window<D>& box, F&& f) const {
        const double coarse = integrate(box, f);
        QuadratureRule<D> fine{2 * order, panels};
        const double value = fine.integrate(box, f);
        return {value, std::abs(value - coarse)};
    }
};

/// Integrate with a refinement ladder (order doubling, then composite panel
/// doubling for integrands whose support sits strictly inside the box) until
/// the error estimate meets `rel_tol` relative plus a small absolute floor.
/// Throws QuadratureError when the ladder is exhausted without converging.
template <int D, class F>
inline std::pair<double, double> integrate_to_tol(const Window<D>& box, F&& f, double rel_tol,
                                                  double abs_floor = 1e-14) {
    constexpr std::array<std::pair<int, int>, 9> ladder{
        {{8, 1}, {16, 1}, {32, 1}, {64, 1}, {32, 4}, {32, 8}, {32, 16}, {32, 32}, {32, 64}}};
    double prev = 0.0;
    bool first = true;
    for (const auto& [order, panels] : ladder) {
        if (D >= 3 && panels > 8) break;  // 32^3 panels of order 32 is past the budget
        const double cur = QuadratureRule<D>{order, panels}.integrate(box, f);
        const double err = std::abs(cur - prev);
        if (!first && err <= rel_tol * std::abs(cur) + abs_floor) return {cur, err};
        prev = cur;
        first = false;
    }
    throw QuadratureError("integrate_to_tol: refinement ladder did not converge over " +
                          box.describe());
}

}  // namespace confspace
