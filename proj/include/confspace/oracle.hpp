#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/intensity.hpp"
#include "confspace/potential.hpp"
#include "confspace/quadrature.hpp"

namespace confspace {

/// Truncated-series quadrature oracle. Expectations under the Poisson or
/// finite-volume Gibbs law on a small window are expanded over the number of
/// points:
///   Poisson:  e^{-sigma(w)} sum_k (1/k!) int_{w^k} f({x}) prod rho(x_j) dx,
///   Gibbs:    the same sum with weight e^{-E_w}, divided by the identically
///             truncated partition series.
/// Every value carries a rigorous Poisson tail bound for the dropped orders
/// and a quadrature error estimate from panel/order refinement.
struct OracleConfig {
    int n_max = 6;
    double tail_tol = 1e-6;  // above this the result is flagged inconclusive
    // (order, panels) of the per-point tensor rule at each k; generous at low
    // k where the mass sits, coarse at high k where the Poisson weight and
    // the remaining budget are both tiny.
    std::array<std::pair<int, int>, 9> per_k{{{16, 1},
                                              {16, 12},
                                              {10, 24},
                                              {8, 10},
                                              {6, 5},
                                              {5, 3},
                                              {4, 3},
                                              {4, 2},
                                              {4, 2}}};

    std::pair<int, int> rule_for(int k) const {
        return per_k[static_cast<std::size_t>(std::min<int>(k, static_cast<int>(per_k.size()) - 1))];
    }
};

struct OracleResult {
    double value = 0.0;
    double tail_bound = 0.0;
    double quad_error = 0.0;
    bool conclusive = true;
};

namespace detail {

/// Integral over w^k of f(points) * weight(points) * prod rho(x_j) with a
/// per-point tensor Gauss-Legendre rule. The functional receives the point
/// list as-is (quadrature tuples may collide on a null set; functionals must
/// treat the argument as a list, not a set).
template <int D>
double k_point_integral(int k, const Window<D>& w, const IntensityModel<D>& model,
                        const InteractionModel<D>* interaction,
                        const std::function<double(std::span<const Point<D>>)>& f, int order,
                        int panels) {
    if (k == 0) {
        const std::vector<Point<D>> none;
        return f(none);
    }
    const auto& gl = GaussLegendre::get(order);
    const int npts = order * panels;
    std::array<std::vector<double>, D> xs, ws;
    for (int d = 0; d < D; ++d) {
        xs[d].resize(static_cast<std::size_t>(npts));
        ws[d].resize(static_cast<std::size_t>(npts));
        const double h = w.edge(d) / panels;
        for (int p = 0; p < panels; ++p)
            for (int i = 0; i < order; ++i) {
                xs[d][static_cast<std::size_t>(p * order + i)] =
                    w.lower[d] + p * h + 0.5 * h * (gl.nodes[static_cast<std::size_t>(i)] + 1.0);
                ws[d][static_cast<std::size_t>(p * order + i)] =
                    0.5 * h * gl.weights[static_cast<std::size_t>(i)];
            }
    }
    // One multi-index of length k*D runs over all node tuples.
    std::vector<int> idx(static_cast<std::size_t>(k * D), 0);
    std::vector<Point<D>> pts(static_cast<std::size_t>(k));
    double total = 0.0;
    while (true) {
        double weight = 1.0;
        for (int j = 0; j < k; ++j)
            for (int d = 0; d < D; ++d) {
                const int node = idx[static_cast<std::size_t>(j * D + d)];
                pts[static_cast<std::size_t>(j)][d] = xs[d][static_cast<std::size_t>(node)];
                weight *= ws[d][static_cast<std::size_t>(node)];
            }
        double dens = 1.0;
        for (int j = 0; j < k; ++j) dens *= model.density(pts[static_cast<std::size_t>(j)]);
        if (dens != 0.0) {
            double gibbs = 1.0;
            if (interaction != nullptr) {
                EnergyValue e;
                for (int i = 0; i < k && !e.infinite; ++i)
                    for (int j = i + 1; j < k; ++j) {
                        e += interaction->pair_potential()(
                            sub<D>(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]));
                        if (e.infinite) break;
                    }
                gibbs = e.exp_neg();
            }
            if (gibbs != 0.0) total += weight * dens * gibbs * f(pts);
        }
        std::size_t pos = 0;
        for (; pos < idx.size(); ++pos) {
            if (++idx[pos] < npts) break;
            idx[pos] = 0;
        }
        if (pos == idx.size()) break;
    }
    return total;
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace detail

/// Expectation of `functional` under the law selected by `interaction`
/// (nullptr for Poisson). `sup_bound(k)` must dominate |functional| on
/// k-point configurations; it feeds the tail bound.
template <int D>
OracleResult oracle_expectation(const std::function<double(std::span<const Point<D>>)>& functional,
                                const std::function<double(int)>& sup_bound,
                                const IntensityModel<D>& model,
                                const InteractionModel<D>* interaction, const Window<D>& w,
                                const OracleConfig& cfg = {}) {
    const double mass = intensity_mass(model, w);
    const auto ones = [](std::span<const Point<D>>) { return 1.0; };
    const std::optional<long> cap =
        interaction ? interaction->population_cap(w) : std::nullopt;

    double num = 0.0, den = 0.0, num_c = 0.0, den_c = 0.0;
    for (int k = 0; k <= cfg.n_max; ++k) {
        if (cap && k > *cap) break;  // every higher order has weight exactly 0
        const auto [order, panels] = cfg.rule_for(k);
        const double inv_fact = 1.0 / detail::factorial(k);
        const int c_order = std::max(2, order / 2);
        const int c_panels = std::max(1, panels / 2);
        num += inv_fact *
               detail::k_point_integral<D>(k, w, model, interaction, functional, order, panels);
        num_c += inv_fact * detail::k_point_integral<D>(k, w, model, interaction, functional,
                                                        c_order, c_panels);
        if (interaction != nullptr) {
            den += inv_fact *
                   detail::k_point_integral<D>(k, w, model, interaction, ones, order, panels);
            den_c += inv_fact * detail::k_point_integral<D>(k, w, model, interaction, ones,
                                                            c_order, c_panels);
        }
    }

    OracleResult out;
    // Poisson tail of the dropped orders, with the interaction's stability
    // profile bounding e^{-E} on k points (identically 0 past a hard-core
    // packing cap).
    const double neg_min =
        interaction ? std::max(0.0, -interaction->pair_potential().min_finite_value()) : 0.0;
    double tail_num = 0.0, tail_den = 0.0;
    double pow_mass = std::pow(mass, cfg.n_max);
    for (int k = cfg.n_max + 1; k <= cfg.n_max + 40; ++k) {
        pow_mass *= mass;
        if (cap && k > *cap) break;
        const double boltz = std::exp(neg_min * 0.5 * double(k) * double(k - 1));
        const double base = pow_mass / detail::factorial(k) * boltz;
        tail_num += base * sup_bound(k);
        tail_den += base;
        if (base < 1e-300) break;
    }

    if (interaction == nullptr) {
        const double norm = std::exp(-mass);
        out.value = norm * num;
        out.quad_error = norm * std::abs(num - num_c);
        out.tail_bound = norm * tail_num;
    } else {
        out.value = num / den;
        out.quad_error = std::abs(num / den - num_c / den_c);
        // |N'/Z' - N/Z| <= (tail_N + |value| tail_Z) / Z with Z >= den.
        out.tail_bound = (tail_num + std::abs(out.value) * tail_den) / den;
    }
    out.conclusive = out.tail_bound <= cfg.tail_tol;
    return out;
}

/// Expectation of the number of points.
template <int D>
inline std::function<double(std::span<const Point<D>>)> count_functional() {
    return [](std::span<const Point<D>> pts) { return static_cast<double>(pts.size()); };
}

}  // namespace confspace
