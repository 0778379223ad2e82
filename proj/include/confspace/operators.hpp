#pragma once

#include <functional>
#include <vector>

#include "confspace/cylinder.hpp"
#include "confspace/configuration.hpp"
#include "confspace/intensity.hpp"
#include "confspace/quadrature.hpp"

namespace confspace {

/// Intrinsic gradient of a cylinder function: the tangent vector whose value
/// at each point x of gamma is sum_i d_i g(<gamma,phi>) grad phi_i(x).
template <int D>
TangentVector<D> intrinsic_gradient(const CylinderFunction<D>& F, const Configuration<D>& gamma) {
    const auto args = F.arguments(gamma);
    std::vector<double> dg(args.size());
    F.outer().gradient(args, dg);
    TangentVector<D> out;
    out.at.reserve(gamma.size());
    for (const auto& x : gamma) {
        Point<D> v{};
        for (std::size_t i = 0; i < dg.size(); ++i) {
            const auto g = F.inner()[i].gradient(x);
            for (int d = 0; d < D; ++d) v[d] += dg[i] * g[d];
        }
        out.at.push_back(v);
    }
    return out;
}

/// Derivative of F along the flow of the vector field v; coincides exactly
/// with the pairing of the intrinsic gradient against v restricted to gamma.
template <int D>
double directional_derivative(const CylinderFunction<D>& F, const VectorField<D>& v,
                              const Configuration<D>& gamma) {
    const auto args = F.arguments(gamma);
    std::vector<double> dg(args.size());
    F.outer().gradient(args, dg);
    double total = 0.0;
    for (std::size_t i = 0; i < dg.size(); ++i) {
        if (dg[i] == 0.0) continue;
        double pair_dv = 0.0;
        for (const auto& x : gamma) pair_dv += dot<D>(F.inner()[i].gradient(x), v.value(x));
        total += dg[i] * pair_dv;
    }
    return total;
}

/// Carre du champ <grad F, grad G> at gamma (sum over points of gamma).
template <int D>
double carre_du_champ(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                      const Configuration<D>& gamma) {
    const auto gf = intrinsic_gradient(F, gamma);
    const auto gg = intrinsic_gradient(G, gamma);
    return inner_product(gf, gg);
}

/// Logarithmic derivative of the Poisson measure along v:
/// sum over x in gamma of <grad(rho)/rho (x), v(x)> + div v(x).
template <int D>
double log_derivative_along(const VectorField<D>& v, const IntensityModel<D>& model,
                            const Configuration<D>& gamma) {
    double s = 0.0;
    for (const auto& x : gamma) {
        s += dot<D>(model.log_density_gradient(x), v.value(x));
        s += v.divergence(x);
    }
    return s;
}

/// Add-one-point difference F(gamma + x) - F(gamma). Requires x not in gamma.
template <int D>
double poisson_gradient(const CylinderFunction<D>& F, const Configuration<D>& gamma,
                        const typename Configuration<D>::point_type& x) {
    if (gamma.contains(x)) throw PreconditionError("poisson_gradient: x already in gamma");
    const auto args = F.arguments(gamma);
    return F.value_with_extra_point(args, x) - F.value_at(args);
}

/// Directional form of the add-one-point gradient:
/// int [F(gamma+x) - F(gamma)] phi(x) rho(x) dx over the support of phi.
template <int D>
double poisson_directional(const CylinderFunction<D>& F, const TestFunction<D>& direction,
                           const IntensityModel<D>& model, const Window<D>& w,
                           const Configuration<D>& gamma, const QuadratureRule<D>& quad = {32, 1}) {
    if (!w.contains_box(direction.support()))
        throw PreconditionError("poisson_directional: direction support escapes the window");
    const auto args = F.arguments(gamma);
    const double base = F.value_at(args);
    return quad.integrate(direction.support(), [&](const Point<D>& x) {
        return (F.value_with_extra_point(args, x) - base) * direction.value(x) * model.density(x);
    });
}

/// Adjoint of the add-one-point gradient on an explicit field:
/// sum_{x in gamma} field(gamma - x, x) - int field(gamma, x) rho(x) dx.
/// The integral runs over the whole window, so the default rule is composite
/// (fields are usually supported strictly inside).
template <int D>
double poisson_adjoint(
    const std::function<double(const Configuration<D>&, const Point<D>&)>& field,
    const IntensityModel<D>& model, const Window<D>& w, const Configuration<D>& gamma,
    const QuadratureRule<D>& quad = {16, D == 1 ? 16 : (D == 2 ? 6 : 3)}) {
    double sum = 0.0;
    for (const auto& x : gamma) sum += field(gamma.without_point(x), x);
    const double integral =
        quad.integrate(w, [&](const Point<D>& x) { return field(gamma, x) * model.density(x); });
    return sum - integral;
}

/// Divergence of the vector field gamma |-> G(gamma) v on configuration
/// space: <grad G, v>|_gamma + G(gamma) B_v(gamma).
template <int D>
double configuration_divergence(const CylinderFunction<D>& G, const VectorField<D>& v,
                                const IntensityModel<D>& model, const Configuration<D>& gamma) {
    return directional_derivative(G, v, gamma) +
           G(gamma) * log_derivative_along(v, model, gamma);
}

/// Intrinsic Dirichlet operator on cylinder functions:
///   (H F)(gamma) = - sum_{x in gamma} [ sum_{ij} d2_ij g <grad phi_i, grad phi_j>(x)
///                  + sum_i d_i g (lap phi_i(x) + <beta(x), grad phi_i(x)>) ].
template <int D>
double intrinsic_generator(const CylinderFunction<D>& F, const IntensityModel<D>& model,
                           const Configuration<D>& gamma) {
    const auto args = F.arguments(gamma);
    const std::size_t n = args.size();
    std::vector<double> dg(n), d2g(n * n);
    F.outer().gradient(args, dg);
    F.outer().hessian(args, d2g);
    double total = 0.0;
    std::vector<Jet<D>> jets(n);
    for (const auto& x : gamma) {
        for (std::size_t i = 0; i < n; ++i) jets[i] = F.inner()[i].jet(x);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (d2g[i * n + j] == 0.0) continue;
                acc += d2g[i * n + j] * dot<D>(jets[i].gradient, jets[j].gradient);
            }
        const auto beta = model.log_density_gradient(x);
        for (std::size_t i = 0; i < n; ++i)
            acc += dg[i] * (jets[i].laplacian + dot<D>(beta, jets[i].gradient));
        total += acc;
    }
    return -total;
}

/// Spatial gradient of gamma' |-> F(gamma + x) in the added point:
/// sum_i d_i g(args shifted by phi(x)) grad phi_i(x).
template <int D>
Point<D> added_point_gradient(const CylinderFunction<D>& F, std::span<const double> args,
                              const Point<D>& x) {
    const std::size_t n = args.size();
    std::vector<double> shifted(args.begin(), args.end());
    for (std::size_t i = 0; i < n; ++i) shifted[i] += F.inner()[i].value(x);
    std::vector<double> dg(n);
    F.outer().gradient(shifted, dg);
    Point<D> out{};
    for (std::size_t i = 0; i < n; ++i) {
        if (dg[i] == 0.0) continue;
        const auto g = F.inner()[i].gradient(x);
        for (int d = 0; d < D; ++d) out[d] += dg[i] * g[d];
    }
    return out;
}

}  // namespace confspace
