#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "confspace/charlier.hpp"
#include "confspace/operators.hpp"
#include "confspace/poisson_sampler.hpp"
#include "support/test_oracles.hpp"

using namespace confspace;
using testsupport::rel_err;

namespace {

CylinderFunction<1> linear_pairing(const TestFunction<1>& phi) {
    return CylinderFunction<1>(OuterFunction::linear({1.0}), {phi});
}

}  // namespace

TEST_CASE("outer families match finite differences of value/gradient/hessian") {
    RandomStream stream(21);
    const std::vector<OuterFunction> outers = {
        OuterFunction::linear({0.7, -1.2}, 0.3), OuterFunction::product(),
        OuterFunction::polynomial({0.5, 1.0, -0.25, 0.125}),
        OuterFunction::tanh_of({0.8, 0.6}, -0.2, 1.5), OuterFunction::exp_neg({0.5, 0.25}, 0.1)};
    for (const auto& g : outers) {
        const std::size_t n = g.arity() == 1 ? 1 : 2;
        auto value = [&](const std::vector<double>& s) {
            return g.value(std::span<const double>(s));
        };
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> s(n);
            for (auto& si : s) si = stream.uniform(-1.5, 1.5);
            std::vector<double> grad(n), hess(n * n);
            g.gradient(s, grad);
            g.hessian(s, hess);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(rel_err(grad[i], testsupport::fd_partial(value, s, i, 1e-6), 1e-5) < 1e-5);
                for (std::size_t j = 0; j < n; ++j) {
                    auto dpartial = [&](const std::vector<double>& t) {
                        std::vector<double> gg(n);
                        g.gradient(t, gg);
                        return gg[j];
                    };
                    CHECK(rel_err(hess[i * n + j], testsupport::fd_partial(dpartial, s, i, 1e-6),
                                  1e-4) < 1e-4);
                }
            }
        }
    }
}

TEST_CASE("intrinsic gradient of a linear pairing is the pointwise gradient") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto F = linear_pairing(phi);
    Configuration<1> gamma({{0.4}, {0.55}, {0.9}});
    const auto grad = intrinsic_gradient(F, gamma);
    REQUIRE(grad.at.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(grad.at[i][0] == Catch::Approx(phi.gradient(gamma[i])[0]).margin(1e-15));
}

TEST_CASE("constant outer functions have zero intrinsic gradient") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    CylinderFunction<1> F(OuterFunction::constant(4.0), {phi});
    Configuration<1> gamma({{0.45}, {0.6}});
    CHECK(intrinsic_gradient(F, gamma).norm_sq() == 0.0);
}

TEST_CASE("product rule at a single point configuration") {
    auto phi = TestFunction<1>::bump({0.45}, 0.3, 1.0);
    auto psi = TestFunction<1>::bump({0.55}, 0.35, 0.8);
    CylinderFunction<1> F(OuterFunction::product(), {phi, psi});
    const Point<1> a{0.5};
    Configuration<1> gamma({a});
    const auto grad = intrinsic_gradient(F, gamma);
    const double want = psi.value(a) * phi.gradient(a)[0] + phi.value(a) * psi.gradient(a)[0];
    CHECK(grad.at[0][0] == Catch::Approx(want).epsilon(1e-14));
}

TEST_CASE("directional derivative equals the tangent pairing exactly") {
    auto phi = TestFunction<2>::bump({0.5, 0.5}, 0.35, 1.0);
    auto psi = TestFunction<2>::poly_bump({0.45, 0.55}, 0.3, 1.0, {1.0, 0.2}, 0.1);
    CylinderFunction<2> F(OuterFunction::tanh_of({1.0, 0.5}), {phi, psi});
    VectorField<2> v({TestFunction<2>::bump({0.5, 0.5}, 0.4, 0.7),
                      TestFunction<2>::bump({0.55, 0.5}, 0.3, -0.4)});
    RandomStream stream(33);
    PoissonSampler<2> sampler(IntensityModel<2>::constant(4.0), Window<2>({0, 0}, {1, 1}));
    for (int i = 0; i < 50; ++i) {
        const auto gamma = sampler.sample(stream);
        TangentVector<2> v_on_gamma;
        for (const auto& x : gamma) v_on_gamma.at.push_back(v.value(x));
        const double via_pairing = inner_product(intrinsic_gradient(F, gamma), v_on_gamma);
        CHECK(directional_derivative(F, v, gamma) == Catch::Approx(via_pairing).margin(1e-15));
    }
}

TEST_CASE("directional derivative matches the Euler flow oracle") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    CylinderFunction<1> F(OuterFunction::polynomial({0.0, 1.0, 0.5}), {phi});
    VectorField<1> v({TestFunction<1>::bump({0.5}, 0.4, 0.6)});
    Configuration<1> gamma({{0.35}, {0.5}, {0.62}});
    const double exact = directional_derivative(F, v, gamma);
    const double flow = testsupport::flow_derivative(F, v, gamma, 1e-5);
    CHECK(rel_err(exact, flow, 1e-6) < 1e-3);
}

TEST_CASE("zero vector field gives zero directional derivative") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto F = linear_pairing(phi);
    VectorField<1> v({TestFunction<1>::zero()});
    Configuration<1> gamma({{0.5}});
    CHECK(directional_derivative(F, v, gamma) == 0.0);
}

TEST_CASE("carre du champ") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto F = linear_pairing(phi);

    SECTION("empty configuration gives zero") {
        CHECK(carre_du_champ(F, F, Configuration<1>{}) == 0.0);
    }
    SECTION("linear pairing gives the summed squared gradient") {
        Configuration<1> gamma({{0.4}, {0.55}});
        double want = 0.0;
        for (const auto& x : gamma) want += norm_sq<1>(phi.gradient(x));
        CHECK(carre_du_champ(F, F, gamma) == Catch::Approx(want).epsilon(1e-14));
    }
    SECTION("Cauchy-Schwarz holds on random instances") {
        auto psi = TestFunction<1>::poly_bump({0.55}, 0.25, 1.0, {0.8}, 0.2);
        CylinderFunction<1> G(OuterFunction::tanh_of({0.9}), {psi});
        RandomStream stream(44);
        PoissonSampler<1> sampler(IntensityModel<1>::constant(3.0), Window<1>({0.0}, {1.0}));
        for (int i = 0; i < 100; ++i) {
            const auto gamma = sampler.sample(stream);
            const double fg = carre_du_champ(F, G, gamma);
            const double ff = carre_du_champ(F, F, gamma);
            const double gg = carre_du_champ(G, G, gamma);
            CHECK(fg * fg <= ff * gg * (1.0 + 1e-12) + 1e-15);
        }
    }
}

TEST_CASE("logarithmic derivative along a field") {
    SECTION("empty configuration gives zero") {
        VectorField<1> v({TestFunction<1>::bump({0.5}, 0.3, 1.0)});
        CHECK(log_derivative_along(v, IntensityModel<1>::constant(1.0), Configuration<1>{}) == 0.0);
    }
    SECTION("constant density and v = phi e_1 gives phi'(a) at gamma = {a}") {
        auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
        VectorField<1> v({phi});
        auto model = IntensityModel<1>::constant(2.0);
        const Point<1> a{0.41};
        CHECK(log_derivative_along(v, model, Configuration<1>({a})) ==
              Catch::Approx(phi.gradient(a)[0]).epsilon(1e-14));
    }
    SECTION("divergence-free field under constant density gives zero") {
        // in d=2, v = (d_y psi, -d_x psi) is divergence-free; emulate with a
        // poly_bump pair whose cross terms cancel pointwise is intricate, so
        // use the 1d fact: only div v enters, and a field with zero
        // divergence must be constant, hence zero under compact support.
        VectorField<1> v({TestFunction<1>::zero()});
        auto model = IntensityModel<1>::constant(1.0);
        CHECK(log_derivative_along(v, model, Configuration<1>({{0.4}, {0.6}})) == 0.0);
    }
}

TEST_CASE("poisson gradient") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto F = linear_pairing(phi);
    Configuration<1> gamma({{0.45}});

    SECTION("linear pairing gains phi(x)") {
        CHECK(poisson_gradient(F, gamma, {0.55}) == Catch::Approx(phi.value({0.55})).epsilon(1e-14));
    }
    SECTION("constants do not move") {
        CylinderFunction<1> C(OuterFunction::constant(3.0), {phi});
        CHECK(poisson_gradient(C, gamma, {0.55}) == 0.0);
    }
    SECTION("counting square: (n+1)^2 - n^2") {
        // N_B via a window polynomial indicator-like function equal to 1 on its box
        Window<1> b({0.3}, {0.7});
        auto one_b = TestFunction<1>::window_poly(b, {{{1.0}}});
        CylinderFunction<1> N2(OuterFunction::polynomial({0.0, 0.0, 1.0}), {one_b});
        Configuration<1> g({{0.4}, {0.6}, {0.9}});  // N_B = 2
        CHECK(poisson_gradient(N2, g, {0.5}) == Catch::Approx(2.0 * 2.0 + 1.0));
    }
    SECTION("x already in gamma is a precondition violation") {
        CHECK_THROWS_AS(poisson_gradient(F, gamma, {0.45}), PreconditionError);
    }
    SECTION("product chain rule holds exactly") {
        auto psi = TestFunction<1>::bump({0.55}, 0.25, 0.9);
        auto G = linear_pairing(psi);
        CylinderFunction<1> FG(OuterFunction::product(), {phi, psi});
        RandomStream stream(55);
        PoissonSampler<1> sampler(IntensityModel<1>::constant(2.0), Window<1>({0.0}, {1.0}));
        for (int i = 0; i < 50; ++i) {
            const auto g = sampler.sample(stream);
            const Point<1> x{stream.uniform(0.0, 1.0)};
            if (g.contains(x)) continue;
            const double lhs = poisson_gradient(FG, g, x);
            const double rhs = F(add_point(g, x)) * poisson_gradient(G, g, x) +
                               G(g) * poisson_gradient(F, g, x);
            CHECK(lhs == Catch::Approx(rhs).margin(1e-13));
        }
    }
}

TEST_CASE("poisson directional derivative") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(1.5);
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto psi = TestFunction<1>::bump({0.45}, 0.25, 0.8);

    SECTION("constant F gives zero") {
        CylinderFunction<1> C(OuterFunction::constant(1.0), {phi});
        CHECK(poisson_directional(C, psi, model, w, Configuration<1>({{0.5}})) == 0.0);
    }
    SECTION("linear pairing gives the inner product, independent of gamma") {
        auto F = linear_pairing(phi);
        const double want = l2_inner(phi, psi, model, w);
        const double a = poisson_directional(F, psi, model, w, Configuration<1>{});
        const double b = poisson_directional(F, psi, model, w, Configuration<1>({{0.3}, {0.6}}));
        CHECK(a == Catch::Approx(want).epsilon(1e-9));
        CHECK(b == Catch::Approx(want).epsilon(1e-9));
    }
    SECTION("direction support escaping the window is rejected") {
        auto F = linear_pairing(phi);
        auto wide = TestFunction<1>::bump({0.95}, 0.2, 1.0);
        CHECK_THROWS_AS(poisson_directional(F, wide, model, w, Configuration<1>{}),
                        PreconditionError);
    }
    SECTION("bounded nonlinear case agrees with a refined quadrature") {
        CylinderFunction<1> F(OuterFunction::tanh_of({1.0}), {phi});
        Configuration<1> gamma({{0.42}, {0.58}});
        const double got = poisson_directional(F, psi, model, w, gamma);
        const auto args = F.arguments(gamma);
        const double base = F.value_at(args);
        const double oracle = testsupport::midpoint_refine(
            [&](double t) {
                const Point<1> x{t};
                return (F.value_with_extra_point(args, x) - base) * psi.value(x) *
                       model.density(x);
            },
            0.2, 0.7, 1e-13);
        CHECK(got == Catch::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("poisson adjoint") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(1.5);
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);

    SECTION("field phi(x) maps to the centered pairing") {
        auto field = [&](const Configuration<1>&, const Point<1>& x) { return phi.value(x); };
        Configuration<1> gamma({{0.4}, {0.6}});
        const double got = poisson_adjoint<1>(field, model, w, gamma);
        const double want = pairing(gamma, phi) - sigma_pairing(phi, model, w);
        CHECK(got == Catch::Approx(want).margin(1e-9));
    }
    SECTION("zero field maps to zero") {
        auto field = [](const Configuration<1>&, const Point<1>&) { return 0.0; };
        CHECK(poisson_adjoint<1>(field, model, w, Configuration<1>({{0.4}})) == 0.0);
    }
}

TEST_CASE("intrinsic generator") {
    Window<1> w({0.0}, {1.0});
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);

    SECTION("empty configuration gives zero") {
        auto F = linear_pairing(phi);
        CHECK(intrinsic_generator(F, IntensityModel<1>::constant(1.0), Configuration<1>{}) == 0.0);
    }
    SECTION("linear pairing under constant density is minus the summed laplacian") {
        auto F = linear_pairing(phi);
        auto model = IntensityModel<1>::constant(2.0);
        Configuration<1> gamma({{0.45}, {0.52}, {0.7}});
        double want = 0.0;
        for (const auto& x : gamma) want -= phi.laplacian(x);
        CHECK(intrinsic_generator(F, model, gamma) == Catch::Approx(want).epsilon(1e-13));
    }
    SECTION("nonconstant density contributes the drift term") {
        auto F = linear_pairing(phi);
        auto model = IntensityModel<1>::gaussian(1.0, {0.5}, 2.0);
        Configuration<1> gamma({{0.45}});
        const auto x = gamma[0];
        const double want =
            -(phi.laplacian(x) + model.log_density_gradient(x)[0] * phi.gradient(x)[0]);
        CHECK(intrinsic_generator(F, model, gamma) == Catch::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("added point gradient matches finite differences in x") {
    auto phi = TestFunction<1>::bump({0.5}, 0.3, 1.0);
    auto psi = TestFunction<1>::poly_bump({0.55}, 0.25, 1.0, {0.5}, 0.3);
    CylinderFunction<1> F(OuterFunction::tanh_of({1.0, -0.7}, 0.2), {phi, psi});
    Configuration<1> gamma({{0.4}, {0.6}});
    const auto args = F.arguments(gamma);
    RandomStream stream(66);
    for (int i = 0; i < 100; ++i) {
        const Point<1> x{stream.uniform(0.35, 0.65)};
        const auto got = added_point_gradient<1>(F, args, x);
        const auto fd = testsupport::fd_gradient<1>(
            [&](const Point<1>& p) { return F.value_with_extra_point(args, p); }, x, 1e-6);
        CHECK(rel_err(got[0], fd[0], 1e-6) < 1e-5);
    }
}
