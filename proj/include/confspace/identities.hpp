#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "confspace/charlier.hpp"
#include "confspace/montecarlo.hpp"
#include "confspace/operators.hpp"

namespace confspace {

struct EstimateSummary {
    double mean = 0.0;
    double se = 0.0;
};

/// Pass/fail record of one paired identity check. The two sides are
/// estimated on the same sample stream; the verdict compares the paired
/// difference against 3 standard errors plus a small absolute floor (the
/// identities are exact, so anything beyond noise indicates a bug).
struct IdentityReport {
    std::string identity;
    std::string detail;
    EstimateSummary lhs, rhs, paired;
    double threshold = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    long n = 0;
    double runtime_ms = 0.0;
    std::vector<std::array<double, 3>> replicate_means;  // lhs, rhs, diff
};

namespace detail {

constexpr double kVerdictFloor = 1e-9;

inline IdentityReport finish_report(std::string identity, std::string detail,
                                    const PairedEstimate& est, std::uint64_t seed, long n,
                                    std::chrono::steady_clock::time_point t0) {
    IdentityReport rep;
    rep.identity = std::move(identity);
    rep.detail = std::move(detail);
    rep.lhs = {est.lhs.mean, est.lhs.se};
    rep.rhs = {est.rhs.mean, est.rhs.se};
    rep.paired = {est.diff.mean, est.diff.se};
    rep.threshold = 3.0 * est.diff.se + kVerdictFloor;
    rep.pass = std::abs(est.diff.mean) <= rep.threshold;
    rep.seed = seed;
    rep.n = n;
    for (std::size_t r = 0; r < est.lhs.replicate_means.size(); ++r)
        rep.replicate_means.push_back({est.lhs.replicate_means[r], est.rhs.replicate_means[r],
                                       est.diff.replicate_means[r]});
    rep.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return rep;
}

}  // namespace detail

struct CheckOptions {
    long n = 100'000;
    int replicates = 8;
    int workers = 1;
    int quad_order = 32;  // per axis, for the inner quadratures
    int quad_panels = 4;  // composite panels per axis; hard cores get 4x more
};

namespace detail {

/// Inner rule of an identity check. Hard-core weights put jumps into the
/// integrand, which composite panels handle far better than order.
template <int D>
QuadratureRule<D> check_rule(const CheckOptions& opt, const InteractionModel<D>* interaction) {
    int panels = opt.quad_panels;
    if (interaction != nullptr && interaction->pair_potential().hard_core_radius()) panels *= 4;
    return QuadratureRule<D>{opt.quad_order, panels};
}

}  // namespace detail

/// Registered h(gamma, x) = a(x) * F(gamma) with a a test function and F an
/// optional cylinder factor (absent factor means F = 1). This compositional
/// shape keeps both sides of the exchange identities computable by
/// quadrature.
template <int D>
struct HFunctional {
    TestFunction<D> a;
    std::optional<CylinderFunction<D>> factor;

    double factor_value(std::span<const double> args) const {
        return factor ? factor->value_at(args) : 1.0;
    }
    double factor_with_extra(std::span<const double> args, const Point<D>& x) const {
        return factor ? factor->value_with_extra_point(args, x) : 1.0;
    }
    std::vector<double> factor_args(const Configuration<D>& gamma) const {
        return factor ? factor->arguments(gamma) : std::vector<double>{};
    }
};

/// Exchange identity for the Poisson measure (Mecke):
///   E[ sum_{x in gamma} h(gamma, x) ] = E[ int h(gamma+x, x) rho(x) dx ],
/// and its Gibbs generalization (Nguyen-Zessin) with the added-point weight
/// exp(-E_x(gamma+x)) inside the integral. The free case multiplies by
/// exactly 1.0, so both checks share this implementation and produce
/// bit-identical numbers on the same seed.
template <int D>
IdentityReport verify_exchange(const std::string& tag, const HFunctional<D>& h,
                               const LawSpec<D>& law, const IntensityModel<D>& model,
                               const Window<D>& w,
                               const InteractionModel<D>* interaction, std::uint64_t seed,
                               const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!w.contains_box(h.a.support()))
        throw PreconditionError(tag + ": support of a escapes the window");
    const QuadratureRule<D> quad = detail::check_rule<D>(opt, interaction);
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            const auto args = h.factor_args(gamma);
            const double f_here = h.factor_value(args);
            double lhs = 0.0;
            if (f_here != 0.0)
                for (const auto& x : gamma) lhs += h.a.value(x) * f_here;
            const double rhs = quad.integrate(h.a.support(), [&](const Point<D>& x) {
                double v = h.a.value(x);
                if (v == 0.0) return 0.0;
                v *= h.factor_with_extra(args, x) * model.density(x);
                if (interaction != nullptr)
                    v *= interaction->interaction(gamma.points(), x).exp_neg();
                return v;
            });
            return {lhs, rhs};
        },
        law, opt.n, seed, opt.replicates, opt.workers);
    std::ostringstream detail;
    detail << "a: " << h.a.describe();
    if (h.factor) detail << ", F: " << h.factor->outer().describe();
    return detail::finish_report(tag, detail.str(), est, seed, opt.n, t0);
}

template <int D>
IdentityReport verify_mecke(const HFunctional<D>& h, const IntensityModel<D>& model,
                            const Window<D>& w, std::uint64_t seed, const CheckOptions& opt) {
    return verify_exchange<D>("mecke", h, LawSpec<D>(PoissonLaw<D>{model, w}), model, w, nullptr,
                              seed, opt);
}

template <int D>
IdentityReport verify_gnz(const HFunctional<D>& h, const IntensityModel<D>& model,
                          const InteractionModel<D>& inter, const Window<D>& w,
                          const GibbsChainParams& params, std::uint64_t seed,
                          const CheckOptions& opt) {
    return verify_exchange<D>(
        "gnz", h, LawSpec<D>(GibbsLaw<D>{model, inter, w, params, std::nullopt}), model, w,
        &inter, seed, opt);
}

/// Integration by parts for the intrinsic gradient under the Poisson measure:
///   E[(D_v F) G] = -E[F (D_v G)] - E[F G B_v].
template <int D>
IdentityReport verify_ibp(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                          const VectorField<D>& v, const IntensityModel<D>& model,
                          const Window<D>& w, std::uint64_t seed, const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            const double lhs = directional_derivative(F, v, gamma) * G(gamma);
            const double rhs = -F(gamma) * directional_derivative(G, v, gamma) -
                               F(gamma) * G(gamma) * log_derivative_along(v, model, gamma);
            return {lhs, rhs};
        },
        LawSpec<D>(PoissonLaw<D>{model, w}), opt.n, seed, opt.replicates, opt.workers);
    return detail::finish_report("ibp", "F: " + F.outer().describe() + ", G: " + G.outer().describe(),
                                 est, seed, opt.n, t0);
}

/// Duality defining the configuration-space divergence:
///   E[<G v, grad F>] = -E[F div(G v)].
template <int D>
IdentityReport verify_div_duality(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                                  const VectorField<D>& v, const IntensityModel<D>& model,
                                  const Window<D>& w, std::uint64_t seed,
                                  const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            const double lhs = G(gamma) * directional_derivative(F, v, gamma);
            const double rhs = -F(gamma) * configuration_divergence(G, v, model, gamma);
            return {lhs, rhs};
        },
        LawSpec<D>(PoissonLaw<D>{model, w}), opt.n, seed, opt.replicates, opt.workers);
    return detail::finish_report("div_duality",
                                 "F: " + F.outer().describe() + ", G: " + G.outer().describe(),
                                 est, seed, opt.n, t0);
}

/// The Dirichlet operator generates the intrinsic form:
///   E[<grad F, grad G>] = E[(H F) G].
template <int D>
IdentityReport verify_generator(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                                const IntensityModel<D>& model, const Window<D>& w,
                                std::uint64_t seed, const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            return {carre_du_champ(F, G, gamma), intrinsic_generator(F, model, gamma) * G(gamma)};
        },
        LawSpec<D>(PoissonLaw<D>{model, w}), opt.n, seed, opt.replicates, opt.workers);
    return detail::finish_report("generator",
                                 "F: " + F.outer().describe() + ", G: " + G.outer().describe(),
                                 est, seed, opt.n, t0);
}

namespace detail {

/// Shared body of the two form identities; `interaction == nullptr` is the
/// Poisson case, multiplying by exactly 1.0 on the free path.
template <int D>
IdentityReport verify_form(const std::string& tag, const CylinderFunction<D>& F,
                           const CylinderFunction<D>& G, const LawSpec<D>& law,
                           const IntensityModel<D>& model, const Window<D>& w,
                           const InteractionModel<D>* interaction, std::uint64_t seed,
                           const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Window<D> box = bounding_box(F.inner_support(), G.inner_support());
    if (!w.contains_box(box))
        throw PreconditionError(tag + ": cylinder supports escape the window");
    if (interaction != nullptr) {
        // Exactness needs the test supports to stay one interaction range
        // inside the window.
        const double margin = interaction->range();
        for (int i = 0; i < D; ++i)
            if (box.lower[i] < w.lower[i] + margin || box.upper[i] > w.upper[i] - margin)
                throw PreconditionError(
                    tag + ": cylinder supports must stay one interaction range inside the window");
    }
    const QuadratureRule<D> quad = check_rule<D>(opt, interaction);
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            const double lhs = carre_du_champ(F, G, gamma);
            const auto argsF = F.arguments(gamma);
            const auto argsG = G.arguments(gamma);
            const double rhs = quad.integrate(box, [&](const Point<D>& x) {
                const auto gf = added_point_gradient<D>(F, argsF, x);
                const auto gg = added_point_gradient<D>(G, argsG, x);
                double v = dot<D>(gf, gg);
                if (v == 0.0) return 0.0;
                v *= model.density(x);
                if (interaction != nullptr)
                    v *= interaction->interaction(gamma.points(), x).exp_neg();
                return v;
            });
            return {lhs, rhs};
        },
        law, opt.n, seed, opt.replicates, opt.workers);
    return finish_report(tag, "F: " + F.outer().describe() + ", G: " + G.outer().describe(), est,
                         seed, opt.n, t0);
}

}  // namespace detail

/// Intrinsic form of the Poisson measure expressed through the add-one-point
/// gradient: E[<grad F, grad G>] = E[int <grad_x F(gamma+x), grad_x G(gamma+x)> dsigma].
template <int D>
IdentityReport verify_form_poisson(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                                   const IntensityModel<D>& model, const Window<D>& w,
                                   std::uint64_t seed, const CheckOptions& opt) {
    return detail::verify_form<D>("form_poisson", F, G, LawSpec<D>(PoissonLaw<D>{model, w}), model,
                                  w, nullptr, seed, opt);
}

/// Interacting analogue: the integrand gains the factor exp(-E_x(gamma+x)).
template <int D>
IdentityReport verify_form_gibbs(const CylinderFunction<D>& F, const CylinderFunction<D>& G,
                                 const IntensityModel<D>& model, const InteractionModel<D>& inter,
                                 const Window<D>& w, const GibbsChainParams& params,
                                 std::uint64_t seed, const CheckOptions& opt) {
    return detail::verify_form<D>("form_gibbs", F, G,
                                  LawSpec<D>(GibbsLaw<D>{model, inter, w, params, std::nullopt}),
                                  model, w, &inter, seed, opt);
}

/// Orthogonality of the Charlier system:
///   E[Q_n(phi) Q_m(psi)] = delta_{nm} n! (phi, psi)^n.
template <int D>
IdentityReport verify_chaos_orthogonality(int n_order, int m_order, const TestFunction<D>& phi,
                                          const TestFunction<D>& psi,
                                          const IntensityModel<D>& model, const Window<D>& w,
                                          std::uint64_t seed, const CheckOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (n_order < 0 || m_order < 0 || n_order > 3 || m_order > 3)
        throw PreconditionError("chaos_orthogonality: orders must lie in {0,...,3}");
    const double s_phi = sigma_pairing(phi, model, w);
    const double s_psi = sigma_pairing(psi, model, w);
    double expected = 0.0;
    if (n_order == m_order) {
        double fact = 1.0;
        for (int k = 2; k <= n_order; ++k) fact *= k;
        expected = fact * std::pow(l2_inner(phi, psi, model, w), n_order);
    }
    auto est = paired_expectation<D>(
        [&](const Configuration<D>& gamma) -> std::pair<double, double> {
            std::vector<double> phi_vals, psi_vals;
            phi_vals.reserve(gamma.size());
            psi_vals.reserve(gamma.size());
            for (const auto& x : gamma) {
                phi_vals.push_back(phi.value(x));
                psi_vals.push_back(psi.value(x));
            }
            const double qn = charlier_from_values(n_order, phi_vals, s_phi);
            const double qm = charlier_from_values(m_order, psi_vals, s_psi);
            return {qn * qm, expected};
        },
        LawSpec<D>(PoissonLaw<D>{model, w}), opt.n, seed, opt.replicates, opt.workers);
    std::ostringstream detail;
    detail << "n=" << n_order << " m=" << m_order << " expected=" << expected;
    return detail::finish_report("chaos_orthogonality", detail.str(), est, seed, opt.n, t0);
}

/// Annihilation property of the Charlier system, checked pointwise on
/// sampled configurations:
///   int [Q_n(gamma+x) - Q_n(gamma)] psi(x) rho(x) dx = n (phi,psi) Q_{n-1}(gamma).
/// Quadrature-limited; the verdict uses a relative tolerance.
struct AnnihilationReport {
    int max_order = 0;
    long configurations = 0;
    double worst_rel_error = 0.0;
    bool pass = false;
    double tolerance = 0.0;
};

template <int D>
AnnihilationReport verify_annihilation(int max_order, const TestFunction<D>& phi,
                                          const TestFunction<D>& psi,
                                          const IntensityModel<D>& model, const Window<D>& w,
                                          long n_configs, std::uint64_t seed,
                                          double rel_tol = 1e-4, int quad_order = 48) {
    if (max_order < 1 || max_order > 3)
        throw PreconditionError("verify_annihilation: order must lie in {1,2,3}");
    AnnihilationReport rep;
    rep.max_order = max_order;
    rep.configurations = n_configs;
    rep.tolerance = rel_tol;
    const double s_phi = sigma_pairing(phi, model, w);
    const double ip = l2_inner(phi, psi, model, w);
    const QuadratureRule<D> quad{quad_order, 1};
    RandomStream stream(seed, 0, "annihilation");
    PoissonSampler<D> sampler(model, w);
    double worst = 0.0;
    for (long c = 0; c < n_configs; ++c) {
        const auto gamma = sampler.sample(stream);
        std::vector<double> phi_vals;
        for (const auto& x : gamma) phi_vals.push_back(phi.value(x));
        for (int n = 1; n <= max_order; ++n) {
            const double qn = charlier_from_values(n, phi_vals, s_phi);
            const double qn1 = charlier_from_values(n - 1, phi_vals, s_phi);
            const double lhs = quad.integrate(psi.support(), [&](const Point<D>& x) {
                const double pv = psi.value(x);
                if (pv == 0.0) return 0.0;
                std::vector<double> ext = phi_vals;
                ext.push_back(phi.value(x));
                return (charlier_from_values(n, ext, s_phi) - qn) * pv * model.density(x);
            });
            const double rhs = double(n) * ip * qn1;
            const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-8});
            worst = std::max(worst, std::abs(lhs - rhs) / scale);
        }
    }
    rep.worst_rel_error = worst;
    rep.pass = worst <= rel_tol;
    return rep;
}

}  // namespace confspace
