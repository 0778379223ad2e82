#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>

#include "confspace/configuration.hpp"
#include "confspace/geometry.hpp"
#include "confspace/intensity.hpp"
#include "confspace/random.hpp"

namespace confspace {

/// Extended real energy: finite value or a saturating +infinity flag. The
/// flag never enters floating-point sums, so exp(-E) is exactly 0 for an
/// infinite energy and no NaN can arise.
struct EnergyValue {
    double value = 0.0;
    bool infinite = false;

    static EnergyValue infinity() { return {0.0, true}; }

    EnergyValue& operator+=(const EnergyValue& o) {
        infinite = infinite || o.infinite;
        if (!infinite) value += o.value;
        return *this;
    }

    double exp_neg() const { return infinite ? 0.0 : std::exp(-value); }

    bool operator==(const EnergyValue& o) const {
        return infinite == o.infinite && (infinite || value == o.value);
    }
};

/// Symmetric pair interaction phi: R^D -> R u {+inf} with finite range.
///
/// Families:
///  - zero;
///  - hard_core(r0): +inf strictly inside |x| < r0, 0 at and beyond r0;
///  - soft_core(height, r_in, r_out): smooth plateau, exactly `height` for
///    |x| <= r_in, 0 for |x| >= r_out, C^infinity monotone in between.
template <int D>
class PairPotential {
    struct Zero {};
    struct HardCore {
        double r0;
    };
    struct SoftCore {
        double height;
        double r_in;
        double r_out;
    };
    std::variant<Zero, HardCore, SoftCore> family_;

    explicit PairPotential(std::variant<Zero, HardCore, SoftCore> f) : family_(std::move(f)) {}

    // C^infinity cutoff: 1 on t <= 0, 0 on t >= 1.
    static double smooth_step_down(double t) {
        if (t <= 0.0) return 1.0;
        if (t >= 1.0) return 0.0;
        const double a = std::exp(-1.0 / (1.0 - t));
        const double b = std::exp(-1.0 / t);
        return a / (a + b);
    }

public:
    static PairPotential zero() { return PairPotential(Zero{}); }

    static PairPotential hard_core(double r0) {
        if (r0 <= 0.0) throw PreconditionError("hard_core: r0 must be > 0");
        return PairPotential(HardCore{r0});
    }

    static PairPotential soft_core(double height, double r_in, double r_out) {
        if (!(0.0 < r_in && r_in < r_out))
            throw PreconditionError("soft_core: need 0 < r_in < r_out");
        return PairPotential(SoftCore{height, r_in, r_out});
    }

    /// phi evaluated on a displacement x - y.
    EnergyValue operator()(const Point<D>& displacement) const {
        const double r = std::sqrt(norm_sq<D>(displacement));
        return at_distance(r);
    }

    EnergyValue at_distance(double r) const {
        return std::visit(
            [&](const auto& f) -> EnergyValue {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Zero>) {
                    return {};
                } else if constexpr (std::is_same_v<T, HardCore>) {
                    if (r < f.r0) return EnergyValue::infinity();
                    return {};
                } else {
                    if (r >= f.r_out) return {};
                    const double t = (r - f.r_in) / (f.r_out - f.r_in);
                    return {f.height * smooth_step_down(t), false};
                }
            },
            family_);
    }

    /// Interaction radius: phi vanishes identically beyond it.
    double range() const {
        return std::visit(
            [](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Zero>)
                    return 0.0;
                else if constexpr (std::is_same_v<T, HardCore>)
                    return f.r0;
                else
                    return f.r_out;
            },
            family_);
    }

    /// Lower bound of phi over its finite-value region (for stability and
    /// series tail bounds).
    double min_finite_value() const {
        return std::visit(
            [](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, SoftCore>) return std::min(f.height, 0.0);
                return 0.0;
            },
            family_);
    }

    bool is_zero() const { return std::holds_alternative<Zero>(family_); }

    /// Exclusion radius of the hard-core family, if any.
    std::optional<double> hard_core_radius() const {
        if (const auto* h = std::get_if<HardCore>(&family_)) return h->r0;
        return std::nullopt;
    }

    std::string describe() const {
        return std::visit(
            [](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                std::ostringstream os;
                if constexpr (std::is_same_v<T, Zero>)
                    os << "zero";
                else if constexpr (std::is_same_v<T, HardCore>)
                    os << "hardcore r0=" << f.r0;
                else
                    os << "softcore a=" << f.height << " r_in=" << f.r_in << " r_out=" << f.r_out;
                return os.str();
            },
            family_);
    }
};

/// Interaction energies induced by a pair potential: the potential assigns
/// phi(x-y) to two-point subsets and 0 to every other cardinality. The
/// interface is per-configuration so further interaction terms could be
/// added without touching callers.
template <int D>
class InteractionModel {
    PairPotential<D> pair_;

public:
    explicit InteractionModel(PairPotential<D> p) : pair_(std::move(p)) {}

    const PairPotential<D>& pair_potential() const { return pair_; }
    double range() const { return pair_.range(); }
    bool is_free() const { return pair_.is_zero(); }

    /// Energy of all unordered pairs of `points` u {x} that involve x.
    /// No distinctness check; callers on hot paths guarantee x is fresh.
    EnergyValue interaction(std::span<const Point<D>> points, const Point<D>& x) const {
        EnergyValue e;
        for (const auto& y : points) {
            e += pair_(sub<D>(x, y));
            if (e.infinite) return e;
        }
        return e;
    }

    /// Conditional energy of gamma relative to the region: sum of pair terms
    /// with at least one endpoint inside; empty sum is 0.
    EnergyValue conditional_energy(const Configuration<D>& gamma, const Window<D>& region) const {
        EnergyValue e;
        const auto pts = gamma.points();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const bool in_i = region.contains(pts[i]);
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                if (!in_i && !region.contains(pts[j])) continue;
                e += pair_(sub<D>(pts[i], pts[j]));
                if (e.infinite) return e;
            }
        }
        return e;
    }

    /// One-point energy of adding x to gamma: sum over y in gamma of
    /// phi(x-y). Requires x not already in gamma.
    EnergyValue local_energy(const Configuration<D>& gamma, const Point<D>& x) const {
        if (gamma.contains(x)) throw PreconditionError("local_energy: x already in gamma");
        return interaction(gamma.points(), x);
    }

    /// Largest population with finite energy inside w, when the potential
    /// enforces one (hard core: disjoint r0/2-balls must fit in the inflated
    /// window). Unbounded families return nullopt.
    std::optional<long> population_cap(const Window<D>& w) const {
        const auto r0 = pair_.hard_core_radius();
        if (!r0) return std::nullopt;
        const double half = *r0 / 2.0;
        double inflated = 1.0;
        for (int i = 0; i < D; ++i) inflated *= w.edge(i) + 2.0 * half;
        const double pi = 3.14159265358979323846;
        double ball = 2.0 * half;                       // D == 1
        if constexpr (D == 2) ball = pi * half * half;
        if constexpr (D == 3) ball = 4.0 / 3.0 * pi * half * half * half;
        return static_cast<long>(inflated / ball);
    }
};

/// Perturbed intensity density rho_gamma(x) = exp(-E_x(gamma + x)) rho(x);
/// exactly 0 when the added-point energy is infinite.
template <int D>
inline double perturbed_density(const IntensityModel<D>& model, const InteractionModel<D>& inter,
                                const Configuration<D>& gamma, const Point<D>& x) {
    return inter.local_energy(gamma, x).exp_neg() * model.density(x);
}

struct StabilityReport {
    long trials = 0;
    long violations = 0;
    double worst_margin = 0.0;  // min over trials of E + B|gamma| (negative = violation)
    bool pass = true;
};

/// Samples Poisson configurations on `w` and spot-checks the lower bound
/// E(gamma) >= -B |gamma|. A pass is evidence, not proof.
template <int D>
StabilityReport stability_spotcheck(const InteractionModel<D>& inter, double bound,
                                    const Window<D>& w, const IntensityModel<D>& model,
                                    long trials, RandomStream& stream);

}  // namespace confspace
