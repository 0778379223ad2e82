#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "confspace/geometry.hpp"
#include "confspace/quadrature.hpp"

namespace confspace {

namespace detail {

/// Standard mollifier profile b(u) = exp(-1/(1-u)) for u = |x-c|^2/r^2 < 1,
/// zero for u >= 1, together with its radial derivatives. Peak value e^{-1}.
struct BumpProfile {
    double value = 0.0;       // b
    double dvalue = 0.0;      // db/du
    double d2value = 0.0;     // d^2 b / du^2  (via w-powers below)
    double w = 0.0;           // (1-u)^{-1}
    bool inside = false;
};

inline BumpProfile bump_profile(double u) {
    BumpProfile p;
    // exp(-w) underflows to exactly 0 long before w overflows; cut early so
    // products with w powers can never produce NaN.
    if (u >= 1.0 - 1e-3) return p;
    p.inside = true;
    p.w = 1.0 / (1.0 - u);
    p.value = std::exp(-p.w);
    if (p.value == 0.0) {
        p = BumpProfile{};
        return p;
    }
    p.dvalue = -p.value * p.w * p.w;
    p.d2value = p.value * (p.w * p.w * p.w * p.w - 2.0 * p.w * p.w * p.w);
    return p;
}

/// Evaluate a univariate polynomial and its first two derivatives (Horner).
inline void poly_eval(const std::vector<double>& c, double t, double& v, double& dv, double& d2v) {
    v = 0.0;
    dv = 0.0;
    d2v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) {
        d2v = d2v * t + 2.0 * dv;
        dv = dv * t + v;
        v = v * t + c[k];
    }
}

/// Extremes of a polynomial of degree <= 3 on [a,b] via its critical points.
inline std::pair<double, double> cubic_range(const std::vector<double>& c, double a, double b) {
    if (c.size() > 4) throw PreconditionError("polynomial family supports degree <= 3 per axis");
    auto val = [&](double t) {
        double v, dv, d2v;
        poly_eval(c, t, v, dv, d2v);
        return v;
    };
    double lo = std::min(val(a), val(b));
    double hi = std::max(val(a), val(b));
    // p'(t) = c1 + 2 c2 t + 3 c3 t^2
    const double c1 = c.size() > 1 ? c[1] : 0.0;
    const double c2 = c.size() > 2 ? c[2] : 0.0;
    const double c3 = c.size() > 3 ? c[3] : 0.0;
    std::vector<double> roots;
    if (c3 != 0.0) {
        const double disc = 4.0 * c2 * c2 - 12.0 * c3 * c1;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            roots.push_back((-2.0 * c2 + s) / (6.0 * c3));
            roots.push_back((-2.0 * c2 - s) / (6.0 * c3));
        }
    } else if (c2 != 0.0) {
        roots.push_back(-c1 / (2.0 * c2));
    }
    for (double t : roots) {
        if (t > a && t < b) {
            lo = std::min(lo, val(t));
            hi = std::max(hi, val(t));
        }
    }
    return {lo, hi};
}

}  // namespace detail

/// Intensity density rho on R^D with closed-form gradient. The measure of
/// interest is sigma = rho * Lebesgue; the logarithmic gradient grad(rho)/rho
/// is zero wherever rho vanishes.
///
/// Families: constant | gaussian (exponential-quadratic) | polynomial on a
/// box (product of per-axis cubics, zero outside) | bump-modulated.
template <int D>
class IntensityModel {
    struct Constant {
        double z;
    };
    struct Gaussian {
        double z;
        Point<D> center;
        double alpha;
    };
    struct Polynomial {
        Window<D> box;
        std::array<std::vector<double>, D> coeffs;
    };
    struct Bump {
        double base;
        double amplitude;
        Point<D> center;
        double radius;
    };
    std::variant<Constant, Gaussian, Polynomial, Bump> family_;

    explicit IntensityModel(std::variant<Constant, Gaussian, Polynomial, Bump> f)
        : family_(std::move(f)) {}

public:
    static IntensityModel constant(double z) {
        if (z < 0.0) throw PreconditionError("constant intensity must be >= 0");
        return IntensityModel(Constant{z});
    }

    /// rho(x) = z * exp(-alpha |x-c|^2), alpha >= 0.
    static IntensityModel gaussian(double z, const Point<D>& center, double alpha) {
        if (z < 0.0 || alpha < 0.0) throw PreconditionError("gaussian intensity: z, alpha >= 0");
        return IntensityModel(Gaussian{z, center, alpha});
    }

    /// rho(x) = prod_i p_i(x_i) on `box`, zero outside; each p_i a polynomial
    /// of degree <= 3 that must be nonnegative on its axis interval.
    static IntensityModel polynomial(const Window<D>& box,
                                     std::array<std::vector<double>, D> coeffs) {
        for (int d = 0; d < D; ++d) {
            if (coeffs[d].empty()) throw PreconditionError("polynomial intensity: empty coefficients");
            auto [lo, hi] = detail::cubic_range(coeffs[d], box.lower[d], box.upper[d]);
            (void)hi;
            if (lo < -1e-12)
                throw PreconditionError("polynomial intensity: negative on axis " + std::to_string(d));
        }
        return IntensityModel(Polynomial{box, std::move(coeffs)});
    }

    /// rho(x) = base + amplitude * exp(-1/(1-|x-c|^2/r^2)); zero amplitude
    /// contribution outside the ball of radius r.
    static IntensityModel bump_modulated(double base, double amplitude, const Point<D>& center,
                                         double radius) {
        if (radius <= 0.0) throw PreconditionError("bump intensity: radius must be > 0");
        if (base < 0.0 || base + std::min(amplitude, 0.0) * std::exp(-1.0) < 0.0)
            throw PreconditionError("bump intensity: density must stay nonnegative");
        return IntensityModel(Bump{base, amplitude, center, radius});
    }

    double density(const Point<D>& x) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.z;
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    return f.z * std::exp(-f.alpha * distance_sq<D>(x, f.center));
                } else if constexpr (std::is_same_v<T, Polynomial>) {
                    for (int d = 0; d < D; ++d)
                        if (x[d] < f.box.lower[d] || x[d] > f.box.upper[d]) return 0.0;
                    double v = 1.0;
                    for (int d = 0; d < D; ++d) {
                        double p, dp, d2p;
                        detail::poly_eval(f.coeffs[d], x[d], p, dp, d2p);
                        v *= p;
                    }
                    return std::max(v, 0.0);
                } else {
                    const double u = distance_sq<D>(x, f.center) / (f.radius * f.radius);
                    return f.base + f.amplitude * detail::bump_profile(u).value;
                }
            },
            family_);
    }

    Point<D> density_gradient(const Point<D>& x) const {
        return std::visit(
            [&](const auto& f) -> Point<D> {
                using T = std::decay_t<decltype(f)>;
                Point<D> g{};
                if constexpr (std::is_same_v<T, Constant>) {
                    return g;
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    const double rho = f.z * std::exp(-f.alpha * distance_sq<D>(x, f.center));
                    for (int i = 0; i < D; ++i) g[i] = -2.0 * f.alpha * (x[i] - f.center[i]) * rho;
                    return g;
                } else if constexpr (std::is_same_v<T, Polynomial>) {
                    for (int d = 0; d < D; ++d)
                        if (x[d] < f.box.lower[d] || x[d] > f.box.upper[d]) return g;
                    std::array<double, D> p{}, dp{};
                    for (int d = 0; d < D; ++d) {
                        double d2;
                        detail::poly_eval(f.coeffs[d], x[d], p[d], dp[d], d2);
                    }
                    for (int i = 0; i < D; ++i) {
                        double v = dp[i];
                        for (int d = 0; d < D; ++d)
                            if (d != i) v *= p[d];
                        g[i] = v;
                    }
                    return g;
                } else {
                    const double r2 = f.radius * f.radius;
                    const double u = distance_sq<D>(x, f.center) / r2;
                    const auto prof = detail::bump_profile(u);
                    if (!prof.inside) return g;
                    for (int i = 0; i < D; ++i)
                        g[i] = f.amplitude * prof.dvalue * 2.0 * (x[i] - f.center[i]) / r2;
                    return g;
                }
            },
            family_);
    }

    /// grad(rho)/rho where rho > 0, zero vector elsewhere.
    Point<D> log_density_gradient(const Point<D>& x) const {
        const double rho = density(x);
        Point<D> g{};
        if (rho <= 0.0) return g;
        g = density_gradient(x);
        for (int i = 0; i < D; ++i) g[i] /= rho;
        return g;
    }

    /// Upper bound for rho over `w`, used by rejection sampling.
    double sup_density(const Window<D>& w) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.z;
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    double d2 = 0.0;
                    for (int i = 0; i < D; ++i) {
                        const double c = std::clamp(f.center[i], w.lower[i], w.upper[i]);
                        d2 += (c - f.center[i]) * (c - f.center[i]);
                    }
                    return f.z * std::exp(-f.alpha * d2);
                } else if constexpr (std::is_same_v<T, Polynomial>) {
                    double s = 1.0;
                    for (int d = 0; d < D; ++d) {
                        const double a = std::max(w.lower[d], f.box.lower[d]);
                        const double b = std::min(w.upper[d], f.box.upper[d]);
                        if (!(a < b)) return 0.0;
                        auto [lo, hi] = detail::cubic_range(f.coeffs[d], a, b);
                        (void)lo;
                        s *= std::max(hi, 0.0);
                    }
                    return s;
                } else {
                    return f.base + std::max(f.amplitude, 0.0) * std::exp(-1.0);
                }
            },
            family_);
    }

    std::string describe() const {
        return std::visit(
            [&](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                std::ostringstream os;
                if constexpr (std::is_same_v<T, Constant>) {
                    os << "constant z=" << f.z;
                } else if constexpr (std::is_same_v<T, Gaussian>) {
                    os << "gaussian z=" << f.z << " alpha=" << f.alpha;
                } else if constexpr (std::is_same_v<T, Polynomial>) {
                    os << "polynomial on " << f.box.describe();
                } else {
                    os << "bump base=" << f.base << " amplitude=" << f.amplitude
                       << " radius=" << f.radius;
                }
                return os.str();
            },
            family_);
    }
};

/// Total mass sigma(w) = int_w rho dm by order-doubling quadrature; the error
/// estimate must reach 1e-8 relative or a QuadratureError is raised.
template <int D>
inline double intensity_mass(const IntensityModel<D>& model, const Window<D>& w) {
    auto [value, err] = integrate_to_tol<D>(
        w, [&](const Point<D>& x) { return model.density(x); }, 1e-8);
    (void)err;
    return value;
}

}  // namespace confspace
