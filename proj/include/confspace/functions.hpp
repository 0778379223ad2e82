#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "confspace/geometry.hpp"
#include "confspace/intensity.hpp"
#include "confspace/quadrature.hpp"

namespace confspace {

template <int D>
struct Jet {
    double value = 0.0;
    Point<D> gradient{};
    double laplacian = 0.0;
};

/// Smooth compactly supported test function with closed-form value, gradient
/// and Laplacian.
///
/// Families:
///  - bump: s * exp(-1/(1-|x-c|^2/r^2)) inside the ball |x-c| < r, 0 outside;
///  - poly_bump: (b + <a, x-c>) times a bump, for non-radial shapes;
///  - window_poly: product of per-axis polynomials on a box, 0 outside. Not
///    smooth at the box boundary; kept for hand-computable integrals.
///  - zero.
template <int D>
class TestFunction {
    struct BumpF {
        Point<D> center;
        double radius;
        double scale;
    };
    struct PolyBumpF {
        Point<D> center;
        double radius;
        double scale;
        Point<D> linear;
        double offset;
    };
    struct WindowPolyF {
        Window<D> box;
        std::array<std::vector<double>, D> coeffs;
    };
    struct ZeroF {};
    std::variant<BumpF, PolyBumpF, WindowPolyF, ZeroF> family_;
    Window<D> support_;

    TestFunction(std::variant<BumpF, PolyBumpF, WindowPolyF, ZeroF> f, Window<D> supp)
        : family_(std::move(f)), support_(supp) {}

    static Window<D> ball_box(const Point<D>& c, double r) {
        Point<D> lo{}, hi{};
        for (int i = 0; i < D; ++i) {
            lo[i] = c[i] - r;
            hi[i] = c[i] + r;
        }
        return Window<D>(lo, hi);
    }

    // Jet of the radial factor s*b(u), shared by the bump families.
    struct RadialJet {
        double value;
        Point<D> gradient;
        double laplacian;
        bool inside;
    };
    static RadialJet radial_jet(const Point<D>& x, const Point<D>& c, double r, double s) {
        RadialJet out{0.0, {}, 0.0, false};
        const double r2 = r * r;
        const double u = distance_sq<D>(x, c) / r2;
        const auto p = detail::bump_profile(u);
        if (!p.inside || p.value == 0.0) return out;
        out.inside = true;
        out.value = s * p.value;
        const double w2 = p.w * p.w;
        for (int i = 0; i < D; ++i)
            out.gradient[i] = -2.0 * out.value * w2 * (x[i] - c[i]) / r2;
        // laplacian = (2 b / r^2) (2u w^4 - 4u w^3 - D w^2)
        out.laplacian =
            (2.0 * out.value / r2) * (2.0 * u * w2 * w2 - 4.0 * u * w2 * p.w - D * w2);
        return out;
    }

public:
    static TestFunction bump(const Point<D>& center, double radius, double scale = 1.0) {
        if (radius <= 0.0) throw PreconditionError("bump: radius must be > 0");
        return TestFunction(BumpF{center, radius, scale}, ball_box(center, radius));
    }

    static TestFunction poly_bump(const Point<D>& center, double radius, double scale,
                                  const Point<D>& linear, double offset) {
        if (radius <= 0.0) throw PreconditionError("poly_bump: radius must be > 0");
        return TestFunction(PolyBumpF{center, radius, scale, linear, offset},
                            ball_box(center, radius));
    }

    static TestFunction window_poly(const Window<D>& box,
                                    std::array<std::vector<double>, D> coeffs) {
        for (int d = 0; d < D; ++d)
            if (coeffs[d].empty()) throw PreconditionError("window_poly: empty coefficients");
        return TestFunction(WindowPolyF{box, std::move(coeffs)}, box);
    }

    static TestFunction zero() {
        Point<D> lo{}, hi{};
        hi.fill(1e-30);
        return TestFunction(ZeroF{}, Window<D>(lo, hi));
    }

    const Window<D>& support() const { return support_; }

    /// True for the C^infinity families (bump-based and zero).
    bool smooth() const { return !std::holds_alternative<WindowPolyF>(family_); }

    Jet<D> jet(const Point<D>& x) const {
        return std::visit(
            [&](const auto& f) -> Jet<D> {
                using T = std::decay_t<decltype(f)>;
                Jet<D> out;
                if constexpr (std::is_same_v<T, ZeroF>) {
                    return out;
                } else if constexpr (std::is_same_v<T, BumpF>) {
                    const auto rj = radial_jet(x, f.center, f.radius, f.scale);
                    out.value = rj.value;
                    out.gradient = rj.gradient;
                    out.laplacian = rj.laplacian;
                    return out;
                } else if constexpr (std::is_same_v<T, PolyBumpF>) {
                    const auto rj = radial_jet(x, f.center, f.radius, f.scale);
                    if (!rj.inside) return out;
                    double lin = f.offset;
                    for (int i = 0; i < D; ++i) lin += f.linear[i] * (x[i] - f.center[i]);
                    out.value = lin * rj.value;
                    double cross = 0.0;
                    for (int i = 0; i < D; ++i) {
                        out.gradient[i] = f.linear[i] * rj.value + lin * rj.gradient[i];
                        cross += f.linear[i] * rj.gradient[i];
                    }
                    out.laplacian = 2.0 * cross + lin * rj.laplacian;
                    return out;
                } else {
                    for (int d = 0; d < D; ++d)
                        if (x[d] < f.box.lower[d] || x[d] > f.box.upper[d]) return out;
                    std::array<double, D> p{}, dp{}, d2p{};
                    for (int d = 0; d < D; ++d)
                        detail::poly_eval(f.coeffs[d], x[d], p[d], dp[d], d2p[d]);
                    double prod = 1.0;
                    for (int d = 0; d < D; ++d) prod *= p[d];
                    out.value = prod;
                    for (int i = 0; i < D; ++i) {
                        double g = dp[i], l = d2p[i];
                        for (int d = 0; d < D; ++d)
                            if (d != i) {
                                g *= p[d];
                                l *= p[d];
                            }
                        out.gradient[i] = g;
                        out.laplacian += l;
                    }
                    return out;
                }
            },
            family_);
    }

    double value(const Point<D>& x) const { return jet(x).value; }
    Point<D> gradient(const Point<D>& x) const { return jet(x).gradient; }
    double laplacian(const Point<D>& x) const { return jet(x).laplacian; }

    std::string describe() const {
        return std::visit(
            [&](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                std::ostringstream os;
                if constexpr (std::is_same_v<T, ZeroF>)
                    os << "zero";
                else if constexpr (std::is_same_v<T, BumpF>)
                    os << "bump r=" << f.radius << " scale=" << f.scale;
                else if constexpr (std::is_same_v<T, PolyBumpF>)
                    os << "poly_bump r=" << f.radius;
                else
                    os << "window_poly on " << f.box.describe();
                return os.str();
            },
            family_);
    }
};

/// Full jet in one call; exactly zero outside the support box.
template <int D>
inline Jet<D> evaluate_jet(const TestFunction<D>& f, const Point<D>& x) {
    return f.jet(x);
}

/// Compactly supported vector field with one TestFunction per component and
/// closed-form divergence.
template <int D>
class VectorField {
    std::array<TestFunction<D>, D> comps_;
    Window<D> support_;

public:
    explicit VectorField(std::array<TestFunction<D>, D> comps)
        : comps_(std::move(comps)), support_(comps_[0].support()) {
        for (int i = 1; i < D; ++i) support_ = bounding_box(support_, comps_[i].support());
    }

    const TestFunction<D>& component(int i) const { return comps_[static_cast<std::size_t>(i)]; }
    const Window<D>& support() const { return support_; }

    Point<D> value(const Point<D>& x) const {
        Point<D> v{};
        for (int i = 0; i < D; ++i) v[i] = comps_[i].value(x);
        return v;
    }

    double divergence(const Point<D>& x) const {
        double s = 0.0;
        for (int i = 0; i < D; ++i) s += comps_[i].gradient(x)[i];
        return s;
    }
};

/// L^2(sigma) inner product of two test functions over the window:
/// int phi psi rho dm on the intersection of their support boxes.
/// Both supports must lie inside `w`.
template <int D>
inline double l2_inner(const TestFunction<D>& phi, const TestFunction<D>& psi,
                       const IntensityModel<D>& model, const Window<D>& w) {
    if (!w.contains_box(phi.support()) || !w.contains_box(psi.support()))
        throw PreconditionError("l2_inner: function support escapes the window");
    const auto box = intersect(phi.support(), psi.support());
    if (!box) return 0.0;
    auto [value, err] = integrate_to_tol<D>(
        *box,
        [&](const Point<D>& x) { return phi.value(x) * psi.value(x) * model.density(x); },
        1e-10);
    (void)err;
    return value;
}

}  // namespace confspace
