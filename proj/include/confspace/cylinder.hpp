#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/functions.hpp"

namespace confspace {

/// Outer function g: R^N -> R of a cylinder function, with closed-form
/// gradient and Hessian.
///
/// Families: constant | linear | product (s_1 * ... * s_N) | polynomial in a
/// single variable | tanh composition (bounded) | exponential of a negative
/// linear form.
class OuterFunction {
    struct Constant {
        double c;
    };
    struct Linear {
        std::vector<double> a;
        double b;
    };
    struct Product {};
    struct Poly {
        std::vector<double> coeffs;  // g(s) = sum c_k s^k, N = 1
    };
    struct Tanh {
        std::vector<double> a;
        double b;
        double scale;
    };
    struct ExpNeg {
        std::vector<double> a;
        double b;
        double scale;  // g(s) = scale * exp(-(<a,s> + b))
    };
    std::variant<Constant, Linear, Product, Poly, Tanh, ExpNeg> family_;

    explicit OuterFunction(std::variant<Constant, Linear, Product, Poly, Tanh, ExpNeg> f)
        : family_(std::move(f)) {}

public:
    static OuterFunction constant(double c) { return OuterFunction(Constant{c}); }
    static OuterFunction linear(std::vector<double> a, double b = 0.0) {
        return OuterFunction(Linear{std::move(a), b});
    }
    static OuterFunction product() { return OuterFunction(Product{}); }
    static OuterFunction polynomial(std::vector<double> coeffs) {
        return OuterFunction(Poly{std::move(coeffs)});
    }
    static OuterFunction tanh_of(std::vector<double> a, double b = 0.0, double scale = 1.0) {
        return OuterFunction(Tanh{std::move(a), b, scale});
    }
    static OuterFunction exp_neg(std::vector<double> a, double b = 0.0, double scale = 1.0) {
        return OuterFunction(ExpNeg{std::move(a), b, scale});
    }

    /// Required argument count; 0 means any arity is accepted.
    int arity() const {
        return std::visit(
            [](const auto& f) -> int {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Linear>) return static_cast<int>(f.a.size());
                if constexpr (std::is_same_v<T, Tanh>) return static_cast<int>(f.a.size());
                if constexpr (std::is_same_v<T, ExpNeg>) return static_cast<int>(f.a.size());
                if constexpr (std::is_same_v<T, Poly>) return 1;
                return 0;
            },
            family_);
    }

    bool bounded() const {
        return std::visit(
            [](const auto& f) -> bool {
                using T = std::decay_t<decltype(f)>;
                return std::is_same_v<T, Constant> || std::is_same_v<T, Tanh>;
            },
            family_);
    }

    double value(std::span<const double> s) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) {
                    return f.c;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    double v = f.b;
                    for (std::size_t i = 0; i < f.a.size(); ++i) v += f.a[i] * s[i];
                    return v;
                } else if constexpr (std::is_same_v<T, Product>) {
                    double v = 1.0;
                    for (double x : s) v *= x;
                    return v;
                } else if constexpr (std::is_same_v<T, Poly>) {
                    double v = 0.0;
                    for (std::size_t k = f.coeffs.size(); k-- > 0;) v = v * s[0] + f.coeffs[k];
                    return v;
                } else if constexpr (std::is_same_v<T, Tanh>) {
                    double t = f.b;
                    for (std::size_t i = 0; i < f.a.size(); ++i) t += f.a[i] * s[i];
                    return f.scale * std::tanh(t);
                } else {
                    double t = f.b;
                    for (std::size_t i = 0; i < f.a.size(); ++i) t += f.a[i] * s[i];
                    return f.scale * std::exp(-t);
                }
            },
            family_);
    }

    void gradient(std::span<const double> s, std::span<double> out) const {
        std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                const std::size_t n = s.size();
                if constexpr (std::is_same_v<T, Constant>) {
                    for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
                } else if constexpr (std::is_same_v<T, Linear>) {
                    for (std::size_t i = 0; i < n; ++i) out[i] = f.a[i];
                } else if constexpr (std::is_same_v<T, Product>) {
                    for (std::size_t i = 0; i < n; ++i) {
                        double v = 1.0;
                        for (std::size_t j = 0; j < n; ++j)
                            if (j != i) v *= s[j];
                        out[i] = v;
                    }
                } else if constexpr (std::is_same_v<T, Poly>) {
                    double v = 0.0;
                    for (std::size_t k = f.coeffs.size(); k-- > 1;)
                        v = v * s[0] + double(k) * f.coeffs[k];
                    out[0] = v;
                } else if constexpr (std::is_same_v<T, Tanh>) {
                    double t = f.b;
                    for (std::size_t i = 0; i < n; ++i) t += f.a[i] * s[i];
                    const double th = std::tanh(t);
                    const double sech2 = 1.0 - th * th;
                    for (std::size_t i = 0; i < n; ++i) out[i] = f.scale * sech2 * f.a[i];
                } else {
                    const double v = value(s);
                    for (std::size_t i = 0; i < n; ++i) out[i] = -f.a[i] * v;
                }
            },
            family_);
    }

    /// Row-major N x N Hessian.
    void hessian(std::span<const double> s, std::span<double> out) const {
        std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                const std::size_t n = s.size();
                for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
                if constexpr (std::is_same_v<T, Product>) {
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) {
                            if (i == j) continue;
                            double v = 1.0;
                            for (std::size_t k = 0; k < n; ++k)
                                if (k != i && k != j) v *= s[k];
                            out[i * n + j] = v;
                        }
                } else if constexpr (std::is_same_v<T, Poly>) {
                    double v = 0.0;
                    for (std::size_t k = f.coeffs.size(); k-- > 2;)
                        v = v * s[0] + double(k) * double(k - 1) * f.coeffs[k];
                    out[0] = v;
                } else if constexpr (std::is_same_v<T, Tanh>) {
                    double t = f.b;
                    for (std::size_t i = 0; i < n; ++i) t += f.a[i] * s[i];
                    const double th = std::tanh(t);
                    const double d2 = -2.0 * th * (1.0 - th * th);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            out[i * n + j] = f.scale * d2 * f.a[i] * f.a[j];
                } else if constexpr (std::is_same_v<T, ExpNeg>) {
                    const double v = value(s);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            out[i * n + j] = f.a[i] * f.a[j] * v;
                }
                // Constant and Linear keep the zero matrix.
            },
            family_);
    }

    std::string describe() const {
        return std::visit(
            [](const auto& f) -> std::string {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Constant>) return "constant";
                if constexpr (std::is_same_v<T, Linear>) return "linear";
                if constexpr (std::is_same_v<T, Product>) return "product";
                if constexpr (std::is_same_v<T, Poly>) return "polynomial";
                if constexpr (std::is_same_v<T, Tanh>) return "tanh";
                return "exp_neg";
            },
            family_);
    }
};

/// Smooth cylinder function F(gamma) = g(<gamma,phi_1>, ..., <gamma,phi_N>).
template <int D>
class CylinderFunction {
    OuterFunction outer_;
    std::vector<TestFunction<D>> inner_;

public:
    CylinderFunction(OuterFunction outer, std::vector<TestFunction<D>> inner)
        : outer_(std::move(outer)), inner_(std::move(inner)) {
        const int want = outer_.arity();
        if (want != 0 && want != static_cast<int>(inner_.size()))
            throw PreconditionError("CylinderFunction: outer arity does not match inner count");
        if (inner_.empty()) throw PreconditionError("CylinderFunction: needs at least one inner function");
    }

    int arity() const { return static_cast<int>(inner_.size()); }
    const OuterFunction& outer() const { return outer_; }
    const std::vector<TestFunction<D>>& inner() const { return inner_; }
    bool bounded() const { return outer_.bounded(); }

    /// Smallest box containing all inner supports.
    Window<D> inner_support() const {
        Window<D> box = inner_[0].support();
        for (std::size_t i = 1; i < inner_.size(); ++i)
            box = bounding_box(box, inner_[i].support());
        return box;
    }

    std::vector<double> arguments(const Configuration<D>& gamma) const {
        std::vector<double> s(inner_.size(), 0.0);
        for (const auto& x : gamma)
            for (std::size_t i = 0; i < inner_.size(); ++i) s[i] += inner_[i].value(x);
        return s;
    }

    double value_at(std::span<const double> args) const { return outer_.value(args); }

    double operator()(const Configuration<D>& gamma) const { return outer_.value(arguments(gamma)); }

    /// F(gamma + x) from precomputed arguments of gamma: the pairing against
    /// each inner function shifts by phi_i(x).
    double value_with_extra_point(std::span<const double> args, const Point<D>& x) const {
        std::vector<double> shifted(args.begin(), args.end());
        for (std::size_t i = 0; i < inner_.size(); ++i) shifted[i] += inner_[i].value(x);
        return outer_.value(shifted);
    }
};

/// Element of the tangent space at gamma: one vector attached to each point,
/// with the inner product summed over points.
template <int D>
struct TangentVector {
    std::vector<Point<D>> at;

    double norm_sq() const {
        double s = 0.0;
        for (const auto& v : at) s += confspace::norm_sq<D>(v);
        return s;
    }
};

template <int D>
inline double inner_product(const TangentVector<D>& a, const TangentVector<D>& b) {
    if (a.at.size() != b.at.size())
        throw PreconditionError("TangentVector inner product: mismatched base configurations");
    double s = 0.0;
    for (std::size_t i = 0; i < a.at.size(); ++i) s += dot<D>(a.at[i], b.at[i]);
    return s;
}

}  // namespace confspace
