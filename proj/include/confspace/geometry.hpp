#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "confspace/errors.hpp"

namespace confspace {

/// A point of the flat ambient space R^D.
template <int D>
using Point = std::array<double, D>;

template <int D>
inline double dot(const Point<D>& a, const Point<D>& b) {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += a[i] * b[i];
    return s;
}

template <int D>
inline double norm_sq(const Point<D>& a) {
    return dot<D>(a, a);
}

template <int D>
inline Point<D> sub(const Point<D>& a, const Point<D>& b) {
    Point<D> r{};
    for (int i = 0; i < D; ++i) r[i] = a[i] - b[i];
    return r;
}

template <int D>
inline Point<D> add(const Point<D>& a, const Point<D>& b) {
    Point<D> r{};
    for (int i = 0; i < D; ++i) r[i] = a[i] + b[i];
    return r;
}

template <int D>
inline Point<D> scaled(const Point<D>& a, double c) {
    Point<D> r{};
    for (int i = 0; i < D; ++i) r[i] = c * a[i];
    return r;
}

template <int D>
inline double distance_sq(const Point<D>& a, const Point<D>& b) {
    return norm_sq<D>(sub<D>(a, b));
}

/// Axis-aligned box with nondegenerate edges. Serves both as the simulation
/// window and as the support box of compactly supported functions.
/// Membership is half-open per axis, lower[i] <= x[i] < upper[i], so that a
/// partition into sub-boxes counts every point exactly once.
template <int D>
struct Window {
    Point<D> lower{};
    Point<D> upper{};

    Window() = default;
    Window(const Point<D>& lo, const Point<D>& hi) : lower(lo), upper(hi) {
        for (int i = 0; i < D; ++i) {
            if (!(lower[i] < upper[i]))
                throw PreconditionError("Window: lower[" + std::to_string(i) +
                                        "] must be < upper[" + std::to_string(i) + "]");
        }
    }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < D; ++i) v *= upper[i] - lower[i];
        return v;
    }

    bool contains(const Point<D>& x) const {
        for (int i = 0; i < D; ++i)
            if (x[i] < lower[i] || x[i] >= upper[i]) return false;
        return true;
    }

    /// Closed containment of another box.
    bool contains_box(const Window& b) const {
        for (int i = 0; i < D; ++i)
            if (b.lower[i] < lower[i] || b.upper[i] > upper[i]) return false;
        return true;
    }

    double edge(int i) const { return upper[i] - lower[i]; }

    std::string describe() const {
        std::ostringstream os;
        os << "[";
        for (int i = 0; i < D; ++i) os << (i ? "," : "") << lower[i];
        os << "] x [";
        for (int i = 0; i < D; ++i) os << (i ? "," : "") << upper[i];
        os << "]";
        return os.str();
    }
};

/// Intersection of two boxes; empty (nullopt) when interiors do not meet.
template <int D>
inline std::optional<Window<D>> intersect(const Window<D>& a, const Window<D>& b) {
    Point<D> lo{}, hi{};
    for (int i = 0; i < D; ++i) {
        lo[i] = std::max(a.lower[i], b.lower[i]);
        hi[i] = std::min(a.upper[i], b.upper[i]);
        if (!(lo[i] < hi[i])) return std::nullopt;
    }
    return Window<D>(lo, hi);
}

/// Smallest box containing both arguments.
template <int D>
inline Window<D> bounding_box(const Window<D>& a, const Window<D>& b) {
    Point<D> lo{}, hi{};
    for (int i = 0; i < D; ++i) {
        lo[i] = std::min(a.lower[i], b.lower[i]);
        hi[i] = std::max(a.upper[i], b.upper[i]);
    }
    return Window<D>(lo, hi);
}

}  // namespace confspace
