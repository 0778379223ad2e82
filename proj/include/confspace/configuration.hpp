#pragma once

#include <algorithm>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "confspace/errors.hpp"
#include "confspace/functions.hpp"
#include "confspace/geometry.hpp"

namespace confspace {

/// A finite configuration: distinct points kept in lexicographic order, so
/// equality, hashing and reports are deterministic. Immutable; point
/// insertion/removal returns a new value.
template <int D>
class Configuration {
    std::vector<Point<D>> pts_;

public:
    using point_type = Point<D>;

    Configuration() = default;

    explicit Configuration(std::vector<Point<D>> pts) : pts_(std::move(pts)) {
        std::sort(pts_.begin(), pts_.end());
        if (std::adjacent_find(pts_.begin(), pts_.end()) != pts_.end())
            throw PreconditionError("Configuration: points must be pairwise distinct");
    }

    Configuration(std::initializer_list<Point<D>> pts)
        : Configuration(std::vector<Point<D>>(pts)) {}

    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const Point<D>& operator[](std::size_t i) const { return pts_[i]; }
    auto begin() const { return pts_.begin(); }
    auto end() const { return pts_.end(); }
    std::span<const Point<D>> points() const { return pts_; }

    bool contains(const Point<D>& x) const {
        return std::binary_search(pts_.begin(), pts_.end(), x);
    }

    bool operator==(const Configuration& o) const { return pts_ == o.pts_; }

    Configuration with_point(const Point<D>& x) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), x);
        if (it != pts_.end() && *it == x)
            throw PreconditionError("add_point: point already present");
        std::vector<Point<D>> out;
        out.reserve(pts_.size() + 1);
        out.insert(out.end(), pts_.begin(), it);
        out.push_back(x);
        out.insert(out.end(), it, pts_.end());
        Configuration c;
        c.pts_ = std::move(out);
        return c;
    }

    Configuration without_point(const Point<D>& x) const {
        auto it = std::lower_bound(pts_.begin(), pts_.end(), x);
        if (it == pts_.end() || !(*it == x))
            throw PreconditionError("remove_point: point not present");
        std::vector<Point<D>> out;
        out.reserve(pts_.size() - 1);
        out.insert(out.end(), pts_.begin(), it);
        out.insert(out.end(), it + 1, pts_.end());
        Configuration c;
        c.pts_ = std::move(out);
        return c;
    }
};

template <int D>
inline Configuration<D> add_point(const Configuration<D>& gamma,
                                  const typename Configuration<D>::point_type& x) {
    return gamma.with_point(x);
}

template <int D>
inline Configuration<D> remove_point(const Configuration<D>& gamma,
                                     const typename Configuration<D>::point_type& x) {
    return gamma.without_point(x);
}

/// <f, gamma> = sum of f over the points of gamma; 0 on the empty configuration.
template <int D>
inline double pairing(const Configuration<D>& gamma, const TestFunction<D>& f) {
    double s = 0.0;
    for (const auto& x : gamma) s += f.value(x);
    return s;
}

/// Number of points of gamma in the (half-open) box b.
template <int D>
inline long count_in(const Configuration<D>& gamma, const Window<D>& b) {
    long n = 0;
    for (const auto& x : gamma)
        if (b.contains(x)) ++n;
    return n;
}

/// CSV serialization: one row "x1,...,xd" per point, in canonical order.
template <int D>
inline std::string to_csv(const Configuration<D>& gamma) {
    std::string out;
    char buf[64];
    for (const auto& x : gamma) {
        for (int i = 0; i < D; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            out += buf;
            out += (i + 1 < D) ? ',' : '\n';
        }
    }
    return out;
}

template <int D>
inline Configuration<D> configuration_from_csv(const std::string& text) {
    std::vector<Point<D>> pts;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        Point<D> x{};
        std::size_t p = 0;
        for (int i = 0; i < D; ++i) {
            std::size_t comma = line.find(',', p);
            std::string cell = line.substr(p, comma == std::string::npos ? std::string::npos
                                                                         : comma - p);
            try {
                x[i] = std::stod(cell);
            } catch (const std::exception&) {
                throw PreconditionError("configuration_from_csv: bad number '" + cell + "'");
            }
            if (i + 1 < D) {
                if (comma == std::string::npos)
                    throw PreconditionError("configuration_from_csv: too few columns");
                p = comma + 1;
            }
        }
        pts.push_back(x);
    }
    return Configuration<D>(std::move(pts));
}

}  // namespace confspace
