#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/errors.hpp"
#include "confspace/functions.hpp"
#include "confspace/intensity.hpp"
#include "confspace/quadrature.hpp"

namespace confspace {

struct CharlierBudget {
    int max_order = 5;
};

namespace detail {

/// Charlier recursion on precomputed values phi(x_i) with mean s = <sigma,phi>:
///   Q_0 = 1,
///   Q_{n+1}(gamma) = sum_{x in gamma} phi(x) Q_n(gamma - x) - s Q_n(gamma).
/// Sub-configurations are keyed by the sorted set of removed indices, packed
/// into a 64-bit word (at most 5 removals of indices below 2^12).
class CharlierEvaluator {
    std::span<const double> values_;
    double mean_;
    std::map<std::pair<int, std::uint64_t>, double> memo_;

    static std::uint64_t pack(std::span<const std::uint16_t> removed) {
        std::uint64_t key = 0;
        for (auto idx : removed) key = (key << 12) | (idx + 1u);
        return key;
    }

    double eval(int n, std::vector<std::uint16_t>& removed) {
        if (n == 0) return 1.0;
        const auto key = std::make_pair(n, pack(removed));
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        double acc = -mean_ * eval(n - 1, removed);
        for (std::uint16_t i = 0; i < values_.size(); ++i) {
            bool gone = false;
            for (auto r : removed)
                if (r == i) {
                    gone = true;
                    break;
                }
            if (gone) continue;
            // keep `removed` sorted for canonical keys
            auto pos = std::lower_bound(removed.begin(), removed.end(), i);
            removed.insert(pos, i);
            acc += values_[i] * eval(n - 1, removed);
            removed.erase(std::lower_bound(removed.begin(), removed.end(), i));
        }
        memo_.emplace(key, acc);
        return acc;
    }

public:
    CharlierEvaluator(std::span<const double> values, double mean)
        : values_(values), mean_(mean) {
        if (values.size() >= (1u << 12))
            throw ResourceError("charlier: configuration too large for memo keys");
    }

    double operator()(int n) {
        std::vector<std::uint16_t> removed;
        return eval(n, removed);
    }
};

}  // namespace detail

/// Q_n on precomputed point values and mean; the memo cache is local to the
/// call, so concurrent calls are independent.
inline double charlier_from_values(int n, std::span<const double> values, double mean,
                                   const CharlierBudget& budget = {}) {
    if (n < 0) throw PreconditionError("charlier: order must be >= 0");
    if (n > budget.max_order)
        throw ResourceError("charlier: order " + std::to_string(n) + " exceeds budget " +
                            std::to_string(budget.max_order));
    detail::CharlierEvaluator ev(values, mean);
    return ev(n);
}

/// <sigma, phi> by quadrature over the support of phi (must lie inside w).
template <int D>
inline double sigma_pairing(const TestFunction<D>& phi, const IntensityModel<D>& model,
                            const Window<D>& w) {
    if (!w.contains_box(phi.support()))
        throw PreconditionError("sigma_pairing: support escapes the window");
    auto [value, err] = integrate_to_tol<D>(
        phi.support(), [&](const Point<D>& x) { return phi.value(x) * model.density(x); }, 1e-10);
    (void)err;
    return value;
}

/// Charlier observable Q_n(gamma; phi tensor n) of the Poisson measure with
/// the given intensity, built by iterating the creation recursion from
/// Q_0 = 1.
template <int D>
inline double charlier(int n, const TestFunction<D>& phi, const IntensityModel<D>& model,
                       const Window<D>& w, const Configuration<D>& gamma,
                       const CharlierBudget& budget = {}) {
    const double s = sigma_pairing(phi, model, w);
    std::vector<double> values;
    values.reserve(gamma.size());
    for (const auto& x : gamma) values.push_back(phi.value(x));
    return charlier_from_values(n, values, s, budget);
}

}  // namespace confspace
