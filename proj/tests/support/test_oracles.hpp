#pragma once

// Independent oracles used only by the test suite. Each one recomputes a
// quantity along a different route than the library (finite differences,
// brute-force enumeration, midpoint refinement, closed forms), so agreement
// is evidence rather than tautology.

#include <cmath>
#include <functional>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/cylinder.hpp"
#include "confspace/functions.hpp"
#include "confspace/geometry.hpp"
#include "confspace/random.hpp"

namespace testsupport {

using namespace confspace;

// ---- finite differences -------------------------------------------------

template <int D>
Point<D> fd_gradient(const std::function<double(const Point<D>&)>& f, const Point<D>& x,
                     double h) {
    Point<D> g{};
    for (int i = 0; i < D; ++i) {
        Point<D> a = x, b = x;
        a[i] += h;
        b[i] -= h;
        g[i] = (f(a) - f(b)) / (2.0 * h);
    }
    return g;
}

template <int D>
double fd_laplacian(const std::function<double(const Point<D>&)>& f, const Point<D>& x, double h) {
    double s = 0.0;
    const double c = f(x);
    for (int i = 0; i < D; ++i) {
        Point<D> a = x, b = x;
        a[i] += h;
        b[i] -= h;
        s += (f(a) - 2.0 * c + f(b)) / (h * h);
    }
    return s;
}

inline double fd_partial(const std::function<double(const std::vector<double>&)>& g,
                         std::vector<double> s, std::size_t i, double h) {
    s[i] += h;
    const double up = g(s);
    s[i] -= 2.0 * h;
    const double dn = g(s);
    return (up - dn) / (2.0 * h);
}

inline double rel_err(double got, double want, double floor_ = 1e-8) {
    return std::abs(got - want) / std::max({std::abs(got), std::abs(want), floor_});
}

// ---- quadrature refinement ----------------------------------------------

/// Composite midpoint rule, refined until two successive doublings agree.
/// Dead simple and entirely independent of the Gauss-Legendre machinery.
inline double midpoint_refine(const std::function<double(double)>& f, double a, double b,
                              double tol = 1e-11) {
    double prev = 0.0;
    for (long m = 64; m <= (1L << 22); m *= 2) {
        const double h = (b - a) / double(m);
        double s = 0.0;
        for (long i = 0; i < m; ++i) s += f(a + (i + 0.5) * h);
        s *= h;
        if (m > 64 && std::abs(s - prev) < tol * std::max(1.0, std::abs(s))) return s;
        prev = s;
    }
    return prev;
}

// ---- flow derivative -----------------------------------------------------

/// (F(psi_t(gamma)) - F(gamma)) / t with the flow of v approximated by Euler
/// substeps of dx/dt = v(x).
template <int D>
double flow_derivative(const CylinderFunction<D>& F, const VectorField<D>& v,
                       const Configuration<D>& gamma, double t, int substeps = 8) {
    std::vector<Point<D>> moved(gamma.begin(), gamma.end());
    const double dt = t / substeps;
    for (auto& x : moved)
        for (int s = 0; s < substeps; ++s) {
            const auto vel = v.value(x);
            for (int i = 0; i < D; ++i) x[i] += dt * vel[i];
        }
    std::sort(moved.begin(), moved.end());
    const Configuration<D> flowed(std::move(moved));
    return (F(flowed) - F(gamma)) / t;
}

// ---- Charlier by enumeration ----------------------------------------------

/// Sum over ordered k-tuples of distinct points of prod phi(x_i), by direct
/// recursion over index tuples.
inline double ordered_tuple_sum(const std::vector<double>& vals, int k,
                                std::vector<int>& used, double acc) {
    if (k == 0) return acc;
    double total = 0.0;
    for (int i = 0; i < static_cast<int>(vals.size()); ++i) {
        bool taken = false;
        for (int u : used)
            if (u == i) taken = true;
        if (taken) continue;
        used.push_back(i);
        total += ordered_tuple_sum(vals, k - 1, used, acc * vals[static_cast<std::size_t>(i)]);
        used.pop_back();
    }
    return total;
}

/// Combinatorial closed form Q_n = sum_k C(n,k) (-s)^{n-k} P_k with P_k the
/// ordered-tuple sums above.
inline double charlier_combinatorial(int n, const std::vector<double>& vals, double s) {
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        double binom = 1.0;
        for (int j = 0; j < k; ++j) binom = binom * double(n - j) / double(j + 1);
        std::vector<int> used;
        const double pk = ordered_tuple_sum(vals, k, used, 1.0);
        total += binom * std::pow(-s, n - k) * pk;
    }
    return total;
}

// ---- hard rods on an interval ---------------------------------------------

/// Closed-form truncated grand-canonical series for hard rods of diameter r0
/// on [0, L] with constant activity z: the k-point configuration integral is
/// (L - (k-1) r0)_+^k / k!.
struct HardRods {
    double z, L, r0;
    int n_max;

    double partition() const {
        double sum = 1.0, zk = 1.0, fact = 1.0;
        for (int k = 1; k <= n_max; ++k) {
            zk *= z;
            fact *= k;
            const double span = L - (k - 1) * r0;
            if (span <= 0.0) break;
            sum += zk * std::pow(span, k) / fact;
        }
        return sum;
    }

    double mean_count() const {
        double num = 0.0, zk = 1.0, fact = 1.0;
        for (int k = 1; k <= n_max; ++k) {
            zk *= z;
            fact *= k;
            const double span = L - (k - 1) * r0;
            if (span <= 0.0) break;
            num += k * zk * std::pow(span, k) / fact;
        }
        return num / partition();
    }
};

// ---- chi-square goodness of fit -------------------------------------------

inline double gamma_q(double a, double x);  // regularized upper incomplete gamma

inline double gamma_series_p(double a, double x) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-14) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_cf_q(double a, double x) {
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
    return gamma_cf_q(a, x);
}

/// p-value of a chi-square statistic with df degrees of freedom.
inline double chi_square_pvalue(double stat, int df) { return gamma_q(df / 2.0, stat / 2.0); }

/// Chi-square test of integer observations against expected probabilities;
/// bins with expected count below 5 are pooled into the tail.
inline double chi_square_counts_pvalue(const std::vector<long>& observed,
                                       const std::vector<double>& probs, long total) {
    std::vector<double> expected;
    std::vector<double> obs;
    double tail_e = 0.0, tail_o = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = probs[i] * double(total);
        if (e >= 5.0 && tail_e == 0.0) {
            expected.push_back(e);
            obs.push_back(double(observed[i]));
        } else {
            tail_e += e;
            tail_o += double(observed[i]);
        }
    }
    if (tail_e > 0.0) {
        expected.push_back(tail_e);
        obs.push_back(tail_o);
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] <= 0.0) continue;
        const double d = obs[i] - expected[i];
        stat += d * d / expected[i];
    }
    return chi_square_pvalue(stat, static_cast<int>(expected.size()) - 1);
}

// ---- misc -----------------------------------------------------------------

template <int D>
Point<D> random_point_in(const Window<D>& w, RandomStream& stream) {
    Point<D> x{};
    for (int i = 0; i < D; ++i) x[i] = stream.uniform(w.lower[i], w.upper[i]);
    return x;
}

}  // namespace testsupport
