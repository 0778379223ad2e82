#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/errors.hpp"
#include "confspace/gibbs_sampler.hpp"
#include "confspace/intensity.hpp"
#include "confspace/potential.hpp"

namespace confspace {

/// Result of a grid-based closability heuristic. The diagnostics estimate
/// where 1/density is locally integrable; they are explicitly heuristic, so
/// "inconclusive" is a legitimate verdict.
struct ClosabilityReport {
    // ordered by severity so the worst verdict of an aggregation compares last
    enum class Verdict { holds, inconclusive, fails };

    std::string target;
    Verdict verdict = Verdict::inconclusive;
    long tested_cells = 0;
    long violating_cells = 0;
    double violation_measure = 0.0;  // total length/area of violating cells
    double cell_width = 0.0;
    std::string detail;

    static const char* name(Verdict v) {
        switch (v) {
            case Verdict::holds: return "holds";
            case Verdict::fails: return "fails";
            default: return "inconclusive";
        }
    }
};

/// Grid rule for a one-dimensional density slice: a cell center t is counted
/// in the regular set when, for one of the shrinking radii {e0, e0/2, e0/4}
/// (e0 = one cell width), the neighborhood stays inside the interval and the
/// integral of 1/max(rho, floor) over it stays below `threshold`. A cell
/// with rho(center) > floor outside the regular set is a violation. Verdict:
/// holds with zero violations, fails when violations exceed two cells, and
/// inconclusive in between.
inline ClosabilityReport closability_diagnostic(const std::function<double(double)>& density,
                                                double lo, double hi, int grid_n, double floor_,
                                                double threshold) {
    if (grid_n < 100) throw PreconditionError("closability_diagnostic: grid must have >= 100 cells");
    if (!(lo < hi)) throw PreconditionError("closability_diagnostic: empty interval");
    ClosabilityReport rep;
    rep.target = "density slice";
    rep.tested_cells = grid_n;
    const double cell = (hi - lo) / grid_n;
    rep.cell_width = cell;

    const auto local_integral = [&](double a, double b) {
        // composite midpoint; the clamped integrand is bounded by 1/floor
        const int m = 256;
        const double h = (b - a) / m;
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            const double x = a + (i + 0.5) * h;
            s += 1.0 / std::max(density(x), floor_);
        }
        return s * h;
    };

    for (int i = 0; i < grid_n; ++i) {
        const double t = lo + (i + 0.5) * cell;
        if (!(density(t) > floor_)) continue;
        bool regular = false;
        for (double eps = cell; eps >= cell / 4.0 - 1e-300; eps /= 2.0) {
            if (t - eps < lo || t + eps > hi) continue;  // neighborhood leaves the domain
            if (local_integral(t - eps, t + eps) < threshold) {
                regular = true;
                break;
            }
        }
        if (!regular) {
            ++rep.violating_cells;
            rep.violation_measure += cell;
        }
    }
    if (rep.violating_cells == 0)
        rep.verdict = ClosabilityReport::Verdict::holds;
    else if (rep.violation_measure > 2.0 * cell)
        rep.verdict = ClosabilityReport::Verdict::fails;
    else
        rep.verdict = ClosabilityReport::Verdict::inconclusive;
    std::ostringstream os;
    os << rep.violating_cells << "/" << rep.tested_cells << " cells violate";
    rep.detail = os.str();
    return rep;
}

/// Indicator of the depth-limited Smith-Volterra-Cantor ("fat Cantor") set on
/// [0,1]: step k removes a centered open gap of length 4^{-k} from each of
/// the 2^{k-1} surviving intervals. The full set has measure 1/2 and empty
/// interior, so its indicator is the canonical density whose reciprocal is
/// nowhere locally integrable on a positive-measure set.
inline std::function<double(double)> fat_cantor_indicator(int depth) {
    return [depth](double x) -> double {
        if (x < 0.0 || x > 1.0) return 0.0;
        double a = 0.0, len = 1.0;
        for (int k = 1; k <= depth; ++k) {
            const double gap = std::pow(0.25, k);
            const double child = (len - gap) / 2.0;
            const double gap_lo = a + child;
            const double gap_hi = gap_lo + gap;
            if (x > gap_lo && x < gap_hi) return 0.0;
            if (x >= gap_hi) a = gap_hi;
            len = child;
        }
        return 1.0;
    };
}

/// Grid check of the perturbed-density construction for a pair potential:
/// around grid points x of finite added-point energy, the exponential of the
/// interaction must be locally integrable (the infinite-energy region
/// carries zero perturbed density and is excluded from the integrand).
/// Aggregated over Gibbs samples of the configured law; worst verdict wins.
template <int D>
ClosabilityReport pair_potential_closability_check(const InteractionModel<D>& inter,
                                                   const IntensityModel<D>& model,
                                                   const Window<D>& w, int n_samples,
                                                   const GibbsChainParams& params,
                                                   std::uint64_t seed, int grid_n,
                                                   double threshold) {
    if (grid_n < 8) throw PreconditionError("pair_potential_closability_check: grid too small");
    ClosabilityReport rep;
    rep.target = "pair potential " + inter.pair_potential().describe();
    const double cell = w.edge(0) / grid_n;
    rep.cell_width = cell;

    RandomStream stream(seed, 0, "closability");
    GibbsChain<D> chain(model, inter, w, params, stream);

    // e^{sum phi(z-y)} restricted to the finite-energy region.
    const auto weight = [&](const Point<D>& z, std::span<const Point<D>> pts) -> double {
        EnergyValue e = inter.interaction(pts, z);
        return e.infinite ? 0.0 : std::exp(e.value);
    };

    long worst_violations = 0;
    ClosabilityReport::Verdict verdict = ClosabilityReport::Verdict::holds;
    const QuadratureRule<D> quad{8, 2};
    for (int s = 0; s < n_samples; ++s) {
        const auto gamma = chain.next();
        const auto pts = gamma.points();
        long violations = 0;
        long tested = 0;
        // axis-aligned grid of centers over the window
        std::array<int, D> idx{};
        while (true) {
            Point<D> x{};
            for (int d = 0; d < D; ++d) x[d] = w.lower[d] + (idx[d] + 0.5) * (w.edge(d) / grid_n);
            const EnergyValue ex = inter.interaction(pts, x);
            if (!ex.infinite) {
                ++tested;
                bool regular = false;
                for (double eps = cell; eps >= cell / 4.0 - 1e-300; eps /= 2.0) {
                    bool fits = true;
                    Point<D> blo{}, bhi{};
                    for (int d = 0; d < D; ++d) {
                        blo[d] = x[d] - eps;
                        bhi[d] = x[d] + eps;
                        if (blo[d] < w.lower[d] || bhi[d] > w.upper[d]) fits = false;
                    }
                    if (!fits) continue;
                    const Window<D> ball(blo, bhi);
                    const double integral =
                        quad.integrate(ball, [&](const Point<D>& z) { return weight(z, pts); });
                    if (integral < threshold) {
                        regular = true;
                        break;
                    }
                }
                if (!regular) ++violations;
            }
            int d = 0;
            for (; d < D; ++d) {
                if (++idx[d] < grid_n) break;
                idx[d] = 0;
            }
            if (d == D) break;
        }
        rep.tested_cells += tested;
        worst_violations = std::max(worst_violations, violations);
        rep.violating_cells += violations;
        ClosabilityReport::Verdict v;
        if (violations == 0)
            v = ClosabilityReport::Verdict::holds;
        else if (violations > 2)
            v = ClosabilityReport::Verdict::fails;
        else
            v = ClosabilityReport::Verdict::inconclusive;
        if (static_cast<int>(v) > static_cast<int>(verdict)) verdict = v;
    }
    rep.verdict = verdict;
    rep.violation_measure = worst_violations * cell;
    std::ostringstream os;
    os << n_samples << " sampled configurations, worst case " << worst_violations
       << " violating cells";
    rep.detail = os.str();
    return rep;
}

}  // namespace confspace
