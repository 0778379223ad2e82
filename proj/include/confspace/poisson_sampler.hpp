#pragma once

#include <algorithm>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/errors.hpp"
#include "confspace/intensity.hpp"
#include "confspace/potential.hpp"
#include "confspace/random.hpp"

namespace confspace {

/// Exact sampler of the Poisson point process with intensity rho*m on a
/// window: N ~ Poisson(sigma(w)), then N independent points with density
/// rho/sigma(w) placed by rejection against the family's sup bound.
template <int D>
class PoissonSampler {
    IntensityModel<D> model_;
    Window<D> window_;
    double mass_;
    double sup_;

public:
    PoissonSampler(IntensityModel<D> model, const Window<D>& w)
        : model_(std::move(model)), window_(w), mass_(intensity_mass(model_, w)),
          sup_(model_.sup_density(w)) {
        if (mass_ > 0.0 && !(sup_ > 0.0))
            throw PreconditionError("PoissonSampler: no usable sup bound for rejection");
    }

    double mass() const { return mass_; }
    const Window<D>& window() const { return window_; }
    const IntensityModel<D>& model() const { return model_; }

    Point<D> sample_point(RandomStream& stream) const {
        for (long guard = 0; guard < 100'000'000L; ++guard) {
            Point<D> x{};
            for (int i = 0; i < D; ++i) x[i] = stream.uniform(window_.lower[i], window_.upper[i]);
            if (stream.uniform() * sup_ <= model_.density(x)) return x;
        }
        throw QuadratureError("PoissonSampler: rejection loop failed to accept");
    }

    Configuration<D> sample(RandomStream& stream) const {
        const long n = stream.poisson(mass_);
        std::vector<Point<D>> pts;
        pts.reserve(static_cast<std::size_t>(n));
        for (long k = 0; k < n; ++k) pts.push_back(sample_point(stream));
        std::sort(pts.begin(), pts.end());
        // Exactly coincident doubles have probability zero; redraw if hit.
        while (std::adjacent_find(pts.begin(), pts.end()) != pts.end()) {
            auto it = std::adjacent_find(pts.begin(), pts.end());
            *it = sample_point(stream);
            std::sort(pts.begin(), pts.end());
        }
        Configuration<D> out(std::move(pts));
        return out;
    }
};

template <int D>
inline Configuration<D> sample_poisson(const IntensityModel<D>& model, const Window<D>& w,
                                       RandomStream& stream) {
    return PoissonSampler<D>(model, w).sample(stream);
}

template <int D>
StabilityReport stability_spotcheck(const InteractionModel<D>& inter, double bound,
                                    const Window<D>& w, const IntensityModel<D>& model,
                                    long trials, RandomStream& stream) {
    if (bound < 0.0) throw PreconditionError("stability_spotcheck: B must be >= 0");
    PoissonSampler<D> sampler(model, w);
    StabilityReport rep;
    rep.trials = trials;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (long t = 0; t < trials; ++t) {
        const auto gamma = sampler.sample(stream);
        const auto e = inter.conditional_energy(gamma, w);
        if (e.infinite) continue;  // +inf never violates a lower bound
        const double margin = e.value + bound * static_cast<double>(gamma.size());
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (margin < 0.0) ++rep.violations;
    }
    rep.pass = rep.violations == 0;
    return rep;
}

}  // namespace confspace
