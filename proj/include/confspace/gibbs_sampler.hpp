#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/errors.hpp"
#include "confspace/poisson_sampler.hpp"
#include "confspace/potential.hpp"
#include "confspace/random.hpp"

namespace confspace {

struct GibbsChainParams {
    long burn_in = 10'000;   // moves discarded before the first sample
    long thinning = 10;      // moves between retained samples
    double p_birth = 0.35;
    double p_death = 0.35;
    double p_translate = 0.30;
    double step = 0.1;       // half-width of the translation proposal cube
    long stuck_limit = 1'000'000;

    void validate() const {
        if (burn_in < 0 || thinning < 1)
            throw PreconditionError("GibbsChainParams: burn_in >= 0, thinning >= 1");
        if (p_birth < 0 || p_death < 0 || p_translate < 0 ||
            std::abs(p_birth + p_death + p_translate - 1.0) > 1e-12)
            throw PreconditionError("GibbsChainParams: move probabilities must sum to 1");
        if (std::abs(p_birth - p_death) > 1e-12)
            throw PreconditionError("GibbsChainParams: birth and death probabilities must match");
        if (step <= 0.0) throw PreconditionError("GibbsChainParams: step must be > 0");
    }
};

struct ChainDiagnostics {
    long moves = 0;
    long births_proposed = 0, births_accepted = 0;
    long deaths_proposed = 0, deaths_accepted = 0;
    long translates_proposed = 0, translates_accepted = 0;
    double mean_population = 0.0;
    double n_autocorrelation_time = 1.0;  // in units of retained samples

    double birth_rate() const {
        return births_proposed ? double(births_accepted) / double(births_proposed) : 0.0;
    }
    double death_rate() const {
        return deaths_proposed ? double(deaths_accepted) / double(deaths_proposed) : 0.0;
    }
    double translate_rate() const {
        return translates_proposed ? double(translates_accepted) / double(translates_proposed)
                                   : 0.0;
    }
};

/// Birth-death-translate Metropolis-Hastings chain whose stationary law on
/// the window has density proportional to exp(-E_w(gamma)) against the
/// Poisson process of the intensity model.
///
/// Acceptance ratios (n = current population, m = sigma(w)):
///   birth of x ~ rho/m:      min(1, m/(n+1) * exp(-dE)),
///   death of a uniform point: min(1, n/m * exp(+dE_removed)),
///   translate x -> x':        min(1, rho(x')/rho(x) * exp(-dE)),
/// with acceptance 0 whenever the proposed state has infinite energy.
///
/// An optional frozen boundary configuration contributes interaction energy
/// but never moves, realizing the conditional kernel with that outside
/// configuration; by default the boundary is empty.
template <int D>
class GibbsChain {
    IntensityModel<D> model_;
    InteractionModel<D> inter_;
    Window<D> window_;
    GibbsChainParams params_;
    PoissonSampler<D> placer_;
    RandomStream stream_;
    std::vector<Point<D>> pts_;
    std::vector<Point<D>> boundary_;
    ChainDiagnostics diag_;
    std::vector<double> n_series_;
    long consecutive_rejects_ = 0;
    double log_mass_;

    EnergyValue energy_of_added(const Point<D>& x, std::size_t skip_index,
                                bool has_skip) const {
        EnergyValue e;
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            if (has_skip && i == skip_index) continue;
            e += inter_.pair_potential()(sub<D>(x, pts_[i]));
            if (e.infinite) return e;
        }
        for (const auto& y : boundary_) {
            e += inter_.pair_potential()(sub<D>(x, y));
            if (e.infinite) return e;
        }
        return e;
    }

    void note(bool accepted) {
        if (accepted)
            consecutive_rejects_ = 0;
        else if (++consecutive_rejects_ > params_.stuck_limit)
            throw ChainStuckError("GibbsChain: exceeded " + std::to_string(params_.stuck_limit) +
                                  " consecutive rejections");
    }

    void step_once() {
        ++diag_.moves;
        const double u = stream_.uniform();
        const std::size_t n = pts_.size();
        if (u < params_.p_birth) {
            ++diag_.births_proposed;
            const Point<D> x = placer_.sample_point(stream_);
            const EnergyValue de = energy_of_added(x, 0, false);
            bool acc = false;
            if (!de.infinite) {
                const double log_ratio =
                    log_mass_ - std::log(double(n + 1)) - de.value;
                acc = std::log(stream_.uniform()) < log_ratio;
            } else {
                stream_.uniform();  // keep the draw count move-shape independent
            }
            if (acc) {
                pts_.push_back(x);
                ++diag_.births_accepted;
            }
            note(acc);
        } else if (u < params_.p_birth + params_.p_death) {
            if (n == 0) {
                note(false);
                return;
            }
            ++diag_.deaths_proposed;
            const std::size_t idx = stream_.index(n);
            const EnergyValue de = energy_of_added(pts_[idx], idx, true);
            // Reached states have finite energy, so de is finite here.
            const double log_ratio = std::log(double(n)) - log_mass_ + de.value;
            const bool acc = std::log(stream_.uniform()) < log_ratio;
            if (acc) {
                pts_[idx] = pts_.back();
                pts_.pop_back();
                ++diag_.deaths_accepted;
            }
            note(acc);
        } else {
            if (n == 0) {
                note(false);
                return;
            }
            ++diag_.translates_proposed;
            const std::size_t idx = stream_.index(n);
            Point<D> xp = pts_[idx];
            for (int i = 0; i < D; ++i) xp[i] += params_.step * stream_.uniform(-1.0, 1.0);
            bool acc = false;
            if (window_.contains(xp)) {
                const double rho_new = model_.density(xp);
                const double rho_old = model_.density(pts_[idx]);
                const EnergyValue de_new = energy_of_added(xp, idx, true);
                if (rho_new > 0.0 && !de_new.infinite) {
                    const EnergyValue de_old = energy_of_added(pts_[idx], idx, true);
                    const double log_ratio =
                        std::log(rho_new) - std::log(rho_old) - (de_new.value - de_old.value);
                    acc = std::log(stream_.uniform()) < log_ratio;
                } else {
                    stream_.uniform();
                }
            } else {
                stream_.uniform();
            }
            if (acc) {
                pts_[idx] = xp;
                ++diag_.translates_accepted;
            }
            note(acc);
        }
    }

public:
    GibbsChain(IntensityModel<D> model, InteractionModel<D> inter, const Window<D>& w,
               const GibbsChainParams& params, RandomStream stream,
               std::optional<Configuration<D>> boundary = std::nullopt)
        : model_(std::move(model)), inter_(std::move(inter)), window_(w), params_(params),
          placer_(model_, w), stream_(std::move(stream)) {
        params_.validate();
        if (!(placer_.mass() > 0.0))
            throw PreconditionError("GibbsChain: window has zero intensity mass");
        log_mass_ = std::log(placer_.mass());
        if (boundary) {
            for (const auto& y : *boundary)
                if (!window_.contains(y)) boundary_.push_back(y);
                else throw PreconditionError("GibbsChain: boundary points must lie outside the window");
        }
        for (long i = 0; i < params_.burn_in; ++i) step_once();
    }

    /// Advance one thinning interval and return the state.
    Configuration<D> next() {
        for (long i = 0; i < params_.thinning; ++i) step_once();
        n_series_.push_back(static_cast<double>(pts_.size()));
        auto pts = pts_;
        std::sort(pts.begin(), pts.end());
        Configuration<D> out(std::move(pts));
        return out;
    }

    ChainDiagnostics diagnostics() const {
        ChainDiagnostics d = diag_;
        const std::size_t m = n_series_.size();
        if (m > 0) {
            double mean = 0.0;
            for (double v : n_series_) mean += v;
            mean /= double(m);
            d.mean_population = mean;
            double var = 0.0;
            for (double v : n_series_) var += (v - mean) * (v - mean);
            var /= double(m);
            if (var > 0.0 && m > 10) {
                // initial positive sequence estimate of the integrated
                // autocorrelation time of N
                double tau = 1.0;
                for (std::size_t lag = 1; lag < m / 2; ++lag) {
                    double c = 0.0;
                    for (std::size_t i = 0; i + lag < m; ++i)
                        c += (n_series_[i] - mean) * (n_series_[i + lag] - mean);
                    c /= double(m - lag) * var;
                    if (c <= 0.0) break;
                    tau += 2.0 * c;
                    if (lag > 5 * static_cast<std::size_t>(tau) + 5) break;
                }
                d.n_autocorrelation_time = tau;
            }
        }
        return d;
    }
};

/// One draw from the finite-volume Gibbs kernel with the given parameters.
template <int D>
inline std::pair<Configuration<D>, ChainDiagnostics> sample_gibbs(
    const IntensityModel<D>& model, const InteractionModel<D>& inter, const Window<D>& w,
    const GibbsChainParams& params, RandomStream stream,
    std::optional<Configuration<D>> boundary = std::nullopt) {
    GibbsChain<D> chain(model, inter, w, params, std::move(stream), std::move(boundary));
    auto cfg = chain.next();
    return {std::move(cfg), chain.diagnostics()};
}

}  // namespace confspace
