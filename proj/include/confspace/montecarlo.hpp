#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>
#include <vector>

#include "confspace/configuration.hpp"
#include "confspace/errors.hpp"
#include "confspace/gibbs_sampler.hpp"
#include "confspace/poisson_sampler.hpp"
#include "confspace/random.hpp"

namespace confspace {

struct MonteCarloEstimate {
    double mean = 0.0;
    double se = 0.0;  // sample standard deviation / sqrt(n)
    long n = 0;
    std::vector<double> replicate_means;
};

template <int D>
struct PoissonLaw {
    IntensityModel<D> model;
    Window<D> window;
};

template <int D>
struct GibbsLaw {
    IntensityModel<D> model;
    InteractionModel<D> interaction;
    Window<D> window;
    GibbsChainParams params;
    std::optional<Configuration<D>> boundary;
};

template <int D>
using LawSpec = std::variant<PoissonLaw<D>, GibbsLaw<D>>;

namespace detail {

/// Run fn(replicate_index) for indices [0, count) on up to `workers` threads;
/// results land in a vector indexed by replicate, so every reduction over
/// them is worker-count independent.
template <class T, class Fn>
std::vector<T> run_replicates(int count, int workers, Fn&& fn) {
    std::vector<T> results(static_cast<std::size_t>(count));
    if (workers <= 1 || count <= 1) {
        for (int r = 0; r < count; ++r) results[static_cast<std::size_t>(r)] = fn(r);
        return results;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= count) return;
            try {
                results[static_cast<std::size_t>(r)] = fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, count);
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }

    /// Exact pooled combination (Chan et al.); applied in replicate order.
    void merge(const Welford& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const long total = n + o.n;
        mean += d * double(o.n) / double(total);
        m2 += o.m2 + d * d * double(n) * double(o.n) / double(total);
        n = total;
    }

    double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
    double se() const { return n > 1 ? std::sqrt(variance() / double(n)) : 0.0; }
};

/// Per-replicate sample generator for a law. Zero-potential Gibbs laws
/// dispatch to the exact Poisson sampler: the kernel with a free potential
/// *is* the Poisson measure, and the shortcut keeps free-case runs
/// bit-identical to their Poisson counterparts on the same stream.
template <int D>
class SampleSource {
    std::optional<PoissonSampler<D>> poisson_;
    std::optional<GibbsChain<D>> chain_;
    RandomStream stream_;

public:
    SampleSource(const LawSpec<D>& law, std::uint64_t seed, int replicate)
        : stream_(seed, static_cast<std::uint64_t>(replicate), "samples") {
        if (const auto* p = std::get_if<PoissonLaw<D>>(&law)) {
            poisson_.emplace(p->model, p->window);
        } else {
            const auto& g = std::get<GibbsLaw<D>>(law);
            if (g.interaction.is_free() && !g.boundary)
                poisson_.emplace(g.model, g.window);
            else
                chain_.emplace(g.model, g.interaction, g.window, g.params, stream_, g.boundary);
        }
    }

    Configuration<D> next() {
        if (poisson_) return poisson_->sample(stream_);
        return chain_->next();
    }
};

inline long replicate_slice(long n, int replicates, int r) {
    return n / replicates + (r < n % replicates ? 1 : 0);
}

}  // namespace detail

/// Replicate-averaged Monte Carlo expectation of a functional under the law.
/// Deterministic for fixed (seed, replicates), whatever the worker count.
template <int D, class Fn>
MonteCarloEstimate mc_expectation(Fn&& functional, const LawSpec<D>& law, long n_samples,
                                  std::uint64_t seed, int replicates = 8, int workers = 1) {
    if (n_samples < 100) throw PreconditionError("mc_expectation: need at least 100 samples");
    if (replicates < 2) throw PreconditionError("mc_expectation: need at least 2 replicates");
    struct Part {
        detail::Welford acc;
    };
    auto parts = detail::run_replicates<Part>(replicates, workers, [&](int r) {
        detail::SampleSource<D> src(law, seed, r);
        const long mine = detail::replicate_slice(n_samples, replicates, r);
        Part part;
        for (long i = 0; i < mine; ++i) part.acc.add(functional(src.next()));
        return part;
    });
    MonteCarloEstimate est;
    detail::Welford pooled;
    for (const auto& p : parts) {
        est.replicate_means.push_back(p.acc.mean);
        pooled.merge(p.acc);
    }
    est.mean = pooled.mean;
    est.se = pooled.se();
    est.n = pooled.n;
    return est;
}

/// Paired two-sided estimate: both functionals are evaluated on the same
/// configuration stream, and the verdict statistic is the paired difference.
struct PairedEstimate {
    MonteCarloEstimate lhs, rhs, diff;
};

template <int D, class Fn>
PairedEstimate paired_expectation(Fn&& both_sides, const LawSpec<D>& law, long n_samples,
                                  std::uint64_t seed, int replicates = 8, int workers = 1) {
    if (n_samples < 100) throw PreconditionError("paired_expectation: need at least 100 samples");
    if (replicates < 2) throw PreconditionError("paired_expectation: need at least 2 replicates");
    struct Part {
        detail::Welford lhs, rhs, diff;
    };
    auto parts = detail::run_replicates<Part>(replicates, workers, [&](int r) {
        detail::SampleSource<D> src(law, seed, r);
        const long mine = detail::replicate_slice(n_samples, replicates, r);
        Part part;
        for (long i = 0; i < mine; ++i) {
            const auto gamma = src.next();
            const auto [l, rh] = both_sides(gamma);
            part.lhs.add(l);
            part.rhs.add(rh);
            part.diff.add(l - rh);
        }
        return part;
    });
    PairedEstimate out;
    detail::Welford pl, pr, pd;
    for (const auto& p : parts) {
        out.lhs.replicate_means.push_back(p.lhs.mean);
        out.rhs.replicate_means.push_back(p.rhs.mean);
        out.diff.replicate_means.push_back(p.diff.mean);
        pl.merge(p.lhs);
        pr.merge(p.rhs);
        pd.merge(p.diff);
    }
    out.lhs.mean = pl.mean;
    out.lhs.se = pl.se();
    out.lhs.n = pl.n;
    out.rhs.mean = pr.mean;
    out.rhs.se = pr.se();
    out.rhs.n = pr.n;
    out.diff.mean = pd.mean;
    out.diff.se = pd.se();
    out.diff.n = pd.n;
    return out;
}

}  // namespace confspace
