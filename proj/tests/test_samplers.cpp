#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "confspace/gibbs_sampler.hpp"
#include "confspace/oracle.hpp"
#include "confspace/poisson_sampler.hpp"
#include "support/test_oracles.hpp"

using namespace confspace;

TEST_CASE("zero intensity always samples the empty configuration") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(0.0);
    RandomStream stream(1);
    for (int i = 0; i < 100; ++i) CHECK(sample_poisson(model, w, stream).empty());
}

TEST_CASE("poisson sampler has the right mean count") {
    Window<1> w({0.0}, {1.0});
    PoissonSampler<1> sampler(IntensityModel<1>::constant(1.5), w);
    RandomStream stream(12);
    const long n = 20'000;
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
        const double k = double(sampler.sample(stream).size());
        sum += k;
        sum2 += k * k;
    }
    const double mean = sum / double(n);
    const double var = sum2 / double(n) - mean * mean;
    const double se = std::sqrt(var / double(n));
    CHECK(std::abs(mean - 1.5) <= 3.0 * se);
}

TEST_CASE("poisson void probability matches the Laplace transform value") {
    Window<1> w({0.0}, {1.0});
    Window<1> b({0.0}, {0.4});
    PoissonSampler<1> sampler(IntensityModel<1>::constant(1.5), w);
    RandomStream stream(13);
    const long n = 20'000;
    long voids = 0;
    for (long i = 0; i < n; ++i)
        if (count_in(sampler.sample(stream), b) == 0) ++voids;
    const double p = double(voids) / double(n);
    const double want = std::exp(-0.6);
    const double se = std::sqrt(want * (1.0 - want) / double(n));
    CHECK(std::abs(p - want) <= 3.0 * se);
}

TEST_CASE("nonuniform placement follows the density profile") {
    // rho proportional to x on [0,1]: P(point in [0, 0.5] | N = 1) = 1/4
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::polynomial(w, {{{0.0, 1.0}}});
    PoissonSampler<1> sampler(model, w);
    RandomStream stream(14);
    long left = 0, total = 0;
    for (int i = 0; i < 40'000; ++i) {
        const auto gamma = sampler.sample(stream);
        for (const auto& x : gamma) {
            ++total;
            if (x[0] < 0.5) ++left;
        }
    }
    const double frac = double(left) / double(total);
    const double se = std::sqrt(0.25 * 0.75 / double(total));
    CHECK(std::abs(frac - 0.25) <= 4.0 * se);
}

TEST_CASE("sampling is reproducible per stream address") {
    Window<2> w({0.0, 0.0}, {1.0, 1.0});
    auto model = IntensityModel<2>::gaussian(2.0, {0.5, 0.5}, 1.0);
    PoissonSampler<2> sampler(model, w);
    RandomStream a(555, 3, "samples"), b(555, 3, "samples");
    for (int i = 0; i < 20; ++i) CHECK(sampler.sample(a) == sampler.sample(b));
}

TEST_CASE("gibbs chain parameters are validated") {
    GibbsChainParams p;
    p.p_birth = 0.5;
    CHECK_THROWS_AS(p.validate(), PreconditionError);
    p = GibbsChainParams{};
    p.p_birth = 0.4;
    p.p_death = 0.3;
    p.p_translate = 0.3;
    CHECK_THROWS_AS(p.validate(), PreconditionError);  // birth != death
    p = GibbsChainParams{};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("free-potential chain reproduces the Poisson law") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(1.5);
    InteractionModel<1> inter(PairPotential<1>::zero());
    GibbsChainParams params;
    params.burn_in = 2'000;
    params.thinning = 30;

    // independent replicate chains; the replicate spread gives an honest SE
    const int R = 24;
    const long per = 700;
    std::vector<double> means, vars;
    std::vector<long> hist(16, 0);
    long total = 0;
    for (int r = 0; r < R; ++r) {
        GibbsChain<1> chain(model, inter, w, params, RandomStream(808, r, "chain"));
        double s = 0.0, s2 = 0.0;
        for (long i = 0; i < per; ++i) {
            const double k = double(chain.next().size());
            s += k;
            s2 += k * k;
            if (k < double(hist.size())) ++hist[static_cast<std::size_t>(k)];
            ++total;
        }
        means.push_back(s / double(per));
        vars.push_back(s2 / double(per) - (s / per) * (s / per));
    }
    double mean = 0.0, var_of_means = 0.0, mean_var = 0.0;
    for (int r = 0; r < R; ++r) {
        mean += means[static_cast<std::size_t>(r)];
        mean_var += vars[static_cast<std::size_t>(r)];
    }
    mean /= R;
    mean_var /= R;
    for (double m : means) var_of_means += (m - mean) * (m - mean);
    var_of_means /= (R - 1);
    const double se = std::sqrt(var_of_means / R);

    // E[N] = Var[N] = 1.5 for the Poisson law
    CHECK(std::abs(mean - 1.5) <= 3.0 * se + 1e-12);
    CHECK(std::abs(mean_var - 1.5) <= 0.15);

    // chi-square on the N histogram against the Poisson pmf
    std::vector<double> probs;
    double lam = 1.5, p = std::exp(-lam);
    for (std::size_t k = 0; k < hist.size(); ++k) {
        probs.push_back(p);
        p *= lam / double(k + 1);
    }
    const double pval = testsupport::chi_square_counts_pvalue(hist, probs, total);
    CHECK(pval > 0.001);
}

TEST_CASE("hard-core chain never produces overlapping pairs") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(3.0);
    InteractionModel<1> inter(PairPotential<1>::hard_core(0.15));
    GibbsChainParams params;
    params.burn_in = 1'000;
    params.thinning = 5;
    GibbsChain<1> chain(model, inter, w, params, RandomStream(99, 0, "chain"));
    for (int i = 0; i < 1'000; ++i) {
        const auto gamma = chain.next();
        for (std::size_t a = 0; a < gamma.size(); ++a)
            for (std::size_t b = a + 1; b < gamma.size(); ++b)
                CHECK(std::abs(gamma[a][0] - gamma[b][0]) >= 0.15);
    }
    const auto diag = chain.diagnostics();
    CHECK(diag.birth_rate() > 0.0);
    CHECK(diag.death_rate() > 0.0);
    CHECK(diag.translate_rate() > 0.0);
    CHECK(diag.mean_population > 0.0);
}

TEST_CASE("soft-core chain matches the series oracle on a tiny window") {
    Window<1> w({0.0}, {0.5});
    auto model = IntensityModel<1>::constant(1.0);  // sigma(w) = 0.5
    InteractionModel<1> inter(PairPotential<1>::soft_core(1.2, 0.1, 0.3));
    OracleConfig cfg;
    cfg.n_max = 8;
    const auto oracle = oracle_expectation<1>(
        count_functional<1>(), [](int k) { return double(k); }, model, &inter, w, cfg);
    REQUIRE(oracle.conclusive);

    GibbsChainParams params;
    params.burn_in = 2'000;
    params.thinning = 20;
    params.step = 0.15;
    const int R = 16;
    const long per = 800;
    std::vector<double> means;
    for (int r = 0; r < R; ++r) {
        GibbsChain<1> chain(model, inter, w, params, RandomStream(4242, r, "chain"));
        double s = 0.0;
        for (long i = 0; i < per; ++i) s += double(chain.next().size());
        means.push_back(s / double(per));
    }
    double mean = 0.0, var = 0.0;
    for (double m : means) mean += m;
    mean /= R;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (R - 1);
    const double se = std::sqrt(var / R);
    CHECK(std::abs(mean - oracle.value) <= 3.0 * se + oracle.quad_error + oracle.tail_bound);
}

TEST_CASE("frozen boundary configurations exclude their surroundings") {
    // a hard-core boundary point just outside the window forbids births
    // within its exclusion radius
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(3.0);
    InteractionModel<1> inter(PairPotential<1>::hard_core(0.2));
    GibbsChainParams params;
    params.burn_in = 500;
    params.thinning = 5;
    Configuration<1> boundary({{1.05}});
    GibbsChain<1> chain(model, inter, w, params, RandomStream(31, 0, "chain"), boundary);
    for (int i = 0; i < 500; ++i) {
        const auto gamma = chain.next();
        for (const auto& x : gamma) CHECK(x[0] <= 1.05 - 0.2 + 1e-12);
    }

    // boundary points must lie outside the window
    CHECK_THROWS_AS(GibbsChain<1>(model, inter, w, params, RandomStream(32, 0, "chain"),
                                  Configuration<1>({{0.5}})),
                    PreconditionError);
}

TEST_CASE("one-shot gibbs sampling returns a window configuration with diagnostics") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(2.0);
    InteractionModel<1> inter(PairPotential<1>::soft_core(0.8, 0.1, 0.25));
    GibbsChainParams params;
    params.burn_in = 1'000;
    auto [gamma, diag] = sample_gibbs(model, inter, w, params, RandomStream(61, 0, "chain"));
    for (const auto& x : gamma) CHECK(w.contains(x));
    CHECK(diag.moves == params.burn_in + params.thinning);
    CHECK(diag.birth_rate() >= 0.0);
    CHECK(diag.birth_rate() <= 1.0);
}

TEST_CASE("a chain with no acceptable move reports itself stuck") {
    Window<1> w({0.0}, {1.0});
    auto model = IntensityModel<1>::constant(1.0);
    InteractionModel<1> inter(PairPotential<1>::zero());
    GibbsChainParams params;
    params.p_birth = 0.0;
    params.p_death = 0.0;
    params.p_translate = 1.0;  // translating an empty configuration never succeeds
    params.burn_in = 0;
    params.thinning = 1'000;
    params.stuck_limit = 500;
    GibbsChain<1> chain(model, inter, w, params, RandomStream(77, 0, "chain"));
    CHECK_THROWS_AS(chain.next(), ChainStuckError);
}
