#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace loglin;

TEST_CASE("fitting the saturated model reproduces the target in one sweep") {
    std::mt19937_64 rng(5);
    JointDistribution p = fixtures::random_distribution(3, rng);
    FitResult r = ipf_fit(p, fixtures::hg(3, {{0, 1, 2}}));
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    for (std::size_t i = 0; i < p.cells(); ++i) {
        CHECK(r.fitted.p[i] == Catch::Approx(p.p[i]).margin(1e-14));
    }
}

TEST_CASE("fitting singletons yields the product of marginals") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        JointDistribution p = fixtures::random_distribution(2, rng);
        FitResult r = ipf_fit(p, fixtures::hg(2, {{0}, {1}}));
        CHECK(r.converged);
        std::vector<double> pa = marginal(p, fixtures::ms({0}));
        std::vector<double> pb = marginal(p, fixtures::ms({1}));
        for (std::size_t i = 0; i < 4; ++i) {
            double expected = pa[(i >> 1) & 1] * pb[i & 1];
            CHECK(r.fitted.p[i] == Catch::Approx(expected).margin(1e-10));
        }
    }
}

TEST_CASE("a distribution already in the model is a fixed point") {
    JointDistribution p = fixtures::cond_indep_4var();
    Hypergraph h = fixtures::hg(4, {{0, 1, 2}, {0, 1, 3}});
    FitResult r = ipf_fit(p, h);
    CHECK(r.converged);
    for (std::size_t i = 0; i < p.cells(); ++i) {
        CHECK(r.fitted.p[i] == Catch::Approx(p.p[i]).margin(1e-9));
    }

    FitResult again = ipf_fit(r.fitted, h);
    CHECK(again.converged);
    CHECK(again.iterations <= 2);
}

TEST_CASE("fitted marginals match the target marginals on every hyperedge") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        JointDistribution p = fixtures::random_distribution(4, rng);
        Hypergraph h = trial % 2 == 0 ? fixtures::hg(4, {{0, 1}, {1, 2}, {2, 3}})
                                      : fixtures::hg(4, {{0, 1, 2}, {2, 3}});
        FitResult r = ipf_fit(p, h);
        REQUIRE(r.converged);
        CHECK(r.max_marginal_gap < 1e-10);
        for (const auto& e : h.hyperedges) {
            std::vector<double> want = marginal(p, e);
            std::vector<double> got = marginal(r.fitted, e);
            for (std::size_t i = 0; i < want.size(); ++i) {
                CHECK(got[i] == Catch::Approx(want[i]).margin(1e-9));
            }
        }
    }
}

TEST_CASE("interactions outside the fitted model vanish") {
    std::mt19937_64 rng(31);
    JointDistribution p = fixtures::random_distribution(4, rng);
    Hypergraph h = fixtures::hg(4, {{0, 1}, {1, 2, 3}});
    FitResult r = ipf_fit(p, h);
    REQUIRE(r.converged);
    InteractionVector iv = interaction_vector(r.fitted);
    for (std::uint32_t m : ascending_class(h)) {
        CHECK(std::abs(iv.gamma[m]) < 1e-8);
    }
}

TEST_CASE("a decomposable fit matches its closed form") {
    std::mt19937_64 rng(37);
    JointDistribution p = fixtures::random_distribution(3, rng);
    Hypergraph h = fixtures::hg(3, {{0, 1}, {1, 2}});
    FitResult r = ipf_fit(p, h);
    REQUIRE(r.converged);
    std::vector<double> pab = marginal(p, fixtures::ms({0, 1}));
    std::vector<double> pbc = marginal(p, fixtures::ms({1, 2}));
    std::vector<double> pb = marginal(p, fixtures::ms({1}));
    for (std::size_t i = 0; i < 8; ++i) {
        int a = cell_level(i, 0, 3);
        int b = cell_level(i, 1, 3);
        int c = cell_level(i, 2, 3);
        double expected = pab[(a << 1) | b] * pbc[(b << 1) | c] / pb[b];
        CHECK(r.fitted.p[i] == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("a starved iteration budget reports non-convergence") {
    std::mt19937_64 rng(47);
    JointDistribution p = fixtures::random_distribution(3, rng);
    FitConfig cfg;
    cfg.max_iterations = 1;
    FitResult r = ipf_fit(p, fixtures::hg(3, {{0, 1}, {0, 2}, {1, 2}}), cfg);
    CHECK(!r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.max_marginal_gap > 0.0);
}

TEST_CASE("ipf_fit validates its inputs") {
    std::mt19937_64 rng(53);
    JointDistribution p = fixtures::random_distribution(3, rng);
    CHECK_THROWS_AS(ipf_fit(p, fixtures::hg(2, {{0, 1}})), std::invalid_argument);
    CHECK_THROWS_AS(ipf_fit(p, Hypergraph::make(default_labels(3), {})), std::invalid_argument);
}

TEST_CASE("kl_divergence is zero at equality and positive elsewhere") {
    std::mt19937_64 rng(61);
    JointDistribution p = fixtures::random_distribution(3, rng);
    CHECK(kl_divergence(p, p) == 0.0);

    JointDistribution q = fixtures::random_distribution(3, rng);
    CHECK(kl_divergence(p, q) > 0.0);

    JointDistribution skew = JointDistribution::from_probabilities(2, {0.4, 0.1, 0.1, 0.4});
    CHECK(kl_divergence(skew, fixtures::uniform(2)) ==
          Catch::Approx(0.19274475702175753).epsilon(1e-12));
    CHECK_THROWS_AS(kl_divergence(p, skew), std::invalid_argument);
}

TEST_CASE("deviance vanishes at the saturated fit and matches the direct sum") {
    CountTable ct = CountTable::from_counts(2, {40, 10, 10, 40});
    JointDistribution phat = empirical_distribution(ct);
    CHECK(deviance(ct, phat) == Catch::Approx(0.0).margin(1e-12));

    JointDistribution u = fixtures::uniform(2);
    double direct = 2.0 * (40.0 * std::log(0.4 / 0.25) + 10.0 * std::log(0.1 / 0.25) +
                           10.0 * std::log(0.1 / 0.25) + 40.0 * std::log(0.4 / 0.25));
    CHECK(deviance(ct, u) == Catch::Approx(direct).epsilon(1e-12));

    CountTable zc = CountTable::from_counts(2, {0, 50, 25, 25});
    CHECK_NOTHROW(deviance(zc, u));
}
