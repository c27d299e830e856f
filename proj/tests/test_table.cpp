#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"

using namespace loglin;

TEST_CASE("table_size validates the variable count") {
    CHECK(table_size(1) == 2);
    CHECK(table_size(3) == 8);
    CHECK(table_size(20) == 1048576);
    CHECK_THROWS_AS(table_size(0), std::invalid_argument);
    CHECK_THROWS_AS(table_size(21), std::invalid_argument);
    CHECK_THROWS_AS(table_size(-1), std::invalid_argument);
}

TEST_CASE("cell indexing is lexicographic with the last variable fastest") {
    CHECK(cell_of_index(0, 3) == std::vector<int>{0, 0, 0});
    CHECK(cell_of_index(1, 3) == std::vector<int>{0, 0, 1});
    CHECK(cell_of_index(2, 3) == std::vector<int>{0, 1, 0});
    CHECK(cell_of_index(7, 3) == std::vector<int>{1, 1, 1});
    CHECK(index_of_cell({1, 0, 1}) == 5);
    CHECK(cell_label(5, 3) == "101");
    CHECK(cell_label(0, 4) == "0000");
    CHECK(cell_level(4, 0, 3) == 1);
    CHECK(cell_level(4, 2, 3) == 0);
    CHECK_THROWS_AS(index_of_cell({0, 2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(cell_of_index(8, 3), std::invalid_argument);
}

TEST_CASE("cell and index round-trip for every cell") {
    for (int k = 1; k <= 12; k += 3) {
        for (std::size_t i = 0; i < table_size(k); ++i) {
            CHECK(index_of_cell(cell_of_index(i, k)) == i);
        }
    }
}

TEST_CASE("MarginalSet sorts, deduplicates, and masks") {
    MarginalSet m = MarginalSet::of({2, 0});
    CHECK(m.vars == std::vector<int>{0, 2});
    CHECK(m.mask() == 0b101u);
    CHECK(m.contains(0));
    CHECK(!m.contains(1));
    CHECK(MarginalSet::from_mask(0b110u).vars == std::vector<int>{1, 2});
    CHECK(fixtures::ms({0, 1}).subset_of(fixtures::ms({0, 1, 3})));
    CHECK(!fixtures::ms({0, 2}).subset_of(fixtures::ms({0, 1, 3})));
    CHECK_THROWS_AS(MarginalSet::of({1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(MarginalSet::of({-1}), std::invalid_argument);
    CHECK_THROWS_AS(fixtures::ms({5}).validate_for(3), std::invalid_argument);
    CHECK(complement(fixtures::ms({1}), 3).vars == std::vector<int>{0, 2});
    CHECK(complement(fixtures::ms({0, 1, 2}), 3).empty());
}

TEST_CASE("canonical subset order is by cardinality then lexicographic") {
    std::vector<std::uint32_t> subsets = canonical_subsets(3);
    std::vector<std::uint32_t> expected{0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111};
    CHECK(subsets == expected);
    CHECK(canonical_less(fixtures::ms({2}), fixtures::ms({0, 1})));
    CHECK(canonical_less(fixtures::ms({0, 1}), fixtures::ms({0, 2})));
    CHECK(!canonical_less(fixtures::ms({1, 2}), fixtures::ms({0, 2})));
}

TEST_CASE("cell_of_subset puts the subset variables at level one") {
    CHECK(cell_of_subset(0b001u, 3) == 4);
    CHECK(cell_of_subset(0b100u, 3) == 1);
    CHECK(cell_of_subset(0b111u, 3) == 7);
    CHECK(cell_of_subset(0u, 3) == 0);
}

TEST_CASE("from_probabilities validates shape, positivity, and total mass") {
    CHECK_NOTHROW(JointDistribution::from_probabilities(1, {0.5, 0.5}));
    CHECK_THROWS_AS(JointDistribution::from_probabilities(2, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution::from_probabilities(1, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution::from_probabilities(1, {0.7, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(JointDistribution::from_probabilities(1, {-0.5, 1.5}), std::invalid_argument);
}

TEST_CASE("a large uniform table passes the mass check") {
    std::size_t n = table_size(20);
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    CHECK_NOTHROW(JointDistribution::from_probabilities(20, std::move(p)));
}

TEST_CASE("normalized scales positive weights to total mass one") {
    JointDistribution p = JointDistribution::normalized(2, {1.0, 1.0, 2.0, 4.0});
    CHECK(p.p[0] == Catch::Approx(0.125).epsilon(1e-14));
    CHECK(p.p[3] == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(kahan_sum(p.p) == Catch::Approx(1.0).margin(1e-15));
    CHECK_THROWS_AS(JointDistribution::normalized(1, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("count tables track totals and reject empty data") {
    CountTable ct = CountTable::from_counts(2, {40, 10, 10, 40});
    CHECK(ct.total == 100);
    CHECK_THROWS_AS(CountTable::from_counts(2, {0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(CountTable::from_counts(2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("empirical_distribution divides by the total") {
    CountTable ct = CountTable::from_counts(2, {40, 10, 10, 40});
    JointDistribution p = empirical_distribution(ct);
    CHECK(p.p == std::vector<double>{0.4, 0.1, 0.1, 0.4});
}

TEST_CASE("empirical_distribution names the first zero cell") {
    CountTable ct = CountTable::from_counts(2, {0, 1, 1, 1});
    CHECK_THROWS_WITH(empirical_distribution(ct), Catch::Matchers::ContainsSubstring("zero cell 00"));
    JointDistribution p = empirical_distribution(ct, true);
    CHECK(p.p[0] == Catch::Approx(0.1).epsilon(1e-14));
    CHECK(p.p[1] == Catch::Approx(0.3).epsilon(1e-14));
    CHECK(kahan_sum(p.p) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("marginal sums out the complementary variables") {
    JointDistribution p = fixtures::cond_indep_4var();
    std::vector<double> ab = marginal(p, fixtures::ms({0, 1}));
    for (double v : ab) CHECK(v == Catch::Approx(0.25).margin(1e-15));

    std::vector<double> all = marginal(p, fixtures::ms({0, 1, 2, 3}));
    for (std::size_t i = 0; i < p.cells(); ++i) CHECK(all[i] == p.p[i]);

    std::vector<double> none = marginal(p, MarginalSet::of({}));
    REQUIRE(none.size() == 1);
    CHECK(none[0] == Catch::Approx(1.0).margin(1e-14));

    CHECK_THROWS_AS(marginal(p, fixtures::ms({4})), std::invalid_argument);
}

TEST_CASE("marginal is consistent under nesting") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        JointDistribution p = fixtures::random_distribution(6, rng);
        std::uint32_t outer_mask = static_cast<std::uint32_t>(rng() % 63 + 1);
        MarginalSet outer = MarginalSet::from_mask(outer_mask);
        std::uint32_t inner_mask = outer_mask & static_cast<std::uint32_t>(rng());
        MarginalSet inner = MarginalSet::from_mask(inner_mask);

        std::vector<double> direct = marginal(p, inner);

        std::vector<double> outer_table = marginal(p, outer);
        std::vector<int> positions;
        for (std::size_t i = 0; i < outer.vars.size(); ++i) {
            if (inner.contains(outer.vars[i])) positions.push_back(static_cast<int>(i));
        }
        std::vector<double> nested(direct.size(), 0.0);
        int ko = static_cast<int>(outer.size());
        for (std::size_t idx = 0; idx < outer_table.size(); ++idx) {
            std::size_t sub = 0;
            for (int pos : positions) sub = (sub << 1) | static_cast<std::size_t>(cell_level(idx, pos, ko));
            nested[sub] += outer_table[idx];
        }
        for (std::size_t i = 0; i < direct.size(); ++i) {
            CHECK(direct[i] == Catch::Approx(nested[i]).margin(1e-12));
        }
    }
}

TEST_CASE("marginal counts agree with normalized marginals") {
    std::mt19937_64 rng(7);
    CountTable ct = fixtures::random_counts(4, 500, rng);
    JointDistribution p = empirical_distribution(ct);
    MarginalSet m = fixtures::ms({1, 3});
    std::vector<std::uint64_t> mc = marginal_counts(ct, m);
    std::vector<double> mp = marginal(p, m);
    std::uint64_t total = 0;
    for (auto c : mc) total += c;
    CHECK(total == ct.total);
    for (std::size_t i = 0; i < mc.size(); ++i) {
        CHECK(mp[i] == Catch::Approx(static_cast<double>(mc[i]) / static_cast<double>(ct.total))
                           .margin(1e-12));
    }
}

TEST_CASE("marginal_index extracts the sub-cell of the kept variables") {
    MarginalSet m = fixtures::ms({0, 2});
    CHECK(marginal_index(0b101, m, 3) == 0b11);
    CHECK(marginal_index(0b100, m, 3) == 0b10);
    CHECK(marginal_index(0b010, m, 3) == 0b00);
}
