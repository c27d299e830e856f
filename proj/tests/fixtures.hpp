#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <loglin/loglin.hpp>

namespace fixtures {

/// Four binary variables; A and B are uniform and independent, C and D are
/// conditionally independent given (A, B), and the three-way interactions
/// ABC and ABD are the maximal ones. The conditional odds ratio of {A,B,C}
/// is 0.04418483 at both levels of D, the one of {A,B,D} is 0.04710518 at
/// both levels of C, and the one of {C,D} is 1 in every (A,B) slice.
inline loglin::JointDistribution cond_indep_4var() {
    return loglin::JointDistribution::from_probabilities(
        4, {0.024976376224000084, 0.053612031082845374, 0.054476742498971262, 0.11693485019418327,
            0.11693485019418327, 0.054476742498971255, 0.053612031082845381, 0.024976376224000084,
            0.11693485019418327, 0.054476742498971255, 0.053612031082845381, 0.024976376224000084,
            0.024976376224000084, 0.053612031082845374, 0.054476742498971262, 0.11693485019418327});
}

/// cond_indep_4var scaled to one million observations and rounded.
inline loglin::CountTable cond_indep_4var_counts() {
    return loglin::CountTable::from_counts(
        4, {24976, 53612, 54477, 116935, 116935, 54477, 53612, 24976, 116935, 54477, 53612, 24976,
            24976, 53612, 54477, 116935});
}

/// Three pairwise independent variables whose joint distribution is not
/// independent: cells are 1/8 -+ delta with the sign pattern
/// (-,+,+,-,+,-,-,+) over lexicographic cells.
inline loglin::JointDistribution pairwise_indep_delta(double delta) {
    double lo = 0.125 - delta;
    double hi = 0.125 + delta;
    return loglin::JointDistribution::from_probabilities(3, {lo, hi, hi, lo, hi, lo, lo, hi});
}

inline loglin::JointDistribution uniform(int k) {
    std::size_t n = loglin::table_size(k);
    return loglin::JointDistribution::from_probabilities(
        k, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

/// A four-variable distribution generated by a directed chain in which A and
/// C are conditionally independent given B, B and D are conditionally
/// independent given (A, C), and A and D are marginally independent, even
/// though every variable is connected. Cell values are rounded to a few
/// digits, so the independences hold to about 4e-6 on the log scale.
inline loglin::JointDistribution dag_unfaithful_4var() {
    return loglin::JointDistribution::normalized(
        4, {0.006, 0.006, 0.0288, 0.0192, 0.06, 0.06, 0.072, 0.048, 0.0056, 0.0504, 0.187148,
            0.0368516, 0.021, 0.189, 0.175452, 0.0345484});
}

/// Random strictly positive distribution, Dirichlet(1) via exponentials.
inline loglin::JointDistribution random_distribution(int k, std::mt19937_64& rng) {
    std::size_t n = loglin::table_size(k);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    for (double& x : w) {
        double v = u(rng);
        while (v <= 0.0) v = u(rng);
        x = -std::log(v);
        if (x <= 0.0) x = 1e-12;
    }
    return loglin::JointDistribution::normalized(k, std::move(w));
}

/// Random count table with all cells positive.
inline loglin::CountTable random_counts(int k, std::uint64_t total_scale, std::mt19937_64& rng) {
    std::size_t n = loglin::table_size(k);
    std::uniform_int_distribution<std::uint64_t> u(1, total_scale);
    std::vector<std::uint64_t> c(n);
    for (auto& x : c) x = u(rng);
    return loglin::CountTable::from_counts(k, std::move(c));
}

inline loglin::MarginalSet ms(std::initializer_list<int> vs) {
    return loglin::MarginalSet::of(std::vector<int>(vs));
}

/// Seed under which a multinomial sample of 1e5 draws from the uniform
/// three-variable distribution leads backward selection at level 0.05 to
/// the singleton model.
inline constexpr std::uint64_t kUniformRecoverySeed = 1;

/// Symmetric 2x2 distribution (a, b, b, a) with interaction gamma_AB
/// exactly 0.8.
inline loglin::JointDistribution symmetric_2x2_gamma(double gamma_ab) {
    double s = 1.0 / (1.0 + std::exp(-gamma_ab / 2.0));
    double a = 0.5 * s;
    double b = 0.5 - a;
    return loglin::JointDistribution::from_probabilities(2, {a, b, b, a});
}

/// Counts of pairwise_indep_delta(1/24) scaled to 1e5 observations.
inline loglin::CountTable pairwise_indep_counts() {
    return loglin::CountTable::from_counts(3, {8333, 16667, 16667, 8333, 16667, 8333, 8333, 16667});
}

/// Hypergraph on k default-labelled vertices.
inline loglin::Hypergraph hg(int k, std::initializer_list<std::initializer_list<int>> edges) {
    std::vector<loglin::MarginalSet> es;
    for (const auto& e : edges) es.push_back(ms(e));
    return loglin::Hypergraph::make(loglin::default_labels(k), std::move(es));
}

}  // namespace fixtures
