#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "loglin/hypergraph.hpp"
#include "loglin/table.hpp"

namespace loglin {

/// The vector of log-linear interaction parameters of a positive joint
/// distribution, indexed by variable-subset bitmask (bit v set when variable
/// v belongs to the subset).
struct InteractionVector {
    int k = 0;
    std::vector<double> gamma;

    double of(const MarginalSet& s) const {
        s.validate_for(k);
        return gamma[s.mask()];
    }

    double of_mask(std::uint32_t m) const { return gamma[m]; }
};

/// Moebius inversion of log p over the subset lattice: the interaction of
/// subset S is the alternating sum of log p over the cells whose 1-set is a
/// subset of S,
///   gamma_S = sum_{T subseteq S} (-1)^{|S| - |T|} log p(cell with 1-set T).
inline InteractionVector interaction_vector(const JointDistribution& p) {
    int k = p.k;
    std::size_t n = p.cells();
    std::vector<double> g(n);
    for (std::uint32_t m = 0; m < n; ++m) {
        g[m] = std::log(p.p[cell_of_subset(m, k)]);
    }
    for (int v = 0; v < k; ++v) {
        std::uint32_t bit = 1u << v;
        for (std::uint32_t m = 0; m < n; ++m) {
            if (m & bit) g[m] -= g[m ^ bit];
        }
    }
    return InteractionVector{k, std::move(g)};
}

/// Inverse of interaction_vector: reconstructs the distribution whose
/// log-probabilities are the subset sums of the interactions. The empty-set
/// coordinate is treated as a free normalizing constant, so the result is
/// normalized to total mass one.
inline JointDistribution distribution_from_interactions(const InteractionVector& iv) {
    int k = iv.k;
    std::size_t n = table_size(k);
    if (iv.gamma.size() != n) {
        throw std::invalid_argument("interaction vector has wrong length");
    }
    std::vector<double> g = iv.gamma;
    for (int v = 0; v < k; ++v) {
        std::uint32_t bit = 1u << v;
        for (std::uint32_t m = 0; m < n; ++m) {
            if (m & bit) g[m] += g[m ^ bit];
        }
    }
    std::vector<double> p(n);
    for (std::uint32_t m = 0; m < n; ++m) {
        p[cell_of_subset(m, k)] = std::exp(g[m]);
    }
    return JointDistribution::normalized(k, std::move(p));
}

/// Maximum k for which the dense design matrix is materialized.
inline constexpr int kMaxDesignVariables = 12;

/// Dense 2^k x 2^k design matrix D with log p = D gamma: rows are cells in
/// lexicographic order, columns are subsets in canonical order, and
/// D[i][S] = 1 exactly when every variable of S is at level 1 in cell i.
inline std::vector<std::vector<int>> design_matrix(int k) {
    table_size(k);
    if (k > kMaxDesignVariables) {
        throw std::invalid_argument("design_matrix is limited to k <= " +
                                    std::to_string(kMaxDesignVariables) +
                                    " because it stores 4^k entries");
    }
    std::size_t n = std::size_t{1} << k;
    std::vector<std::uint32_t> cols = canonical_subsets(k);
    std::vector<std::vector<int>> d(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t sub = cell_of_subset(cols[c], k);
            d[i][c] = ((i & sub) == sub) ? 1 : 0;
        }
    }
    return d;
}

/// A conditional odds-ratio specification: a non-empty target set and fixed
/// levels for the remaining variables, listed in increasing variable order.
struct CondOddsRatioSpec {
    MarginalSet target;
    std::vector<int> conditioning;

    static CondOddsRatioSpec of(MarginalSet target, std::vector<int> conditioning, int k) {
        if (target.empty()) throw std::invalid_argument("target set must be non-empty");
        target.validate_for(k);
        MarginalSet rest = complement(target, k);
        if (conditioning.size() != rest.size()) {
            throw std::invalid_argument("expected " + std::to_string(rest.size()) +
                                        " conditioning levels, got " +
                                        std::to_string(conditioning.size()));
        }
        for (int lv : conditioning) {
            if (lv != 0 && lv != 1) throw std::invalid_argument("conditioning levels must be 0 or 1");
        }
        return CondOddsRatioSpec{std::move(target), std::move(conditioning)};
    }
};

/// Base cell index: target variables at level 0, conditioning variables at
/// their fixed levels.
inline std::size_t base_cell(const CondOddsRatioSpec& spec, int k) {
    MarginalSet rest = complement(spec.target, k);
    std::size_t idx = 0;
    for (std::size_t j = 0; j < rest.vars.size(); ++j) {
        if (spec.conditioning[j]) idx |= (std::size_t{1} << (k - 1 - rest.vars[j]));
    }
    return idx;
}

/// Log conditional odds ratio of the target set given the conditioning cell,
/// in the corner parameterization: the cell with all target variables at
/// level 1 enters with a plus sign, and in general a cell's sign is + when
/// its number of target zeros is even. For a target of size m,
///   log COR = sum over the 2^m target cells of (+/-) log p.
/// Under this convention, gamma_S of interaction_vector equals the log
/// conditional odds ratio of S given all other variables at level 0.
inline double log_cond_odds_ratio(const JointDistribution& p, const CondOddsRatioSpec& spec) {
    int k = p.k;
    spec.target.validate_for(k);
    std::size_t base = base_cell(spec, k);
    std::size_t tmask = cell_of_subset(spec.target.mask(), k);
    int m = static_cast<int>(spec.target.size());
    double total = 0.0;
    std::size_t sub = tmask;
    while (true) {
        int ones = __builtin_popcountll(sub);
        int zeros = m - ones;
        double sign = (zeros % 2 == 0) ? 1.0 : -1.0;
        total += sign * std::log(p.p[base | sub]);
        if (sub == 0) break;
        sub = (sub - 1) & tmask;
    }
    return total;
}

/// Conditional odds ratio on the probability scale, in the display
/// convention where the all-zeros target cell carries a plus sign: a cell's
/// sign is + when its number of target ones is even. Equals
/// exp((-1)^{|target|} log_cond_odds_ratio).
inline double cond_odds_ratio(const JointDistribution& p, const CondOddsRatioSpec& spec) {
    double l = log_cond_odds_ratio(p, spec);
    if (spec.target.size() % 2 != 0) l = -l;
    return std::exp(l);
}

/// The association hypergraph of p at tolerance tol: the maximal subsets S
/// with |gamma_S| > tol. The result may have no hyperedges at all (for the
/// uniform distribution every non-empty interaction vanishes).
inline Hypergraph faithful_hypergraph(const JointDistribution& p, double tol = 1e-10) {
    if (!(tol >= 0.0)) throw std::invalid_argument("tolerance must be non-negative");
    InteractionVector iv = interaction_vector(p);
    int k = p.k;
    std::size_t n = table_size(k);
    std::vector<std::uint32_t> support;
    for (std::uint32_t m = 1; m < n; ++m) {
        if (std::abs(iv.gamma[m]) > tol) support.push_back(m);
    }
    std::sort(support.begin(), support.end(), [](std::uint32_t a, std::uint32_t b) {
        return canonical_subset_less(b, a);
    });
    std::vector<std::uint32_t> maximal;
    for (std::uint32_t m : support) {
        bool dominated = false;
        for (std::uint32_t e : maximal) {
            if ((m & e) == m) {
                dominated = true;
                break;
            }
        }
        if (!dominated) maximal.push_back(m);
    }
    std::vector<MarginalSet> edges;
    for (std::uint32_t m : maximal) edges.push_back(MarginalSet::from_mask(m));
    return Hypergraph::make(default_labels(k), std::move(edges));
}

/// Checks A independent of B given C in p by testing that every conditional
/// log odds ratio over pairs of A-cells and B-cells vanishes within tol.
/// The sets must be pairwise disjoint; C may be empty.
inline bool conditional_independence_check(const JointDistribution& p, const MarginalSet& a,
                                           const MarginalSet& b, const MarginalSet& c,
                                           double tol = 1e-10) {
    a.validate_for(p.k);
    b.validate_for(p.k);
    c.validate_for(p.k);
    if ((a.mask() & b.mask()) || (a.mask() & c.mask()) || (b.mask() & c.mask())) {
        throw std::invalid_argument("the three sets must be pairwise disjoint");
    }
    MarginalSet abc = MarginalSet::from_mask(a.mask() | b.mask() | c.mask());
    std::vector<double> q = marginal(p, abc);
    int kk = static_cast<int>(abc.size());
    std::vector<int> apos, bpos, cpos;
    for (std::size_t i = 0; i < abc.vars.size(); ++i) {
        int v = abc.vars[i];
        if (a.contains(v)) apos.push_back(static_cast<int>(i));
        else if (b.contains(v)) bpos.push_back(static_cast<int>(i));
        else cpos.push_back(static_cast<int>(i));
    }
    auto compose = [&](std::size_t xa, std::size_t xb, std::size_t xc) {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < apos.size(); ++j) {
            if ((xa >> (apos.size() - 1 - j)) & 1u) idx |= std::size_t{1} << (kk - 1 - apos[j]);
        }
        for (std::size_t j = 0; j < bpos.size(); ++j) {
            if ((xb >> (bpos.size() - 1 - j)) & 1u) idx |= std::size_t{1} << (kk - 1 - bpos[j]);
        }
        for (std::size_t j = 0; j < cpos.size(); ++j) {
            if ((xc >> (cpos.size() - 1 - j)) & 1u) idx |= std::size_t{1} << (kk - 1 - cpos[j]);
        }
        return idx;
    };
    std::size_t na = std::size_t{1} << apos.size();
    std::size_t nb = std::size_t{1} << bpos.size();
    std::size_t nc = std::size_t{1} << cpos.size();
    for (std::size_t z = 0; z < nc; ++z) {
        for (std::size_t x1 = 0; x1 < na; ++x1) {
            for (std::size_t x2 = x1 + 1; x2 < na; ++x2) {
                for (std::size_t y1 = 0; y1 < nb; ++y1) {
                    for (std::size_t y2 = y1 + 1; y2 < nb; ++y2) {
                        double l = std::log(q[compose(x1, y1, z)]) + std::log(q[compose(x2, y2, z)]) -
                                   std::log(q[compose(x1, y2, z)]) - std::log(q[compose(x2, y1, z)]);
                        if (std::abs(l) > tol) return false;
                    }
                }
            }
        }
    }
    return true;
}

}  // namespace loglin
