#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "loglin/hypergraph.hpp"
#include "loglin/table.hpp"

namespace loglin {

struct FitConfig {
    double tolerance = 1e-10;
    int max_iterations = 10000;
};

/// Result of an iterative proportional fitting run. iterations counts full
/// sweeps over the hyperedges; max_marginal_gap is the largest absolute
/// deviation between a fitted and a target hyperedge marginal after the last
/// sweep.
struct FitResult {
    JointDistribution fitted;
    int iterations = 0;
    double max_marginal_gap = 0.0;
    bool converged = false;
};

namespace detail {

inline double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::abs(a[i] - b[i]);
        if (d > gap) gap = d;
    }
    return gap;
}

}  // namespace detail

/// Iterative proportional fitting of the log-linear model generated by h to
/// the hyperedge marginals of target. Starts from the uniform distribution
/// and cycles through the hyperedges in canonical order, scaling cell masses
/// so the current hyperedge marginal matches the target. Convergence is
/// declared when every hyperedge marginal matches within cfg.tolerance in
/// the sup norm; otherwise the result is returned with converged = false.
inline FitResult ipf_fit(const JointDistribution& target, const Hypergraph& h,
                         const FitConfig& cfg = {}) {
    if (h.k() != target.k) {
        throw std::invalid_argument("hypergraph and distribution have different variable counts");
    }
    if (h.hyperedges.empty()) {
        throw std::invalid_argument("fitting requires at least one hyperedge");
    }
    if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    int k = target.k;
    std::size_t cells = target.cells();
    std::size_t ne = h.hyperedges.size();

    std::vector<std::vector<std::size_t>> cell_to_marg(ne);
    std::vector<std::vector<double>> targets(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const MarginalSet& m = h.hyperedges[e];
        targets[e] = marginal(target, m);
        cell_to_marg[e].resize(cells);
        for (std::size_t i = 0; i < cells; ++i) cell_to_marg[e][i] = marginal_index(i, m, k);
    }

    std::vector<double> q(cells, 1.0 / static_cast<double>(cells));
    FitResult res;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        for (std::size_t e = 0; e < ne; ++e) {
            std::size_t mcells = targets[e].size();
            std::vector<double> qm(mcells, 0.0);
            for (std::size_t i = 0; i < cells; ++i) qm[cell_to_marg[e][i]] += q[i];
            std::vector<double> ratio(mcells);
            for (std::size_t j = 0; j < mcells; ++j) ratio[j] = targets[e][j] / qm[j];
            for (std::size_t i = 0; i < cells; ++i) q[i] *= ratio[cell_to_marg[e][i]];
        }
        double gap = 0.0;
        for (std::size_t e = 0; e < ne; ++e) {
            std::size_t mcells = targets[e].size();
            std::vector<double> qm(mcells, 0.0);
            for (std::size_t i = 0; i < cells; ++i) qm[cell_to_marg[e][i]] += q[i];
            double g = detail::max_gap(qm, targets[e]);
            if (g > gap) gap = g;
        }
        res.iterations = it;
        res.max_marginal_gap = gap;
        if (gap < cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.fitted = JointDistribution::normalized(k, std::move(q));
    return res;
}

/// Kullback-Leibler divergence of p from q, sum of p log(p/q). Both must
/// share the same variable count; the value is clamped at zero to absorb
/// rounding in the compensated sum.
inline double kl_divergence(const JointDistribution& p, const JointDistribution& q) {
    if (p.k != q.k) throw std::invalid_argument("distributions have different variable counts");
    std::vector<double> terms(p.cells());
    for (std::size_t i = 0; i < p.cells(); ++i) terms[i] = p.p[i] * std::log(p.p[i] / q.p[i]);
    double s = kahan_sum(terms);
    return s < 0.0 ? 0.0 : s;
}

/// Likelihood-ratio statistic of counts against fitted cell probabilities,
///   G2 = 2 sum over observed cells of n_i log(n_i / (N q_i)),
/// with zero-count cells contributing zero.
inline double deviance(const CountTable& ct, const JointDistribution& q) {
    if (ct.k != q.k) throw std::invalid_argument("table and distribution have different variable counts");
    double total = static_cast<double>(ct.total);
    std::vector<double> terms;
    terms.reserve(ct.cells());
    for (std::size_t i = 0; i < ct.cells(); ++i) {
        if (ct.n[i] == 0) continue;
        double n = static_cast<double>(ct.n[i]);
        terms.push_back(n * std::log(n / (total * q.p[i])));
    }
    return 2.0 * kahan_sum(terms);
}

}  // namespace loglin
