#pragma once

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "loglin/hypergraph.hpp"
#include "loglin/interaction.hpp"
#include "loglin/ipf.hpp"
#include "loglin/table.hpp"

namespace loglin {

/// Quantile of the standard normal distribution.
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) {
        throw std::invalid_argument("quantile probability must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

/// Two-sided tail probability of |Z| exceeding stat for standard normal Z.
inline double two_sided_p_value(double stat) {
    return std::erfc(std::abs(stat) / std::sqrt(2.0));
}

/// The contrast vector c with c' log p = log conditional odds ratio of the
/// target given the conditioning cell (corner convention). Entries are
/// +1, -1 on the 2^|target| support cells and 0 elsewhere.
struct ContrastVector {
    int k = 0;
    std::vector<int> c;

    /// Support cells (indices with non-zero coefficient) in increasing order.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] != 0) s.push_back(i);
        }
        return s;
    }
};

inline ContrastVector contrast_vector(const MarginalSet& target, const std::vector<int>& conditioning,
                                      int k) {
    CondOddsRatioSpec spec = CondOddsRatioSpec::of(target, conditioning, k);
    std::size_t base = base_cell(spec, k);
    std::size_t tmask = cell_of_subset(spec.target.mask(), k);
    int m = static_cast<int>(spec.target.size());
    ContrastVector cv{k, std::vector<int>(table_size(k), 0)};
    std::size_t sub = tmask;
    while (true) {
        int zeros = m - __builtin_popcountll(sub);
        cv.c[base | sub] = (zeros % 2 == 0) ? 1 : -1;
        if (sub == 0) break;
        sub = (sub - 1) & tmask;
    }
    return cv;
}

/// Contrast at the all-zeros conditioning cell, whose value on log p is the
/// interaction gamma of the target set.
inline ContrastVector contrast_vector(const MarginalSet& target, int k) {
    return contrast_vector(target, std::vector<int>(static_cast<std::size_t>(k) - target.size(), 0), k);
}

inline double contrast_dot_log(const ContrastVector& cv, const JointDistribution& p) {
    if (cv.k != p.k) throw std::invalid_argument("contrast and distribution have different variable counts");
    double s = 0.0;
    for (std::size_t i : cv.support()) s += cv.c[i] * std::log(p.p[i]);
    return s;
}

/// Estimated variance of the plug-in contrast estimate from observed counts:
/// sum of 1/n_i over the support of c. Every support cell must be observed.
inline double gamma_variance(const CountTable& ct, const ContrastVector& cv) {
    if (cv.k != ct.k) throw std::invalid_argument("contrast and table have different variable counts");
    double var = 0.0;
    for (std::size_t i : cv.support()) {
        if (ct.n[i] == 0) {
            throw std::runtime_error("zero cell " + cell_label(i, ct.k) +
                                     " in the support of the contrast; the variance estimate needs "
                                     "positive counts");
        }
        var += 1.0 / static_cast<double>(ct.n[i]);
    }
    return var;
}

/// Variance of the contrast estimate against fitted cell probabilities with
/// sample size n: sum of 1/(n q_i) over the support.
inline double gamma_variance(double n, const JointDistribution& q, const ContrastVector& cv) {
    if (cv.k != q.k) throw std::invalid_argument("contrast and distribution have different variable counts");
    if (!(n > 0.0)) throw std::invalid_argument("sample size must be positive");
    double var = 0.0;
    for (std::size_t i : cv.support()) var += 1.0 / (n * q.p[i]);
    return var;
}

/// Outcome of a Wald test for a single interaction.
struct HyperedgeTestResult {
    double gamma_hat = 0.0;
    double std_error = 0.0;
    double statistic = 0.0;
    double z_critical = 0.0;
    double p_value = 1.0;
    double alpha = 0.0;
    bool reject = false;
};

namespace detail {

inline HyperedgeTestResult wald_from(double gamma_hat, double variance, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    HyperedgeTestResult r;
    r.gamma_hat = gamma_hat;
    r.std_error = std::sqrt(variance);
    r.statistic = std::abs(gamma_hat) / r.std_error;
    r.z_critical = normal_quantile(1.0 - alpha / 2.0);
    r.p_value = two_sided_p_value(r.statistic);
    r.alpha = alpha;
    r.reject = r.statistic > r.z_critical;
    return r;
}

}  // namespace detail

/// Wald test of the interaction of target (evaluated at the given
/// conditioning cell, all-zeros by default) against zero, using the relative
/// frequencies of ct. Support cells must all be observed.
inline HyperedgeTestResult wald_test(const CountTable& ct, const MarginalSet& target, double alpha,
                                     const std::vector<int>* conditioning = nullptr) {
    ContrastVector cv = conditioning ? contrast_vector(target, *conditioning, ct.k)
                                     : contrast_vector(target, ct.k);
    double gamma_hat = 0.0;
    double total = static_cast<double>(ct.total);
    for (std::size_t i : cv.support()) {
        if (ct.n[i] == 0) {
            throw std::runtime_error("zero cell " + cell_label(i, ct.k) +
                                     " in the support of the contrast; the Wald test needs positive "
                                     "counts");
        }
        gamma_hat += cv.c[i] * std::log(static_cast<double>(ct.n[i]) / total);
    }
    return detail::wald_from(gamma_hat, gamma_variance(ct, cv), alpha);
}

/// Wald test of the interaction of target evaluated on fitted probabilities
/// q with sample size n (all-zeros conditioning cell).
inline HyperedgeTestResult wald_test_fitted(const JointDistribution& q, double n,
                                            const MarginalSet& target, double alpha) {
    ContrastVector cv = contrast_vector(target, q.k);
    return detail::wald_from(contrast_dot_log(cv, q), gamma_variance(n, q, cv), alpha);
}

/// Sample-size dependent strong-faithfulness threshold
///   lambda*_N = z_{1 - alpha/2} N^{-(1/2 - epsilon)} min_t 2^{(h_t + 1)/2},
/// where the minimum runs over the hyperedge orders h_t.
inline double lambda_star(double n, double alpha, double epsilon, const std::vector<int>& orders) {
    if (!(n > 0.0)) throw std::invalid_argument("sample size must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2)");
    if (orders.empty()) throw std::invalid_argument("orders must be non-empty");
    double min_mult = 0.0;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i] < 0) throw std::invalid_argument("orders must be non-negative");
        double mult = std::pow(2.0, (orders[i] + 1) / 2.0);
        if (i == 0 || mult < min_mult) min_mult = mult;
    }
    return normal_quantile(1.0 - alpha / 2.0) * std::pow(n, -(0.5 - epsilon)) * min_mult;
}

inline double lambda_star(double n, double alpha, double epsilon, const Hypergraph& h) {
    std::vector<int> orders;
    for (const auto& e : h.hyperedges) orders.push_back(static_cast<int>(e.size()) - 1);
    return lambda_star(n, alpha, epsilon, orders);
}

/// Report of a strong-faithfulness check of p with respect to h at level
/// lambda. Each hyperedge interaction is evaluated at the all-zeros
/// conditioning cell. in_model records whether every interaction outside the
/// descending class of h vanishes (within 1e-8); when it does not, the
/// per-edge interactions are conditioning-cell dependent and the check is
/// only a statement about the all-zeros cell.
struct StrongFaithfulnessReport {
    double lambda = 0.0;
    std::vector<std::pair<MarginalSet, double>> edge_gammas;
    double min_abs_gamma = 0.0;
    bool satisfied = false;
    bool in_model = true;
};

namespace detail {

inline double min_abs_edge_gamma(const JointDistribution& p, const Hypergraph& h) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : h.hyperedges) {
        double g = std::abs(log_cond_odds_ratio(
            p, CondOddsRatioSpec::of(e, std::vector<int>(static_cast<std::size_t>(p.k) - e.size(), 0),
                                     p.k)));
        if (g < m) m = g;
    }
    return m;
}

}  // namespace detail

inline StrongFaithfulnessReport strong_faithfulness_check(const JointDistribution& p,
                                                          const Hypergraph& h, double lambda) {
    if (h.k() != p.k) throw std::invalid_argument("hypergraph and distribution have different variable counts");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    StrongFaithfulnessReport rep;
    rep.lambda = lambda;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& e : h.hyperedges) {
        double g = log_cond_odds_ratio(
            p, CondOddsRatioSpec::of(e, std::vector<int>(static_cast<std::size_t>(p.k) - e.size(), 0),
                                     p.k));
        rep.edge_gammas.emplace_back(e, g);
        if (std::abs(g) < mn) mn = std::abs(g);
    }
    rep.min_abs_gamma = mn;
    rep.satisfied = mn > lambda;
    InteractionVector iv = interaction_vector(p);
    for (std::uint32_t m : ascending_class(h)) {
        if (std::abs(iv.gamma[m]) > 1e-8) {
            rep.in_model = false;
            break;
        }
    }
    return rep;
}

/// One tested hyperedge during backward selection.
struct SearchStep {
    Hypergraph model;
    MarginalSet tested;
    double gamma_hat = 0.0;
    double std_error = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;
    bool rejected = false;
    bool removed = false;
};

/// Full record of a backward selection run.
struct SearchTrace {
    std::vector<SearchStep> steps;
    Hypergraph final;
    bool aborted = false;
    std::string abort_reason;
};

struct BackwardSelectConfig {
    FitConfig fit{};
    bool smoothing = false;
};

/// Backward hyperedge selection. Starting from the saturated model, each
/// round Wald-tests the interaction of every hyperedge of size two or more
/// (singletons are never candidates for removal) at the all-zeros
/// conditioning cell, using the observed relative frequencies at the
/// saturated step and the fitted distribution of the current model
/// afterwards. The non-rejected hyperedge with the largest p-value (ties
/// broken by canonical order) is removed and replaced by its maximal proper
/// subsets, the generating class is re-normalized, and the round repeats
/// until every tested hyperedge is rejected or no testable hyperedge
/// remains. A fit that fails to converge aborts the search.
inline SearchTrace backward_select(const CountTable& ct, double alpha,
                                   const BackwardSelectConfig& cfg = {}) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    int k = ct.k;
    JointDistribution phat = empirical_distribution(ct, cfg.smoothing);
    double n = static_cast<double>(ct.total);

    SearchTrace trace;
    Hypergraph model = Hypergraph::make(default_labels(k), {MarginalSet::from_mask(
                                                               (1u << k) - 1u)});
    bool saturated = true;
    while (true) {
        JointDistribution fit = phat;
        if (!saturated) {
            FitResult fr = ipf_fit(phat, model, cfg.fit);
            if (!fr.converged) {
                trace.aborted = true;
                trace.abort_reason = "iterative proportional fitting did not converge for model with " +
                                     std::to_string(model.hyperedges.size()) + " hyperedges";
                trace.final = model;
                return trace;
            }
            fit = fr.fitted;
        }

        std::vector<std::size_t> testable;
        for (std::size_t e = 0; e < model.hyperedges.size(); ++e) {
            if (model.hyperedges[e].size() >= 2) testable.push_back(e);
        }
        if (testable.empty()) break;

        bool found = false;
        std::size_t victim = 0;
        double best_p = -1.0;
        std::vector<SearchStep> round;
        for (std::size_t e : testable) {
            HyperedgeTestResult t = wald_test_fitted(fit, n, model.hyperedges[e], alpha);
            SearchStep step;
            step.model = model;
            step.tested = model.hyperedges[e];
            step.gamma_hat = t.gamma_hat;
            step.std_error = t.std_error;
            step.statistic = t.statistic;
            step.p_value = t.p_value;
            step.rejected = t.reject;
            round.push_back(step);
            if (!t.reject && t.p_value > best_p) {
                best_p = t.p_value;
                victim = e;
                found = true;
            }
        }
        if (found) {
            for (auto& step : round) {
                if (step.tested == model.hyperedges[victim]) step.removed = true;
            }
        }
        for (auto& step : round) trace.steps.push_back(std::move(step));
        if (!found) break;

        MarginalSet removed = model.hyperedges[victim];
        std::vector<MarginalSet> next;
        for (std::size_t e = 0; e < model.hyperedges.size(); ++e) {
            if (e != victim) next.push_back(model.hyperedges[e]);
        }
        std::uint32_t rm = removed.mask();
        for (int v : removed.vars) {
            next.push_back(MarginalSet::from_mask(rm & ~(1u << v)));
        }
        model = normalize_generating_class(default_labels(k), std::move(next));
        saturated = false;
    }
    trace.final = model;
    return trace;
}

/// Draws a multinomial sample of size n from p using sequential conditional
/// binomials, so the cost is one binomial draw per cell.
inline CountTable multinomial_counts(const JointDistribution& p, std::uint64_t n, std::mt19937_64& rng) {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    std::size_t cells = p.cells();
    std::vector<std::uint64_t> counts(cells, 0);
    double mass_left = 1.0;
    std::uint64_t n_left = n;
    for (std::size_t i = 0; i + 1 < cells && n_left > 0; ++i) {
        double prob = p.p[i] / mass_left;
        if (prob > 1.0) prob = 1.0;
        if (prob < 0.0) prob = 0.0;
        std::binomial_distribution<std::uint64_t> bin(n_left, prob);
        std::uint64_t c = bin(rng);
        counts[i] = c;
        n_left -= c;
        mass_left -= p.p[i];
    }
    counts[cells - 1] += n_left;
    return CountTable::from_counts(p.k, std::move(counts));
}

}  // namespace loglin
