#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "loglin/hypergraph.hpp"
#include "loglin/inference.hpp"
#include "loglin/ipf.hpp"
#include "loglin/table.hpp"

namespace loglin {

/// Monte Carlo sampling configuration. threads <= 0 selects the hardware
/// concurrency. Estimates depend only on n_samples and seed, never on the
/// thread count.
struct McConfig {
    std::uint64_t n_samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;
};

/// A volume or proportion estimate with its Monte Carlo standard error.
/// Closed-form values carry std_error = 0 and n_samples = 0. n_failures
/// counts samples discarded because an inner computation did not converge.
struct VolumeEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::uint64_t n_failures = 0;
};

namespace detail {

inline constexpr std::uint64_t kChunkSize = 65536;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Generator for one chunk of the sample stream. The stream is partitioned
/// into fixed chunks so that estimates are reproducible for any thread count.
inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t chunk) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(chunk + 1)));
}

/// Uniform draw in the open interval (0, 1).
inline double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double logit(double u) { return std::log(u) - std::log1p(-u); }

enum class SampleOutcome { miss, hit, failure };

struct McTally {
    std::uint64_t hits = 0;
    std::uint64_t failures = 0;
};

/// Runs fn once per sample over a chunked stream. Chunks are processed by a
/// fixed per-chunk generator and reduced in chunk order with integer
/// counters, so the tally is identical for every thread count.
template <typename Fn>
McTally run_chunked(std::uint64_t n_samples, std::uint64_t seed, int threads, Fn fn) {
    if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
    std::uint64_t n_chunks = (n_samples + kChunkSize - 1) / kChunkSize;
    unsigned hw = std::thread::hardware_concurrency();
    std::uint64_t t = threads > 0 ? static_cast<std::uint64_t>(threads) : (hw > 0 ? hw : 1);
    if (t > n_chunks) t = n_chunks;
    std::vector<std::uint64_t> hits(n_chunks, 0);
    std::vector<std::uint64_t> failures(n_chunks, 0);
    auto work = [&](std::uint64_t w) {
        for (std::uint64_t c = w; c < n_chunks; c += t) {
            std::mt19937_64 rng = chunk_rng(seed, c);
            std::uint64_t lo = c * kChunkSize;
            std::uint64_t hi = lo + kChunkSize < n_samples ? lo + kChunkSize : n_samples;
            std::uint64_t h = 0;
            std::uint64_t f = 0;
            for (std::uint64_t i = lo; i < hi; ++i) {
                SampleOutcome o = fn(rng);
                if (o == SampleOutcome::hit) ++h;
                else if (o == SampleOutcome::failure) ++f;
            }
            hits[c] = h;
            failures[c] = f;
        }
    };
    if (t <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::uint64_t w = 0; w < t; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    McTally tally;
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
        tally.hits += hits[c];
        tally.failures += failures[c];
    }
    return tally;
}

inline VolumeEstimate estimate_from(const McTally& tally, std::uint64_t n_samples,
                                    std::uint64_t seed, std::string method) {
    VolumeEstimate est;
    est.n_samples = n_samples;
    est.seed = seed;
    est.method = std::move(method);
    est.n_failures = tally.failures;
    std::uint64_t effective = n_samples - tally.failures;
    if (effective == 0) throw std::runtime_error("every Monte Carlo sample failed");
    double m = static_cast<double>(effective);
    est.value = static_cast<double>(tally.hits) / m;
    est.std_error = std::sqrt(est.value * (1.0 - est.value) / m);
    return est;
}

}  // namespace detail

/// Uniform point on the open probability simplex of the given dimension,
/// via normalized exponential draws.
inline std::vector<double> sample_simplex(std::size_t dim, std::mt19937_64& rng) {
    if (dim == 0) throw std::invalid_argument("simplex dimension must be positive");
    std::vector<double> x(dim);
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        x[i] = -std::log(detail::uniform01(rng));
        s += x[i];
    }
    for (double& v : x) v /= s;
    return x;
}

/// Uniform point in the open unit cube of the given dimension.
inline std::vector<double> sample_unit_cube(std::size_t dim, std::mt19937_64& rng) {
    std::vector<double> x(dim);
    for (double& v : x) v = detail::uniform01(rng);
    return x;
}

/// Closed form for nu_1(lambda), the volume of the lambda-unfaithful region
/// of a single order-1 hyperedge under uniform conditionals,
///   nu_1 = (e^{2 lambda} - 2 lambda e^{lambda} - 1) / (1 - e^{lambda})^2.
/// Three numerically stable regimes: a Taylor expansion for tiny lambda, an
/// expm1 form for the middle range, and an exp(-lambda) form for large
/// lambda.
inline double nu1_closed(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    if (lambda == 0.0) return 0.0;
    if (lambda < 1e-3) {
        static const double num[] = {1.0 / 3.0,  1.0 / 3.0,      11.0 / 60.0, 13.0 / 180.0,
                                     19.0 / 840.0, 1.0 / 168.0, 247.0 / 181440.0};
        static const double den[] = {1.0,          1.0,        7.0 / 12.0,      1.0 / 4.0,
                                     31.0 / 360.0, 1.0 / 40.0, 127.0 / 20160.0, 17.0 / 12096.0};
        double pn = 0.0;
        for (int j = 6; j >= 0; --j) pn = pn * lambda + num[j];
        double pd = 0.0;
        for (int j = 7; j >= 0; --j) pd = pd * lambda + den[j];
        return lambda * pn / pd;
    }
    if (lambda <= 40.0) {
        double em = std::expm1(lambda);
        double num = std::expm1(2.0 * lambda) - 2.0 * lambda * em - 2.0 * lambda;
        return num / (em * em);
    }
    double e1 = std::exp(-lambda);
    double e2 = std::exp(-2.0 * lambda);
    double d = 1.0 - e1;
    return (1.0 - 2.0 * lambda * e1 - e2) / (d * d);
}

inline constexpr int kMaxNuOrder = 10;

/// Monte Carlo estimate of nu_h(lambda): the probability that the balanced
/// alternating sum of 2^h independent uniform logits lies within lambda of
/// zero. h must lie in [1, 10].
inline VolumeEstimate nu_h_monte_carlo(int h, double lambda, std::uint64_t n_samples,
                                       std::uint64_t seed, int threads = 0) {
    if (h < 1 || h > kMaxNuOrder) {
        throw std::invalid_argument("order must lie between 1 and " + std::to_string(kMaxNuOrder));
    }
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    std::size_t dim = std::size_t{1} << h;
    auto fn = [dim, h, lambda](std::mt19937_64& rng) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            int zeros = h - __builtin_popcountll(j);
            double sign = (zeros % 2 == 0) ? 1.0 : -1.0;
            s += sign * detail::logit(detail::uniform01(rng));
        }
        return std::abs(s) < lambda ? detail::SampleOutcome::hit : detail::SampleOutcome::miss;
    };
    return detail::estimate_from(detail::run_chunked(n_samples, seed, threads, fn), n_samples, seed,
                                 "monte_carlo");
}

/// nu_h with closed forms where they exist: tanh(lambda / 2) for h = 0 and
/// nu1_closed for h = 1; Monte Carlo otherwise.
inline VolumeEstimate nu_h(int h, double lambda, const McConfig& mc = {}) {
    if (h == 0) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
        return VolumeEstimate{std::tanh(lambda / 2.0), 0.0, 0, 0, "closed_form", 0};
    }
    if (h == 1) return VolumeEstimate{nu1_closed(lambda), 0.0, 0, 0, "closed_form", 0};
    return nu_h_monte_carlo(h, lambda, mc.n_samples, mc.seed + static_cast<std::uint64_t>(h),
                            mc.threads);
}

/// Proportion of lambda-unfaithful distributions in a decomposable model
/// under independent uniform conditionals, by the product formula
///   1 - prod_t (1 - nu_{h_t}(lambda)).
/// Repeated orders reuse a single nu estimate, and the standard error is
/// propagated by the delta method treating distinct orders as independent.
inline VolumeEstimate unfaithful_proportion_decomposable(const std::vector<int>& orders,
                                                         double lambda, const McConfig& mc = {}) {
    if (orders.empty()) throw std::invalid_argument("orders must be non-empty");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    std::vector<int> distinct;
    std::vector<std::uint64_t> mult;
    for (int h : orders) {
        if (h < 0 || h > kMaxNuOrder) {
            throw std::invalid_argument("orders must lie between 0 and " + std::to_string(kMaxNuOrder));
        }
        bool seen = false;
        for (std::size_t i = 0; i < distinct.size(); ++i) {
            if (distinct[i] == h) {
                ++mult[i];
                seen = true;
                break;
            }
        }
        if (!seen) {
            distinct.push_back(h);
            mult.push_back(1);
        }
    }
    std::vector<VolumeEstimate> nus;
    bool any_mc = false;
    for (int h : distinct) {
        VolumeEstimate e = nu_h(h, lambda, mc);
        if (e.method == "monte_carlo") any_mc = true;
        nus.push_back(std::move(e));
    }
    double prod = 1.0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        prod *= std::pow(1.0 - nus[i].value, static_cast<double>(mult[i]));
    }
    double var = 0.0;
    std::uint64_t failures = 0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        failures += nus[i].n_failures;
        if (nus[i].std_error == 0.0) continue;
        double one_minus = 1.0 - nus[i].value;
        double deriv;
        if (one_minus > 0.0) {
            deriv = static_cast<double>(mult[i]) * prod / one_minus;
        } else {
            deriv = 0.0;
        }
        var += deriv * deriv * nus[i].std_error * nus[i].std_error;
    }
    VolumeEstimate est;
    est.value = 1.0 - prod;
    est.std_error = std::sqrt(var);
    est.n_samples = any_mc ? mc.n_samples : 0;
    est.seed = any_mc ? mc.seed : 0;
    est.method = "product_formula";
    est.n_failures = failures;
    return est;
}

inline std::vector<int> hyperedge_orders(const Hypergraph& h) {
    std::vector<int> orders;
    for (const auto& e : h.hyperedges) orders.push_back(static_cast<int>(e.size()) - 1);
    return orders;
}

inline VolumeEstimate unfaithful_proportion_decomposable(const Hypergraph& h, double lambda,
                                                         const McConfig& mc = {}) {
    if (!is_decomposable(h).decomposable) {
        throw std::invalid_argument(
            "the product formula requires a decomposable generating class, whose hyperedge "
            "marginals are variation independent");
    }
    return unfaithful_proportion_decomposable(hyperedge_orders(h), lambda, mc);
}

/// Closed-form lower bound on the unfaithful proportion of a model with the
/// given hyperedge orders (each at least 1):
///   max_t nu_1(lambda / 2^{h_t - 1})^{2^{h_t - 1}}.
inline VolumeEstimate volume_lower_bound(const std::vector<int>& orders, double lambda) {
    if (orders.empty()) throw std::invalid_argument("orders must be non-empty");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    double best = 0.0;
    for (int h : orders) {
        if (h < 1) throw std::invalid_argument("the lower bound requires orders of at least 1");
        double half = std::pow(2.0, h - 1);
        double v = std::pow(nu1_closed(lambda / half), half);
        if (v > best) best = v;
    }
    return VolumeEstimate{best, 0.0, 0, 0, "lower_bound", 0};
}

inline VolumeEstimate volume_lower_bound(const Hypergraph& h, double lambda) {
    return volume_lower_bound(hyperedge_orders(h), lambda);
}

/// Association measures on a 2x2 table and their natural parameter spaces.
enum class AssociationMeasureKind { log_odds_ratio, yule_q, cond_prob_difference };

inline std::string measure_name(AssociationMeasureKind kind) {
    switch (kind) {
        case AssociationMeasureKind::log_odds_ratio: return "log_odds_ratio";
        case AssociationMeasureKind::yule_q: return "yule_q";
        case AssociationMeasureKind::cond_prob_difference: return "cond_prob_difference";
    }
    throw std::invalid_argument("unknown association measure");
}

/// Parameter space the measure is integrated over: the open probability
/// simplex of 2x2 tables for the log odds ratio and Yule's Q, the unit cube
/// of (marginal, conditional, conditional) probabilities for the conditional
/// probability difference.
inline std::string measure_parameter_space(AssociationMeasureKind kind) {
    return kind == AssociationMeasureKind::cond_prob_difference ? "unit_cube" : "simplex";
}

/// Closed form for the cond_prob_difference proportion: the volume of
/// |u - v| < lambda in the unit square, 2 lambda - lambda^2 for lambda in
/// [0, 1].
inline double cond_prob_difference_closed_form(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    if (lambda >= 1.0) return 1.0;
    return 2.0 * lambda - lambda * lambda;
}

/// Proportion of 2x2 tables whose association, in the given measure, is
/// smaller than lambda in absolute value, under the uniform distribution on
/// the measure's parameter space.
inline VolumeEstimate two_by_two_unfaithful_proportion(AssociationMeasureKind kind, double lambda,
                                                       const McConfig& mc = {}) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    auto fn = [kind, lambda](std::mt19937_64& rng) {
        double a;
        if (kind == AssociationMeasureKind::cond_prob_difference) {
            std::vector<double> u = sample_unit_cube(3, rng);
            a = u[1] - u[2];
        } else {
            std::vector<double> p = sample_simplex(4, rng);
            if (kind == AssociationMeasureKind::log_odds_ratio) {
                a = std::log(p[0]) + std::log(p[3]) - std::log(p[1]) - std::log(p[2]);
            } else {
                double s = p[0] * p[3];
                double t = p[1] * p[2];
                a = (s - t) / (s + t);
            }
        }
        return std::abs(a) < lambda ? detail::SampleOutcome::hit : detail::SampleOutcome::miss;
    };
    return detail::estimate_from(detail::run_chunked(mc.n_samples, mc.seed, mc.threads, fn),
                                 mc.n_samples, mc.seed, "monte_carlo");
}

/// Proportion of lambda-unfaithful distributions after projecting uniform
/// draws from the full simplex onto the model of h. Each sample is fitted by
/// IPF; samples whose fit does not converge are counted in n_failures and
/// excluded. A sample is a hit when the projection fails strong
/// faithfulness, i.e. some hyperedge interaction of the projection is at
/// most lambda in absolute value.
inline VolumeEstimate projected_unfaithful_proportion(const Hypergraph& h, double lambda,
                                                      const McConfig& mc = {},
                                                      const FitConfig& fit = {1e-8, 2000}) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    if (h.hyperedges.empty()) throw std::invalid_argument("projection requires at least one hyperedge");
    int k = h.k();
    std::size_t cells = table_size(k);
    auto fn = [&h, k, cells, lambda, &fit](std::mt19937_64& rng) {
        JointDistribution sample = JointDistribution::normalized(k, sample_simplex(cells, rng));
        FitResult fr = ipf_fit(sample, h, fit);
        if (!fr.converged) return detail::SampleOutcome::failure;
        double mn = detail::min_abs_edge_gamma(fr.fitted, h);
        return mn > lambda ? detail::SampleOutcome::miss : detail::SampleOutcome::hit;
    };
    return detail::estimate_from(detail::run_chunked(mc.n_samples, mc.seed, mc.threads, fn),
                                 mc.n_samples, mc.seed, "monte_carlo");
}

/// Monte Carlo estimate of the unfaithful proportion of a chain of order h
/// and length ell under independent uniform conditionals. For h = 1 the
/// parameterization draws one root probability plus two conditionals per
/// edge (2 ell + 1 in total, the root does not enter any interaction); for
/// h >= 2 it draws 2^h conditionals per edge. A sample is a hit when some
/// edge interaction is smaller than lambda in absolute value.
inline VolumeEstimate chain_unfaithful_mc(int h, std::size_t ell, double lambda,
                                          const McConfig& mc = {}) {
    if (h < 1 || h > kMaxNuOrder) {
        throw std::invalid_argument("order must lie between 1 and " + std::to_string(kMaxNuOrder));
    }
    if (ell == 0) throw std::invalid_argument("chain length must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    std::size_t dim = std::size_t{1} << h;
    auto fn = [h, ell, lambda, dim](std::mt19937_64& rng) {
        if (h == 1) (void)detail::uniform01(rng);
        bool any = false;
        for (std::size_t t = 0; t < ell; ++t) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                int zeros = h - __builtin_popcountll(j);
                double sign = (zeros % 2 == 0) ? 1.0 : -1.0;
                s += sign * detail::logit(detail::uniform01(rng));
            }
            if (std::abs(s) < lambda) any = true;
        }
        return any ? detail::SampleOutcome::hit : detail::SampleOutcome::miss;
    };
    return detail::estimate_from(detail::run_chunked(mc.n_samples, mc.seed, mc.threads, fn),
                                 mc.n_samples, mc.seed, "monte_carlo");
}

}  // namespace loglin
