#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace loglin {

/// Maximum number of binary variables a table may have.
inline constexpr int kMaxVariables = 20;

/// Validates a variable count and returns the number of cells, 2^k.
inline std::size_t table_size(int k) {
    if (k < 1 || k > kMaxVariables) {
        throw std::invalid_argument("variable count must be between 1 and " +
                                    std::to_string(kMaxVariables) + ", got " + std::to_string(k));
    }
    return std::size_t{1} << k;
}

/// Compensated (Kahan) sum of a vector of doubles.
inline double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0;
    double carry = 0.0;
    for (double x : xs) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

/// Level (0 or 1) of variable v in the cell with lexicographic index idx.
/// Variable 0 varies slowest; variable k-1 varies fastest.
inline int cell_level(std::size_t idx, int v, int k) {
    return static_cast<int>((idx >> (k - 1 - v)) & 1u);
}

/// Lexicographic cell index for a full vector of k levels.
inline std::size_t index_of_cell(const std::vector<int>& levels) {
    int k = static_cast<int>(levels.size());
    table_size(k);
    std::size_t idx = 0;
    for (int v = 0; v < k; ++v) {
        if (levels[v] != 0 && levels[v] != 1) {
            throw std::invalid_argument("cell levels must be 0 or 1");
        }
        idx = (idx << 1) | static_cast<std::size_t>(levels[v]);
    }
    return idx;
}

/// Levels of all k variables for a lexicographic cell index.
inline std::vector<int> cell_of_index(std::size_t idx, int k) {
    if (idx >= table_size(k)) {
        throw std::invalid_argument("cell index out of range");
    }
    std::vector<int> levels(k);
    for (int v = 0; v < k; ++v) levels[v] = cell_level(idx, v, k);
    return levels;
}

/// Renders a cell index as a string of k binary digits, e.g. "010".
inline std::string cell_label(std::size_t idx, int k) {
    std::string s(static_cast<std::size_t>(k), '0');
    for (int v = 0; v < k; ++v) s[v] = static_cast<char>('0' + cell_level(idx, v, k));
    return s;
}

/// A sorted set of variable indices identifying a marginal table.
struct MarginalSet {
    std::vector<int> vars;

    static MarginalSet of(std::vector<int> vs) {
        std::sort(vs.begin(), vs.end());
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (vs[i] < 0) throw std::invalid_argument("variable indices must be non-negative");
            if (i > 0 && vs[i] == vs[i - 1]) {
                throw std::invalid_argument("duplicate variable index " + std::to_string(vs[i]));
            }
        }
        return MarginalSet{std::move(vs)};
    }

    std::size_t size() const { return vars.size(); }
    bool empty() const { return vars.empty(); }

    bool contains(int v) const {
        return std::binary_search(vars.begin(), vars.end(), v);
    }

    bool subset_of(const MarginalSet& other) const {
        return std::includes(other.vars.begin(), other.vars.end(), vars.begin(), vars.end());
    }

    void validate_for(int k) const {
        for (int v : vars) {
            if (v >= k) {
                throw std::invalid_argument("variable index " + std::to_string(v) +
                                            " out of range for " + std::to_string(k) + " variables");
            }
        }
    }

    /// Bitmask with bit v set for every member variable v.
    std::uint32_t mask() const {
        std::uint32_t m = 0;
        for (int v : vars) m |= (1u << v);
        return m;
    }

    static MarginalSet from_mask(std::uint32_t m) {
        std::vector<int> vs;
        for (int v = 0; v < 32; ++v) {
            if (m & (1u << v)) vs.push_back(v);
        }
        return MarginalSet{std::move(vs)};
    }

    friend bool operator==(const MarginalSet& a, const MarginalSet& b) { return a.vars == b.vars; }
    friend bool operator!=(const MarginalSet& a, const MarginalSet& b) { return !(a == b); }
};

/// Complement of a marginal set within {0, ..., k-1}.
inline MarginalSet complement(const MarginalSet& m, int k) {
    table_size(k);
    m.validate_for(k);
    std::vector<int> vs;
    vs.reserve(static_cast<std::size_t>(k) - m.size());
    for (int v = 0; v < k; ++v) {
        if (!m.contains(v)) vs.push_back(v);
    }
    return MarginalSet{std::move(vs)};
}

/// Canonical order on variable subsets: by cardinality, then lexicographically
/// by the sorted member list. On bitmasks this is (popcount, numeric value).
inline bool canonical_subset_less(std::uint32_t a, std::uint32_t b) {
    int pa = __builtin_popcount(a);
    int pb = __builtin_popcount(b);
    if (pa != pb) return pa < pb;
    return a < b;
}

inline bool canonical_less(const MarginalSet& a, const MarginalSet& b) {
    return canonical_subset_less(a.mask(), b.mask());
}

/// All 2^k variable subsets as bitmasks, in canonical order.
inline std::vector<std::uint32_t> canonical_subsets(int k) {
    std::size_t n = table_size(k);
    std::vector<std::uint32_t> masks(n);
    for (std::size_t i = 0; i < n; ++i) masks[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(masks.begin(), masks.end(), canonical_subset_less);
    return masks;
}

/// The cell whose set of 1-levels is exactly the given variable subset.
inline std::size_t cell_of_subset(std::uint32_t varmask, int k) {
    std::size_t idx = 0;
    for (int v = 0; v < k; ++v) {
        if (varmask & (1u << v)) idx |= (std::size_t{1} << (k - 1 - v));
    }
    return idx;
}

/// A strictly positive joint distribution of k binary variables in
/// lexicographic cell order.
struct JointDistribution {
    int k = 0;
    std::vector<double> p;

    static JointDistribution from_probabilities(int k, std::vector<double> probs) {
        std::size_t n = table_size(k);
        if (probs.size() != n) {
            throw std::invalid_argument("expected " + std::to_string(n) + " probabilities, got " +
                                        std::to_string(probs.size()));
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(probs[i] > 0.0) || !std::isfinite(probs[i])) {
                throw std::invalid_argument("probability of cell " + cell_label(i, k) +
                                            " must be strictly positive and finite");
            }
        }
        double s = kahan_sum(probs);
        if (std::abs(s - 1.0) > 1e-12) {
            throw std::invalid_argument("probabilities must sum to 1 within 1e-12, sum is " +
                                        std::to_string(s));
        }
        return JointDistribution{k, std::move(probs)};
    }

    /// Normalizes strictly positive weights into a distribution.
    static JointDistribution normalized(int k, std::vector<double> weights) {
        std::size_t n = table_size(k);
        if (weights.size() != n) {
            throw std::invalid_argument("expected " + std::to_string(n) + " weights");
        }
        double s = kahan_sum(weights);
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("weights must have a positive finite sum");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(weights[i] > 0.0)) {
                throw std::invalid_argument("weight of cell " + cell_label(i, k) +
                                            " must be strictly positive");
            }
            weights[i] /= s;
        }
        return JointDistribution{k, std::move(weights)};
    }

    std::size_t cells() const { return p.size(); }
};

/// A contingency table of non-negative integer cell counts.
struct CountTable {
    int k = 0;
    std::vector<std::uint64_t> n;
    std::uint64_t total = 0;

    static CountTable from_counts(int k, std::vector<std::uint64_t> counts) {
        std::size_t cells = table_size(k);
        if (counts.size() != cells) {
            throw std::invalid_argument("expected " + std::to_string(cells) + " counts, got " +
                                        std::to_string(counts.size()));
        }
        std::uint64_t total = 0;
        for (std::uint64_t c : counts) total += c;
        if (total == 0) {
            throw std::invalid_argument("count table must contain at least one observation");
        }
        return CountTable{k, std::move(counts), total};
    }

    std::size_t cells() const { return n.size(); }
};

/// Relative frequencies of a count table. Without smoothing every cell must
/// be positive; with smoothing 0.5 is added to every cell first.
inline JointDistribution empirical_distribution(const CountTable& ct, bool smoothing = false) {
    std::size_t cells = ct.cells();
    std::vector<double> p(cells);
    if (smoothing) {
        double denom = static_cast<double>(ct.total) + 0.5 * static_cast<double>(cells);
        for (std::size_t i = 0; i < cells; ++i) {
            p[i] = (static_cast<double>(ct.n[i]) + 0.5) / denom;
        }
    } else {
        for (std::size_t i = 0; i < cells; ++i) {
            if (ct.n[i] == 0) {
                throw std::runtime_error("zero cell " + cell_label(i, ct.k) +
                                         "; enable smoothing to add 0.5 to every cell");
            }
            p[i] = static_cast<double>(ct.n[i]) / static_cast<double>(ct.total);
        }
    }
    return JointDistribution::normalized(ct.k, std::move(p));
}

/// Index of the sub-cell of idx spanned by the variables of m (in sorted
/// order, first member slowest).
inline std::size_t marginal_index(std::size_t idx, const MarginalSet& m, int k) {
    std::size_t out = 0;
    for (int v : m.vars) out = (out << 1) | static_cast<std::size_t>(cell_level(idx, v, k));
    return out;
}

/// Marginal probability table of p over the variables in m, in lexicographic
/// order of the kept variables. The empty set yields the single total mass.
inline std::vector<double> marginal(const JointDistribution& p, const MarginalSet& m) {
    m.validate_for(p.k);
    std::size_t out_cells = std::size_t{1} << m.size();
    std::vector<double> sums(out_cells, 0.0);
    std::vector<double> carries(out_cells, 0.0);
    for (std::size_t i = 0; i < p.cells(); ++i) {
        std::size_t j = marginal_index(i, m, p.k);
        double y = p.p[i] - carries[j];
        double t = sums[j] + y;
        carries[j] = (t - sums[j]) - y;
        sums[j] = t;
    }
    return sums;
}

/// Marginal count table of ct over the variables in m.
inline std::vector<std::uint64_t> marginal_counts(const CountTable& ct, const MarginalSet& m) {
    m.validate_for(ct.k);
    std::size_t out_cells = std::size_t{1} << m.size();
    std::vector<std::uint64_t> sums(out_cells, 0);
    for (std::size_t i = 0; i < ct.cells(); ++i) {
        sums[marginal_index(i, m, ct.k)] += ct.n[i];
    }
    return sums;
}

}  // namespace loglin
