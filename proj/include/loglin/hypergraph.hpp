#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loglin/table.hpp"

namespace loglin {

/// Default vertex labels "A", "B", ... for k variables.
inline std::vector<std::string> default_labels(int k) {
    table_size(k);
    std::vector<std::string> labels(static_cast<std::size_t>(k));
    for (int v = 0; v < k; ++v) labels[v] = std::string(1, static_cast<char>('A' + v));
    return labels;
}

/// A hypergraph on k labelled binary variables whose hyperedges form an
/// antichain (no hyperedge contains another). Hyperedges are kept in
/// canonical order: by cardinality, then lexicographically.
struct Hypergraph {
    std::vector<std::string> vertices;
    std::vector<MarginalSet> hyperedges;

    int k() const { return static_cast<int>(vertices.size()); }

    static Hypergraph make(std::vector<std::string> vertices, std::vector<MarginalSet> edges) {
        int k = static_cast<int>(vertices.size());
        table_size(k);
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (vertices[i].empty()) throw std::invalid_argument("vertex labels must be non-empty");
            for (std::size_t j = i + 1; j < vertices.size(); ++j) {
                if (vertices[i] == vertices[j]) {
                    throw std::invalid_argument("duplicate vertex label " + vertices[i]);
                }
            }
        }
        for (const auto& e : edges) {
            if (e.empty()) throw std::invalid_argument("hyperedges must be non-empty");
            e.validate_for(k);
        }
        std::sort(edges.begin(), edges.end(), canonical_less);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            for (std::size_t j = 0; j < edges.size(); ++j) {
                if (i != j && edges[i].subset_of(edges[j])) {
                    throw std::invalid_argument("hyperedges must form an antichain");
                }
            }
        }
        return Hypergraph{std::move(vertices), std::move(edges)};
    }

    MarginalSet vertex_union() const {
        std::uint32_t m = 0;
        for (const auto& e : hyperedges) m |= e.mask();
        return MarginalSet::from_mask(m);
    }

    friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
        return a.vertices == b.vertices && a.hyperedges == b.hyperedges;
    }
};

/// Reduces an arbitrary collection of subsets to its maximal elements and
/// builds the hypergraph they generate. The input must be non-empty.
inline Hypergraph normalize_generating_class(std::vector<std::string> vertices,
                                             std::vector<MarginalSet> sets) {
    if (sets.empty()) {
        throw std::invalid_argument("generating class must contain at least one set");
    }
    int k = static_cast<int>(vertices.size());
    table_size(k);
    std::vector<MarginalSet> maximal;
    for (const auto& s : sets) {
        if (s.empty()) throw std::invalid_argument("generating sets must be non-empty");
        s.validate_for(k);
        bool dominated = false;
        for (const auto& t : sets) {
            if (s.mask() != t.mask() && s.subset_of(t)) {
                dominated = true;
                break;
            }
        }
        if (!dominated && std::find(maximal.begin(), maximal.end(), s) == maximal.end()) {
            maximal.push_back(s);
        }
    }
    return Hypergraph::make(std::move(vertices), std::move(maximal));
}

inline Hypergraph normalize_generating_class(int k, std::vector<MarginalSet> sets) {
    return normalize_generating_class(default_labels(k), std::move(sets));
}

/// All subsets (as variable bitmasks) contained in some hyperedge, in
/// canonical order. Includes the empty set.
inline std::vector<std::uint32_t> descending_class(const Hypergraph& h) {
    std::size_t n = table_size(h.k());
    std::vector<std::uint32_t> edge_masks;
    edge_masks.reserve(h.hyperedges.size());
    for (const auto& e : h.hyperedges) edge_masks.push_back(e.mask());
    std::vector<std::uint32_t> out;
    for (std::uint32_t m : canonical_subsets(h.k())) {
        (void)n;
        bool inside = (m == 0);
        for (std::uint32_t em : edge_masks) {
            if ((m & em) == m) {
                inside = true;
                break;
            }
        }
        if (inside) out.push_back(m);
    }
    return out;
}

/// All non-empty subsets not contained in any hyperedge, in canonical order.
inline std::vector<std::uint32_t> ascending_class(const Hypergraph& h) {
    std::vector<std::uint32_t> edge_masks;
    for (const auto& e : h.hyperedges) edge_masks.push_back(e.mask());
    std::vector<std::uint32_t> out;
    for (std::uint32_t m : canonical_subsets(h.k())) {
        if (m == 0) continue;
        bool inside = false;
        for (std::uint32_t em : edge_masks) {
            if ((m & em) == m) {
                inside = true;
                break;
            }
        }
        if (!inside) out.push_back(m);
    }
    return out;
}

/// Outcome of the decomposability test. When decomposable, order holds
/// indices into hyperedges arranged so that the running intersection
/// property holds.
struct DecomposabilityResult {
    bool decomposable = false;
    std::vector<std::size_t> order;
};

/// Checks the running intersection property: for each j >= 1, the overlap of
/// edge order[j] with the union of its predecessors lies inside a single
/// predecessor.
inline bool verify_running_intersection(const Hypergraph& h, const std::vector<std::size_t>& order) {
    if (order.size() != h.hyperedges.size()) return false;
    std::vector<bool> seen(h.hyperedges.size(), false);
    for (std::size_t idx : order) {
        if (idx >= h.hyperedges.size() || seen[idx]) return false;
        seen[idx] = true;
    }
    for (std::size_t j = 1; j < order.size(); ++j) {
        std::uint32_t prior = 0;
        for (std::size_t i = 0; i < j; ++i) prior |= h.hyperedges[order[i]].mask();
        std::uint32_t sep = h.hyperedges[order[j]].mask() & prior;
        bool housed = false;
        for (std::size_t i = 0; i < j; ++i) {
            std::uint32_t em = h.hyperedges[order[i]].mask();
            if ((sep & em) == sep) {
                housed = true;
                break;
            }
        }
        if (!housed) return false;
    }
    return true;
}

/// Graham reduction: repeatedly delete vertices belonging to a single
/// hyperedge and hyperedges contained in another. The hypergraph is
/// decomposable exactly when everything is eliminated; the deletion order of
/// the hyperedges, reversed, is a running-intersection ordering.
inline DecomposabilityResult is_decomposable(const Hypergraph& h) {
    int k = h.k();
    std::vector<std::uint32_t> masks;
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < h.hyperedges.size(); ++i) {
        masks.push_back(h.hyperedges[i].mask());
        alive.push_back(i);
    }
    std::vector<std::size_t> deleted;
    bool progress = true;
    while (progress && !alive.empty()) {
        progress = false;
        for (int v = 0; v < k; ++v) {
            std::uint32_t bit = 1u << v;
            std::size_t owner_count = 0;
            for (std::size_t a : alive) {
                if (masks[a] & bit) ++owner_count;
            }
            if (owner_count == 1) {
                for (std::size_t a : alive) masks[a] &= ~bit;
                progress = true;
            }
        }
        for (std::size_t pos = 0; pos < alive.size(); ++pos) {
            std::size_t a = alive[pos];
            bool drop = (masks[a] == 0);
            if (!drop) {
                for (std::size_t b : alive) {
                    if (a != b && (masks[a] & masks[b]) == masks[a]) {
                        drop = true;
                        break;
                    }
                }
            }
            if (drop) {
                deleted.push_back(a);
                alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pos));
                progress = true;
                break;
            }
        }
    }
    DecomposabilityResult res;
    res.decomposable = alive.empty();
    if (res.decomposable) {
        res.order.assign(deleted.rbegin(), deleted.rend());
    }
    return res;
}

/// A chain of order h and length ell: a decomposable hypergraph whose
/// hyperedges all have h + 1 vertices and jointly cover the vertex set.
struct ChainDescriptor {
    int order = 0;
    std::size_t length = 0;
};

/// Identifies h as a chain, if it is one.
inline std::optional<ChainDescriptor> chain_descriptor(const Hypergraph& h) {
    if (h.hyperedges.empty()) return std::nullopt;
    std::size_t sz = h.hyperedges.front().size();
    if (sz < 2) return std::nullopt;
    for (const auto& e : h.hyperedges) {
        if (e.size() != sz) return std::nullopt;
    }
    if (static_cast<int>(h.vertex_union().size()) != h.k()) return std::nullopt;
    if (!is_decomposable(h).decomposable) return std::nullopt;
    return ChainDescriptor{static_cast<int>(sz) - 1, h.hyperedges.size()};
}

}  // namespace loglin
