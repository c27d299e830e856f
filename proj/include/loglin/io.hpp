#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "loglin/hypergraph.hpp"
#include "loglin/inference.hpp"
#include "loglin/interaction.hpp"
#include "loglin/ipf.hpp"
#include "loglin/table.hpp"
#include "loglin/volumes.hpp"

namespace loglin {

/// Renders a double with 12 significant digits.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
}

/// Renders a double with 17 significant digits (round-trip exact).
inline std::string format_double_exact(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

/// A parsed cell table: either labelled rows (one line per cell with 0/1
/// levels and a count column) or a flat lexicographic list of values.
struct TableData {
    int k = 0;
    std::vector<std::string> labels;
    std::vector<double> values;
    bool labelled = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& tok, std::size_t line_no) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": expected a finite number, got '" +
                                 tok + "'");
    }
    return v;
}

inline bool has_alpha(const std::string& s) {
    for (char ch : s) {
        if (std::isalpha(static_cast<unsigned char>(ch))) return true;
    }
    return false;
}

}  // namespace detail

/// Reads a cell table in either supported layout. Labelled layout: a header
/// of variable names ending in a literal "count" column, then one row per
/// cell with 0/1 levels; omitted cells default to zero and duplicated cells
/// are an error. Flat layout: numeric values only, in lexicographic cell
/// order, any number of values per line; the total must be a power of two.
inline TableData read_table_csv(std::istream& in, const std::string& name = "<stream>") {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string t = detail::trim(raw);
        if (!t.empty()) lines.emplace_back(line_no, t);
    }
    if (lines.empty()) throw std::runtime_error(name + ": empty table");

    TableData td;
    if (detail::has_alpha(lines.front().second)) {
        std::vector<std::string> header = detail::split_csv(lines.front().second);
        if (header.size() < 2 || header.back() != "count") {
            throw std::runtime_error("line " + std::to_string(lines.front().first) +
                                     ": header must list variable names followed by a final 'count' "
                                     "column");
        }
        td.labelled = true;
        td.labels.assign(header.begin(), header.end() - 1);
        td.k = static_cast<int>(td.labels.size());
        std::size_t cells = table_size(td.k);
        td.values.assign(cells, 0.0);
        std::vector<bool> seen(cells, false);
        for (std::size_t r = 1; r < lines.size(); ++r) {
            std::size_t ln = lines[r].first;
            std::vector<std::string> toks = detail::split_csv(lines[r].second);
            if (toks.size() != header.size()) {
                throw std::runtime_error("line " + std::to_string(ln) + ": expected " +
                                         std::to_string(header.size()) + " fields, got " +
                                         std::to_string(toks.size()));
            }
            std::vector<int> levels(td.k);
            for (int v = 0; v < td.k; ++v) {
                if (toks[v] == "0") levels[v] = 0;
                else if (toks[v] == "1") levels[v] = 1;
                else {
                    throw std::runtime_error("line " + std::to_string(ln) + ": level of " +
                                             td.labels[v] + " must be 0 or 1, got '" + toks[v] + "'");
                }
            }
            std::size_t idx = index_of_cell(levels);
            if (seen[idx]) {
                throw std::runtime_error("line " + std::to_string(ln) + ": duplicate cell " +
                                         cell_label(idx, td.k));
            }
            seen[idx] = true;
            td.values[idx] = detail::parse_double(toks.back(), ln);
        }
    } else {
        for (const auto& [ln, text] : lines) {
            for (const std::string& tok : detail::split_csv(text)) {
                if (tok.empty()) continue;
                td.values.push_back(detail::parse_double(tok, ln));
            }
        }
        std::size_t n = td.values.size();
        int k = 0;
        while ((std::size_t{1} << k) < n && k <= kMaxVariables) ++k;
        if (n < 2 || (std::size_t{1} << k) != n || k > kMaxVariables) {
            throw std::runtime_error(name + ": flat tables must hold a power-of-two number of values "
                                            "(between 2 and 2^" +
                                     std::to_string(kMaxVariables) + "), got " + std::to_string(n));
        }
        td.k = k;
        td.labels = default_labels(k);
    }
    return td;
}

inline TableData read_table_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_table_csv(in, path);
}

/// Interprets table values as integer counts.
inline CountTable to_counts(const TableData& td) {
    std::vector<std::uint64_t> n(td.values.size());
    for (std::size_t i = 0; i < td.values.size(); ++i) {
        double v = td.values[i];
        double r = std::round(v);
        if (v < 0.0 || std::abs(v - r) > 1e-9) {
            throw std::runtime_error("cell " + cell_label(i, td.k) +
                                     " holds " + format_double(v) + ", which is not a non-negative "
                                     "integer count");
        }
        n[i] = static_cast<std::uint64_t>(r);
    }
    return CountTable::from_counts(td.k, std::move(n));
}

/// Interprets table values as cell probabilities or positive weights and
/// normalizes them. Zero cells are an error unless smoothing is requested,
/// in which case 0.5 is added to every cell first.
inline JointDistribution to_distribution(const TableData& td, bool smoothing = false) {
    std::vector<double> w = td.values;
    if (smoothing) {
        for (double& v : w) v += 0.5;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0)) {
            throw std::runtime_error("zero cell " + cell_label(i, td.k) +
                                     "; enable smoothing to add 0.5 to every cell");
        }
    }
    return JointDistribution::normalized(td.k, std::move(w));
}

/// Writes a labelled cell table (header row, then one row per cell).
inline void write_table_csv(std::ostream& out, const std::vector<std::string>& labels,
                            const std::vector<double>& values) {
    int k = static_cast<int>(labels.size());
    if (values.size() != table_size(k)) {
        throw std::invalid_argument("value count does not match label count");
    }
    for (const auto& l : labels) out << l << ',';
    out << "count\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (int v = 0; v < k; ++v) out << cell_level(i, v, k) << ',';
        out << format_double_exact(values[i]) << '\n';
    }
}

/// Human-readable name of a variable subset, e.g. "ABD"; "{}" for the empty
/// set.
inline std::string subset_name(std::uint32_t mask, const std::vector<std::string>& labels) {
    if (mask == 0) return "{}";
    std::string s;
    for (std::size_t v = 0; v < labels.size(); ++v) {
        if (mask & (1u << v)) s += labels[v];
    }
    return s;
}

/// Writes an interaction vector as CSV with header "subset,gamma", rows in
/// canonical subset order.
inline void write_interaction_csv(std::ostream& out, const InteractionVector& iv,
                                  const std::vector<std::string>& labels) {
    if (static_cast<int>(labels.size()) != iv.k) {
        throw std::invalid_argument("label count does not match variable count");
    }
    out << "subset,gamma\n";
    for (std::uint32_t m : canonical_subsets(iv.k)) {
        out << subset_name(m, labels) << ',' << format_double(iv.gamma[m]) << '\n';
    }
}

inline nlohmann::json hypergraph_to_json(const Hypergraph& h) {
    nlohmann::json j;
    j["vertices"] = h.vertices;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : h.hyperedges) {
        nlohmann::json edge = nlohmann::json::array();
        for (int v : e.vars) edge.push_back(h.vertices[static_cast<std::size_t>(v)]);
        edges.push_back(edge);
    }
    j["hyperedges"] = edges;
    return j;
}

inline Hypergraph hypergraph_from_json(const nlohmann::json& j) {
    if (!j.contains("vertices") || !j.contains("hyperedges")) {
        throw std::runtime_error("hypergraph JSON needs 'vertices' and 'hyperedges' fields");
    }
    std::vector<std::string> vertices = j.at("vertices").get<std::vector<std::string>>();
    std::vector<MarginalSet> edges;
    for (const auto& edge : j.at("hyperedges")) {
        std::vector<int> vs;
        for (const auto& lbl : edge) {
            std::string name = lbl.get<std::string>();
            auto it = std::find(vertices.begin(), vertices.end(), name);
            if (it == vertices.end()) {
                throw std::runtime_error("hyperedge vertex '" + name + "' is not a declared vertex");
            }
            vs.push_back(static_cast<int>(it - vertices.begin()));
        }
        edges.push_back(MarginalSet::of(std::move(vs)));
    }
    return Hypergraph::make(std::move(vertices), std::move(edges));
}

inline nlohmann::json fit_result_to_json(const FitResult& fr) {
    nlohmann::json j;
    j["k"] = fr.fitted.k;
    j["probabilities"] = fr.fitted.p;
    j["iterations"] = fr.iterations;
    j["max_marginal_gap"] = fr.max_marginal_gap;
    j["converged"] = fr.converged;
    return j;
}

/// Writes a backward selection trace as JSON lines: one object per tested
/// hyperedge, then one closing object with the final model.
inline void write_search_trace_jsonl(std::ostream& out, const SearchTrace& trace) {
    auto edge_names = [](const Hypergraph& h) {
        std::vector<std::string> names;
        for (const auto& e : h.hyperedges) names.push_back(subset_name(e.mask(), h.vertices));
        return names;
    };
    for (const auto& step : trace.steps) {
        nlohmann::json j;
        j["model"] = edge_names(step.model);
        j["tested"] = subset_name(step.tested.mask(), step.model.vertices);
        j["gamma_hat"] = step.gamma_hat;
        j["std_error"] = step.std_error;
        j["statistic"] = step.statistic;
        j["p_value"] = step.p_value;
        j["action"] = step.removed ? "remove" : "keep";
        out << j.dump() << '\n';
    }
    nlohmann::json fin;
    fin["final"] = edge_names(trace.final);
    fin["aborted"] = trace.aborted;
    if (trace.aborted) fin["abort_reason"] = trace.abort_reason;
    out << fin.dump() << '\n';
}

/// One row of a volume curve.
struct CurveRow {
    double lambda = 0.0;
    VolumeEstimate estimate;
};

/// Writes volume curves as CSV with the fixed header
/// "lambda,estimate,std_error,n_samples,method".
inline void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows) {
    out << "lambda,estimate,std_error,n_samples,method\n";
    for (const auto& r : rows) {
        out << format_double(r.lambda) << ',' << format_double(r.estimate.value) << ','
            << format_double(r.estimate.std_error) << ',' << r.estimate.n_samples << ','
            << r.estimate.method << '\n';
    }
}

}  // namespace loglin
