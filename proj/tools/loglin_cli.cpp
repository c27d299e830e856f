#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <loglin/loglin.hpp>

namespace {

using loglin::CurveRow;
using loglin::McConfig;
using loglin::VolumeEstimate;

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    fn(out);
}

loglin::Hypergraph load_hypergraph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return loglin::hypergraph_from_json(j);
}

std::vector<double> collect_lambdas(const std::vector<double>& lambdas, const std::string& grid) {
    std::vector<double> out = lambdas;
    if (!grid.empty()) {
        std::stringstream ss(grid);
        std::string lo_s, hi_s, n_s;
        if (!std::getline(ss, lo_s, ':') || !std::getline(ss, hi_s, ':') || !std::getline(ss, n_s)) {
            throw std::runtime_error("--grid expects lo:hi:n, e.g. 0:2:21");
        }
        double lo = std::stod(lo_s);
        double hi = std::stod(hi_s);
        long n = std::stol(n_s);
        if (n < 1) throw std::runtime_error("--grid needs at least one point");
        if (n == 1) {
            out.push_back(lo);
        } else {
            for (long i = 0; i < n; ++i) {
                out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
            }
        }
    }
    if (out.empty()) throw std::runtime_error("pass at least one lambda via --lambda or --grid");
    return out;
}

void emit_curve(const std::string& output, const std::vector<CurveRow>& rows) {
    std::uint64_t failures = 0;
    for (const auto& r : rows) failures += r.estimate.n_failures;
    with_output(output, [&](std::ostream& out) { loglin::write_curve_csv(out, rows); });
    if (failures > 0) {
        std::cerr << "warning: " << failures << " Monte Carlo samples were discarded because the "
                  << "inner fit did not converge\n";
    }
}

loglin::AssociationMeasureKind parse_measure(const std::string& name) {
    if (name == "phi1" || name == "log_odds_ratio") return loglin::AssociationMeasureKind::log_odds_ratio;
    if (name == "phi2" || name == "yule_q") return loglin::AssociationMeasureKind::yule_q;
    if (name == "phi3" || name == "cond_prob_difference") {
        return loglin::AssociationMeasureKind::cond_prob_difference;
    }
    throw std::runtime_error("unknown measure '" + name +
                             "' (expected phi1|phi2|phi3 or log_odds_ratio|yule_q|cond_prob_difference)");
}

loglin::Hypergraph relabel(const loglin::Hypergraph& h, const std::vector<std::string>& labels) {
    return loglin::Hypergraph::make(labels, h.hyperedges);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "loglin: association hypergraphs, log-linear interactions, and strong-faithfulness "
        "volumes for binary contingency tables"};
    app.require_subcommand(1);

    std::string table_path;
    std::string output;
    std::string hypergraph_path;
    bool smoothing = false;
    double alpha = 0.05;
    double epsilon = 0.25;
    double tol = 1e-10;
    double n_obs = 0.0;
    std::vector<int> orders;
    std::vector<double> lambdas;
    std::string grid;
    std::uint64_t samples = 1000000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::uint64_t search_seed = 0;
    int order_h = 1;
    std::size_t chain_length = 1;
    bool exact = false;
    std::string measure = "phi1";
    double fit_tol = 1e-8;
    int fit_max_iter = 2000;

    const std::string lambda_help =
        "association threshold(s); repeatable or comma separated. The RNG seed is reused for every "
        "lambda, so Monte Carlo curves over a lambda grid are exactly monotone";

    CLI::App* gamma = app.add_subcommand(
        "gamma", "print the log-linear interaction vector of a table as CSV (subset,gamma)");
    gamma->add_option("table", table_path, "cell table CSV (levels+count rows, or a flat list)")
        ->required();
    gamma->add_flag("--smoothing", smoothing, "add 0.5 to every cell before normalizing");
    gamma->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* faithful = app.add_subcommand(
        "faithful", "print the association hypergraph of a table as JSON (vertices, hyperedges)");
    faithful->add_option("table", table_path, "cell table CSV")->required();
    faithful->add_option("--tol", tol, "interactions at most this size count as zero")
        ->capture_default_str();
    faithful->add_flag("--smoothing", smoothing, "add 0.5 to every cell before normalizing");
    faithful->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* search = app.add_subcommand(
        "search", "backward hyperedge selection from a count table; prints a JSONL trace");
    search->add_option("table", table_path, "count table CSV")->required();
    search->add_option("--alpha", alpha, "two-sided test level")->capture_default_str();
    search->add_flag("--smoothing", smoothing, "add 0.5 to every cell");
    search->add_option("--seed", search_seed,
                       "reserved for interface stability; the selection itself is deterministic");
    search->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* lstar = app.add_subcommand(
        "lambda-star", "sample-size dependent strong-faithfulness threshold lambda*_N");
    lstar->add_option("--n", n_obs, "sample size N")->required();
    lstar->add_option("--alpha", alpha, "two-sided test level")->capture_default_str();
    lstar->add_option("--epsilon", epsilon, "rate parameter in (0, 1/2)")->capture_default_str();
    lstar->add_option("--orders", orders, "hyperedge orders h_t, comma separated")->delimiter(',');
    lstar->add_option("--hypergraph", hypergraph_path, "take the orders from a hypergraph JSON file");
    lstar->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* volume = app.add_subcommand("volume", "unfaithful-volume estimates as CSV curves");
    volume->require_subcommand(1);

    CLI::App* vnu = volume->add_subcommand("nu", "nu_h(lambda), the single-hyperedge volume");
    vnu->add_option("--order", order_h, "hyperedge order h")->required();
    vnu->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vnu->add_option("--grid", grid, "lambda grid lo:hi:n");
    vnu->add_flag("--exact", exact, "use the closed form (available for h <= 1)");
    vnu->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    vnu->add_option("--seed", seed, "RNG seed")->capture_default_str();
    vnu->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    vnu->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* vdec = volume->add_subcommand(
        "decomposable", "product-formula proportion 1 - prod_t (1 - nu_{h_t}) for decomposable models");
    vdec->add_option("--orders", orders, "hyperedge orders, comma separated")->delimiter(',');
    vdec->add_option("--hypergraph", hypergraph_path, "decomposable hypergraph JSON file");
    vdec->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vdec->add_option("--grid", grid, "lambda grid lo:hi:n");
    vdec->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    vdec->add_option("--seed", seed, "RNG seed")->capture_default_str();
    vdec->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    vdec->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* vbound = volume->add_subcommand(
        "bound", "closed-form lower bound max_t nu_1(lambda/2^{h_t-1})^{2^{h_t-1}}");
    vbound->add_option("--orders", orders, "hyperedge orders, comma separated")->delimiter(',');
    vbound->add_option("--hypergraph", hypergraph_path, "hypergraph JSON file");
    vbound->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vbound->add_option("--grid", grid, "lambda grid lo:hi:n");
    vbound->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* vtwo = volume->add_subcommand(
        "two-by-two", "proportion of 2x2 tables with association below lambda");
    vtwo->add_option("--measure", measure,
                     "phi1|log_odds_ratio, phi2|yule_q, or phi3|cond_prob_difference")
        ->capture_default_str();
    vtwo->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vtwo->add_option("--grid", grid, "lambda grid lo:hi:n");
    vtwo->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    vtwo->add_option("--seed", seed, "RNG seed")->capture_default_str();
    vtwo->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    vtwo->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* vproj = volume->add_subcommand(
        "projected", "proportion of simplex draws whose model projection is lambda-unfaithful");
    vproj->add_option("--hypergraph", hypergraph_path, "hypergraph JSON file")->required();
    vproj->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vproj->add_option("--grid", grid, "lambda grid lo:hi:n");
    vproj->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    vproj->add_option("--seed", seed, "RNG seed")->capture_default_str();
    vproj->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    vproj->add_option("--fit-tol", fit_tol, "IPF marginal tolerance per sample")->capture_default_str();
    vproj->add_option("--fit-max-iter", fit_max_iter, "IPF sweep cap per sample")->capture_default_str();
    vproj->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI::App* vchain = volume->add_subcommand(
        "chain", "unfaithful proportion of a chain of given order and length");
    vchain->add_option("--order", order_h, "chain order h")->required();
    vchain->add_option("--length", chain_length, "number of hyperedges")->required();
    vchain->add_option("--lambda", lambdas, lambda_help)->delimiter(',');
    vchain->add_option("--grid", grid, "lambda grid lo:hi:n");
    vchain->add_option("--samples", samples, "Monte Carlo sample count")->capture_default_str();
    vchain->add_option("--seed", seed, "RNG seed")->capture_default_str();
    vchain->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    vchain->add_option("-o,--output", output, "write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gamma->parsed()) {
            loglin::TableData td = loglin::read_table_csv_file(table_path);
            loglin::JointDistribution p = loglin::to_distribution(td, smoothing);
            loglin::InteractionVector iv = loglin::interaction_vector(p);
            with_output(output,
                        [&](std::ostream& out) { loglin::write_interaction_csv(out, iv, td.labels); });
        } else if (faithful->parsed()) {
            loglin::TableData td = loglin::read_table_csv_file(table_path);
            loglin::JointDistribution p = loglin::to_distribution(td, smoothing);
            loglin::Hypergraph h = relabel(loglin::faithful_hypergraph(p, tol), td.labels);
            with_output(output, [&](std::ostream& out) {
                out << loglin::hypergraph_to_json(h).dump(2) << '\n';
            });
        } else if (search->parsed()) {
            loglin::TableData td = loglin::read_table_csv_file(table_path);
            loglin::CountTable ct = loglin::to_counts(td);
            loglin::BackwardSelectConfig cfg;
            cfg.smoothing = smoothing;
            loglin::SearchTrace trace = loglin::backward_select(ct, alpha, cfg);
            for (auto& step : trace.steps) {
                step.model = relabel(step.model, td.labels);
            }
            trace.final = relabel(trace.final, td.labels);
            with_output(output,
                        [&](std::ostream& out) { loglin::write_search_trace_jsonl(out, trace); });
        } else if (lstar->parsed()) {
            if (!hypergraph_path.empty()) {
                orders = loglin::hyperedge_orders(load_hypergraph(hypergraph_path));
            }
            double value = loglin::lambda_star(n_obs, alpha, epsilon, orders);
            with_output(output,
                        [&](std::ostream& out) { out << loglin::format_double(value) << '\n'; });
        } else if (volume->parsed()) {
            std::vector<double> ls = collect_lambdas(lambdas, grid);
            McConfig mc{samples, seed, threads};
            std::vector<CurveRow> rows;
            if (vnu->parsed()) {
                for (double l : ls) {
                    VolumeEstimate est;
                    if (exact || order_h == 0) {
                        if (order_h > 1) {
                            throw std::runtime_error("no closed form for orders above 1; drop --exact");
                        }
                        est = loglin::nu_h(order_h, l);
                    } else {
                        est = loglin::nu_h_monte_carlo(order_h, l, samples, seed, threads);
                    }
                    rows.push_back({l, est});
                }
            } else if (vdec->parsed()) {
                if (!hypergraph_path.empty()) {
                    loglin::Hypergraph h = load_hypergraph(hypergraph_path);
                    for (double l : ls) rows.push_back({l, unfaithful_proportion_decomposable(h, l, mc)});
                } else {
                    for (double l : ls) {
                        rows.push_back({l, unfaithful_proportion_decomposable(orders, l, mc)});
                    }
                }
            } else if (vbound->parsed()) {
                if (!hypergraph_path.empty()) {
                    orders = loglin::hyperedge_orders(load_hypergraph(hypergraph_path));
                }
                for (double l : ls) rows.push_back({l, loglin::volume_lower_bound(orders, l)});
            } else if (vtwo->parsed()) {
                loglin::AssociationMeasureKind kind = parse_measure(measure);
                for (double l : ls) {
                    rows.push_back({l, loglin::two_by_two_unfaithful_proportion(kind, l, mc)});
                }
            } else if (vproj->parsed()) {
                loglin::Hypergraph h = load_hypergraph(hypergraph_path);
                loglin::FitConfig fc{fit_tol, fit_max_iter};
                for (double l : ls) {
                    rows.push_back({l, loglin::projected_unfaithful_proportion(h, l, mc, fc)});
                }
            } else if (vchain->parsed()) {
                for (double l : ls) {
                    rows.push_back({l, loglin::chain_unfaithful_mc(order_h, chain_length, l, mc)});
                }
            }
            emit_curve(output, rows);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
