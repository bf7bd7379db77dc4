#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mot/example31.hpp"
#include "mot/format.hpp"
#include "mot/instance.hpp"
#include "mot/pricing.hpp"

namespace {

// Exit codes: 0 optimal, 1 malformed input, 2 infeasible/unbounded,
// 3 iteration limit.
constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kNoSolution = 2;
constexpr int kNoConvergence = 3;

void write_out(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw mot::InstanceError("cannot open output file " + out_path);
    out << text;
}

std::vector<double> parse_ns(const std::string& spec) {
    std::vector<double> ns;
    std::string tok;
    std::stringstream ss(spec);
    while (std::getline(ss, tok, ',')) {
        try {
            ns.push_back(std::stod(tok));
        } catch (...) {
            throw mot::InstanceError("cannot parse bound '" + tok + "' in --Ns");
        }
    }
    if (ns.empty()) throw mot::InstanceError("--Ns is empty");
    for (size_t i = 0; i < ns.size(); ++i) {
        if (!(ns[i] > 0)) throw mot::InstanceError("--Ns entries must be positive");
        if (i > 0 && !(ns[i] > ns[i - 1]))
            throw mot::InstanceError("--Ns must be strictly increasing with no duplicates");
    }
    return ns;
}

int status_code(mot::lp::Status s) {
    switch (s) {
        case mot::lp::Status::optimal: return kOk;
        case mot::lp::Status::infeasible:
        case mot::lp::Status::unbounded: return kNoSolution;
        case mot::lp::Status::iteration_limit: return kNoConvergence;
    }
    return kNoConvergence;
}

struct CommonArgs {
    std::string instance_path;
    std::string out_path;
    std::optional<double> tol;
    std::optional<long> max_iters;
    std::optional<int> threads;
    bool timings = false;

    mot::Instance load() const {
        mot::Instance inst = mot::load_instance(instance_path);
        if (tol) inst.options.tol = *tol;
        if (max_iters) inst.options.max_iters = *max_iters;
        if (threads) inst.options.sweep_threads = std::max(1, *threads);
        for (const auto& w : inst.warnings) std::cerr << "warning: " << w << "\n";
        return inst;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--instance", args.instance_path, "instance JSON file")->required();
    cmd->add_option("--out", args.out_path, "write output here instead of stdout");
    cmd->add_option("--tol", args.tol, "membership/feasibility tolerance");
    cmd->add_option("--max-iters", args.max_iters, "simplex iteration cap");
    cmd->add_option("--threads", args.threads, "sweep-level worker count");
    cmd->add_flag("--timings", args.timings, "include wall-clock fields in reports");
}

int run_price(const CommonArgs& args, const std::string& functional,
              std::optional<double> N, const std::string& format) {
    if (format != "json")
        throw mot::InstanceError("price supports --format json only");
    mot::Instance inst = args.load();
    mot::pricing::PriceReport rep;
    if (functional == "P") {
        rep = mot::pricing::primal_price(inst.marginals, inst.payoff, inst.options);
    } else if (functional == "D") {
        rep = mot::pricing::dual_price(inst.marginals, inst.payoff, inst.options);
    } else if (functional == "DN" || functional == "PN") {
        if (!N) throw mot::InstanceError("--N is required for functionals DN and PN");
        if (!(*N > 0)) throw mot::InstanceError("--N must be positive");
        rep = functional == "DN"
                  ? mot::pricing::constrained_dual_price(inst.marginals, inst.payoff, *N,
                                                         inst.options)
                  : mot::pricing::penalized_primal_price(inst.marginals, inst.payoff, *N,
                                                         inst.options);
    } else {
        throw mot::InstanceError("unknown functional '" + functional +
                                 "' (expected P, D, DN, or PN)");
    }
    write_out(mot::report_to_json(rep, args.timings).dump(2) + "\n", args.out_path);
    return status_code(rep.status);
}

int run_sweep(const CommonArgs& args, const std::string& ns_spec, const std::string& format) {
    std::vector<double> ns = parse_ns(ns_spec);
    mot::Instance inst = args.load();
    auto res = mot::pricing::sweep_bounds(inst.marginals, inst.payoff, ns, inst.options);
    if (format == "csv") {
        write_out(mot::sweep_to_csv(res), args.out_path);
    } else if (format == "json") {
        nlohmann::ordered_json j;
        j["n_star"] = res.n_star;
        j["D"] = res.D;
        j["P"] = res.P;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : res.rows) {
            nlohmann::ordered_json row;
            row["N"] = r.N;
            row["D_N"] = r.DN;
            row["P_N"] = r.PN;
            row["gap"] = r.gap;
            rows.push_back(std::move(row));
        }
        j["rows"] = std::move(rows);
        write_out(j.dump(2) + "\n", args.out_path);
    } else {
        throw mot::InstanceError("sweep supports --format csv or json");
    }
    return kOk;
}

int run_check(const CommonArgs& args) {
    mot::Instance inst = args.load();
    auto order = mot::check_convex_order(inst.marginals, inst.options.tol);
    auto growth = mot::growth_constant(inst.payoff, mot::grid_from(inst.marginals));
    bool feasible = mot::pricing::martingale_polytope_feasible(inst.marginals, inst.options);
    bool consistent = feasible == (order.same_mean && order.ordered);

    nlohmann::ordered_json j;
    j["convex_order"] = mot::convex_order_to_json(order);
    j["growth_bound"] = mot::growth_bound_to_json(growth);
    j["martingale_polytope"] = feasible ? "feasible" : "infeasible";
    j["strassen_consistent"] = consistent;
    write_out(j.dump(2) + "\n", args.out_path);
    if (!consistent) {
        std::cerr << "error: convex-order verdict disagrees with LP feasibility\n";
        return kBadInput;
    }
    return feasible ? kOk : kNoSolution;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superhedging price bounds and coupling optimizers on discrete instances"};
    app.require_subcommand(1);

    CommonArgs price_args, sweep_args, check_args;
    std::string functional = "P";
    std::optional<double> price_N;
    std::string price_format = "json";
    std::string sweep_ns, sweep_format = "csv";

    auto* price = app.add_subcommand("price", "solve one price functional");
    add_common(price, price_args);
    price->add_option("--functional", functional, "P, D, DN, or PN")->required();
    price->add_option("--N", price_N, "position bound for DN/PN");
    price->add_option("--format", price_format, "output format (json)");

    auto* sweep = app.add_subcommand("sweep", "paired DN/PN solves over a bound ladder");
    add_common(sweep, sweep_args);
    sweep->add_option("--Ns", sweep_ns, "comma-separated, strictly increasing bounds")
        ->required();
    sweep->add_option("--format", sweep_format, "output format (csv or json)");

    auto* check = app.add_subcommand("check", "validate an instance and test feasibility");
    add_common(check, check_args);

    auto* eg = app.add_subcommand("example31", "uniform-marginal block-coupling study");
    eg->require_subcommand(1);
    int eg_M = 1, eg_n = 10;
    std::string eg_ns, eg_out;
    auto* closed = eg->add_subcommand("closed-form", "closed-form block quantities");
    closed->add_option("--M", eg_M, "number of diagonal blocks")->required();
    closed->add_option("--out", eg_out, "write output here instead of stdout");
    auto* eggrid = eg->add_subcommand("grid", "discretized block coupling quantities");
    eggrid->add_option("--M", eg_M, "number of diagonal blocks")->required();
    eggrid->add_option("--n", eg_n, "grid size (M must divide n)")->required();
    eggrid->add_option("--out", eg_out, "write output here instead of stdout");
    auto* eggap = eg->add_subcommand("gap", "refinement experiment CSV");
    eggap->add_option("--n", eg_n, "grid size")->required();
    eggap->add_option("--Ns", eg_ns, "comma-separated, strictly increasing bounds")->required();
    eggap->add_option("--out", eg_out, "write output here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) return run_price(price_args, functional, price_N, price_format);
        if (sweep->parsed()) return run_sweep(sweep_args, sweep_ns, sweep_format);
        if (check->parsed()) return run_check(check_args);
        if (eg->parsed()) {
            if (closed->parsed()) {
                auto check_opt = mot::example31::verify_unit_cash_superhedge();
                nlohmann::ordered_json j;
                j["M"] = eg_M;
                j["a1_closed_form"] = mot::example31::a1_closed_form(eg_M);
                j["a1_numeric"] = mot::example31::a1_numeric(eg_M);
                j["offdiag_expectation"] = mot::example31::payoff_expectation_offdiag(eg_M);
                nlohmann::ordered_json oc;
                oc["min_slack"] = check_opt.min_slack;
                oc["cost"] = check_opt.cost;
                oc["samples"] = check_opt.samples;
                oc["pass"] = check_opt.pass;
                j["unit_cash_superhedge"] = std::move(oc);
                write_out(j.dump(2) + "\n", eg_out);
                return kOk;
            }
            if (eggrid->parsed()) {
                auto q = mot::example31::discretize_block(eg_M, eg_n);
                auto mus = mot::example31::uniform_midpoint_marginals(eg_n);
                auto table =
                    mot::payoff_table(mot::PayoffSpec::indicator_offdiagonal(), q.grid());
                double gain = mot::best_gain(q, 1.0);
                double ephi = 0.0;
                for (long i = 0; i < q.grid().cells(); ++i) ephi += table[i] * q.mass()[i];
                nlohmann::ordered_json j;
                j["M"] = eg_M;
                j["n"] = eg_n;
                j["a1_closed_form"] = mot::example31::a1_closed_form(eg_M);
                j["best_gain_1"] = gain;
                j["discretization_defect"] =
                    std::abs(gain - mot::example31::a1_closed_form(eg_M));
                j["offdiag_expectation"] = ephi;
                j["pi_deviation"] = mot::in_Pi(q, mus).worst_deviation;
                write_out(j.dump(2) + "\n", eg_out);
                return kOk;
            }
            auto rows = mot::example31::gap_experiment(eg_n, parse_ns(eg_ns));
            write_out(mot::gap_rows_to_csv(rows), eg_out);
            return kOk;
        }
    } catch (const mot::InstanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}
