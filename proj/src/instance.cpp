#include "mot/instance.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mot/format.hpp"

namespace mot {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    throw InstanceError("instance field '" + field + "': " + msg);
}

double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) bad(field, "expected a number");
    return j.get<double>();
}

std::vector<double> get_number_array(const json& j, const std::string& field) {
    if (!j.is_array()) bad(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) bad(field, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

DiscreteMarginal parse_marginal(const json& j, const std::string& field,
                                const std::filesystem::path& base, Instance& inst) {
    if (!j.is_object()) bad(field, "expected an object");
    if (j.contains("file")) {
        if (!j.at("file").is_string()) bad(field + ".file", "expected a string path");
        std::filesystem::path p = j.at("file").get<std::string>();
        if (p.is_relative()) p = base / p;
        MarginalFormat fmt =
            p.extension() == ".json" ? MarginalFormat::json : MarginalFormat::csv;
        LoadReport lr;
        std::vector<DiscreteMarginal> mus;
        try {
            mus = load_marginals(p.string(), fmt, &lr);
        } catch (const std::exception& e) {
            bad(field + ".file", e.what());
        }
        inst.warnings.insert(inst.warnings.end(), lr.warnings.begin(), lr.warnings.end());
        if (mus.size() != 1) bad(field + ".file", "file must hold exactly one marginal");
        return mus.front();
    }
    if (!j.contains("support") || !j.contains("weights"))
        bad(field, "expected 'support' and 'weights' (or a 'file' reference)");
    try {
        return DiscreteMarginal(get_number_array(j.at("support"), field + ".support"),
                                get_number_array(j.at("weights"), field + ".weights"));
    } catch (const InstanceError&) {
        throw;
    } catch (const std::exception& e) {
        bad(field, e.what());
    }
}

PayoffSpec parse_payoff(const json& j, std::span<const DiscreteMarginal> mus) {
    if (!j.is_object()) bad("payoff", "expected an object");
    if (!j.contains("kind") || !j.at("kind").is_string())
        bad("payoff.kind", "expected a string");
    PayoffKind kind;
    try {
        kind = payoff_kind_from_string(j.at("kind").get<std::string>());
    } catch (const std::exception& e) {
        bad("payoff.kind", e.what());
    }

    auto param = [&](const char* name) -> double {
        if (!j.contains("params") || !j.at("params").is_object() ||
            !j.at("params").contains(name))
            bad(std::string("payoff.params.") + name, "required for this payoff kind");
        return get_number(j.at("params").at(name), std::string("payoff.params.") + name);
    };

    PayoffSpec phi;
    switch (kind) {
        case PayoffKind::indicator_offdiagonal:
            phi = PayoffSpec::indicator_offdiagonal();
            break;
        case PayoffKind::basket_call: phi = PayoffSpec::basket_call(param("strike")); break;
        case PayoffKind::lookback: phi = PayoffSpec::lookback(); break;
        case PayoffKind::forward_start: phi = PayoffSpec::forward_start(param("strike")); break;
        case PayoffKind::table: {
            if (!j.contains("values")) bad("payoff.values", "required for table payoffs");
            std::vector<double> values = get_number_array(j.at("values"), "payoff.values");
            try {
                phi = PayoffSpec::from_table(grid_from(mus), std::move(values));
            } catch (const std::exception& e) {
                bad("payoff.values", e.what());
            }
            break;
        }
    }
    if (j.contains("truncate")) {
        double n = get_number(j.at("truncate"), "payoff.truncate");
        try {
            phi = truncate(phi, n);
        } catch (const std::exception& e) {
            bad("payoff.truncate", e.what());
        }
    }
    return phi;
}

}  // namespace

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InstanceError("cannot open instance file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InstanceError(std::string("instance JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw InstanceError("instance: top level must be an object");

    Instance inst;
    if (!j.contains("T") || !j.at("T").is_number_integer()) bad("T", "expected an integer");
    inst.T = j.at("T").get<int>();
    if (inst.T < 2) bad("T", "need at least two periods");

    if (!j.contains("marginals") || !j.at("marginals").is_array())
        bad("marginals", "expected an array");
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    const auto& arr = j.at("marginals");
    if (static_cast<int>(arr.size()) != inst.T)
        bad("marginals", "marginal count " + std::to_string(arr.size()) +
                             " does not match T=" + std::to_string(inst.T));
    for (size_t i = 0; i < arr.size(); ++i)
        inst.marginals.push_back(
            parse_marginal(arr[i], "marginals[" + std::to_string(i) + "]", base, inst));

    if (!j.contains("payoff")) bad("payoff", "missing");
    inst.payoff = parse_payoff(j.at("payoff"), inst.marginals);

    if (j.contains("options")) {
        const auto& o = j.at("options");
        if (!o.is_object()) bad("options", "expected an object");
        if (o.contains("tol")) {
            inst.options.tol = get_number(o.at("tol"), "options.tol");
            if (!(inst.options.tol > 0)) bad("options.tol", "must be positive");
        }
        if (o.contains("max_iters")) {
            if (!o.at("max_iters").is_number_integer()) bad("options.max_iters", "expected an integer");
            inst.options.max_iters = o.at("max_iters").get<long>();
        }
        if (o.contains("threads")) {
            if (!o.at("threads").is_number_integer()) bad("options.threads", "expected an integer");
            inst.options.sweep_threads = std::max(1, o.at("threads").get<int>());
        }
    }
    return inst;
}

namespace {

// null for non-finite values so reports stay valid JSON.
ordered_json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

ordered_json num_array(std::span<const double> v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

}  // namespace

ordered_json report_to_json(const pricing::PriceReport& rep, bool timings) {
    ordered_json j;
    j["functional"] = pricing::to_string(rep.functional);
    j["status"] = lp::to_string(rep.status);
    j["value"] = num(rep.value);
    if (rep.bound) j["N"] = num(*rep.bound);

    ordered_json res;
    res["lp_primal"] = num(rep.residuals.lp_primal);
    res["lp_dual"] = num(rep.residuals.lp_dual);
    res["lp_complementarity"] = num(rep.residuals.lp_complementarity);
    res["lp_duality_gap"] = num(rep.residuals.lp_duality_gap);
    if (rep.residuals.marginal_deviation)
        res["marginal_deviation"] = num(*rep.residuals.marginal_deviation);
    if (rep.residuals.martingale_gain)
        res["martingale_gain"] = num(*rep.residuals.martingale_gain);
    if (rep.residuals.penalized_recheck)
        res["penalized_recheck"] = num(*rep.residuals.penalized_recheck);
    if (rep.residuals.superhedge_min_slack)
        res["superhedge_min_slack"] = num(*rep.residuals.superhedge_min_slack);
    if (rep.residuals.static_cost_recheck)
        res["static_cost_recheck"] = num(*rep.residuals.static_cost_recheck);
    j["residuals"] = std::move(res);

    if (rep.coupling) {
        ordered_json cert;
        cert["type"] = "coupling";
        ordered_json axes = ordered_json::array();
        for (const auto& a : rep.coupling->grid().axes) axes.push_back(num_array(a));
        cert["axes"] = std::move(axes);
        cert["mass"] = num_array(rep.coupling->mass());
        j["certificate"] = std::move(cert);
    } else if (rep.strategy) {
        ordered_json cert;
        cert["type"] = "strategy";
        cert["bound"] = num(rep.strategy->bound);
        ordered_json u = ordered_json::array();
        for (const auto& leg : rep.strategy->u) u.push_back(num_array(leg));
        cert["u"] = std::move(u);
        ordered_json d = ordered_json::array();
        for (const auto& leg : rep.strategy->delta) d.push_back(num_array(leg));
        cert["delta"] = std::move(d);
        j["certificate"] = std::move(cert);
    } else {
        j["certificate"] = nullptr;
    }

    ordered_json diag;
    diag["iterations"] = rep.diag.iterations;
    diag["lp_rows"] = rep.diag.lp_rows;
    diag["lp_cols"] = rep.diag.lp_cols;
    diag["rounds"] = rep.diag.rounds;
    diag["boxed"] = rep.diag.boxed;
    if (timings) diag["wall_ms"] = num(rep.diag.wall_ms);
    j["diagnostics"] = std::move(diag);
    return j;
}

ordered_json convex_order_to_json(const ConvexOrderReport& rep) {
    ordered_json j;
    j["same_mean"] = rep.same_mean;
    j["ordered"] = rep.ordered;
    j["common_mean"] = rep.common_mean ? num(*rep.common_mean) : ordered_json(nullptr);
    ordered_json w;
    w["t"] = rep.worst.t;
    w["strike"] = num(rep.worst.strike);
    w["delta"] = num(rep.worst.delta);
    j["worst_violation"] = std::move(w);
    j["tol"] = num(rep.tol);
    return j;
}

ordered_json growth_bound_to_json(const GrowthBound& gb) {
    ordered_json j;
    j["K"] = num(gb.K);
    j["argmax_path"] = num_array(gb.argmax_path);
    return j;
}

ordered_json sequence_report_to_json(const pricing::SequenceReport& rep) {
    ordered_json j;
    j["gains"] = num_array(rep.gains);
    j["payoffs"] = num_array(rep.payoffs);
    j["limsup_estimate"] = num(rep.limsup_estimate);
    j["gains_converged"] = rep.gains_converged;
    return j;
}

std::string sweep_to_csv(const pricing::SweepResult& res) {
    std::ostringstream os;
    os << "N,D_N,P_N,gap,D,P\n";
    for (const auto& r : res.rows)
        os << format_double(r.N) << ',' << format_double(r.DN) << ',' << format_double(r.PN)
           << ',' << format_double(r.gap) << ',' << format_double(res.D) << ','
           << format_double(res.P) << "\n";
    return os.str();
}

std::string gap_rows_to_csv(std::span<const example31::GapRow> rows) {
    std::ostringstream os;
    os << "n,N,P,D,D_N,P_N,lower_bound_certificate\n";
    for (const auto& r : rows)
        os << r.n << ',' << format_double(r.N) << ',' << format_double(r.P) << ','
           << format_double(r.D) << ',' << format_double(r.DN) << ',' << format_double(r.PN)
           << ',' << format_double(r.lower_bound) << "\n";
    return os.str();
}

}  // namespace mot
