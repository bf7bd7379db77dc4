#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mot/example31.hpp"
#include "mot/marginal.hpp"
#include "mot/payoff.hpp"
#include "mot/pricing.hpp"

namespace mot {

/// A problem instance as read from JSON:
///   {"T": int,
///    "marginals": [{"support": [...], "weights": [...]} | {"file": "path"}],
///    "payoff": {"kind": "...", "params": {...}, "values": [...],
///               "truncate": n},
///    "options": {"tol": 1e-9, "max_iters": 0, "threads": 1}}
/// Marginal file references resolve relative to the instance file. Table
/// payoffs bind to the instance grid in row-major order (x_1 slowest).
/// "threads" drives sweep-level parallelism only.
struct Instance {
    int T = 0;
    std::vector<DiscreteMarginal> marginals;
    PayoffSpec payoff;
    pricing::Options options;
    std::vector<std::string> warnings;
};

/// Parse errors carry the path of the offending field in what().
struct InstanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Instance load_instance(const std::string& path);

/// Deterministic serializations: fixed field order, shortest round-trip
/// decimals. Non-finite values render as JSON null.
nlohmann::ordered_json report_to_json(const pricing::PriceReport& rep, bool timings = false);
nlohmann::ordered_json convex_order_to_json(const ConvexOrderReport& rep);
nlohmann::ordered_json growth_bound_to_json(const GrowthBound& gb);
nlohmann::ordered_json sequence_report_to_json(const pricing::SequenceReport& rep);

std::string sweep_to_csv(const pricing::SweepResult& res);
std::string gap_rows_to_csv(std::span<const example31::GapRow> rows);

}  // namespace mot
