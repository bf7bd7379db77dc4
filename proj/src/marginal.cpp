#include "mot/marginal.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mot {

namespace {

void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

DiscreteMarginal::DiscreteMarginal(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty()) fail("marginal: empty support");
    if (support_.size() != weights_.size()) fail("marginal: support/weights length mismatch");
    double sum = 0.0;
    for (size_t j = 0; j < support_.size(); ++j) {
        if (!std::isfinite(support_[j]) || !std::isfinite(weights_[j]))
            fail("marginal: non-finite entry");
        if (support_[j] < 0.0) fail("marginal: negative support point");
        if (weights_[j] < 0.0) fail("marginal: negative weight");
        if (weights_[j] > 1.0 + 1e-12) fail("marginal: weight exceeds 1");
        if (j > 0 && support_[j] <= support_[j - 1])
            fail("marginal: support not strictly increasing");
        sum += weights_[j];
    }
    if (std::abs(sum - 1.0) > 1e-12) fail("marginal: weights do not sum to 1");
}

double DiscreteMarginal::mean() const {
    double m = 0.0;
    for (size_t j = 0; j < support_.size(); ++j) m += weights_[j] * support_[j];
    return m;
}

double DiscreteMarginal::call_price(double strike) const {
    if (strike < 0.0) fail("call_price: negative strike");
    double c = 0.0;
    for (size_t j = 0; j < support_.size(); ++j)
        if (support_[j] > strike) c += weights_[j] * (support_[j] - strike);
    return c;
}

ConvexOrderReport check_convex_order(std::span<const DiscreteMarginal> mus, double tol) {
    if (mus.size() < 2) fail("check_convex_order: need at least two marginals");
    ConvexOrderReport rep;
    rep.tol = tol;

    double m0 = mus[0].mean();
    rep.same_mean = true;
    for (size_t t = 1; t < mus.size(); ++t)
        if (std::abs(mus[t].mean() - m0) > tol) rep.same_mean = false;
    if (rep.same_mean) rep.common_mean = m0;

    rep.worst.delta = -std::numeric_limits<double>::infinity();
    for (size_t t = 0; t + 1 < mus.size(); ++t) {
        std::set<double> strikes(mus[t].support().begin(), mus[t].support().end());
        strikes.insert(mus[t + 1].support().begin(), mus[t + 1].support().end());
        for (double k : strikes) {
            double delta = mus[t].call_price(k) - mus[t + 1].call_price(k);
            if (delta > rep.worst.delta) {
                rep.worst.delta = delta;
                rep.worst.strike = k;
                rep.worst.t = static_cast<int>(t);
            }
        }
    }
    rep.ordered = rep.worst.delta <= tol;
    return rep;
}

ProductGrid grid_from(std::span<const DiscreteMarginal> mus) {
    ProductGrid grid;
    grid.axes.reserve(mus.size());
    for (const auto& mu : mus) grid.axes.push_back(mu.support());
    return grid;
}

namespace {

// Canonicalizes raw (support, weight) pairs: ascending check, duplicate merge,
// sum-tolerant renormalization. Shared by the CSV and JSON readers.
DiscreteMarginal finish_marginal(std::vector<double> s, std::vector<double> w,
                                 const std::string& where, LoadReport* report) {
    if (s.empty()) fail(where + ": no support points");
    std::vector<double> support, weights;
    for (size_t j = 0; j < s.size(); ++j) {
        if (!std::isfinite(s[j]) || !std::isfinite(w[j])) fail(where + ": non-finite entry");
        if (s[j] < 0.0) fail(where + ": negative support point");
        if (w[j] < 0.0) fail(where + ": negative weight");
        if (!support.empty() && s[j] < support.back())
            fail(where + ": support not ascending");
        if (!support.empty() && s[j] == support.back()) {
            weights.back() += w[j];
            if (report)
                report->warnings.push_back(where + ": merged duplicate support point " +
                                           std::to_string(s[j]));
        } else {
            support.push_back(s[j]);
            weights.push_back(w[j]);
        }
    }
    double sum = 0.0;
    for (double v : weights) sum += v;
    if (std::abs(sum - 1.0) > 1e-9) fail(where + ": weights sum to " + std::to_string(sum));
    for (double& v : weights) v /= sum;
    return DiscreteMarginal(std::move(support), std::move(weights));
}

bool parse_number(const std::string& tok, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(tok, &pos);
        while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
        return pos == tok.size();
    } catch (...) {
        return false;
    }
}

DiscreteMarginal load_csv(const std::string& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) fail("cannot open marginal file " + path);
    std::vector<double> s, w;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            fail(path + ": expected two comma-separated columns, got '" + line + "'");
        double sv, wv;
        if (!parse_number(a, sv) || !parse_number(b, wv)) {
            if (first) {
                first = false;  // header line
                continue;
            }
            fail(path + ": cannot parse line '" + line + "'");
        }
        first = false;
        s.push_back(sv);
        w.push_back(wv);
    }
    return finish_marginal(std::move(s), std::move(w), path, report);
}

DiscreteMarginal marginal_from_json(const nlohmann::json& j, const std::string& where,
                                    LoadReport* report) {
    if (!j.is_object() || !j.contains("support") || !j.contains("weights"))
        fail(where + ": expected an object with 'support' and 'weights'");
    std::vector<double> s, w;
    try {
        s = j.at("support").get<std::vector<double>>();
        w = j.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        fail(where + ": " + e.what());
    }
    if (s.size() != w.size()) fail(where + ": support/weights length mismatch");
    return finish_marginal(std::move(s), std::move(w), where, report);
}

std::vector<DiscreteMarginal> load_json(const std::string& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) fail("cannot open marginal file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(path + ": JSON parse error: " + e.what());
    }
    const nlohmann::json* arr = nullptr;
    if (j.is_object() && j.contains("marginals"))
        arr = &j.at("marginals");
    else if (j.is_array())
        arr = &j;
    else if (j.is_object())
        return {marginal_from_json(j, path, report)};
    else
        fail(path + ": expected an object or array of marginals");

    std::vector<DiscreteMarginal> out;
    for (size_t i = 0; i < arr->size(); ++i)
        out.push_back(marginal_from_json((*arr)[i],
                                         path + ": marginals[" + std::to_string(i) + "]", report));
    if (out.empty()) fail(path + ": no marginals found");
    return out;
}

}  // namespace

std::vector<DiscreteMarginal> load_marginals(const std::string& path, MarginalFormat format,
                                             LoadReport* report) {
    if (format == MarginalFormat::csv) return {load_csv(path, report)};
    return load_json(path, report);
}

}  // namespace mot
