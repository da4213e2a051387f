#include "pvim/serialize.hpp"

#include <cmath>

namespace pvim {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class T>
Json optional_json(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_floating_point_v<T>) {
        return number(*v);
    } else {
        return *v;
    }
}

Json numbers(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

}  // namespace

Json to_json(const IntervalSet& s) {
    Json parts = Json::array();
    for (const Interval& iv : s.parts()) {
        parts.push_back({{"lo", number(iv.lo)},
                         {"hi", number(iv.hi)},
                         {"lo_closed", iv.lo_closed},
                         {"hi_closed", iv.hi_closed}});
    }
    return {{"text", s.to_string()}, {"parts", parts}, {"measure", number(s.measure())}};
}

Json to_json(const SupConfig& c) {
    return {{"initial_grid", c.initial_grid},
            {"refine_rounds", c.refine_rounds},
            {"refine_factor", c.refine_factor},
            {"mc_samples", c.mc_samples},
            {"seed", optional_json(c.seed)},
            {"tail", to_string(c.tail)},
            {"monte_carlo", c.monte_carlo},
            {"use_closed_form", c.use_closed_form},
            {"search_span", c.search_span},
            {"force", c.force}};
}

SupConfig sup_config_from_json(const Json& j) {
    SupConfig c;
    c.initial_grid = j.value("initial_grid", c.initial_grid);
    c.refine_rounds = j.value("refine_rounds", c.refine_rounds);
    c.refine_factor = j.value("refine_factor", c.refine_factor);
    c.mc_samples = j.value("mc_samples", c.mc_samples);
    if (j.contains("seed") && !j["seed"].is_null()) c.seed = j["seed"].get<std::uint64_t>();
    c.tail = parse_tail(j.value("tail", to_string(c.tail)));
    c.monte_carlo = j.value("monte_carlo", c.monte_carlo);
    c.use_closed_form = j.value("use_closed_form", c.use_closed_form);
    c.search_span = j.value("search_span", c.search_span);
    c.force = j.value("force", c.force);
    return c;
}

Json to_json(const PlausibilityReport& r) {
    return {{"plausibility", number(r.plausibility)},
            {"belief", number(r.belief)},
            {"method", to_string(r.method)},
            {"n_samples", r.n_samples},
            {"seed", optional_json(r.seed)},
            {"std_error", optional_json(r.std_error)},
            {"diagnostics", r.diagnostics}};
}

Json to_json(const PValueReport& r) {
    return {{"value", number(r.value)},
            {"method", to_string(r.method)},
            {"n_samples", r.n_samples},
            {"seed", optional_json(r.seed)},
            {"std_error", optional_json(r.std_error)},
            {"argmax_theta", optional_json(r.argmax_theta)},
            {"tail", to_string(r.tail)},
            {"diagnostics", r.diagnostics}};
}

Json to_json(const EquivalenceReport& r) {
    return {{"pvalue", to_json(r.pvalue)},
            {"plausibility", number(r.plausibility)},
            {"plausibility_cstep", number(r.plausibility_cstep)},
            {"plausibility_containment", number(r.plausibility_containment)},
            {"difference", number(r.difference)},
            {"tolerance", number(r.tolerance)},
            {"pass", r.pass},
            {"notes", r.notes}};
}

Json to_json(const AssumptionReport& r) {
    Json a1 = Json::array();
    for (const auto& w : r.a1_witnesses) a1.push_back({{"x", number(w.x)}, {"u", number(w.u)}});
    Json a3 = Json::array();
    for (const auto& v : r.a3_violations) {
        a3.push_back({{"t", number(v.t)}, {"lhs", number(v.lhs)}, {"rhs", number(v.rhs)}, {"std_error", number(v.std_error)}});
    }
    return {{"a1", r.a1},       {"a2", r.a2},
            {"a3", r.a3},       {"a1_witnesses", a1},
            {"a2_unstable_u", numbers(r.a2_unstable_u)},
            {"a3_violations", a3}, {"notes", r.notes}};
}

Json to_json(const ValidityAudit& a) {
    return {{"kind", "validity"},
            {"model", a.model},
            {"assertion", a.assertion},
            {"prs", a.prs},
            {"theta_true", number(a.theta_true)},
            {"n_reps", a.n_reps},
            {"seed", a.seed},
            {"alpha_grid", numbers(a.alpha_grid)},
            {"exceedance", numbers(a.exceedance)},
            {"band", numbers(a.band)},
            {"max_violation", number(a.max_violation)},
            {"pass", a.pass},
            {"notes", a.notes}};
}

Json to_json(const UniformityReport& r) {
    return {{"kind", "uniformity"},
            {"model", r.model},
            {"prs", r.prs},
            {"theta0", number(r.theta0)},
            {"n_reps", r.n_reps},
            {"seed", r.seed},
            {"ks_distance", number(r.ks_distance)},
            {"threshold", number(r.threshold)},
            {"dominance_only", r.dominance_only},
            {"max_dominance_violation", number(r.max_dominance_violation)},
            {"pass", r.pass},
            {"notes", r.notes}};
}

Json to_json(const CoverageReport& r) {
    return {{"kind", "coverage"},
            {"model", r.model},
            {"prs", r.prs},
            {"alpha", number(r.alpha)},
            {"theta", number(r.theta)},
            {"n_reps", r.n_reps},
            {"seed", r.seed},
            {"coverage", number(r.coverage)},
            {"threshold", number(r.threshold)},
            {"pass", r.pass},
            {"notes", r.notes}};
}

Json to_json(const CoherenceReport& r) {
    Json rows = Json::array();
    for (const CoherenceRow& row : r.rows) {
        rows.push_back({{"x", number(row.x)},
                        {"pvalues", numbers(row.pvalues)},
                        {"plausibilities", numbers(row.plausibilities)},
                        {"reversals", row.reversals},
                        {"plausibility_monotone", row.plausibility_monotone}});
    }
    return {{"nulls", r.nulls},
            {"prs", r.prs},
            {"reversal_count", r.reversal_count},
            {"single_im_monotone", r.single_im_monotone},
            {"rows", rows}};
}

Json to_json(const DiagnosticReport& r) {
    return {{"observation", number(r.observation)},
            {"empty_u", to_json(r.empty_u)},
            {"measure", number(r.measure)},
            {"notes", r.notes}};
}

Json to_json(const Summary& s) {
    return {{"n", s.n}, {"mean", number(s.mean)}, {"s2", optional_json(s.s2)}, {"warnings", s.warnings}};
}

}  // namespace pvim
