#include "pvim/pvalue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvim/errors.hpp"
#include "pvim/rng.hpp"

namespace pvim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kScanCells = 4096;

double nudge_inward(double v, bool toward_plus) {
    const double step = 1e-9 * std::max(1.0, std::fabs(v));
    return toward_plus ? v + step : v - step;
}

// Finite stand-in for a null component, with open ends moved just inside.
Interval searchable(const Interval& c, double span) {
    Interval out = c;
    if (std::isinf(c.lo) && std::isinf(c.hi)) {
        out.lo = -span;
        out.hi = span;
    } else if (std::isinf(c.lo)) {
        out.lo = c.hi - span;
    } else if (std::isinf(c.hi)) {
        out.hi = c.lo + span;
    }
    if (std::isfinite(c.lo) && !c.lo_closed) out.lo = nudge_inward(c.lo, true);
    if (std::isfinite(c.hi) && !c.hi_closed) out.hi = nudge_inward(c.hi, false);
    if (out.lo > out.hi) out.lo = out.hi = 0.5 * (c.lo + c.hi);
    out.lo_closed = out.hi_closed = true;
    return out;
}

bool is_lower_half_line(const Assertion& null) {
    if (null.set.parts().size() != 1) return false;
    const Interval& c = null.set.parts().front();
    return c.lo <= null.ambient.infimum() && std::isfinite(c.hi);
}

double tail_predicate_count(double value, double t, Tail tail) {
    return (tail == Tail::Weak ? value >= t : value > t) ? 1.0 : 0.0;
}

struct TailEstimate {
    double p;
    std::optional<double> se;
};

TailEstimate tail_at(const AssociationModel& m, const TestStatistic& stat, double theta, double t, Tail tail,
                     const SupConfig& cfg) {
    if (!cfg.monte_carlo && stat.tail_probability) return {stat.tail_probability(theta, t, tail), std::nullopt};
    if (!cfg.seed) throw ConfigError("Monte Carlo tail probability requires an explicit seed");
    if (cfg.mc_samples == 0) throw ConfigError("Monte Carlo tail probability requires mc_samples > 0");
    // Common random numbers across theta: every theta reuses stream 0.
    SeededRng rng(*cfg.seed, 0);
    const Distribution law = m.aux_law();
    double hits = 0.0;
    for (std::size_t i = 0; i < cfg.mc_samples; ++i) {
        hits += tail_predicate_count(stat.on_aux(theta, sample(law, rng)), t, tail);
    }
    const double n = static_cast<double>(cfg.mc_samples);
    const double p = hits / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

bool a1_holds_at(const AssociationModel& m, const TestStatistic& stat, double x, double u, const SupConfig& cfg) {
    if (stat.natural) return !m.focal_set(x, u).empty();
    const double target = stat.evaluate(x);
    constexpr int kScan = 257;
    for (const Interval& c : m.constraint().parts()) {
        const Interval range = searchable(c, cfg.search_span);
        double prev = std::numeric_limits<double>::quiet_NaN();
        for (int i = 0; i < kScan; ++i) {
            const double theta = range.lo + (range.hi - range.lo) * i / (kScan - 1);
            const double diff = stat.on_aux(theta, u) - target;
            if (diff == 0.0) return true;
            if (!std::isnan(prev) && ((prev < 0.0) != (diff < 0.0))) return true;
            prev = diff;
        }
    }
    return false;
}

}  // namespace

std::string to_string(Tail t) { return t == Tail::Strict ? "strict" : "weak"; }

Tail parse_tail(const std::string& s) {
    if (s == "strict") return Tail::Strict;
    if (s == "weak") return Tail::Weak;
    throw DomainError("tail must be 'strict' or 'weak', got '" + s + "'");
}

SupResult sup_over_null(const Assertion& null, const std::function<double(double)>& f, const SupConfig& cfg,
                        bool nondecreasing) {
    if (null.empty()) throw DomainError("sup over an empty null");
    if (null.set.is_point()) {
        const double theta = null.set.infimum();
        return {f(theta), theta};
    }
    if (nondecreasing) {
        const Interval& top = null.set.parts().back();
        if (std::isfinite(top.hi)) {
            const double theta = top.hi_closed ? top.hi : nudge_inward(top.hi, false);
            return {f(theta), theta};
        }
    }
    if (cfg.initial_grid < 2) throw ConfigError("initial_grid must be at least 2");

    SupResult best{-kInf, std::numeric_limits<double>::quiet_NaN()};
    for (const Interval& c : null.set.parts()) {
        const Interval range = searchable(c, cfg.search_span);
        const auto consider = [&](double theta) {
            const double v = f(theta);
            if (v > best.value || std::isnan(best.argmax)) best = {v, theta};
        };
        if (range.lo == range.hi) {
            consider(range.lo);
            continue;
        }
        double h = (range.hi - range.lo) / (cfg.initial_grid - 1);
        for (int i = 0; i < cfg.initial_grid; ++i) consider(i + 1 == cfg.initial_grid ? range.hi : range.lo + i * h);
        for (int round = 0; round < cfg.refine_rounds; ++round) {
            if (!range.contains(best.argmax)) break;
            const double lo = std::max(range.lo, best.argmax - h);
            const double hi = std::min(range.hi, best.argmax + h);
            h /= cfg.refine_factor;
            for (double theta = lo; theta <= hi; theta += h) consider(theta);
        }
    }
    return best;
}

PValueReport pvalue(const AssociationModel& m, const TestStatistic& stat, const Assertion& null, double x,
                    const SupConfig& cfg) {
    if (null.empty()) throw DomainError("pvalue: null hypothesis is empty");
    if (cfg.monte_carlo && !cfg.seed) throw ConfigError("pvalue: Monte Carlo requested without a seed");
    m.validate_observation(x);

    PValueReport report;
    report.tail = cfg.tail;
    if (cfg.use_closed_form && !cfg.monte_carlo && stat.closed_form_pvalue) {
        if (const auto p = stat.closed_form_pvalue(null, x, cfg.tail)) {
            report.value = *p;
            report.method = Method::ClosedForm;
            report.diagnostics.push_back("closed form registered by " + m.name());
            return report;
        }
    }

    const double t = stat.evaluate(x);
    std::optional<double> se_at_best;
    double best_p = -1.0;
    const auto tail_fn = [&](double theta) {
        const TailEstimate est = tail_at(m, stat, theta, t, cfg.tail, cfg);
        if (est.p > best_p) {
            best_p = est.p;
            se_at_best = est.se;
        }
        return est.p;
    };
    const SupResult sup = sup_over_null(null, tail_fn, cfg, stat.nondecreasing_in_theta);

    report.value = std::clamp(sup.value, 0.0, 1.0);
    report.argmax_theta = sup.argmax;
    if (cfg.monte_carlo || !stat.tail_probability) {
        report.method = Method::MonteCarlo;
        report.n_samples = cfg.mc_samples;
        report.seed = cfg.seed;
        report.std_error = se_at_best;
    } else {
        report.method = Method::ClosedForm;
    }
    if (null.set.is_point()) report.diagnostics.push_back("point null: no sup required");
    return report;
}

Theorem2Set synthesize_theorem2(const ModelPtr& m, const TestStatistic& stat, const Assertion& null,
                                const SupConfig& cfg) {
    if (!m) throw DomainError("synthesize_theorem2: null model");
    if (null.empty()) throw DomainError("synthesize_theorem2: null hypothesis is empty");

    Theorem2Set out;
    out.null = null;
    out.stat = stat;
    out.tail = cfg.tail;

    AssumptionGrids grids;
    grids.x = m->observation_grid();
    for (int i = 1; i < 20; ++i) grids.u.push_back(i / 20.0);
    grids.u.push_back(0.01);
    grids.u.push_back(0.99);

    SupConfig a1_only = cfg;
    const bool a3_registered =
        null.set.is_point() || (stat.a3_for_lower_half_lines && is_lower_half_line(null));
    if (!a3_registered) {
        for (double x : grids.x) grids.t.push_back(stat.evaluate(x));
    }
    const AssumptionReport check = check_assumptions(*m, stat, null, grids, a1_only);
    if (!check.a1) {
        const auto& w = check.a1_witnesses.front();
        std::ostringstream os;
        os << "A1 fails for " << m->name() << ": no parameter value reproduces T(x) at x = " << w.x << ", u = " << w.u;
        throw UnsupportedModel(os.str());
    }
    if (!check.a3 || !check.a2) {
        std::ostringstream os;
        os << "A2/A3 numeric check failed for " << m->name() << " (" << check.a3_violations.size()
           << " A3 violations)";
        out.warnings.push_back(os.str());
        if (!cfg.force) throw UnsupportedModel(os.str() + "; set force to synthesize anyway");
    }

    const ModelPtr model = m;
    const SupConfig sup_cfg = cfg;
    const Tail tail = cfg.tail;
    out.sup_statistic = [stat, null, sup_cfg](double u) {
        return sup_over_null(null, [&](double theta) { return stat.on_aux(theta, u); }, sup_cfg,
                             stat.nondecreasing_in_theta)
            .value;
    };

    const auto g = out.sup_statistic;
    const bool monotone_u = stat.nondecreasing_in_u;
    out.base.label = "theorem-2 chain for " + stat.label + " under " + null.to_string() + " (" + to_string(tail) + ")";
    out.base.index = Interval::real_line();
    out.base.nesting = Nesting::Increasing;
    out.base.support = [g, tail, monotone_u](double t) -> USet {
        const auto inside = [&](double u) { return tail == Tail::Weak ? g(u) < t : g(u) <= t; };
        if (monotone_u) {
            const auto r = last_true(0.0, 1.0, inside);
            if (!r) return {};
            if (*r >= 1.0) return USet::closed(0.0, 1.0);
            // Closure of {u : inside(u)} is [0, sup], and the sup is the first u outside.
            return USet::closed(0.0, std::nextafter(*r, 2.0));
        }
        std::vector<Interval> cells;
        for (int i = 0; i < kScanCells; ++i) {
            const double a = static_cast<double>(i) / kScanCells;
            const double b = static_cast<double>(i + 1) / kScanCells;
            if (inside(0.5 * (a + b))) cells.push_back(Interval::closed(a, b));
        }
        return USet(std::move(cells));
    };
    const auto support = out.base.support;
    out.base.measure_of = [support](double t) { return support(t).measure(); };

    out.a3_measure = [model, stat, null, sup_cfg, tail](double t) {
        const auto tail_fn = [&](double theta) { return tail_at(*model, stat, theta, t, tail, sup_cfg).p; };
        return 1.0 - sup_over_null(null, tail_fn, sup_cfg, stat.nondecreasing_in_theta).value;
    };
    return out;
}

EquivalenceReport plausibility_equals_pvalue(const ModelPtr& m, const TestStatistic& stat, const Assertion& null,
                                             double x, const SupConfig& cfg) {
    const Theorem2Set chain = synthesize_theorem2(m, stat, null, cfg);
    EquivalenceReport r;
    r.pvalue = pvalue(*m, stat, null, x, cfg);
    r.plausibility_cstep = plausibility(*m, x, chain.base, null).plausibility;
    r.plausibility_containment = chain.null_plausibility(x);
    r.plausibility = cfg.tail == Tail::Weak ? r.plausibility_cstep : r.plausibility_containment;
    r.difference = std::fabs(r.plausibility - r.pvalue.value);

    if (r.pvalue.method == Method::ClosedForm) {
        r.tolerance = kClosedFormTolerance;
    } else {
        const double p = r.plausibility;
        const double n = static_cast<double>(r.pvalue.n_samples);
        r.tolerance = 3.0 * std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
    }
    r.pass = r.difference <= r.tolerance;

    const double gap = std::fabs(r.plausibility_cstep - r.plausibility_containment);
    if (gap > kClosedFormTolerance) {
        std::ostringstream os;
        os << "C-step plausibility " << r.plausibility_cstep << " differs from the containment form "
           << r.plausibility_containment << " by " << gap
           << ": under the strict tail the C-step reproduces the weak p-value (atom of T at T(x))";
        r.notes.push_back(os.str());
    }
    return r;
}

AssumptionReport check_assumptions(const AssociationModel& m, const TestStatistic& stat, const Assertion& null,
                                   const AssumptionGrids& grids, const SupConfig& cfg) {
    AssumptionReport report;
    if (null.empty()) throw DomainError("check_assumptions: null hypothesis is empty");

    for (double x : grids.x) {
        for (double u : grids.u) {
            if (!a1_holds_at(m, stat, x, u, cfg)) {
                report.a1 = false;
                report.a1_witnesses.push_back({x, u});
            }
        }
    }

    if (null.set.is_point()) {
        report.notes.push_back("point null: A2 and A3 hold automatically");
        return report;
    }

    const auto sup_at = [&](double u, bool use_flag, int grid) {
        SupConfig c = cfg;
        c.initial_grid = grid;
        return sup_over_null(null, [&](double theta) { return stat.on_aux(theta, u); }, c,
                             use_flag && stat.nondecreasing_in_theta)
            .value;
    };
    for (double u : grids.u) {
        const double registered = sup_at(u, true, cfg.initial_grid);
        const double searched = sup_at(u, false, 2 * cfg.initial_grid);
        if (!std::isfinite(registered) || std::fabs(registered - searched) > 1e-6 * (1.0 + std::fabs(registered))) {
            report.a2 = false;
            report.a2_unstable_u.push_back(u);
        }
    }

    if (grids.t.empty()) return report;
    if (!cfg.seed) throw ConfigError("check_assumptions: the A3 check needs an explicit seed");
    const std::size_t n = std::max<std::size_t>(cfg.mc_samples, 1);
    SeededRng rng(*cfg.seed, 1);
    const Distribution law = m.aux_law();
    std::vector<double> sups(n);
    for (auto& s : sups) s = sup_at(sample(law, rng), true, cfg.initial_grid);

    for (double t : grids.t) {
        const double lhs =
            static_cast<double>(std::count_if(sups.begin(), sups.end(), [t](double v) { return v < t; })) / n;
        const auto tail_fn = [&](double theta) { return tail_at(m, stat, theta, t, Tail::Weak, cfg).p; };
        const double rhs = 1.0 - sup_over_null(null, tail_fn, cfg, stat.nondecreasing_in_theta).value;
        const double se = std::sqrt(std::max(rhs * (1.0 - rhs), 0.0) / n);
        if (std::fabs(lhs - rhs) > 3.0 * se + 1e-9) {
            report.a3 = false;
            report.a3_violations.push_back({t, lhs, rhs, se});
        }
    }
    return report;
}

}  // namespace pvim
