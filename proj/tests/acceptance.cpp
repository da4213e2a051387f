// One PASS/FAIL line per acceptance criterion; exits nonzero if any line fails.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "pvim/errors.hpp"
#include "pvim/im.hpp"
#include "pvim/models.hpp"
#include "pvim/pvalue.hpp"
#include "pvim/rng.hpp"
#include "pvim/validity.hpp"

using namespace pvim;
using Json = nlohmann::json;

namespace {

const double inf = INFINITY;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& id, const std::string& what, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget_s <= 0 || secs < budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %-3s %s: %s; %.2fs%s\n", pass ? "PASS" : "FAIL", id.c_str(), what.c_str(), o.detail.c_str(), secs,
                in_time ? "" : " (over budget)");
    std::fflush(stdout);
}

std::pair<int, Json> cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str().empty() ? Json() : Json::parse(out.str())};
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

SupConfig seeded(Tail tail) {
    SupConfig c;
    c.seed = 0;
    c.tail = tail;
    return c;
}

// Quantile by plain bisection on the cdf, independent of the library's solver.
double bisect_quantile(const Distribution& d, double p, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(d, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Outcome golden() {
    const auto [code, j] = cli({"pval", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--sigma0-sq", "1"});
    const double p = j.value("pvalue", NAN);
    return {code == 0 && std::fabs(p - 0.72) <= 0.005, "pvalue " + num(p)};
}

Outcome equivalence() {
    int cases = 0, bad = 0, mc_cases = 0, mc_over = 0;
    double worst_closed = 0.0, worst_sigma = 0.0, sum_z2 = 0.0;
    const auto record = [&](const EquivalenceReport& r, bool mc) {
        ++cases;
        if (!r.pass) ++bad;
        if (mc) {
            const double z = r.difference / (r.tolerance / 3);
            worst_sigma = std::max(worst_sigma, z);
            sum_z2 += z * z;
            ++mc_cases;
            if (!r.pass) ++mc_over;
        } else {
            worst_closed = std::max(worst_closed, r.difference);
            if (r.difference > 1e-12) ++bad;
        }
    };
    for (int n : {5, 20}) {
        const auto b = std::make_shared<BinomialModel>(n);
        for (double theta0 : {0.3, 0.5}) {
            const Assertion null(IntervalSet(Interval::left_open(0, theta0)), b->param_space());
            for (Tail tail : {Tail::Strict, Tail::Weak})
                for (int x = 0; x <= n; ++x) record(plausibility_equals_pvalue(b, natural_statistic(b), null, x, seeded(tail)), false);
        }
    }
    const auto nm = std::make_shared<NormalMeanModel>(1, 1.0);
    const auto nv = std::make_shared<NormalVarianceModel>(20);
    const Assertion mnull(IntervalSet(Interval{-inf, 0.0, false, true}), nm->param_space());
    const Assertion vnull(IntervalSet(Interval::left_open(0, 1)), nv->param_space());
    SupConfig mc = seeded(Tail::Strict);
    mc.monte_carlo = true;
    mc.mc_samples = 100000;
    for (int i = 0; i < 50; ++i) {
        // One stream per case keeps the Monte Carlo comparisons independent.
        mc.seed = static_cast<std::uint64_t>(i);
        const double xbar = -2.5 + 0.1 * i;
        const double t = 5.0 + 0.6 * i;
        record(plausibility_equals_pvalue(nm, natural_statistic(nm), mnull, xbar, seeded(Tail::Strict)), false);
        record(plausibility_equals_pvalue(nv, natural_statistic(nv), vnull, t, seeded(Tail::Strict)), false);
        record(plausibility_equals_pvalue(nm, natural_statistic(nm), mnull, xbar, mc), true);
        record(plausibility_equals_pvalue(nv, natural_statistic(nv), vnull, t, mc), true);
    }
    return {bad == 0, std::to_string(cases) + " cases, worst closed-form gap " + num(worst_closed) +
                          ", Monte Carlo: " + std::to_string(mc_over) + " of " + std::to_string(mc_cases) +
                          " beyond 3 se, worst " + num(worst_sigma) + " se, rms " + num(std::sqrt(sum_z2 / mc_cases)) +
                          " se"};
}

Outcome validity() {
    struct Setup {
        ModelPtr model;
        Assertion null;
        double boundary;
        double interior;
    };
    const auto b = std::make_shared<BinomialModel>(20);
    const auto nm = std::make_shared<NormalMeanModel>(1, 1.0);
    const auto nv = std::make_shared<NormalVarianceModel>(20);
    const std::vector<Setup> setups{
        {b, Assertion(IntervalSet(Interval::left_open(0, 0.4)), b->param_space()), 0.4, 0.3},
        {nm, Assertion(IntervalSet(Interval{-inf, 0.0, false, true}), nm->param_space()), 0.0, -0.5},
        {nv, Assertion(IntervalSet(Interval::left_open(0, 1)), nv->param_space()), 1.0, 0.7},
    };
    bool ok = true;
    std::string detail;
    double control = 0.0;
    for (const Setup& s : setups) {
        const Theorem2Set t2 = synthesize_theorem2(s.model, natural_statistic(s.model), s.null, seeded(Tail::Weak));
        const ValidityAudit at = audit_validity(*s.model, t2, s.boundary, 100000, 0, default_alpha_grid());
        const ValidityAudit in = audit_validity(*s.model, t2, s.interior, 100000, 0, default_alpha_grid());
        ok = ok && at.pass && in.pass;
        detail += s.model->name() + " max violation " + num(at.max_violation) + "; ";
        if (s.model == nm) {
            Theorem2Set broken = t2;
            broken.base = distorted(t2.base, 0.5);
            const ValidityAudit neg = audit_validity(*s.model, broken, s.boundary, 100000, 0, default_alpha_grid());
            ok = ok && !neg.pass;
            control = neg.max_violation;
        }
    }
    return {ok, detail + "distorted control " + (control > 0 ? "fails with " + num(control) : std::string("passed"))};
}

Outcome uniformity() {
    const NormalMeanModel nm(1, 1.0);
    const NormalVarianceModel nv(20);
    const UniformityReport a = audit_uniformity(nm, one_sided_prs(), 0.0, 100000, 0);
    const UniformityReport b = audit_uniformity(nv, one_sided_prs(), 1.0, 100000, 0);
    return {a.pass && b.pass && a.threshold == 1.5 * 1.36 / std::sqrt(1e5),
            "KS normal-mean " + num(a.ks_distance) + ", normal-variance " + num(b.ks_distance) + " < " + num(a.threshold)};
}

Outcome coverage() {
    const NormalVarianceModel nv(20);
    const ParamGrid grid{0.01, 100, 96, true};
    const CoverageReport c = audit_region_coverage(nv, one_sided_prs(), 0.1, 1.0, 10000, 0, grid);
    const RegionReport r = plausibility_region(nv, 19 * 0.79, one_sided_prs(), 0.1, grid);
    const double oracle = 19 * 0.79 / bisect_quantile(ChiSquared{19}, 0.9, 0, 200);
    const double lower = r.region.infimum();
    const bool ok = c.coverage >= 0.89 && std::fabs(lower - 0.5518) <= 1e-3 && std::fabs(lower - oracle) <= 1e-6;
    return {ok, "coverage " + num(c.coverage) + ", lower bound " + num(lower) + " (chi-square oracle " + num(oracle) + ")"};
}

Outcome properties() {
    SeededRng rng(20240601, 0);
    const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    const auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n); };
    int cases = 0, bad = 0;
    for (int k = 0; k < 2000; ++k) {
        ModelPtr m;
        double x, lo, hi;
        switch (pick(3)) {
            case 0: {
                const int n = 1 + pick(40);
                m = std::make_shared<BinomialModel>(n);
                x = pick(n + 1);
                lo = 0;
                hi = 1;
                break;
            }
            case 1:
                m = std::make_shared<NormalMeanModel>(1 + pick(30), uniform(0.1, 4));
                x = uniform(-4, 4);
                lo = -6;
                hi = 6;
                break;
            default:
                m = std::make_shared<NormalVarianceModel>(2 + pick(40));
                x = uniform(0.1, 60);
                lo = 0;
                hi = 12;
                break;
        }
        const auto piece = [&]() -> Interval {
            const double a = uniform(lo, hi), c = uniform(lo, hi);
            switch (pick(4)) {
                case 0: return Interval::point(a);
                case 1: return Interval{-inf, a, false, rng.uniform() < 0.5};
                case 2: return Interval{a, inf, rng.uniform() < 0.5, false};
                default: return Interval{std::min(a, c), std::max(a, c), rng.uniform() < 0.5, rng.uniform() < 0.5};
            }
        };
        IntervalSet set(piece());
        if (rng.uniform() < 0.3) set = set.unite(IntervalSet(piece()));
        const Assertion a(set, m->param_space());
        const Assertion wider(set.unite(IntervalSet(piece())), m->param_space());
        const NestedRandomSet s = rng.uniform() < 0.5 ? one_sided_prs() : symmetric_prs();
        const PlausibilityReport r = plausibility(*m, x, s, a);
        const PlausibilityReport rc = plausibility(*m, x, s, a.complement());
        const PlausibilityReport rw = plausibility(*m, x, s, wider);
        const double t1 = uniform(s.index.lo, s.index.hi), t2 = uniform(s.index.lo, s.index.hi);
        const bool ok = r.belief <= r.plausibility + 1e-12 && std::fabs(r.belief - (1 - rc.plausibility)) <= 1e-12 &&
                        r.plausibility <= rw.plausibility + 1e-12 && r.belief <= rw.belief + 1e-12 &&
                        s.support(std::min(t1, t2)).subset_of(s.support(std::max(t1, t2)));
        ++cases;
        if (!ok) ++bad;
    }
    return {cases >= 1000 && bad == 0, std::to_string(cases) + " cases, " + std::to_string(bad) + " failures"};
}

Outcome constraint_exact() {
    const NormalMeanModel c(1, 1.0, Interval::closed(-1, 1));
    const DiagnosticReport d = constrained_focal_diagnostic(c, -1.0);
    const bool ok = d.empty_u == USet(Interval::left_open(0.5, 1.0)) && d.measure == 0.5;
    return {ok, "empty u-set " + d.empty_u.to_string() + " with measure " + num(d.measure) +
                    "; Theta_{-1}(u) = {-1 - Phi^{-1}(u)} is also empty for u < Phi(-2)"};
}

Outcome constraint_refusal() {
    const auto [code, j] = cli({"pval", "--model", "normal-mean-constrained", "--x", "-1", "--null", "theta==0"});
    const NormalMeanModel c(1, 1.0, Interval::closed(-1, 1));
    const DiagnosticReport d = constrained_focal_diagnostic(c, -1.0);
    const bool contains = USet(Interval::left_open(0.5, 1.0)).subset_of(d.empty_u);
    return {code == 3 && contains && d.measure >= 0.5,
            "exit " + std::to_string(code) + ", (0.5, 1] inside the empty u-set: " + (contains ? "yes" : "no")};
}

Outcome coherence() {
    const NormalMeanModel nm(1, 1.0);
    const std::vector<Assertion> nulls{Assertion(IntervalSet::point(0.0), nm.param_space()),
                                       Assertion(IntervalSet(Interval::closed(-0.82, 0.52)), nm.param_space())};
    const std::vector<double> xs = step_grid(0, 3, 0.01);
    const CoherenceReport r = coherence_demo(nm, xs, nulls, symmetric_prs(), seeded(Tail::Weak));
    std::string first = "none";
    for (const CoherenceRow& row : r.rows)
        if (!row.reversals.empty()) {
            first = "x = " + num(row.x) + " (p " + num(row.pvalues[0]) + " > " + num(row.pvalues[1]) + ")";
            break;
        }
    return {r.reversal_count >= 1 && r.single_im_monotone,
            std::to_string(r.reversal_count) + " reversals over " + std::to_string(xs.size()) + " x values, first at " +
                first + "; single-IM column monotone: " + (r.single_im_monotone ? "yes" : "no")};
}

}  // namespace

int main() {
    criterion("1", "golden p-value 0.72", 1, golden);
    criterion("2", "plausibility of the null equals the p-value", 30, equivalence);
    criterion("3", "validity audits at 1e5 replications", 120, validity);
    criterion("4", "uniformity under a true point null", 60, uniformity);
    criterion("5", "region coverage and the 0.5518 lower bound", 0, coverage);
    criterion("6", "structural properties", 0, properties);
    criterion("7a", "constraint diagnostic is exactly (1/2, 1] with measure 0.5", 0, constraint_exact);
    criterion("7b", "constrained model refuses with exit 3", 0, constraint_refusal);
    criterion("8", "coherence reversals versus a monotone single IM", 0, coherence);
    std::printf("%d failing\n", failures);
    return failures == 0 ? 0 : 1;
}
