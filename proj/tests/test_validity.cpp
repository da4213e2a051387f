#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pvim/errors.hpp"
#include "pvim/validity.hpp"

using namespace pvim;
using Catch::Approx;

namespace {

const double inf = INFINITY;

SupConfig weak_seeded() {
    SupConfig c;
    c.seed = 0;
    c.tail = Tail::Weak;
    return c;
}

}  // namespace

TEST_CASE("validity audit of the synthesized binomial set") {
    const auto b = std::make_shared<BinomialModel>(20);
    const Assertion a(IntervalSet(Interval::left_open(0, 0.4)), b->param_space());
    const Theorem2Set s = synthesize_theorem2(b, natural_statistic(b), a, weak_seeded());
    const ValidityAudit r = audit_validity(*b, s, 0.4, 20000, 0, default_alpha_grid());
    CHECK(r.pass);
    CHECK(std::is_sorted(r.alpha_grid.begin(), r.alpha_grid.end()));
    REQUIRE(r.exceedance.size() == r.alpha_grid.size());
    for (double e : r.exceedance) {
        CHECK(e >= 0.0);
        CHECK(e <= 1.0);
    }
    CHECK(r.alpha_grid.back() == 1.0);
    CHECK(r.exceedance.back() == 1.0);

    const ValidityAudit again = audit_validity(*b, s, 0.4, 20000, 0, default_alpha_grid());
    CHECK(again.exceedance == r.exceedance);
    CHECK(again.max_violation == r.max_violation);
    const ValidityAudit other = audit_validity(*b, s, 0.4, 20000, 1, default_alpha_grid());
    CHECK(other.exceedance != r.exceedance);

    // An interior theta is valid too, and more conservatively so.
    CHECK(audit_validity(*b, s, 0.25, 5000, 0, default_alpha_grid()).pass);
}

TEST_CASE("validity audits through the C-step") {
    const NormalMeanModel nm(1, 1.0);
    const Assertion pt(IntervalSet::point(0.3), nm.param_space());
    const ValidityAudit r = audit_validity(nm, symmetric_prs(), pt, 0.3, 20000, 4, default_alpha_grid());
    CHECK(r.pass);
    for (std::size_t i = 0; i < r.alpha_grid.size(); ++i)
        CHECK(r.exceedance[i] == Approx(r.alpha_grid[i]).margin(validity_band(r.alpha_grid[i], 20000)));
}

TEST_CASE("negative controls fail the audit") {
    const NormalMeanModel nm(1, 1.0);
    const Assertion pt(IntervalSet::point(0.0), nm.param_space());
    const ValidityAudit distorted_run = audit_validity(nm, distorted(symmetric_prs(), 0.5), pt, 0.0, 20000, 0, default_alpha_grid());
    CHECK_FALSE(distorted_run.pass);
    CHECK(distorted_run.max_violation > 0.1);

    // pl computed for a null that sits below the truth.
    const Assertion wrong(IntervalSet(Interval{-inf, -0.5, false, true}), nm.param_space());
    const Assertion right(IntervalSet(Interval{-inf, 0.0, false, true}), nm.param_space());
    const PlFunction pl = [&](double x) { return plausibility(nm, x, one_sided_prs(), wrong).plausibility; };
    const ValidityAudit w = audit_validity(nm, pl, "wrong null", right, 0.0, 20000, 0, default_alpha_grid());
    CHECK_FALSE(w.pass);
}

TEST_CASE("audit misuse") {
    const NormalMeanModel nm(1, 1.0);
    const Assertion a(IntervalSet(Interval{-inf, 0.0, false, true}), nm.param_space());
    CHECK_THROWS_AS(audit_validity(nm, one_sided_prs(), a, 0.5, 100, 0, default_alpha_grid()), MisuseError);
    CHECK_THROWS_AS(audit_validity(nm, one_sided_prs(), a, 0.0, 0, 0, default_alpha_grid()), MisuseError);
}

TEST_CASE("validity band") {
    CHECK(validity_band(0.1, 100000) == Approx(3 * std::sqrt(0.09 / 100000) + 0.005));
    CHECK(validity_band(1.0, 10) == Approx(0.005));
}

TEST_CASE("Kolmogorov-Smirnov distance") {
    CHECK(ks_uniform_distance({0.5}) == Approx(0.5));
    // Hand computation: max(0.1, 4/15, 1/15, 4/15, 7/30, 0.1).
    CHECK(ks_uniform_distance({0.9, 0.1, 0.4}) == Approx(4.0 / 15));
    std::vector<double> even;
    for (int i = 0; i < 1000; ++i) even.push_back((i + 0.5) / 1000);
    CHECK(ks_uniform_distance(even) == Approx(0.0005));
}

TEST_CASE("uniformity under a true point null") {
    const NormalMeanModel nm(3, 2.0);
    const UniformityReport r = audit_uniformity(nm, one_sided_prs(), 0.7, 20000, 2);
    CHECK_FALSE(r.dominance_only);
    CHECK(r.threshold == Approx(1.5 * 1.36 / std::sqrt(20000.0)));
    CHECK(r.pass);

    const NormalVarianceModel nv(8);
    CHECK(audit_uniformity(nv, one_sided_prs(), 1.3, 20000, 2).pass);

    const BinomialModel b(10);
    const UniformityReport rb = audit_uniformity(b, one_sided_prs(), 0.4, 5000, 2);
    CHECK(rb.dominance_only);
    CHECK_FALSE(rb.notes.empty());
    CHECK(rb.pass);
}

TEST_CASE("plausibility region coverage") {
    const NormalMeanModel nm(1, 1.0);
    const ParamGrid g{-5, 5, 41, false};
    const CoverageReport all = audit_region_coverage(nm, symmetric_prs(), 0.0, 0.0, 500, 0, g);
    CHECK(all.coverage == 1.0);

    const CoverageReport half = audit_region_coverage(nm, symmetric_prs(), 0.5, 0.0, 2000, 0, g);
    CHECK(half.coverage == Approx(0.5).margin(3 * std::sqrt(0.25 / 2000) + 0.005));
    CHECK(half.pass);

    const NormalVarianceModel nv(20);
    const CoverageReport v = audit_region_coverage(nv, one_sided_prs(), 0.1, 1.0, 1000, 0, ParamGrid{0.05, 20, 40, true});
    CHECK(v.coverage >= 0.9 - 3 * std::sqrt(0.09 / 1000));
    CHECK(v.pass);
}

TEST_CASE("coherence demonstration") {
    const NormalMeanModel nm(1, 1.0);
    const Assertion small(IntervalSet::point(0.0), nm.param_space());
    const Assertion big(IntervalSet(Interval::closed(-0.82, 0.52)), nm.param_space());
    const std::vector<double> xs = step_grid(0, 3, 0.01);
    CHECK(xs.size() == 301);
    CHECK(xs.back() == Approx(3.0));

    const CoherenceReport r = coherence_demo(nm, xs, {small, big}, symmetric_prs(), weak_seeded());
    CHECK(r.reversal_count >= 1);
    CHECK(r.single_im_monotone);
    for (const CoherenceRow& row : r.rows) {
        CHECK(row.plausibility_monotone);
        CHECK(row.plausibilities[0] <= row.plausibilities[1] + 1e-12);
        if (!row.reversals.empty()) CHECK(row.pvalues[0] > row.pvalues[1]);
    }

    const CoherenceReport same = coherence_demo(nm, xs, {big, big}, symmetric_prs(), weak_seeded());
    CHECK(same.reversal_count == 0);
    for (const CoherenceRow& row : same.rows) CHECK(row.pvalues[0] == row.pvalues[1]);

    CHECK_THROWS_AS(coherence_demo(nm, xs, {big, small}, symmetric_prs(), weak_seeded()), DomainError);
}
