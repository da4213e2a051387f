#include "pvim/im.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pvim/errors.hpp"

namespace pvim {

namespace {

const USet kUnit = USet::closed(0.0, 1.0);
constexpr int kScanCells = 4096;

// Sets of the form {u : endpoint(u) >= theta} and friends for a monotone endpoint
// crossing theta at u*. Degenerate pieces at u = 0 or u = 1 carry no mass and
// are dropped.
USet above_set(FocalOrder order, double cut, bool inclusive) {
    const bool decreasing = order == FocalOrder::NonIncreasing;
    if (decreasing) {
        if (cut <= 0.0) return {};
        if (cut >= 1.0) return kUnit;
        return USet(Interval{0.0, cut, true, inclusive});
    }
    if (cut >= 1.0) return {};
    if (cut <= 0.0) return kUnit;
    return USet(Interval{cut, 1.0, inclusive, true});
}

USet below_set(FocalOrder order, double cut, bool inclusive) {
    const FocalOrder flipped =
        order == FocalOrder::NonIncreasing ? FocalOrder::NonDecreasing : FocalOrder::NonIncreasing;
    return above_set(flipped, cut, inclusive);
}

// Closed approximation of a monotone predicate's u-set by bisection.
USet monotone_set_by_bisection(const std::function<bool(double)>& pred, bool down_set) {
    if (down_set) {
        const auto r = last_true(0.0, 1.0, pred);
        return r ? USet::closed(0.0, *r) : USet{};
    }
    const auto r = last_true(-1.0, 0.0, [&](double v) { return pred(-v); });
    return r ? USet::closed(-*r, 1.0) : USet{};
}

bool lower_ok(const Interval& focal, const Interval& c) {
    return focal.lo > c.lo || (focal.lo == c.lo && (c.lo_closed || !focal.lo_closed));
}

bool upper_ok(const Interval& focal, const Interval& c) {
    return focal.hi < c.hi || (focal.hi == c.hi && (c.hi_closed || !focal.hi_closed));
}

USet scan_event(const AssociationModel& m, double x, const IntervalSet& target) {
    std::vector<Interval> cells;
    for (int i = 0; i < kScanCells; ++i) {
        const double a = static_cast<double>(i) / kScanCells;
        const double b = static_cast<double>(i + 1) / kScanCells;
        if (IntervalSet(m.focal_interval(x, 0.5 * (a + b))).subset_of(target)) cells.push_back(Interval::closed(a, b));
    }
    return USet(std::move(cells));
}

// Exact {u : focal_interval(x, u) subset target}.
USet raw_event(const AssociationModel& m, double x, const IntervalSet& target) {
    const FocalOrder order = m.focal_order();
    if (order == FocalOrder::None) return scan_event(m, x, target);

    const auto space = *m.param_space().hull();
    const Interval probe = m.focal_interval(x, 0.5);
    USet out;
    for (const Interval& c : target.parts()) {
        if (IntervalSet(c).intersect(m.param_space()).empty()) continue;

        USet lower = kUnit;
        const bool lower_free = c.lo < space.lo || (c.lo == space.lo && (c.lo_closed || !space.lo_closed));
        if (!lower_free) {
            const bool inclusive = c.lo_closed || !probe.lo_closed;
            if (const auto cut = m.endpoint_cut(x, c.lo, Endpoint::Lower)) {
                lower = above_set(order, *cut, inclusive);
            } else {
                lower = monotone_set_by_bisection(
                    [&](double u) { return lower_ok(m.focal_interval(x, u), c); },
                    order == FocalOrder::NonIncreasing);
            }
        }

        USet upper = kUnit;
        const bool upper_free = c.hi > space.hi || (c.hi == space.hi && (c.hi_closed || !space.hi_closed));
        if (!upper_free) {
            const bool inclusive = c.hi_closed || !probe.hi_closed;
            if (const auto cut = m.endpoint_cut(x, c.hi, Endpoint::Upper)) {
                upper = below_set(order, *cut, inclusive);
            } else {
                upper = monotone_set_by_bisection(
                    [&](double u) { return upper_ok(m.focal_interval(x, u), c); },
                    order == FocalOrder::NonDecreasing);
            }
        }
        out = out.unite(lower.intersect(upper));
    }
    return out.intersect(kUnit);
}

// Target whose containment is equivalent to Theta_x(u) subset a once the box
// constraint is applied.
IntervalSet constrained_target(const AssociationModel& m, const Assertion& a) {
    return a.set.unite(m.constraint().complement_within(m.param_space()));
}

}  // namespace

std::string to_string(Method m) { return m == Method::ClosedForm ? "closed-form" : "monte-carlo"; }

ParamSet focal_set(const AssociationModel& m, double x, double u) {
    m.validate_observation(x);
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("focal_set: u must lie in [0, 1]");
    return m.focal_set(x, u);
}

ParamSet combined_set(const AssociationModel& m, double x, const USet& s) {
    m.validate_observation(x);
    if (!s.subset_of(kUnit)) throw DomainError("combined_set: s must lie in [0, 1]");
    const FocalOrder order = m.focal_order();
    ParamSet out;
    for (const Interval& piece : s.parts()) {
        if (piece.degenerate()) {
            out = out.unite(IntervalSet(m.focal_interval(x, piece.lo)));
            continue;
        }
        if (order == FocalOrder::None)
            throw UnsupportedModel("combined_set: " + m.name() + " has no monotone focal map; s must be finite");
        // Monotone endpoints sweep a connected range: the hull of the two extreme focal sets.
        const double lo_u = order == FocalOrder::NonIncreasing ? piece.hi : piece.lo;
        const double hi_u = order == FocalOrder::NonIncreasing ? piece.lo : piece.hi;
        const Interval at_lo = m.focal_interval(x, lo_u);
        const Interval at_hi = m.focal_interval(x, hi_u);
        out = out.unite(IntervalSet(Interval{at_lo.lo, at_hi.hi, at_lo.lo_closed, at_hi.hi_closed}));
    }
    return out.intersect(m.param_space()).intersect(m.constraint());
}

USet u_event(const AssociationModel& m, double x, const Assertion& a) {
    m.validate_observation(x);
    return raw_event(m, x, constrained_target(m, a)).closure().intersect(kUnit);
}

USet containment_event(const AssociationModel& m, double x, const Assertion& a) {
    m.validate_observation(x);
    const USet raw = raw_event(m, x, constrained_target(m, a));
    std::vector<Interval> holes;
    for (double p : raw.complement_within(kUnit).isolated_points()) {
        if (p > 0.0 && p < 1.0) holes.push_back(Interval::point(p));
    }
    return raw.closure().intersect(kUnit).difference(USet(std::move(holes)));
}

USet empty_focal_event(const AssociationModel& m, double x) {
    m.validate_observation(x);
    const IntervalSet outside = m.constraint().complement_within(m.param_space());
    if (outside.empty()) return {};
    return raw_event(m, x, outside);
}

PlausibilityReport belief(const AssociationModel& m, double x, const NestedRandomSet& s, const Assertion& a) {
    const USet empty = empty_focal_event(m, x);
    if (!empty.empty()) {
        const Interval widest = *std::max_element(empty.parts().begin(), empty.parts().end(),
                                                  [](const Interval& a, const Interval& b) { return a.length() < b.length(); });
        std::ostringstream os;
        os << m.name() << ": Theta_x(u) is empty at x = " << x << " for u in " << empty.to_string()
           << " (P_U-measure " << empty.measure() << ")";
        throw EmptyFocalSetError(os.str(), x, 0.5 * (widest.lo + widest.hi), empty.measure());
    }
    PlausibilityReport r;
    r.method = Method::ClosedForm;
    r.belief = containment_probability(s, containment_event(m, x, a));
    r.plausibility = 1.0 - containment_probability(s, containment_event(m, x, a.complement()));
    return r;
}

PlausibilityReport plausibility(const AssociationModel& m, double x, const NestedRandomSet& s, const Assertion& a) {
    return belief(m, x, s, a);
}

std::vector<double> ParamGrid::values() const {
    if (points < 1) throw DomainError("grid: needs at least one point");
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("grid: bounds must satisfy lo <= hi");
    if (log_scale && !(lo > 0.0)) throw DomainError("grid: log scale needs lo > 0");
    std::vector<double> v(static_cast<std::size_t>(points));
    if (points == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        v[static_cast<std::size_t>(i)] =
            log_scale ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
    }
    v.back() = hi;
    return v;
}

RegionReport plausibility_region(const AssociationModel& m, double x, const NestedRandomSet& s, double alpha,
                                 const ParamGrid& grid) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("plausibility_region: alpha must lie in [0, 1)");
    const auto thetas = grid.values();
    const auto point_pl = [&](double theta) {
        return plausibility(m, x, s, Assertion(IntervalSet::point(theta), m.param_space())).plausibility;
    };

    std::vector<bool> inside(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        inside[i] = m.param_space().contains(thetas[i]) && point_pl(thetas[i]) > alpha;
    }

    RegionReport out;
    const auto first = std::find(inside.begin(), inside.end(), true);
    if (first == inside.end()) {
        out.diagnostics.push_back("no grid point has plausibility above alpha; the grid may not cover the region");
        return out;
    }
    const auto i0 = static_cast<std::size_t>(first - inside.begin());
    const auto i1 = static_cast<std::size_t>(inside.rend() - std::find(inside.rbegin(), inside.rend(), true)) - 1;
    if (std::any_of(inside.begin() + static_cast<long>(i0), inside.begin() + static_cast<long>(i1) + 1,
                    [](bool b) { return !b; })) {
        out.diagnostics.push_back("region is not connected on the grid; reporting its hull");
    }

    const auto refine = [&](double in, double out_pt) {
        for (int k = 0; k < kRegionBisectionSteps; ++k) {
            const double mid = 0.5 * (in + out_pt);
            if (point_pl(mid) > alpha) {
                in = mid;
            } else {
                out_pt = mid;
            }
        }
        return in;
    };

    double lo = thetas[i0];
    double hi = thetas[i1];
    if (i0 == 0) {
        out.reaches_grid_lo = true;
        out.diagnostics.push_back("region reaches the lower end of the grid");
    } else {
        lo = refine(thetas[i0], thetas[i0 - 1]);
    }
    if (i1 + 1 == thetas.size()) {
        out.reaches_grid_hi = true;
        out.diagnostics.push_back("region reaches the upper end of the grid");
    } else {
        hi = refine(thetas[i1], thetas[i1 + 1]);
    }
    out.region = ParamSet::closed(lo, hi);
    return out;
}

}  // namespace pvim
