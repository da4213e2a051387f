#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pvim {

/// A real interval with independently open or closed ends. Infinite ends are
/// always treated as open.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = true;

    static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
    static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
    static Interval left_open(double lo, double hi) { return {lo, hi, false, true}; }
    static Interval right_open(double lo, double hi) { return {lo, hi, true, false}; }
    static Interval point(double x) { return {x, x, true, true}; }
    static Interval real_line();

    bool empty() const;
    bool contains(double x) const;
    double length() const;
    bool degenerate() const { return !empty() && lo == hi; }
    std::string to_string() const;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint intervals, kept sorted and maximally merged.
/// Stands in for parameter sets, assertions and subsets of the auxiliary space.
class IntervalSet {
public:
    IntervalSet() = default;
    IntervalSet(Interval iv);  // NOLINT: implicit by intent
    explicit IntervalSet(std::vector<Interval> parts);

    static IntervalSet point(double x) { return IntervalSet(Interval::point(x)); }
    static IntervalSet closed(double lo, double hi) { return IntervalSet(Interval::closed(lo, hi)); }
    static IntervalSet real_line() { return IntervalSet(Interval::real_line()); }

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    bool contains(double x) const;
    bool is_point() const { return parts_.size() == 1 && parts_.front().degenerate(); }

    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet difference(const IntervalSet& other) const;
    /// Complement in the real line.
    IntervalSet complement() const;
    IntervalSet complement_within(const IntervalSet& ambient) const;
    bool subset_of(const IntervalSet& other) const;

    /// Topological closure: every finite endpoint becomes closed, so components
    /// separated only by a single missing point merge.
    IntervalSet closure() const;
    /// Degenerate components (isolated points).
    std::vector<double> isolated_points() const;

    std::optional<Interval> hull() const;
    double infimum() const;
    double supremum() const;
    /// Lebesgue measure; this is P_U for U ~ Unif(0,1) when the set lies in [0, 1].
    double measure() const;
    bool all_closed() const;

    std::string to_string() const;

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    void normalize();
    std::vector<Interval> parts_;
};

using ParamSet = IntervalSet;
using USet = IntervalSet;

/// A hypothesis or assertion: a subset of the parameter space together with the
/// ambient space in which its complement is taken.
struct Assertion {
    IntervalSet set;
    IntervalSet ambient;

    Assertion() = default;
    Assertion(IntervalSet s, IntervalSet amb);

    Assertion complement() const;
    bool contains(double theta) const { return set.contains(theta); }
    bool empty() const { return set.empty(); }
    bool subset_of(const Assertion& other) const { return set.subset_of(other.set); }
    std::string to_string() const { return set.to_string(); }
};

/// Parses the command-line null grammar into an assertion on `ambient`:
///   "theta<=0.5", "theta<0.5", "theta>=0.5", "theta>0.5", "theta==0.5",
///   "0.2<=theta<=0.4" (either inequality may be strict).
/// Any identifier may stand in for "theta". Throws DomainError on bad input.
Assertion parse_assertion(const std::string& text, const IntervalSet& ambient);

}  // namespace pvim
