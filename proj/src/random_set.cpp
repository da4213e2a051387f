#include "pvim/random_set.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "pvim/errors.hpp"

namespace pvim {

namespace {

constexpr double kMeasureTol = 1e-12;
constexpr std::uint64_t kSign = 1ULL << 63;

std::uint64_t ordered_key(double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    return (bits & kSign) ? ~bits : (bits | kSign);
}

double from_key(std::uint64_t key) {
    const std::uint64_t bits = (key & kSign) ? (key & ~kSign) : ~key;
    return std::bit_cast<double>(bits);
}

}  // namespace

std::optional<double> last_true(double lo, double hi, const std::function<bool(double)>& pred) {
    if (lo == 0.0) lo = 0.0;  // fold -0 onto +0
    if (!pred(lo)) return std::nullopt;
    if (pred(hi)) return hi;
    std::uint64_t a = ordered_key(lo);
    std::uint64_t b = ordered_key(hi);
    while (b - a > 1) {
        const std::uint64_t mid = a + (b - a) / 2;
        if (pred(from_key(mid))) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return from_key(a);
}

NestedRandomSet one_sided_prs() {
    NestedRandomSet s;
    s.label = "one-sided [0, U)";
    s.index = Interval::closed(0.0, 1.0);
    s.support = [](double t) { return USet::closed(0.0, std::clamp(t, 0.0, 1.0)); };
    s.measure_of = [](double t) { return std::clamp(t, 0.0, 1.0); };
    return s;
}

NestedRandomSet symmetric_prs() {
    NestedRandomSet s;
    s.label = "symmetric {u : |u - 1/2| <= |U - 1/2|}";
    s.index = Interval::closed(0.0, 0.5);
    s.support = [](double t) {
        const double r = std::clamp(t, 0.0, 0.5);
        return USet::closed(0.5 - r, 0.5 + r);
    };
    s.measure_of = [](double t) { return 2.0 * std::clamp(t, 0.0, 0.5); };
    return s;
}

NestedRandomSet distorted(NestedRandomSet base, double exponent) {
    std::ostringstream os;
    os << base.label << " with measure^" << exponent;
    base.label = os.str();
    auto inner = base.measure_of;
    base.measure_of = [inner, exponent](double t) { return std::pow(inner(t), exponent); };
    return base;
}

std::optional<double> largest_index_within(const NestedRandomSet& s, const USet& k) {
    const auto fits = [&](double t) { return s.support(t).subset_of(k); };
    if (s.nesting == Nesting::Increasing) return last_true(s.index.lo, s.index.hi, fits);
    // Decreasing chains fit in K on a suffix; search the mirrored index.
    const auto mirrored = last_true(-s.index.hi, -s.index.lo, [&](double r) { return fits(-r); });
    if (!mirrored) return std::nullopt;
    return -*mirrored;
}

double containment_probability(const NestedRandomSet& s, const USet& k) {
    const auto t = largest_index_within(s, k);
    return t ? s.measure_of(*t) : 0.0;
}

CheckReport check_admissible(const NestedRandomSet& s, std::span<const double> t_grid) {
    CheckReport report;
    const auto fail = [&](std::string msg, double a, double b) {
        report.pass = false;
        report.message = std::move(msg);
        report.violation = std::make_pair(a, b);
        return report;
    };
    const USet unit = USet::closed(0.0, 1.0);

    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] < t_grid[i - 1]) return fail("index grid is not sorted", t_grid[i - 1], t_grid[i]);
    }

    std::optional<USet> previous;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const USet st = s.support(t);
        if (!st.all_closed()) return fail("S_t is not closed: " + st.to_string(), t, t);
        if (!st.subset_of(unit)) return fail("S_t leaves [0, 1]: " + st.to_string(), t, t);
        const double m = s.measure_of(t);
        if (std::fabs(m - st.measure()) > kMeasureTol) {
            std::ostringstream os;
            os << "measure_of(" << t << ") = " << m << " but P_U(S_t) = " << st.measure();
            return fail(os.str(), t, t);
        }
        if (previous) {
            const double prev_t = t_grid[i - 1];
            const bool grows = previous->subset_of(st);
            const bool shrinks = st.subset_of(*previous);
            if (!grows && !shrinks) return fail("S_t are not nested", prev_t, t);
            if (s.nesting == Nesting::Increasing && !grows) return fail("chain shrinks as t grows", prev_t, t);
            if (s.nesting == Nesting::Decreasing && !shrinks) return fail("chain grows as t grows", prev_t, t);
        }
        previous = st;
    }

    const double small_end = s.nesting == Nesting::Increasing ? s.index.lo : s.index.hi;
    const double large_end = s.nesting == Nesting::Increasing ? s.index.hi : s.index.lo;
    if (s.support(small_end).measure() > kMeasureTol) return fail("chain has no empty limit", small_end, small_end);
    if (s.support(large_end).measure() < 1.0 - kMeasureTol) return fail("chain has no full limit", large_end, large_end);

    report.message = "admissible";
    return report;
}

}  // namespace pvim
