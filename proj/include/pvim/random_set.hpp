#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "pvim/interval_set.hpp"

namespace pvim {

enum class Nesting { Increasing, Decreasing };

/// A predictive random set supported on the chain {S_t : t in index}, with the
/// natural measure P_S{S subset K} = sup{P_U(S_t) : S_t subset K}.
struct NestedRandomSet {
    std::string label;
    Interval index;
    std::function<USet(double)> support;
    std::function<double(double)> measure_of;
    Nesting nesting = Nesting::Increasing;
};

/// S_t = [0, t], t in [0, 1]; the closed version of S = [0, U).
NestedRandomSet one_sided_prs();

/// S_t = [1/2 - t, 1/2 + t], t in [0, 1/2]; S = {u : |u - 1/2| <= |U - 1/2|}.
NestedRandomSet symmetric_prs();

/// Same support with measure_of(t)^exponent; breaks the natural-measure condition
/// and exists for negative controls.
NestedRandomSet distorted(NestedRandomSet base, double exponent);

/// Index of the largest chain member inside K: t*_K = sup{t : S_t subset K} for
/// increasing chains, inf{t : S_t subset K} for decreasing ones. nullopt when no
/// member fits.
std::optional<double> largest_index_within(const NestedRandomSet& s, const USet& k);

/// P_S{S subset K} under the natural measure.
double containment_probability(const NestedRandomSet& s, const USet& k);

struct CheckReport {
    bool pass = true;
    std::string message;
    std::optional<std::pair<double, double>> violation;
};

/// Checks closedness, nesting, the empty/full limits at the ends of the index
/// space, and measure_of(t) == P_U(S_t) on the grid. Failures are reported, not thrown.
CheckReport check_admissible(const NestedRandomSet& s, std::span<const double> t_grid);

/// Bisection on the total order of doubles: returns the largest t in [lo, hi]
/// with pred(t) true, given pred is true on a prefix. nullopt if pred(lo) is false.
std::optional<double> last_true(double lo, double hi, const std::function<bool(double)>& pred);

}  // namespace pvim
