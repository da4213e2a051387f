#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pvim/association.hpp"
#include "pvim/interval_set.hpp"
#include "pvim/random_set.hpp"

namespace pvim {

enum class Method { ClosedForm, MonteCarlo };

std::string to_string(Method m);

/// Plausibility and belief of one assertion, with provenance.
struct PlausibilityReport {
    double plausibility = 0.0;
    double belief = 0.0;
    Method method = Method::ClosedForm;
    std::size_t n_samples = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> std_error;
    std::vector<std::string> diagnostics;
};

/// Theta_x(u), intersected with the model's constraint; may be empty.
ParamSet focal_set(const AssociationModel& m, double x, double u);

/// Theta_x(s) = union of Theta_x(u) over u in s. Monotone focal maps use the
/// component endpoints; other models only accept finite s.
ParamSet combined_set(const AssociationModel& m, double x, const USet& s);

/// cl{u : Theta_x(u) subset a}.
USet u_event(const AssociationModel& m, double x, const Assertion& a);

/// The u-event used for belief: the closure of {u : Theta_x(u) subset a}, except
/// that isolated points of its complement stay excluded. Those points are where a
/// singleton focal set hits a point assertion; closing over them would make every
/// point assertion implausible.
USet containment_event(const AssociationModel& m, double x, const Assertion& a);

/// {u : Theta_x(u) is empty}.
USet empty_focal_event(const AssociationModel& m, double x);

/// bel_x(a; s) and pl_x(a; s) evaluated in u-space under the natural measure.
/// Throws EmptyFocalSetError if any focal set for this x is empty.
PlausibilityReport belief(const AssociationModel& m, double x, const NestedRandomSet& s, const Assertion& a);
PlausibilityReport plausibility(const AssociationModel& m, double x, const NestedRandomSet& s, const Assertion& a);

struct ParamGrid {
    double lo = 0.0;
    double hi = 1.0;
    int points = 101;
    bool log_scale = false;

    std::vector<double> values() const;
};

struct RegionReport {
    ParamSet region;
    bool reaches_grid_lo = false;
    bool reaches_grid_hi = false;
    std::vector<std::string> diagnostics;
};

inline constexpr int kRegionBisectionSteps = 40;

/// {theta : pl_x({theta}; s) > alpha} on the grid, returned as its hull with both
/// endpoints refined by bisection.
RegionReport plausibility_region(const AssociationModel& m, double x, const NestedRandomSet& s, double alpha,
                                 const ParamGrid& grid);

}  // namespace pvim
