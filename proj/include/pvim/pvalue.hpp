#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pvim/association.hpp"
#include "pvim/im.hpp"
#include "pvim/interval_set.hpp"
#include "pvim/random_set.hpp"

namespace pvim {

/// Which tail counts as "at least as extreme".
///
/// Weak is the textbook sup P{T(X) >= T(x)}. Strict is sup P{T(X) > T(x)}, the
/// form 1 - F(x) quoted for the one-sided binomial test. They differ only when
/// T(X) has atoms.
enum class Tail { Strict, Weak };

std::string to_string(Tail t);
Tail parse_tail(const std::string& s);

/// A test statistic; large values speak against the null.
struct TestStatistic {
    std::string label;
    std::function<double(double x)> evaluate;
    /// T(a(theta, u)).
    std::function<double(double theta, double u)> on_aux;
    /// Optional closed form of P_{X|theta}{T(X) >= t} (Weak) or {T(X) > t} (Strict).
    std::function<double(double theta, double t, Tail)> tail_probability;
    /// Optional closed-form p-value registered by the model for particular nulls.
    std::function<std::optional<double>(const Assertion& null, double x, Tail)> closed_form_pvalue;
    /// T(a(theta, u)) is nondecreasing in theta, so the sup over a null sits at its upper end.
    bool nondecreasing_in_theta = false;
    /// T(a(theta, u)) is nondecreasing in u.
    bool nondecreasing_in_u = false;
    /// T(x) = x under the model's own association, so A1 reduces to nonempty focal sets.
    bool natural = false;
    /// The model guarantees A3 for nulls of the form {theta <= theta0}.
    bool a3_for_lower_half_lines = false;
};

/// Controls for sup/inf over composite nulls and Monte Carlo tails.
struct SupConfig {
    int initial_grid = 64;
    int refine_rounds = 2;
    int refine_factor = 8;
    std::size_t mc_samples = 100000;
    std::optional<std::uint64_t> seed;
    Tail tail = Tail::Strict;
    bool monte_carlo = false;
    bool use_closed_form = true;
    /// Half-width used to clip unbounded null components for grid search.
    double search_span = 50.0;
    /// Proceed with synthesis even when the A3 check reports a violation.
    bool force = false;
};

struct SupResult {
    double value = 0.0;
    double argmax = 0.0;
};

/// sup of f over the null: a single evaluation for point nulls or monotone f,
/// otherwise an adaptive grid (initial grid, then refinement rounds around the
/// running maximizer).
SupResult sup_over_null(const Assertion& null, const std::function<double(double)>& f, const SupConfig& cfg,
                        bool nondecreasing);

struct PValueReport {
    double value = 0.0;
    Method method = Method::ClosedForm;
    std::size_t n_samples = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> std_error;
    std::optional<double> argmax_theta;
    Tail tail = Tail::Strict;
    std::vector<std::string> diagnostics;
};

/// sup_{theta in null} P_{X|theta}{T(X) >= T(x)} (or > under Tail::Strict).
PValueReport pvalue(const AssociationModel& m, const TestStatistic& stat, const Assertion& null, double x,
                    const SupConfig& cfg);

/// The predictive random set whose plausibility of the null reproduces the p-value.
///
/// Support S_t = cl{u : sup_{theta in null} T(a(theta, u)) < t} (Weak) or with
/// "<= t" (Strict); measure_of(t) = P_U(S_t).
struct Theorem2Set {
    NestedRandomSet base;
    Assertion null;
    TestStatistic stat;
    Tail tail = Tail::Weak;
    std::vector<std::string> warnings;
    /// u -> sup_{theta in null} T(a(theta, u)).
    std::function<double(double)> sup_statistic;
    /// t -> inf_{theta in null} P_{X|theta}{T(X) < t} (or <= t under Strict).
    std::function<double(double)> a3_measure;

    double measure_of(double t) const { return base.measure_of(t); }
    std::optional<double> tstar(const USet& k) const { return largest_index_within(base, k); }
    /// 1 - P_S{S subset S_{T(x)}}, the containment form of the null plausibility.
    double null_plausibility(double x) const { return 1.0 - base.measure_of(stat.evaluate(x)); }
};

/// Throws UnsupportedModel if an A1 witness is found, or if A3 fails numerically
/// and cfg.force is not set.
Theorem2Set synthesize_theorem2(const ModelPtr& m, const TestStatistic& stat, const Assertion& null,
                                const SupConfig& cfg);

struct EquivalenceReport {
    PValueReport pvalue;
    /// pl_x(null; S) through the u-space belief of the complement.
    double plausibility_cstep = 0.0;
    /// 1 - P_S{S subset S_{T(x)}}.
    double plausibility_containment = 0.0;
    /// The route matching the tail convention: C-step for Weak, containment for Strict.
    double plausibility = 0.0;
    double difference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::vector<std::string> notes;
};

inline constexpr double kClosedFormTolerance = 1e-12;

EquivalenceReport plausibility_equals_pvalue(const ModelPtr& m, const TestStatistic& stat, const Assertion& null,
                                             double x, const SupConfig& cfg);

struct AssumptionGrids {
    std::vector<double> x;
    std::vector<double> u;
    std::vector<double> t;
};

struct A1Witness {
    double x;
    double u;
};

struct A3Violation {
    double t;
    double lhs;
    double rhs;
    double std_error;
};

struct AssumptionReport {
    bool a1 = true;
    bool a2 = true;
    bool a3 = true;
    std::vector<A1Witness> a1_witnesses;
    std::vector<double> a2_unstable_u;
    std::vector<A3Violation> a3_violations;
    std::vector<std::string> notes;

    bool all() const { return a1 && a2 && a3; }
};

/// Numeric checks of A1 (solvability), A2 (finite, grid-stable sup) and A3
/// (P_U{sup T(a(theta, U)) < t} = inf P_U{T(a(theta, U)) < t}, Monte Carlo
/// on the left within 3 standard errors). A3 needs cfg.seed unless the null is a point.
AssumptionReport check_assumptions(const AssociationModel& m, const TestStatistic& stat, const Assertion& null,
                                   const AssumptionGrids& grids, const SupConfig& cfg);

}  // namespace pvim
