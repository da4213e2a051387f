#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvim/association.hpp"
#include "pvim/im.hpp"
#include "pvim/models.hpp"
#include "pvim/pvalue.hpp"
#include "pvim/random_set.hpp"

namespace pvim {

/// Runs body(i) for i in [0, n) on up to hardware_concurrency threads. Work is
/// split into contiguous chunks; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// x -> pl_x(A) for a fixed assertion A.
using PlFunction = std::function<double(double)>;

/// {0.01, 0.025, 0.05, 0.1, 0.2, ..., 0.9, 1}.
std::vector<double> default_alpha_grid();

/// 3 sqrt(alpha (1 - alpha) / n) + 0.005.
double validity_band(double alpha, std::size_t n_reps);

struct ValidityAudit {
    std::string model;
    std::string assertion;
    std::string prs;
    double theta_true = 0.0;
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;
    std::vector<double> alpha_grid;
    /// Empirical P(pl_X(A) <= alpha) per alpha.
    std::vector<double> exceedance;
    std::vector<double> band;
    /// max over alpha of exceedance - alpha.
    double max_violation = 0.0;
    bool pass = false;
    std::vector<std::string> notes;
};

/// Replication r draws X from rng(seed, r). Throws MisuseError when theta is
/// outside the assertion or n_reps is zero.
ValidityAudit audit_validity(const AssociationModel& m, const PlFunction& pl, const std::string& prs_label,
                             const Assertion& a, double theta, std::size_t n_reps, std::uint64_t seed,
                             std::vector<double> alpha_grid);

/// pl through the u-space C-step with the given PRS.
ValidityAudit audit_validity(const AssociationModel& m, const NestedRandomSet& s, const Assertion& a, double theta,
                             std::size_t n_reps, std::uint64_t seed, std::vector<double> alpha_grid);

/// pl through the containment form 1 - P_U(S_{T(x)}) of a synthesized set.
ValidityAudit audit_validity(const AssociationModel& m, const Theorem2Set& s, double theta, std::size_t n_reps,
                             std::uint64_t seed, std::vector<double> alpha_grid);

struct UniformityReport {
    std::string model;
    std::string prs;
    double theta0 = 0.0;
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;
    double ks_distance = 0.0;
    /// 1.5 * 1.36 / sqrt(n_reps).
    double threshold = 0.0;
    /// Discrete models cannot be exactly uniform; only P(pl <= alpha) <= alpha is checked.
    bool dominance_only = false;
    double max_dominance_violation = 0.0;
    bool pass = false;
    std::vector<std::string> notes;
};

/// Distribution of pl_X({theta0}) when X is drawn at theta0.
UniformityReport audit_uniformity(const AssociationModel& m, const NestedRandomSet& s, double theta0,
                                  std::size_t n_reps, std::uint64_t seed);

/// Kolmogorov-Smirnov distance between the sample and Unif(0, 1).
double ks_uniform_distance(std::vector<double> sample);

struct CoverageReport {
    std::string model;
    std::string prs;
    double alpha = 0.0;
    double theta = 0.0;
    std::size_t n_reps = 0;
    std::uint64_t seed = 0;
    double coverage = 0.0;
    /// 1 - alpha - 3 sqrt(alpha (1 - alpha) / n_reps).
    double threshold = 0.0;
    bool pass = false;
    std::vector<std::string> notes;
};

/// Fraction of replications whose plausibility region (on `grid`) contains theta.
CoverageReport audit_region_coverage(const AssociationModel& m, const NestedRandomSet& s, double alpha, double theta,
                                     std::size_t n_reps, std::uint64_t seed, const ParamGrid& grid);

struct CoherenceRow {
    double x = 0.0;
    std::vector<double> pvalues;
    std::vector<double> plausibilities;
    /// Indices i where null i is inside null i + 1 yet its p-value is larger.
    std::vector<std::size_t> reversals;
    bool plausibility_monotone = true;
};

struct CoherenceReport {
    std::vector<std::string> nulls;
    std::string prs;
    std::vector<CoherenceRow> rows;
    std::size_t reversal_count = 0;
    bool single_im_monotone = true;
};

/// Per-null p-values with each null's own distance statistic, next to
/// plausibilities of the same nulls under one fixed PRS. p-values always use
/// the weak tail. Throws DomainError unless each null is contained in the next.
CoherenceReport coherence_demo(const NormalMeanModel& m, std::span<const double> xs,
                               const std::vector<Assertion>& nested_nulls, const NestedRandomSet& s,
                               const SupConfig& cfg);

/// x in [lo, hi] with the given step, endpoints included.
std::vector<double> step_grid(double lo, double hi, double step);

}  // namespace pvim
