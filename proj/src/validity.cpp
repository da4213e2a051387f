#include "pvim/validity.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "pvim/errors.hpp"
#include "pvim/rng.hpp"

namespace pvim {

namespace {

void check_reps(std::size_t n_reps) {
    if (n_reps == 0) throw MisuseError("audit needs at least one replication");
}

void check_alpha_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("alpha grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("alpha grid must be sorted ascending");
    if (!(grid.front() > 0.0 && grid.back() <= 1.0)) throw DomainError("alpha grid must lie in (0, 1]");
}

// pl at each replication's draw. Discrete models evaluate pl once per support point.
std::vector<double> simulate_pl(const AssociationModel& m, const PlFunction& pl, double theta, std::size_t n_reps,
                                std::uint64_t seed) {
    std::map<double, double> cache;
    if (m.discrete_observations()) {
        for (double x : m.observation_grid()) cache.emplace(x, pl(x));
    }
    std::vector<double> out(n_reps);
    parallel_for(n_reps, [&](std::size_t r) {
        SeededRng rng(seed, r);
        const double x = m.sample(theta, rng);
        const auto hit = cache.find(x);
        out[r] = hit != cache.end() ? hit->second : pl(x);
    });
    return out;
}

double exceedance_at(const std::vector<double>& sorted_pl, double alpha) {
    const auto k = std::upper_bound(sorted_pl.begin(), sorted_pl.end(), alpha) - sorted_pl.begin();
    return static_cast<double>(k) / static_cast<double>(sorted_pl.size());
}

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 64);
    if (workers == 1 || n < 2 * workers) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> default_alpha_grid() {
    return {0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

double validity_band(double alpha, std::size_t n_reps) {
    return 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_reps)) + 0.005;
}

ValidityAudit audit_validity(const AssociationModel& m, const PlFunction& pl, const std::string& prs_label,
                             const Assertion& a, double theta, std::size_t n_reps, std::uint64_t seed,
                             std::vector<double> alpha_grid) {
    check_reps(n_reps);
    check_alpha_grid(alpha_grid);
    if (!a.contains(theta)) throw MisuseError("audit_validity: theta must lie in the assertion");

    std::vector<double> values = simulate_pl(m, pl, theta, n_reps, seed);
    std::sort(values.begin(), values.end());

    ValidityAudit out;
    out.model = m.name();
    out.assertion = a.to_string();
    out.prs = prs_label;
    out.theta_true = theta;
    out.n_reps = n_reps;
    out.seed = seed;
    out.alpha_grid = std::move(alpha_grid);
    out.pass = true;
    out.max_violation = -1.0;
    for (double alpha : out.alpha_grid) {
        const double e = exceedance_at(values, alpha);
        const double band = validity_band(alpha, n_reps);
        out.exceedance.push_back(e);
        out.band.push_back(band);
        out.max_violation = std::max(out.max_violation, e - alpha);
        if (e - alpha > band) out.pass = false;
    }
    if (!(values.front() >= 0.0 && values.back() <= 1.0)) {
        out.pass = false;
        out.notes.push_back("plausibility left [0, 1]");
    }
    return out;
}

ValidityAudit audit_validity(const AssociationModel& m, const NestedRandomSet& s, const Assertion& a, double theta,
                             std::size_t n_reps, std::uint64_t seed, std::vector<double> alpha_grid) {
    const PlFunction pl = [&](double x) { return plausibility(m, x, s, a).plausibility; };
    return audit_validity(m, pl, s.label, a, theta, n_reps, seed, std::move(alpha_grid));
}

ValidityAudit audit_validity(const AssociationModel& m, const Theorem2Set& s, double theta, std::size_t n_reps,
                             std::uint64_t seed, std::vector<double> alpha_grid) {
    const PlFunction pl = [&](double x) { return s.null_plausibility(x); };
    ValidityAudit out = audit_validity(m, pl, s.base.label, s.null, theta, n_reps, seed, std::move(alpha_grid));
    if (s.tail == Tail::Strict && m.discrete_observations()) {
        out.notes.push_back("strict tail on a discrete model: 1 - F(x) is not a valid p-value");
    }
    return out;
}

double ks_uniform_distance(std::vector<double> sample) {
    if (sample.empty()) throw DomainError("ks_uniform_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double p = std::clamp(sample[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - p, p - static_cast<double>(i) / n});
    }
    return d;
}

UniformityReport audit_uniformity(const AssociationModel& m, const NestedRandomSet& s, double theta0,
                                  std::size_t n_reps, std::uint64_t seed) {
    check_reps(n_reps);
    const Assertion point(IntervalSet::point(theta0), m.param_space());
    if (point.empty()) throw MisuseError("audit_uniformity: theta0 lies outside the parameter space");
    const PlFunction pl = [&](double x) { return plausibility(m, x, s, point).plausibility; };
    std::vector<double> values = simulate_pl(m, pl, theta0, n_reps, seed);

    UniformityReport out;
    out.model = m.name();
    out.prs = s.label;
    out.theta0 = theta0;
    out.n_reps = n_reps;
    out.seed = seed;
    out.threshold = 1.5 * 1.36 / std::sqrt(static_cast<double>(n_reps));
    out.ks_distance = ks_uniform_distance(values);
    out.dominance_only = m.discrete_observations();
    if (!out.dominance_only) {
        out.pass = out.ks_distance < out.threshold;
        return out;
    }

    out.notes.push_back("discrete model: atoms rule out exact uniformity; checking P(pl <= alpha) <= alpha only");
    std::sort(values.begin(), values.end());
    out.pass = true;
    out.max_dominance_violation = -1.0;
    for (int i = 1; i < 100; ++i) {
        const double alpha = i / 100.0;
        const double excess = exceedance_at(values, alpha) - alpha;
        out.max_dominance_violation = std::max(out.max_dominance_violation, excess);
        if (excess > validity_band(alpha, n_reps)) out.pass = false;
    }
    return out;
}

CoverageReport audit_region_coverage(const AssociationModel& m, const NestedRandomSet& s, double alpha, double theta,
                                     std::size_t n_reps, std::uint64_t seed, const ParamGrid& grid) {
    check_reps(n_reps);
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("audit_region_coverage: alpha must lie in [0, 1)");
    if (!m.param_space().contains(theta)) throw MisuseError("audit_region_coverage: theta outside parameter space");

    std::vector<char> covered(n_reps, 0);
    std::vector<char> at_edge(n_reps, 0);
    parallel_for(n_reps, [&](std::size_t r) {
        SeededRng rng(seed, r);
        const double x = m.sample(theta, rng);
        const RegionReport region = plausibility_region(m, x, s, alpha, grid);
        covered[r] = region.region.contains(theta) ? 1 : 0;
        at_edge[r] = (region.reaches_grid_lo || region.reaches_grid_hi) ? 1 : 0;
    });

    CoverageReport out;
    out.model = m.name();
    out.prs = s.label;
    out.alpha = alpha;
    out.theta = theta;
    out.n_reps = n_reps;
    out.seed = seed;
    out.coverage = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) / static_cast<double>(n_reps);
    out.threshold = 1.0 - alpha - 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_reps));
    out.pass = out.coverage >= out.threshold;
    const auto edges = std::count(at_edge.begin(), at_edge.end(), 1);
    if (edges > 0) {
        out.notes.push_back(std::to_string(edges) + " regions reached the end of the grid");
    }
    return out;
}

CoherenceReport coherence_demo(const NormalMeanModel& m, std::span<const double> xs,
                               const std::vector<Assertion>& nested_nulls, const NestedRandomSet& s,
                               const SupConfig& cfg) {
    if (nested_nulls.empty()) throw DomainError("coherence_demo: no nulls given");
    for (std::size_t i = 0; i + 1 < nested_nulls.size(); ++i) {
        if (!nested_nulls[i].subset_of(nested_nulls[i + 1])) {
            throw DomainError("coherence_demo: null " + nested_nulls[i].to_string() + " is not inside " +
                              nested_nulls[i + 1].to_string());
        }
    }

    // The distance statistic has an atom at 0, where only the weak tail gives the textbook p-value.
    SupConfig weak = cfg;
    weak.tail = Tail::Weak;
    std::vector<TestStatistic> stats;
    CoherenceReport out;
    out.prs = s.label;
    for (const Assertion& a : nested_nulls) {
        stats.push_back(distance_statistic(m, a));
        out.nulls.push_back(a.to_string());
    }

    constexpr double kTieTolerance = 1e-12;
    out.rows.resize(xs.size());
    parallel_for(xs.size(), [&](std::size_t k) {
        CoherenceRow& row = out.rows[k];
        row.x = xs[k];
        for (std::size_t i = 0; i < nested_nulls.size(); ++i) {
            row.pvalues.push_back(pvalue(m, stats[i], nested_nulls[i], row.x, weak).value);
            row.plausibilities.push_back(plausibility(m, row.x, s, nested_nulls[i]).plausibility);
        }
        for (std::size_t i = 0; i + 1 < nested_nulls.size(); ++i) {
            if (row.pvalues[i] > row.pvalues[i + 1] + kTieTolerance) row.reversals.push_back(i);
            if (row.plausibilities[i] > row.plausibilities[i + 1] + kTieTolerance) row.plausibility_monotone = false;
        }
    });
    for (const CoherenceRow& row : out.rows) {
        out.reversal_count += row.reversals.size();
        out.single_im_monotone = out.single_im_monotone && row.plausibility_monotone;
    }
    return out;
}

std::vector<double> step_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo <= hi)) throw DomainError("step_grid: need lo <= hi and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i) xs[i] = lo + static_cast<double>(i) * step;
    return xs;
}

}  // namespace pvim
