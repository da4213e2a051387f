#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvim/association.hpp"
#include "pvim/pvalue.hpp"

namespace pvim {

/// X ~ Bin(n, theta) through F_theta(X - 1) <= U < F_theta(X).
///
/// Theta_x(u) = [1 - G^{-1}_{n-x+1,x}(u), 1 - G^{-1}_{n-x,x+1}(u)) with G_{a,b} the
/// Beta(a, b) cdf; at x = 0 the lower end is an open 0, at x = n the upper end an open 1.
class BinomialModel final : public AssociationModel {
public:
    explicit BinomialModel(int n);

    int n() const { return n_; }

    std::string name() const override { return "binomial"; }
    std::string label() const override;
    IntervalSet param_space() const override { return IntervalSet(Interval::open(0.0, 1.0)); }
    bool discrete_observations() const override { return true; }
    void validate_observation(double x) const override;
    double generate(double theta, double u) const override;
    Interval focal_interval(double x, double u) const override;
    FocalOrder focal_order() const override { return FocalOrder::NonIncreasing; }
    std::optional<double> endpoint_cut(double x, double theta, Endpoint e) const override;
    std::vector<double> observation_grid() const override;

private:
    int n_;
};

/// Xbar = theta + sigma n^{-1/2} Phi^{-1}(U), optionally with theta confined to a box.
class NormalMeanModel final : public AssociationModel {
public:
    NormalMeanModel(int n, double sigma, std::optional<Interval> box = std::nullopt);

    int n() const { return n_; }
    double sigma() const { return sigma_; }
    /// sigma / sqrt(n), the standard deviation of Xbar.
    double scale() const { return scale_; }
    const std::optional<Interval>& box() const { return box_; }

    std::string name() const override { return box_ ? "normal-mean-constrained" : "normal-mean"; }
    std::string label() const override;
    IntervalSet param_space() const override { return IntervalSet::real_line(); }
    IntervalSet constraint() const override;
    void validate_observation(double x) const override;
    double generate(double theta, double u) const override;
    Interval focal_interval(double x, double u) const override;
    FocalOrder focal_order() const override { return FocalOrder::NonIncreasing; }
    std::optional<double> endpoint_cut(double x, double theta, Endpoint e) const override;
    std::vector<double> observation_grid() const override;

private:
    int n_;
    double sigma_;
    double scale_;
    std::optional<Interval> box_;
};

/// Marginal association for sigma^2: T = (n - 1) S^2 = sigma^2 F^{-1}(U), F the
/// ChiSq(n - 1) cdf. The observation is T itself.
class NormalVarianceModel final : public AssociationModel {
public:
    explicit NormalVarianceModel(int n);

    int n() const { return n_; }
    int df() const { return n_ - 1; }

    std::string name() const override { return "normal-variance"; }
    std::string label() const override;
    IntervalSet param_space() const override { return IntervalSet(Interval::open(0.0, kInfinity)); }
    void validate_observation(double t) const override;
    double generate(double sigma2, double u) const override;
    Interval focal_interval(double t, double u) const override;
    FocalOrder focal_order() const override { return FocalOrder::NonIncreasing; }
    std::optional<double> endpoint_cut(double t, double sigma2, Endpoint e) const override;
    std::vector<double> observation_grid() const override;

private:
    static constexpr double kInfinity = std::numeric_limits<double>::infinity();
    int n_;
};

/// T(x) = x for the built-in models, with closed-form tails and the one-sided
/// closed-form p-value registered for lower half-lines and points.
TestStatistic natural_statistic(const ModelPtr& m);

/// Two-sided T(x) = distance from x to the null, for the coherence demonstration.
TestStatistic distance_statistic(const NormalMeanModel& m, const Assertion& null);

/// 1 - F_theta0(x) (strict) or 1 - F_theta0(x - 1) (weak).
double binomial_one_sided_pl(int n, double theta0, int x, Tail tail);
/// 1 - F((n - 1) s2 / sigma0_sq), F the ChiSq(n - 1) cdf.
double normal_variance_pl(int n, double s2, double sigma0_sq);
/// 1 - Phi(sqrt(n) (xbar - theta0) / sigma).
double normal_mean_one_sided_pl(int n, double sigma, double theta0, double xbar);

struct DiagnosticReport {
    double observation = 0.0;
    /// {u : Theta_x(u) is empty}.
    USet empty_u;
    double measure = 0.0;
    std::vector<std::string> notes;
};

DiagnosticReport constrained_focal_diagnostic(const NormalMeanModel& m, double x);

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    /// Sample variance with divisor n - 1; absent when n < 2.
    std::optional<double> s2;
    std::vector<std::string> warnings;
};

Summary summarize(std::span<const double> values);

using ModelParams = std::map<std::string, double>;

/// Registry keyed by "binomial", "normal-mean", "normal-variance" and
/// "normal-mean-constrained". Missing parameters fall back to n = 1, sigma = 1,
/// box [-1, 1]; unknown names throw DomainError.
ModelPtr make_model(const std::string& name, const ModelParams& params);
std::vector<std::string> model_names();

}  // namespace pvim
