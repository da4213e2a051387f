#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pvim/distribution.hpp"
#include "pvim/interval_set.hpp"
#include "pvim/rng.hpp"

namespace pvim {

/// How the endpoints of Theta_x(u) move as u increases.
enum class FocalOrder { NonIncreasing, NonDecreasing, None };

enum class Endpoint { Lower, Upper };

/// An association X = a(theta, U), U ~ P_U, together with its focal sets
/// Theta_x(u) = {theta : x = a(theta, u)}.
///
/// Observations are scalars: a count, a sample mean, or a scaled sum of squares,
/// depending on the model.
class AssociationModel {
public:
    virtual ~AssociationModel() = default;

    /// Registry key, e.g. "binomial".
    virtual std::string name() const = 0;
    virtual std::string label() const = 0;

    /// Natural parameter space, before any box constraint.
    virtual IntervalSet param_space() const = 0;
    /// Parameter values the model admits; focal sets are intersected with this.
    virtual IntervalSet constraint() const { return param_space(); }

    virtual Distribution aux_law() const { return Uniform01{}; }
    virtual bool discrete_observations() const { return false; }

    /// Throws DomainError when x is not a possible observation.
    virtual void validate_observation(double x) const = 0;

    virtual double generate(double theta, double u) const = 0;

    /// Theta_x(u) ignoring the box constraint; always an interval of param_space().
    virtual Interval focal_interval(double x, double u) const = 0;

    virtual FocalOrder focal_order() const { return FocalOrder::None; }

    /// For monotone models: the u at which the chosen focal endpoint crosses theta,
    /// i.e. the solution of endpoint(x, u) = theta clamped to [0, 1]. Models without
    /// a closed form return nullopt and callers fall back to bisection in u.
    virtual std::optional<double> endpoint_cut(double /*x*/, double /*theta*/, Endpoint) const {
        return std::nullopt;
    }

    /// Representative observations for assumption scans.
    virtual std::vector<double> observation_grid() const = 0;

    IntervalSet focal_set(double x, double u) const;
    double sample(double theta, SeededRng& rng) const;
};

using ModelPtr = std::shared_ptr<const AssociationModel>;

}  // namespace pvim
