#pragma once

#include <string>
#include <variant>

#include "pvim/rng.hpp"

namespace pvim {

struct Uniform01 {};

struct Normal {
    double mean = 0.0;
    double sd = 1.0;
};

struct Binomial {
    int n = 1;
    double p = 0.5;
};

struct Beta {
    double a = 1.0;
    double b = 1.0;
};

struct ChiSquared {
    int df = 1;
};

/// The five laws needed by the built-in associations.
using Distribution = std::variant<Uniform01, Normal, Binomial, Beta, ChiSquared>;

/// Throws DomainError when the parameters are outside their domain.
void validate(const Distribution& d);

bool is_discrete(const Distribution& d) noexcept;
std::string describe(const Distribution& d);

/// P(X <= x). Accepts +-infinity.
double cdf(const Distribution& d, double x);

/// Density for continuous kinds, mass for Binomial (zero off the integers).
double density(const Distribution& d, double x);

/// Log of `density`; -inf where the density vanishes.
double log_density(const Distribution& d, double x);

/// Generalized inverse inf{x : cdf(x) >= u}, u in [0, 1].
///
/// Continuous kinds are solved on the implemented cdf with a bracketing
/// search, so cdf(quantile(u)) >= u always holds and matches u to 1e-10.
double quantile(const Distribution& d, double u);

/// Inverse-transform draw; consumes exactly one uniform from `rng`.
double sample(const Distribution& d, SeededRng& rng);

namespace special {

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

double log_choose(int n, int k);

}  // namespace special

}  // namespace pvim
