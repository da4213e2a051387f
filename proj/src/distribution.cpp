#include "pvim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvim/errors.hpp"

namespace pvim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContinuedFractionEps = 1e-15;
constexpr int kMaxSeriesTerms = 100000;
constexpr double kTiny = 1e-300;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxSeriesTerms; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kContinuedFractionEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxSeriesTerms; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kContinuedFractionEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxSeriesTerms; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kContinuedFractionEps) break;
    }
    return h;
}

double binomial_log_pmf(const Binomial& b, int k) {
    return special::log_choose(b.n, k) + k * std::log(b.p) + (b.n - k) * std::log1p(-b.p);
}

double binomial_cdf(const Binomial& b, double x) {
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    if (x < 0.0) return 0.0;
    if (x >= b.n) return 1.0;
    const int k = static_cast<int>(std::floor(x));
    double sum = 0.0;
    for (int j = 0; j <= k; ++j) sum += std::exp(binomial_log_pmf(b, j));
    return std::min(sum, 1.0);
}

// Bracketed Newton on the implemented cdf. Invariant: cdf(lo) < u <= cdf(hi).
// Newton proposals outside the bracket fall back to bisection, and the
// returned point is always the upper end, so cdf(result) >= u.
template <class Cdf, class Pdf>
double solve_quantile(Cdf&& F, Pdf&& f, double u, double lo, double hi, double x0) {
    const double tol = u * 1e-14;
    double f_hi = F(hi) - u;
    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    for (int iter = 0; iter < 400; ++iter) {
        const double fx = F(x) - u;
        if (fx >= 0.0) {
            hi = x;
            f_hi = fx;
        } else {
            lo = x;
        }
        if (f_hi <= tol) return hi;
        if (std::nextafter(lo, kInf) >= hi) return hi;

        const double slope = f(x);
        double next = (slope > 0.0 && std::isfinite(slope)) ? x - fx / slope : lo - 1.0;
        if (fx < 0.0 && next > x) {
            // Newton tends to approach from below on convex stretches; overshoot
            // a little so the upper end of the bracket also tightens.
            next = x + 2.0 * (next - x);
        }
        if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
        if (next == x) next = lo + 0.5 * (hi - lo);
        x = next;
    }
    return hi;
}

// Starting points only; the bracketed solve on the implemented cdf sets the result.
double normal_guess(double u) { return 4.91 * (std::pow(u, 0.14) - std::pow(1.0 - u, 0.14)); }

double chisq_guess(int df, double u) {
    const double k = 2.0 / (9.0 * df);
    const double c = 1.0 - k + normal_guess(u) * std::sqrt(k);
    return c > 0.0 ? df * c * c * c : 0.5 * df;
}

}  // namespace

namespace special {

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
    if (std::isnan(x)) throw DomainError("gamma_p: NaN argument");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_q: shape must be positive");
    if (std::isnan(x)) throw DomainError("gamma_q: NaN argument");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double beta_inc(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_inc: shapes must be positive");
    if (std::isnan(x)) throw DomainError("beta_inc: NaN argument");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace special

void validate(const Distribution& d) {
    std::visit(Overloaded{
                   [](const Uniform01&) {},
                   [](const Normal& n) {
                       if (!(n.sd > 0.0) || !std::isfinite(n.sd) || !std::isfinite(n.mean))
                           throw DomainError("Normal: sd must be positive and finite");
                   },
                   [](const Binomial& b) {
                       if (b.n < 1) throw DomainError("Binomial: n must be a positive integer");
                       if (!(b.p > 0.0 && b.p < 1.0)) throw DomainError("Binomial: p must lie in (0, 1)");
                   },
                   [](const Beta& b) {
                       if (!(b.a > 0.0) || !(b.b > 0.0) || !std::isfinite(b.a) || !std::isfinite(b.b))
                           throw DomainError("Beta: shapes must be positive and finite");
                   },
                   [](const ChiSquared& c) {
                       if (c.df < 1) throw DomainError("ChiSquared: df must be a positive integer");
                   },
               },
               d);
}

bool is_discrete(const Distribution& d) noexcept { return std::holds_alternative<Binomial>(d); }

std::string describe(const Distribution& d) {
    std::ostringstream os;
    std::visit(Overloaded{
                   [&](const Uniform01&) { os << "Unif(0,1)"; },
                   [&](const Normal& n) { os << "N(" << n.mean << ", " << n.sd << "^2)"; },
                   [&](const Binomial& b) { os << "Bin(" << b.n << ", " << b.p << ")"; },
                   [&](const Beta& b) { os << "Beta(" << b.a << ", " << b.b << ")"; },
                   [&](const ChiSquared& c) { os << "ChiSq(" << c.df << ")"; },
               },
               d);
    return os.str();
}

double cdf(const Distribution& d, double x) {
    validate(d);
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    return std::visit(Overloaded{
                          [&](const Uniform01&) { return std::clamp(x, 0.0, 1.0); },
                          [&](const Normal& n) {
                              return 0.5 * std::erfc(-(x - n.mean) / (n.sd * std::sqrt(2.0)));
                          },
                          [&](const Binomial& b) { return binomial_cdf(b, x); },
                          [&](const Beta& b) { return special::beta_inc(b.a, b.b, x); },
                          [&](const ChiSquared& c) { return special::gamma_p(0.5 * c.df, 0.5 * x); },
                      },
                      d);
}

double log_density(const Distribution& d, double x) {
    validate(d);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    return std::visit(
        Overloaded{
            [&](const Uniform01&) { return (x >= 0.0 && x <= 1.0) ? 0.0 : kNegInf; },
            [&](const Normal& n) {
                const double z = (x - n.mean) / n.sd;
                return -0.5 * z * z - std::log(n.sd) - 0.5 * std::log(2.0 * M_PI);
            },
            [&](const Binomial& b) {
                if (x != std::floor(x) || x < 0.0 || x > b.n) return kNegInf;
                return binomial_log_pmf(b, static_cast<int>(x));
            },
            [&](const Beta& b) {
                if (x < 0.0 || x > 1.0) return kNegInf;
                return (b.a - 1.0) * std::log(x) + (b.b - 1.0) * std::log1p(-x) + std::lgamma(b.a + b.b) -
                       std::lgamma(b.a) - std::lgamma(b.b);
            },
            [&](const ChiSquared& c) {
                if (x < 0.0) return kNegInf;
                const double k = 0.5 * c.df;
                return (k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k);
            },
        },
        d);
}

double density(const Distribution& d, double x) { return std::exp(log_density(d, x)); }

double quantile(const Distribution& d, double u) {
    validate(d);
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile: u must lie in [0, 1]");
    const auto F = [&](double x) { return cdf(d, x); };
    const auto f = [&](double x) { return density(d, x); };
    return std::visit(
        Overloaded{
            [&](const Uniform01&) { return u; },
            [&](const Normal& n) {
                if (u == 0.0) return -kInf;
                if (u == 1.0) return kInf;
                return solve_quantile(F, f, u, n.mean - 40.0 * n.sd, n.mean + 40.0 * n.sd, n.mean + n.sd * normal_guess(u));
            },
            [&](const Binomial& b) {
                if (u == 0.0) return 0.0;
                double sum = 0.0;
                for (int k = 0; k < b.n; ++k) {
                    sum += std::exp(binomial_log_pmf(b, k));
                    if (std::min(sum, 1.0) >= u) return static_cast<double>(k);
                }
                return static_cast<double>(b.n);
            },
            [&](const Beta& b) {
                if (u == 0.0) return 0.0;
                if (u == 1.0) return 1.0;
                return solve_quantile(F, f, u, 0.0, 1.0, b.a / (b.a + b.b));
            },
            [&](const ChiSquared& c) {
                if (u == 0.0) return 0.0;
                if (u == 1.0) return kInf;
                double hi = std::max(1.0, 2.0 * c.df);
                while (F(hi) < u && std::isfinite(hi)) hi *= 2.0;
                return solve_quantile(F, f, u, 0.0, hi, chisq_guess(c.df, u));
            },
        },
        d);
}

double sample(const Distribution& d, SeededRng& rng) {
    const double u = rng.uniform();
    if (std::holds_alternative<Uniform01>(d)) return u;
    return quantile(d, u);
}

}  // namespace pvim
