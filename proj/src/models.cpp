#include "pvim/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pvim/errors.hpp"

namespace pvim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return cdf(Normal{0.0, 1.0}, z); }
double std_normal_quantile(double u) { return quantile(Normal{0.0, 1.0}, u); }

int checked_count(double v, const char* what, int min) {
    if (!std::isfinite(v) || v != std::floor(v) || v < min || v > 1e9) {
        std::ostringstream os;
        os << what << " must be an integer >= " << min << ", got " << v;
        throw DomainError(os.str());
    }
    return static_cast<int>(v);
}

double binomial_cdf_at(int n, double theta, double k) { return cdf(Binomial{n, theta}, k); }

// Nulls whose sup sits at a single boundary value for statistics nondecreasing in theta.
std::optional<double> upper_boundary(const Assertion& null) {
    if (null.empty()) return std::nullopt;
    if (null.set.is_point()) return null.set.infimum();
    if (null.set.parts().size() != 1) return std::nullopt;
    const Interval& c = null.set.parts().front();
    if (c.lo > null.ambient.infimum() || !std::isfinite(c.hi)) return std::nullopt;
    return c.hi;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

// --- binomial ---------------------------------------------------------------

BinomialModel::BinomialModel(int n) : n_(n) {
    if (n < 1) throw DomainError("binomial: n must be a positive integer");
}

std::string BinomialModel::label() const { return "Bin(" + std::to_string(n_) + ", theta)"; }

void BinomialModel::validate_observation(double x) const {
    if (!std::isfinite(x) || x != std::floor(x) || x < 0.0 || x > n_) {
        throw DomainError("binomial: x must be an integer in [0, " + std::to_string(n_) + "], got " + fmt(x));
    }
}

double BinomialModel::generate(double theta, double u) const {
    const Binomial law{n_, theta};
    validate(law);
    for (int k = 0; k < n_; ++k) {
        if (cdf(law, k) > u) return k;
    }
    return n_;
}

Interval BinomialModel::focal_interval(double x, double u) const {
    validate_observation(x);
    const int k = static_cast<int>(x);
    Interval out{0.0, 1.0, false, false};
    if (k > 0) {
        out.lo = 1.0 - quantile(Beta{static_cast<double>(n_ - k + 1), static_cast<double>(k)}, u);
        out.lo_closed = true;
    }
    if (k < n_) out.hi = 1.0 - quantile(Beta{static_cast<double>(n_ - k), static_cast<double>(k + 1)}, u);
    return out;
}

std::optional<double> BinomialModel::endpoint_cut(double x, double theta, Endpoint e) const {
    if (theta <= 0.0) return e == Endpoint::Lower ? 1.0 : 0.0;
    if (theta >= 1.0) return e == Endpoint::Lower ? 0.0 : 1.0;
    // lower(u) >= theta  <=>  u <= F_theta(x - 1);  upper(u) <= theta  <=>  u >= F_theta(x).
    return binomial_cdf_at(n_, theta, e == Endpoint::Lower ? x - 1.0 : x);
}

std::vector<double> BinomialModel::observation_grid() const {
    std::vector<double> xs;
    for (int k = 0; k <= n_; ++k) xs.push_back(k);
    return xs;
}

// --- normal mean ------------------------------------------------------------

NormalMeanModel::NormalMeanModel(int n, double sigma, std::optional<Interval> box)
    : n_(n), sigma_(sigma), scale_(sigma / std::sqrt(static_cast<double>(n))), box_(box) {
    if (n < 1) throw DomainError("normal-mean: n must be a positive integer");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("normal-mean: sigma must be positive");
    if (box_ && box_->empty()) throw DomainError("normal-mean: constraint box is empty");
}

std::string NormalMeanModel::label() const {
    std::string s = "N(theta, " + fmt(sigma_) + "^2 / " + std::to_string(n_) + ")";
    if (box_) s += " with theta in " + box_->to_string();
    return s;
}

IntervalSet NormalMeanModel::constraint() const { return box_ ? IntervalSet(*box_) : param_space(); }

void NormalMeanModel::validate_observation(double x) const {
    if (!std::isfinite(x)) throw DomainError("normal-mean: observation must be finite");
}

double NormalMeanModel::generate(double theta, double u) const { return theta + scale_ * std_normal_quantile(u); }

Interval NormalMeanModel::focal_interval(double x, double u) const {
    return Interval::point(x - scale_ * std_normal_quantile(u));
}

std::optional<double> NormalMeanModel::endpoint_cut(double x, double theta, Endpoint) const {
    return std_normal_cdf((x - theta) / scale_);
}

std::vector<double> NormalMeanModel::observation_grid() const {
    std::vector<double> xs;
    for (int i = -6; i <= 6; ++i) xs.push_back(0.5 * i);
    return xs;
}

// --- normal variance --------------------------------------------------------

NormalVarianceModel::NormalVarianceModel(int n) : n_(n) {
    if (n < 2) throw DomainError("normal-variance: n must be at least 2");
}

std::string NormalVarianceModel::label() const {
    return "(n - 1) S^2 ~ sigma^2 ChiSq(" + std::to_string(df()) + ")";
}

void NormalVarianceModel::validate_observation(double t) const {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("normal-variance: t = (n - 1) S^2 must be positive");
}

double NormalVarianceModel::generate(double sigma2, double u) const {
    return sigma2 * quantile(ChiSquared{df()}, u);
}

Interval NormalVarianceModel::focal_interval(double t, double u) const {
    return Interval::point(t / quantile(ChiSquared{df()}, u));
}

std::optional<double> NormalVarianceModel::endpoint_cut(double t, double sigma2, Endpoint) const {
    if (sigma2 <= 0.0) return 1.0;
    return cdf(ChiSquared{df()}, t / sigma2);
}

std::vector<double> NormalVarianceModel::observation_grid() const {
    std::vector<double> ts;
    for (double f : {0.25, 0.5, 0.79, 1.0, 1.5, 2.0, 3.0}) ts.push_back(f * df());
    return ts;
}

// --- statistics -------------------------------------------------------------

TestStatistic natural_statistic(const ModelPtr& m) {
    TestStatistic s;
    s.evaluate = [](double x) { return x; };
    s.on_aux = [m](double theta, double u) { return m->generate(theta, u); };
    s.nondecreasing_in_theta = true;
    s.nondecreasing_in_u = true;
    s.natural = true;
    s.a3_for_lower_half_lines = true;

    if (const auto b = std::dynamic_pointer_cast<const BinomialModel>(m)) {
        const int n = b->n();
        s.label = "X";
        s.tail_probability = [n](double theta, double t, Tail tail) {
            const double below = tail == Tail::Weak ? std::ceil(t) - 1.0 : std::floor(t);
            return 1.0 - binomial_cdf_at(n, theta, below);
        };
        s.closed_form_pvalue = [n](const Assertion& null, double x, Tail tail) -> std::optional<double> {
            const auto theta0 = upper_boundary(null);
            if (!theta0 || !(*theta0 > 0.0 && *theta0 < 1.0)) return std::nullopt;
            return binomial_one_sided_pl(n, *theta0, static_cast<int>(x), tail);
        };
    } else if (const auto nm = std::dynamic_pointer_cast<const NormalMeanModel>(m)) {
        const int n = nm->n();
        const double sigma = nm->sigma();
        const double c = nm->scale();
        s.label = "Xbar";
        s.tail_probability = [c](double theta, double t, Tail) { return 1.0 - std_normal_cdf((t - theta) / c); };
        s.closed_form_pvalue = [n, sigma](const Assertion& null, double x, Tail) -> std::optional<double> {
            const auto theta0 = upper_boundary(null);
            if (!theta0) return std::nullopt;
            return normal_mean_one_sided_pl(n, sigma, *theta0, x);
        };
    } else if (const auto nv = std::dynamic_pointer_cast<const NormalVarianceModel>(m)) {
        const int n = nv->n();
        const int df = nv->df();
        s.label = "(n-1)S^2";
        s.tail_probability = [df](double sigma2, double t, Tail) {
            return 1.0 - cdf(ChiSquared{df}, t / sigma2);
        };
        s.closed_form_pvalue = [n](const Assertion& null, double t, Tail) -> std::optional<double> {
            const auto s0 = upper_boundary(null);
            if (!s0 || !(*s0 > 0.0)) return std::nullopt;
            return normal_variance_pl(n, t / (n - 1), *s0);
        };
    } else {
        throw UnsupportedModel("natural_statistic: no registration for model " + (m ? m->name() : "<null>"));
    }
    return s;
}

TestStatistic distance_statistic(const NormalMeanModel& m, const Assertion& null) {
    const auto hull = null.set.hull();
    if (!hull || null.set.parts().size() != 1) throw DomainError("distance statistic needs a connected null");
    const double a = hull->lo;
    const double b = hull->hi;
    const double c = m.scale();
    const auto dist = [a, b](double x) { return std::max({a - x, x - b, 0.0}); };

    TestStatistic s;
    s.label = "dist(Xbar, " + null.to_string() + ")";
    s.evaluate = dist;
    s.on_aux = [dist, c](double theta, double u) { return dist(theta + c * std_normal_quantile(u)); };
    s.tail_probability = [a, b, c](double theta, double d, Tail tail) {
        if (d < 0.0 || (d == 0.0 && tail == Tail::Weak)) return 1.0;
        return std_normal_cdf((a - d - theta) / c) + (1.0 - std_normal_cdf((b + d - theta) / c));
    };
    return s;
}

// --- closed forms -----------------------------------------------------------

double binomial_one_sided_pl(int n, double theta0, int x, Tail tail) {
    if (n < 1) throw DomainError("binomial_one_sided_pl: n must be positive");
    if (!(theta0 > 0.0 && theta0 < 1.0)) throw DomainError("binomial_one_sided_pl: theta0 must lie in (0, 1)");
    if (x < 0 || x > n) throw DomainError("binomial_one_sided_pl: x must lie in [0, n]");
    return 1.0 - binomial_cdf_at(n, theta0, tail == Tail::Strict ? x : x - 1);
}

double normal_variance_pl(int n, double s2, double sigma0_sq) {
    if (n < 2) throw DomainError("normal_variance_pl: n must be at least 2");
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw DomainError("normal_variance_pl: s2 must be positive");
    if (!(sigma0_sq > 0.0)) throw DomainError("normal_variance_pl: sigma0_sq must be positive");
    return 1.0 - cdf(ChiSquared{n - 1}, (n - 1) * s2 / sigma0_sq);
}

double normal_mean_one_sided_pl(int n, double sigma, double theta0, double xbar) {
    if (n < 1) throw DomainError("normal_mean_one_sided_pl: n must be positive");
    if (!(sigma > 0.0)) throw DomainError("normal_mean_one_sided_pl: sigma must be positive");
    if (!std::isfinite(xbar)) throw DomainError("normal_mean_one_sided_pl: xbar must be finite");
    return 1.0 - std_normal_cdf(std::sqrt(static_cast<double>(n)) * (xbar - theta0) / sigma);
}

DiagnosticReport constrained_focal_diagnostic(const NormalMeanModel& m, double x) {
    DiagnosticReport r;
    r.observation = x;
    r.empty_u = empty_focal_event(m, x);
    r.measure = r.empty_u.measure();
    if (!m.box()) {
        r.notes.push_back("no constraint box: every focal set is a singleton in the real line");
    } else if (!r.empty_u.empty()) {
        r.notes.push_back("Theta_x(u) is empty on " + r.empty_u.to_string() + " (P_U-measure " + fmt(r.measure) +
                          "); belief and plausibility refuse");
    }
    return r;
}

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw DomainError("summarize: no observations");
    Summary s;
    double mean = 0.0;
    double m2 = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("summarize: non-finite observation");
        ++s.n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(s.n);
        m2 += delta * (v - mean);
    }
    s.mean = mean;
    if (s.n >= 2) {
        s.s2 = m2 / static_cast<double>(s.n - 1);
        if (*s.s2 == 0.0) s.warnings.push_back("all observations are equal; S^2 = 0");
    } else {
        s.warnings.push_back("S^2 needs at least two observations");
    }
    return s;
}

ModelPtr make_model(const std::string& name, const ModelParams& params) {
    const auto get = [&](const std::string& key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "binomial") return std::make_shared<BinomialModel>(checked_count(get("n", 1), "n", 1));
    if (name == "normal-mean") {
        return std::make_shared<NormalMeanModel>(checked_count(get("n", 1), "n", 1), get("sigma", 1.0));
    }
    if (name == "normal-mean-constrained") {
        const double lo = get("lo", -1.0);
        const double hi = get("hi", 1.0);
        if (!(lo <= hi)) throw DomainError("normal-mean-constrained: need lo <= hi");
        return std::make_shared<NormalMeanModel>(checked_count(get("n", 1), "n", 1), get("sigma", 1.0),
                                                 Interval::closed(lo, hi));
    }
    if (name == "normal-variance") return std::make_shared<NormalVarianceModel>(checked_count(get("n", 2), "n", 2));
    throw DomainError("unknown model '" + name + "'");
}

std::vector<std::string> model_names() {
    return {"binomial", "normal-mean", "normal-variance", "normal-mean-constrained"};
}

}  // namespace pvim
