#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pvim/errors.hpp"
#include "pvim/serialize.hpp"

namespace pvim::cli {

namespace {

namespace fs = std::filesystem;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Locale-independent shortest round-trip formatting.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::uint64_t default_seed() {
    const char* env = std::getenv("PVIM_SEED");
    if (!env || !*env) return 0;
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("PVIM_SEED must be a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    out << content;
}

// --- raw data ---------------------------------------------------------------

std::vector<double> load_values(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<double> values;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw DomainError(path + ": invalid JSON: " + e.what());
        }
        const Json& arr = j.is_object() ? j.value("values", Json()) : j;
        if (!arr.is_array()) throw DomainError(path + ": expected an array of numbers or {\"values\": [...]}");
        for (const auto& v : arr) {
            if (!v.is_number()) throw DomainError(path + ": non-numeric entry " + v.dump());
            values.push_back(v.get<double>());
        }
    } else {
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            if (line.find(',') != std::string::npos) {
                throw DomainError(path + ":" + std::to_string(lineno) + ": expected a single column");
            }
            const auto v = parse_number(line);
            if (!v) {
                // A non-numeric first line is a header.
                if (values.empty() && lineno == 1) continue;
                throw DomainError(path + ":" + std::to_string(lineno) + ": non-numeric value '" + line + "'");
            }
            values.push_back(*v);
        }
    }
    if (values.empty()) throw DomainError(path + ": no observations");
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError(path + ": non-finite value");
    }
    return values;
}

// --- shared options -----------------------------------------------------------

struct ModelArgs {
    std::string model;
    double n = 0.0;
    double sigma = 1.0;
    double lo = -1.0;
    double hi = 1.0;
    double x = 0.0;
    double xbar = 0.0;
    double t = 0.0;
    double s2 = 0.0;
    std::string data;
    CLI::Option* n_opt = nullptr;
    CLI::Option* sigma_opt = nullptr;
    CLI::Option* lo_opt = nullptr;
    CLI::Option* hi_opt = nullptr;
    CLI::Option* x_opt = nullptr;
    CLI::Option* xbar_opt = nullptr;
    CLI::Option* t_opt = nullptr;
    CLI::Option* s2_opt = nullptr;
    CLI::Option* data_opt = nullptr;
};

void add_model_options(CLI::App* app, ModelArgs& a, bool with_observation) {
    app->add_option("--model", a.model, "binomial | normal-mean | normal-variance | normal-mean-constrained")
        ->required();
    a.n_opt = app->add_option("--n", a.n, "Sample size (binomial trials)");
    a.sigma_opt = app->add_option("--sigma", a.sigma, "Known standard deviation (normal mean)");
    a.lo_opt = app->add_option("--lo", a.lo, "Constraint box lower end (default -1)");
    a.hi_opt = app->add_option("--hi", a.hi, "Constraint box upper end (default 1)");
    if (!with_observation) return;
    a.x_opt = app->add_option("--x", a.x, "Observation: count or sample mean");
    a.xbar_opt = app->add_option("--xbar", a.xbar, "Sample mean (normal mean)");
    a.t_opt = app->add_option("--t", a.t, "(n - 1) S^2 (normal variance)");
    a.s2_opt = app->add_option("--s2", a.s2, "Sample variance S^2 (normal variance)");
    a.data_opt = app->add_option("--data", a.data, "File of raw observations (one column CSV or JSON array)");
}

struct ResolvedModel {
    ModelPtr model;
    ModelParams params;
    double observation = 0.0;
    std::string data_source = "inline";
};

ResolvedModel resolve_model(const ModelArgs& a, bool need_observation) {
    ResolvedModel r;
    std::optional<Summary> summary;
    if (a.data_opt && a.data_opt->count()) {
        summary = summarize(load_values(a.data));
        r.data_source = a.data;
    }
    if (a.n_opt->count()) {
        r.params["n"] = a.n;
    } else if (summary) {
        r.params["n"] = static_cast<double>(summary->n);
    }
    if (summary && a.n_opt->count() && static_cast<double>(summary->n) != a.n) {
        throw DomainError("--n disagrees with the number of observations in --data");
    }
    if (a.sigma_opt->count()) r.params["sigma"] = a.sigma;
    if (a.lo_opt->count()) r.params["lo"] = a.lo;
    if (a.hi_opt->count()) r.params["hi"] = a.hi;
    r.model = make_model(a.model, r.params);
    if (!need_observation) return r;

    const auto given = [](CLI::Option* o) { return o && o->count() > 0; };
    if (a.model == "normal-variance") {
        const auto* nv = static_cast<const NormalVarianceModel*>(r.model.get());
        if (given(a.t_opt)) {
            r.observation = a.t;
        } else if (given(a.s2_opt)) {
            r.observation = nv->df() * a.s2;
        } else if (summary) {
            if (!summary->s2) throw DomainError("S^2 needs at least two observations");
            r.observation = nv->df() * *summary->s2;
        } else {
            throw DomainError("normal-variance needs --t, --s2 or --data");
        }
    } else if (a.model == "binomial") {
        if (!given(a.x_opt)) throw DomainError("binomial needs --x");
        r.observation = a.x;
    } else {
        if (given(a.x_opt)) {
            r.observation = a.x;
        } else if (given(a.xbar_opt)) {
            r.observation = a.xbar;
        } else if (summary) {
            r.observation = summary->mean;
        } else {
            throw DomainError(a.model + " needs --x, --xbar or --data");
        }
    }
    r.model->validate_observation(r.observation);
    return r;
}

Json params_json(const ModelParams& p) {
    Json j = Json::object();
    for (const auto& [k, v] : p) j[k] = v;
    return j;
}

struct NullArgs {
    std::string null;
    double theta0 = 0.0;
    double sigma0_sq = 1.0;
    CLI::Option* theta0_opt = nullptr;
    CLI::Option* sigma0_opt = nullptr;
};

void add_null_options(CLI::App* app, NullArgs& a) {
    app->add_option("--null", a.null, "Null hypothesis, e.g. \"theta<=0.5\", \"theta==0\", \"0.2<=theta<=0.4\"");
    a.theta0_opt = app->add_option("--theta0", a.theta0, "Shorthand for --null \"theta<=THETA0\"");
    a.sigma0_opt = app->add_option("--sigma0-sq", a.sigma0_sq, "Shorthand for --null \"theta<=SIGMA0_SQ\"");
}

Assertion resolve_null(const NullArgs& a, const AssociationModel& m) {
    std::string text = a.null;
    if (text.empty() && a.sigma0_opt->count()) text = "theta<=" + fmt(a.sigma0_sq);
    if (text.empty() && a.theta0_opt->count()) text = "theta<=" + fmt(a.theta0);
    if (text.empty()) throw DomainError("give a null with --null, --theta0 or --sigma0-sq");
    return parse_assertion(text, m.param_space());
}

struct RunContext {
    std::string command;
    std::vector<std::string> argv;
    std::string out_dir;
    std::vector<std::string> outputs;
};

void write_manifest(const RunContext& ctx, const ResolvedModel* rm, std::optional<std::uint64_t> seed,
                    std::optional<Tail> tail, const Json& extra = Json::object()) {
    if (ctx.out_dir.empty()) return;
    Json m = {{"schema", "pvim.manifest/1"}, {"command", ctx.command}, {"argv", ctx.argv}};
    m["model"] = rm ? Json(rm->model->name()) : Json(nullptr);
    m["params"] = rm ? params_json(rm->params) : Json::object();
    m["data_source"] = rm ? Json(rm->data_source) : Json(nullptr);
    m["seed"] = seed ? Json(*seed) : Json(nullptr);
    m["tail_convention"] = tail ? Json(to_string(*tail)) : Json(nullptr);
    m["outputs"] = ctx.outputs;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    write_file(fs::path(ctx.out_dir) / (ctx.command + ".manifest.json"), m.dump(2) + "\n");
}

// Prints the result and, with an output directory, saves it beside the manifest.
void emit(RunContext& ctx, const Json& result, std::ostream& out) {
    const std::string text = result.dump(2) + "\n";
    out << text;
    if (!ctx.out_dir.empty()) {
        const fs::path p = fs::path(ctx.out_dir) / (ctx.command + ".json");
        write_file(p, text);
        ctx.outputs.push_back(p.string());
    }
}

struct SeedArgs {
    std::uint64_t seed = 0;
    CLI::Option* opt = nullptr;
    std::uint64_t value() const { return opt->count() ? seed : default_seed(); }
};

void add_seed_option(CLI::App* app, SeedArgs& s) {
    s.opt = app->add_option("--seed", s.seed, "RNG seed (default: $PVIM_SEED or 0)");
}

// Refuses with the empty-focal diagnostic when the constraint box empties focal sets.
void check_focal_sets(const ResolvedModel& rm) {
    const auto* nm = dynamic_cast<const NormalMeanModel*>(rm.model.get());
    if (!nm || !nm->box()) return;
    const DiagnosticReport d = constrained_focal_diagnostic(*nm, rm.observation);
    if (d.empty_u.empty()) return;
    const auto& parts = d.empty_u.parts();
    const Interval widest = *std::max_element(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
        return a.length() < b.length();
    });
    throw EmptyFocalSetError(d.notes.front(), rm.observation, 0.5 * (widest.lo + widest.hi), d.measure);
}

Json error_json(const std::string& message, int code) {
    return {{"schema", "pvim.error/1"}, {"error", message}, {"exit_code", code}};
}

// --- grids ------------------------------------------------------------------

struct GridArgs {
    double from = 0.0;
    double to = 0.0;
    int points = 0;
    bool log_scale = false;
    CLI::Option* from_opt = nullptr;
    CLI::Option* to_opt = nullptr;
    CLI::Option* points_opt = nullptr;
};

void add_grid_options(CLI::App* app, GridArgs& g) {
    g.from_opt = app->add_option("--from", g.from, "Grid start");
    g.to_opt = app->add_option("--to", g.to, "Grid end");
    g.points_opt = app->add_option("--points", g.points, "Grid size");
    app->add_flag("--log", g.log_scale, "Log-spaced grid");
}

ParamGrid default_grid(const AssociationModel& m, double center) {
    if (dynamic_cast<const NormalVarianceModel*>(&m)) {
        const double c = center > 0.0 ? center : 1.0;
        return {c / 100.0, c * 100.0, 96, true};
    }
    if (const auto* nm = dynamic_cast<const NormalMeanModel*>(&m)) {
        return {center - 10.0 * nm->scale(), center + 10.0 * nm->scale(), 201, false};
    }
    return {1e-6, 1.0 - 1e-6, 201, false};
}

ParamGrid resolve_grid(const GridArgs& g, ParamGrid fallback) {
    ParamGrid out = fallback;
    if (g.from_opt->count()) out.lo = g.from;
    if (g.to_opt->count()) out.hi = g.to;
    if (g.points_opt->count()) out.points = g.points;
    if (g.from_opt->count() || g.to_opt->count() || g.points_opt->count()) out.log_scale = g.log_scale;
    if (out.points < 1 || !(out.lo <= out.hi)) throw DomainError("grid is empty: need --points >= 1 and --from <= --to");
    return out;
}

double grid_center(const ResolvedModel& rm) {
    if (const auto* nv = dynamic_cast<const NormalVarianceModel*>(rm.model.get())) return rm.observation / nv->df();
    return rm.observation;
}

NestedRandomSet named_prs(const std::string& name) {
    if (name == "one-sided") return one_sided_prs();
    if (name == "symmetric") return symmetric_prs();
    throw DomainError("unknown PRS '" + name + "' (one-sided | symmetric)");
}

// --- pval -------------------------------------------------------------------

struct PvalArgs {
    ModelArgs model;
    NullArgs null;
    SeedArgs seed;
    std::string tail = "strict";
    bool monte_carlo = false;
    std::size_t samples = 100000;
    bool force = false;
};

SupConfig make_config(const std::string& tail, std::uint64_t seed, bool mc, std::size_t samples, bool force) {
    SupConfig c;
    c.tail = parse_tail(tail);
    c.seed = seed;
    c.monte_carlo = mc;
    c.mc_samples = samples;
    c.force = force;
    return c;
}

Json pval_result(const ResolvedModel& rm, const Assertion& null, const SupConfig& cfg) {
    check_focal_sets(rm);
    const TestStatistic stat = natural_statistic(rm.model);
    const EquivalenceReport eq = plausibility_equals_pvalue(rm.model, stat, null, rm.observation, cfg);
    std::vector<std::string> diagnostics = eq.pvalue.diagnostics;
    diagnostics.insert(diagnostics.end(), eq.notes.begin(), eq.notes.end());
    return {{"schema", "pvim.pval/1"},
            {"model", rm.model->name()},
            {"params", params_json(rm.params)},
            {"observation", rm.observation},
            {"statistic", stat.label},
            {"null", null.to_string()},
            {"tail", to_string(cfg.tail)},
            {"pvalue", eq.pvalue.value},
            {"plausibility", eq.plausibility},
            {"plausibility_cstep", eq.plausibility_cstep},
            {"plausibility_containment", eq.plausibility_containment},
            {"difference", eq.difference},
            {"tolerance", eq.tolerance},
            {"equal", eq.pass},
            {"method", to_string(eq.pvalue.method)},
            {"seed", cfg.seed ? Json(*cfg.seed) : Json(nullptr)},
            {"n_samples", eq.pvalue.n_samples},
            {"std_error", eq.pvalue.std_error ? Json(*eq.pvalue.std_error) : Json(nullptr)},
            {"sup_config", to_json(cfg)},
            {"diagnostics", diagnostics}};
}

int cmd_pval(const PvalArgs& a, RunContext& ctx, std::ostream& out) {
    const ResolvedModel rm = resolve_model(a.model, true);
    const Assertion null = resolve_null(a.null, *rm.model);
    const SupConfig cfg = make_config(a.tail, a.seed.value(), a.monte_carlo, a.samples, a.force);
    emit(ctx, pval_result(rm, null, cfg), out);
    write_manifest(ctx, &rm, cfg.seed, cfg.tail, {{"null", null.to_string()}, {"sup_config", to_json(cfg)}});
    return kOk;
}

// --- curve ------------------------------------------------------------------

struct CurveArgs {
    ModelArgs model;
    GridArgs grid;
    std::string side = "lower";
    std::string tail = "strict";
    double alpha = 0.1;
    std::string csv = "curve.csv";
    std::string svg;
    bool want_svg = false;
};

Assertion side_null(const std::string& side, double theta0, const IntervalSet& space) {
    if (side == "lower") return Assertion(IntervalSet(Interval{-kInf, theta0, false, true}), space);
    if (side == "upper") return Assertion(IntervalSet(Interval{theta0, kInf, true, false}), space);
    if (side == "point") return Assertion(IntervalSet::point(theta0), space);
    throw DomainError("--side must be lower, upper or point");
}

std::string render_svg(const std::vector<std::pair<double, double>>& pts, double alpha, const std::string& xlabel,
                       bool log_x) {
    constexpr double W = 640, H = 400, L = 60, R = 20, T = 20, B = 50;
    double x0 = pts.front().first;
    double x1 = pts.back().first;
    const auto tx = [&](double x) { return log_x ? std::log(x) : x; };
    if (x0 == x1) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    const auto sx = [&](double x) { return L + (tx(x) - tx(x0)) / (tx(x1) - tx(x0)) * (W - L - R); };
    const auto sy = [&](double y) { return H - B - y * (H - T - B); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
       << "\" viewBox=\"0 0 " << fmt(W) << ' ' << fmt(H) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(W - R) << "\" y2=\"" << fmt(sy(0))
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(L) << "\" y2=\"" << fmt(sy(1))
       << "\" stroke=\"black\"/>\n";
    for (double y : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        os << "<text x=\"" << fmt(L - 8) << "\" y=\"" << fmt(sy(y) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
           << fmt(y) << "</text>\n";
    }
    for (double x : {pts.front().first, pts.back().first}) {
        os << "<text x=\"" << fmt(sx(x)) << "\" y=\"" << fmt(H - B + 16) << "\" font-size=\"11\" text-anchor=\"middle\">"
           << fmt(x) << "</text>\n";
    }
    os << "<text x=\"" << fmt((L + W - R) / 2) << "\" y=\"" << fmt(H - 10)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << fmt((T + H - B) / 2) << "\" font-size=\"12\" transform=\"rotate(-90 14 "
       << fmt((T + H - B) / 2) << ")\" text-anchor=\"middle\">plausibility</text>\n";
    os << "<line x1=\"" << fmt(L) << "\" y1=\"" << fmt(sy(alpha)) << "\" x2=\"" << fmt(W - R) << "\" y2=\""
       << fmt(sy(alpha)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << fmt(sx(x)) << ',' << fmt(sy(y)) << ' ';
    os << "\"/>\n</svg>\n";
    return os.str();
}

int cmd_curve(const CurveArgs& a, RunContext& ctx, std::ostream& out) {
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw DomainError("--alpha must lie in [0, 1]");
    const ResolvedModel rm = resolve_model(a.model, true);
    check_focal_sets(rm);
    const ParamGrid grid = resolve_grid(a.grid, default_grid(*rm.model, grid_center(rm)));
    SupConfig cfg;
    cfg.tail = parse_tail(a.tail);
    cfg.seed = default_seed();
    const TestStatistic stat = natural_statistic(rm.model);

    std::vector<std::pair<double, double>> pts;
    std::ostringstream csv;
    csv << "theta0,plausibility\n";
    const auto pl_at = [&](double theta0) {
        const Assertion null = side_null(a.side, theta0, rm.model->param_space());
        return plausibility_equals_pvalue(rm.model, stat, null, rm.observation, cfg).plausibility;
    };
    for (double theta0 : grid.values()) {
        if (!rm.model->param_space().contains(theta0)) continue;
        const double pl = pl_at(theta0);
        pts.emplace_back(theta0, pl);
        csv << fmt(theta0) << ',' << fmt(pl) << '\n';
    }
    if (pts.empty()) throw DomainError("no grid point lies in the parameter space");

    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < pts.size() && !crossing; ++i) {
        const auto [xa, ya] = pts[i];
        const auto [xb, yb] = pts[i + 1];
        if ((ya - a.alpha) * (yb - a.alpha) > 0.0 || ya == yb) continue;
        // Bisect between the bracketing grid points rather than interpolating.
        double lo = xa, hi = xb;
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            ((pl_at(mid) - a.alpha) * (ya - a.alpha) > 0.0 ? lo : hi) = mid;
        }
        crossing = 0.5 * (lo + hi);
    }

    const std::string dir = ctx.out_dir.empty() ? "." : ctx.out_dir;
    const fs::path csv_path = fs::path(dir) / a.csv;
    write_file(csv_path, csv.str());
    ctx.outputs.push_back(csv_path.string());
    Json svg_json = nullptr;
    if (a.want_svg || !a.svg.empty()) {
        const fs::path svg_path = fs::path(dir) / (a.svg.empty() ? "curve.svg" : a.svg);
        write_file(svg_path, render_svg(pts, a.alpha, "theta0", grid.log_scale));
        ctx.outputs.push_back(svg_path.string());
        svg_json = svg_path.string();
    }
    RunContext inner = ctx;
    inner.out_dir = dir;
    emit(inner,
         {{"schema", "pvim.curve/1"},
          {"model", rm.model->name()},
          {"params", params_json(rm.params)},
          {"observation", rm.observation},
          {"side", a.side},
          {"tail", a.tail},
          {"alpha", a.alpha},
          {"rows", pts.size()},
          {"csv", csv_path.string()},
          {"svg", svg_json},
          {"alpha_crossing", crossing ? Json(*crossing) : Json(nullptr)}},
         out);
    write_manifest(inner, &rm, cfg.seed, cfg.tail, {{"side", a.side}});
    return kOk;
}

// --- region -----------------------------------------------------------------

struct RegionArgs {
    ModelArgs model;
    GridArgs grid;
    double alpha = 0.1;
    std::string prs = "one-sided";
};

int cmd_region(const RegionArgs& a, RunContext& ctx, std::ostream& out) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw DomainError("--alpha must lie in (0, 1)");
    const ResolvedModel rm = resolve_model(a.model, true);
    check_focal_sets(rm);
    const NestedRandomSet s = named_prs(a.prs);
    const ParamGrid grid = resolve_grid(a.grid, default_grid(*rm.model, grid_center(rm)));
    const RegionReport r = plausibility_region(*rm.model, rm.observation, s, a.alpha, grid);
    const bool empty = r.region.empty();
    emit(ctx,
         {{"schema", "pvim.region/1"},
          {"model", rm.model->name()},
          {"params", params_json(rm.params)},
          {"observation", rm.observation},
          {"alpha", a.alpha},
          {"prs", s.label},
          {"lower", empty ? Json(nullptr) : Json(r.region.infimum())},
          {"upper", empty ? Json(nullptr) : Json(r.region.supremum())},
          {"region", to_json(r.region)},
          {"reaches_grid_lo", r.reaches_grid_lo},
          {"reaches_grid_hi", r.reaches_grid_hi},
          {"grid", {{"from", grid.lo}, {"to", grid.hi}, {"points", grid.points}, {"log", grid.log_scale}}},
          {"diagnostics", r.diagnostics}},
         out);
    write_manifest(ctx, &rm, std::nullopt, std::nullopt, {{"alpha", a.alpha}, {"prs", a.prs}});
    return kOk;
}

// --- validate ---------------------------------------------------------------

struct ValidateArgs {
    ModelArgs model;
    NullArgs null;
    SeedArgs seed;
    double theta = 0.0;
    CLI::Option* theta_opt = nullptr;
    std::size_t reps = 100000;
    std::string tail = "weak";
    std::string prs = "theorem2";
    bool negative_control = false;
    bool wrong_null = false;
    bool uniformity = false;
    bool coverage = false;
    double alpha = 0.1;
    std::size_t coverage_reps = 10000;
    std::vector<double> alpha_grid;
};

int cmd_validate(const ValidateArgs& a, RunContext& ctx, std::ostream& out) {
    if (a.reps == 0) throw MisuseError("--reps must be at least 1");
    const ResolvedModel rm = resolve_model(a.model, false);
    const Assertion null = resolve_null(a.null, *rm.model);
    double theta = a.theta;
    if (!a.theta_opt->count()) {
        theta = std::isfinite(null.set.supremum()) ? null.set.supremum() : null.set.infimum();
    }
    if (!null.contains(theta)) throw MisuseError("--theta " + fmt(theta) + " is not in the null " + null.to_string());
    const std::uint64_t seed = a.seed.value();
    const std::vector<double> alphas = a.alpha_grid.empty() ? default_alpha_grid() : a.alpha_grid;
    SupConfig cfg = make_config(a.tail, seed, false, 20000, false);

    Json audits = Json::array();
    bool pass = true;
    const auto record = [&](const Json& j, bool ok) {
        audits.push_back(j);
        pass = pass && ok;
    };

    if (a.prs == "theorem2") {
        const TestStatistic stat = natural_statistic(rm.model);
        Theorem2Set t2 = synthesize_theorem2(rm.model, stat, null, cfg);
        if (a.negative_control) t2.base = distorted(t2.base, 0.5);
        if (a.wrong_null) {
            const double b = null.set.supremum();
            const double shifted = b - 0.25 * std::fabs(b) - 0.25;
            const Assertion wrong = side_null("lower", shifted, rm.model->param_space());
            const Theorem2Set t2w = synthesize_theorem2(rm.model, stat, wrong, cfg);
            const PlFunction pl = [&](double x) { return t2w.null_plausibility(x); };
            ValidityAudit au = audit_validity(*rm.model, pl, t2w.base.label, null, theta, a.reps, seed, alphas);
            au.notes.push_back("negative control: plausibility of " + wrong.to_string() + " audited against " +
                               null.to_string());
            record(to_json(au), au.pass);
        } else {
            ValidityAudit au = audit_validity(*rm.model, t2, theta, a.reps, seed, alphas);
            if (a.negative_control) au.notes.push_back("negative control: measure_of(t)^0.5 breaks the natural measure");
            record(to_json(au), au.pass);
        }
    } else {
        NestedRandomSet s = named_prs(a.prs);
        if (a.negative_control) s = distorted(s, 0.5);
        const ValidityAudit au = audit_validity(*rm.model, s, null, theta, a.reps, seed, alphas);
        record(to_json(au), au.pass);
    }

    const NestedRandomSet point_prs = a.prs == "symmetric" ? symmetric_prs() : one_sided_prs();
    if (a.uniformity) {
        const UniformityReport u = audit_uniformity(*rm.model, point_prs, theta, a.reps, seed);
        record(to_json(u), u.pass);
    }
    if (a.coverage) {
        if (!(a.alpha >= 0.0 && a.alpha < 1.0)) throw DomainError("--alpha must lie in [0, 1)");
        const CoverageReport c = audit_region_coverage(*rm.model, point_prs, a.alpha, theta, a.coverage_reps, seed,
                                                       default_grid(*rm.model, theta));
        record(to_json(c), c.pass);
    }

    emit(ctx,
         {{"schema", "pvim.validate/1"},
          {"model", rm.model->name()},
          {"params", params_json(rm.params)},
          {"null", null.to_string()},
          {"theta", theta},
          {"tail", a.tail},
          {"seed", seed},
          {"prs", a.prs},
          {"audits", audits},
          {"pass", pass}},
         out);
    write_manifest(ctx, &rm, seed, parse_tail(a.tail), {{"null", null.to_string()}, {"reps", a.reps}});
    return pass ? kOk : kAuditFail;
}

// --- ingest -----------------------------------------------------------------

int cmd_ingest(const std::string& file, RunContext& ctx, std::ostream& out) {
    const Summary s = summarize(load_values(file));
    if (!s.s2) throw DomainError("S^2 is undefined for a single observation (need n >= 2)");
    Json j = {{"schema", "pvim.ingest/1"}, {"source", file}};
    j.update(to_json(s));
    j["t"] = (static_cast<double>(s.n) - 1.0) * *s.s2;
    emit(ctx, j, out);
    write_manifest(ctx, nullptr, std::nullopt, std::nullopt, {{"data_source", file}});
    return kOk;
}

// --- coherence --------------------------------------------------------------

struct CoherenceArgs {
    double n = 1.0;
    double sigma = 1.0;
    double from = 0.0;
    double to = 3.0;
    double step = 0.01;
    std::vector<std::string> nulls;
    std::string prs = "symmetric";
};

int cmd_coherence(const CoherenceArgs& a, RunContext& ctx, std::ostream& out) {
    const ModelParams params{{"n", a.n}, {"sigma", a.sigma}};
    const auto model = std::static_pointer_cast<const NormalMeanModel>(make_model("normal-mean", params));
    const std::vector<std::string> texts =
        a.nulls.empty() ? std::vector<std::string>{"theta==0", "-0.82<=theta<=0.52"} : a.nulls;
    std::vector<Assertion> nulls;
    for (const auto& t : texts) nulls.push_back(parse_assertion(t, model->param_space()));
    const auto xs = step_grid(a.from, a.to, a.step);
    SupConfig cfg;
    cfg.seed = default_seed();
    const CoherenceReport r = coherence_demo(*model, xs, nulls, named_prs(a.prs), cfg);

    Json j = {{"schema", "pvim.coherence/1"}, {"model", model->name()}, {"params", params_json(params)}};
    j.update(to_json(r));
    Json first = nullptr;
    for (const auto& row : r.rows) {
        if (!row.reversals.empty()) {
            first = {{"x", row.x}, {"pvalues", row.pvalues}, {"plausibilities", row.plausibilities}};
            break;
        }
    }
    j["first_reversal"] = first;
    emit(ctx, j, out);
    write_manifest(ctx, nullptr, cfg.seed, Tail::Weak, {{"nulls", texts}});
    return kOk;
}

// --- rerun ------------------------------------------------------------------

int cmd_rerun(const std::string& manifest_path, bool verify, std::ostream& out, std::ostream& err) {
    const Json m = Json::parse(read_file(manifest_path));
    if (m.value("schema", "") != "pvim.manifest/1") throw DomainError(manifest_path + " is not a pvim manifest");
    const auto argv = m.at("argv").get<std::vector<std::string>>();
    const auto outputs = m.value("outputs", std::vector<std::string>{});
    std::vector<std::optional<std::string>> before;
    for (const auto& p : outputs) before.push_back(fs::exists(p) ? std::optional(read_file(p)) : std::nullopt);

    std::ostringstream inner_out;
    const int code = run(argv, inner_out, err);
    Json files = Json::array();
    bool identical = true;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const bool same = before[i] && fs::exists(outputs[i]) && read_file(outputs[i]) == *before[i];
        identical = identical && same;
        files.push_back({{"path", outputs[i]}, {"identical", same}});
    }
    out << Json({{"schema", "pvim.rerun/1"},
                 {"manifest", manifest_path},
                 {"argv", argv},
                 {"exit_code", code},
                 {"outputs", files},
                 {"reproduced", identical}})
               .dump(2)
        << "\n";
    if (code != kOk) return code;
    return verify && !identical ? kAuditFail : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"pvim: p-values as plausibilities of inferential models"};
    app.name("pvim");
    app.require_subcommand(1);
    std::string out_dir;
    app.add_option("--out-dir", out_dir, "Directory for result files and the run manifest");

    PvalArgs pv;
    auto* pval = app.add_subcommand("pval", "p-value and the plausibility of the null under the matching PRS");
    add_model_options(pval, pv.model, true);
    add_null_options(pval, pv.null);
    add_seed_option(pval, pv.seed);
    pval->add_option("--tail", pv.tail, "strict: P(T > t) | weak: P(T >= t)");
    pval->add_flag("--monte-carlo", pv.monte_carlo, "Monte Carlo tail probabilities");
    pval->add_option("--samples", pv.samples, "Monte Carlo sample size");
    pval->add_flag("--force", pv.force, "Synthesize even when the A3 check fails");

    CurveArgs cv;
    auto* curve = app.add_subcommand("curve", "Plausibility of the null as its boundary moves over a grid");
    add_model_options(curve, cv.model, true);
    add_grid_options(curve, cv.grid);
    curve->add_option("--side", cv.side, "lower: theta <= theta0 | upper: theta >= theta0 | point");
    curve->add_option("--tail", cv.tail, "strict | weak");
    curve->add_option("--alpha", cv.alpha, "Reference line in the SVG");
    curve->add_option("--csv", cv.csv, "CSV file name inside --out-dir");
    curve->add_option("--svg-name", cv.svg, "SVG file name inside --out-dir");
    curve->add_flag("--svg", cv.want_svg, "Also write an SVG plot");

    RegionArgs rg;
    auto* region = app.add_subcommand("region", "Plausibility region {theta : pl({theta}) > alpha}");
    add_model_options(region, rg.model, true);
    add_grid_options(region, rg.grid);
    region->add_option("--alpha", rg.alpha, "Level in (0, 1)");
    region->add_option("--prs", rg.prs, "one-sided | symmetric");

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Monte Carlo validity audit");
    add_model_options(validate, va.model, false);
    add_null_options(validate, va.null);
    add_seed_option(validate, va.seed);
    va.theta_opt = validate->add_option("--theta", va.theta, "True parameter (default: null boundary)");
    validate->add_option("--reps", va.reps, "Replications");
    validate->add_option("--tail", va.tail, "weak (default) | strict");
    validate->add_option("--prs", va.prs, "theorem2 | one-sided | symmetric");
    validate->add_flag("--negative-control", va.negative_control, "Distort the PRS measure (expected to FAIL)");
    validate->add_flag("--wrong-null", va.wrong_null, "Audit the plausibility of a shifted null (expected to FAIL)");
    validate->add_flag("--uniformity", va.uniformity, "Also check uniformity of pl({theta})");
    validate->add_flag("--coverage", va.coverage, "Also check plausibility-region coverage");
    validate->add_option("--alpha", va.alpha, "Coverage level");
    validate->add_option("--coverage-reps", va.coverage_reps, "Replications for the coverage audit");
    validate->add_option("--alpha-grid", va.alpha_grid, "Levels checked by the validity audit");

    std::string ingest_file;
    auto* ingest = app.add_subcommand("ingest", "Summarize raw observations: n, mean, S^2");
    ingest->add_option("file", ingest_file, "One-column CSV or JSON array")->required();

    CoherenceArgs co;
    auto* coherence = app.add_subcommand("coherence", "Nested-null p-value reversals versus single-IM plausibility");
    coherence->add_option("--n", co.n, "Sample size");
    coherence->add_option("--sigma", co.sigma, "Known standard deviation");
    coherence->add_option("--from", co.from, "First x");
    coherence->add_option("--to", co.to, "Last x");
    coherence->add_option("--step", co.step, "x step");
    coherence->add_option("--null", co.nulls, "Nested nulls, smallest first");
    coherence->add_option("--prs", co.prs, "symmetric | one-sided");

    std::string manifest;
    bool verify = false;
    auto* rerun = app.add_subcommand("rerun", "Replay a run manifest");
    rerun->add_option("manifest", manifest, "Path to a *.manifest.json")->required();
    rerun->add_flag("--verify", verify, "Exit 4 unless every recorded output is reproduced byte for byte");

    std::vector<const char*> argv{"pvim"};
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadArguments;
    }

    RunContext ctx;
    ctx.argv = args;
    ctx.out_dir = out_dir;
    try {
        if (*pval) {
            ctx.command = "pval";
            return cmd_pval(pv, ctx, out);
        }
        if (*curve) {
            ctx.command = "curve";
            return cmd_curve(cv, ctx, out);
        }
        if (*region) {
            ctx.command = "region";
            return cmd_region(rg, ctx, out);
        }
        if (*validate) {
            ctx.command = "validate";
            return cmd_validate(va, ctx, out);
        }
        if (*ingest) {
            ctx.command = "ingest";
            return cmd_ingest(ingest_file, ctx, out);
        }
        if (*coherence) {
            ctx.command = "coherence";
            return cmd_coherence(co, ctx, out);
        }
        if (*rerun) return cmd_rerun(manifest, verify, out, err);
    } catch (const EmptyFocalSetError& e) {
        Json j = error_json(e.what(), kRefused);
        j["diagnostic"] = {{"observation", e.observation()},
                           {"witness_u", e.witness_u()},
                           {"empty_measure", e.empty_measure()}};
        out << j.dump(2) << "\n";
        err << "pvim: refused: " << e.what() << "\n";
        return kRefused;
    } catch (const UnsupportedModel& e) {
        out << error_json(e.what(), kRefused).dump(2) << "\n";
        err << "pvim: refused: " << e.what() << "\n";
        return kRefused;
    } catch (const std::invalid_argument& e) {  // ConfigError, MisuseError
        out << error_json(e.what(), kBadArguments).dump(2) << "\n";
        err << "pvim: " << e.what() << "\n";
        return kBadArguments;
    } catch (const std::domain_error& e) {
        out << error_json(e.what(), kBadArguments).dump(2) << "\n";
        err << "pvim: " << e.what() << "\n";
        return kBadArguments;
    } catch (const Json::exception& e) {
        out << error_json(e.what(), kBadArguments).dump(2) << "\n";
        err << "pvim: " << e.what() << "\n";
        return kBadArguments;
    } catch (const std::exception& e) {
        err << "pvim: internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kBadArguments;
}

}  // namespace pvim::cli
