#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli.hpp"

using Catch::Approx;
using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    Json json;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = pvim::cli::run(args, out, err);
    Json j;
    if (!out.str().empty()) j = Json::parse(out.str());
    return {code, j, err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("pvim_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("pval: reference values") {
    const Result r = call({"pval", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--sigma0-sq", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.json["schema"] == "pvim.pval/1");
    CHECK(r.json["pvalue"].get<double>() == Approx(0.72).margin(0.005));
    CHECK(r.json["equal"] == true);

    const Result b = call({"pval", "--model", "binomial", "--n", "5", "--theta0", "0.5", "--x", "3", "--tail", "strict"});
    REQUIRE(b.code == 0);
    CHECK(b.json["pvalue"].get<double>() == Approx(0.1875).margin(1e-15));
    CHECK(b.json["plausibility"].get<double>() == Approx(0.1875).margin(1e-12));

    const Result m = call({"pval", "--model", "normal-mean", "--n", "4", "--xbar", "0.5", "--null", "theta==0.5"});
    REQUIRE(m.code == 0);
    CHECK(m.json["pvalue"].get<double>() == Approx(0.5).margin(1e-12));
}

TEST_CASE("pval: refusal and argument errors") {
    const Result c = call({"pval", "--model", "normal-mean-constrained", "--x", "-1", "--null", "theta==0"});
    CHECK(c.code == 3);
    CHECK(c.json["schema"] == "pvim.error/1");
    CHECK(c.json["diagnostic"]["witness_u"].get<double>() == Approx(0.75));
    CHECK(c.json["diagnostic"]["empty_measure"].get<double>() >= 0.5);

    CHECK(call({"pval", "--model", "poisson", "--x", "1", "--null", "theta<=1"}).code == 2);
    CHECK(call({"pval", "--model", "binomial", "--n", "5", "--x", "7", "--theta0", "0.5"}).code == 2);
    CHECK(call({"pval", "--model", "binomial", "--n", "5", "--x", "2", "--null", "theta<<0.5"}).code == 2);
    CHECK(call({"pval", "--model", "binomial", "--n", "5", "--x", "2", "--theta0", "0.5", "--tail", "sideways"}).code == 2);
    CHECK(call({"no-such-command"}).code == 2);
}

TEST_CASE("pval: Monte Carlo is reproducible and honours the seed variable") {
    const std::vector<std::string> args{"pval", "--model", "normal-variance", "--n", "10", "--t", "9",
                                        "--sigma0-sq", "1", "--monte-carlo", "--samples", "20000"};
    ::setenv("PVIM_SEED", "17", 1);
    const Result a = call(args);
    const Result b = call(args);
    ::unsetenv("PVIM_SEED");
    const Result c = call(args);
    REQUIRE(a.code == 0);
    CHECK(a.json["seed"] == 17);
    CHECK(a.json["pvalue"] == b.json["pvalue"]);
    CHECK(c.json["seed"] == 0);
    CHECK(a.json["pvalue"] != c.json["pvalue"]);
}

TEST_CASE("curve: CSV, SVG and spot checks against pval") {
    const fs::path dir = scratch("curve");
    const Result r = call({"--out-dir", dir.string(), "curve", "--model", "normal-variance", "--n", "20", "--s2", "0.79",
                           "--from", "0.3", "--to", "3", "--points", "28", "--svg"});
    REQUIRE(r.code == 0);
    CHECK(r.json["alpha_crossing"].get<double>() == Approx(0.5518).margin(1e-3));
    CHECK(fs::exists(dir / "curve.svg"));
    CHECK(slurp(dir / "curve.svg").find("stroke-dasharray") != std::string::npos);
    CHECK(fs::exists(dir / "curve.manifest.json"));

    std::istringstream csv(slurp(dir / "curve.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "theta0,plausibility");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(csv, line)) {
        CHECK(line.find(';') == std::string::npos);
        const auto comma = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    REQUIRE(rows.size() == 28);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].second > rows[i - 1].second);
    for (const auto& [theta0, pl] : rows)
        if (std::fabs(theta0 - 1.0) < 1e-12) CHECK(pl == Approx(0.72).margin(0.005));
    for (std::size_t i = 0; i < rows.size(); i += 3) {
        std::ostringstream s0;
        s0.precision(17);
        s0 << rows[i].first;
        const Result p = call({"pval", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--sigma0-sq", s0.str()});
        CHECK(p.json["plausibility"].get<double>() == Approx(rows[i].second).margin(1e-15));
    }

    const fs::path one = scratch("curve1");
    CHECK(call({"--out-dir", one.string(), "curve", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--from", "1",
                "--to", "1", "--points", "1"})
              .code == 0);
    CHECK(slurp(one / "curve.csv").rfind("theta0,plausibility\n1,", 0) == 0);
    std::istringstream single(slurp(one / "curve.csv"));
    int lines = 0;
    while (std::getline(single, line)) ++lines;
    CHECK(lines == 2);

    CHECK(call({"--out-dir", one.string(), "curve", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--points",
                "0"})
              .code == 2);
}

TEST_CASE("region") {
    const Result r = call({"region", "--model", "normal-variance", "--n", "20", "--s2", "0.79", "--alpha", "0.1"});
    REQUIRE(r.code == 0);
    CHECK(r.json["lower"].get<double>() == Approx(0.5518).margin(1e-3));
    CHECK(r.json["prs"].get<std::string>().find("one-sided") != std::string::npos);

    const Result r2 = call({"region", "--model", "normal-mean", "--xbar", "0.3", "--alpha", "0.2", "--prs", "symmetric"});
    const Result r1 = call({"region", "--model", "normal-mean", "--xbar", "0.3", "--alpha", "0.1", "--prs", "symmetric"});
    const Result r9 = call({"region", "--model", "normal-mean", "--xbar", "0.3", "--alpha", "0.999", "--prs", "symmetric"});
    CHECK(r1.json["lower"].get<double>() <= r2.json["lower"].get<double>());
    CHECK(r2.json["upper"].get<double>() <= r1.json["upper"].get<double>());
    CHECK(r9.json["upper"].get<double>() - r9.json["lower"].get<double>() < 0.01);
    CHECK(r9.json["lower"].get<double>() == Approx(0.3).margin(0.01));

    CHECK(call({"region", "--model", "normal-mean", "--xbar", "0.3", "--alpha", "0"}).code == 2);
    CHECK(call({"region", "--model", "normal-mean", "--xbar", "0.3", "--alpha", "1"}).code == 2);
}

TEST_CASE("validate") {
    const Result ok = call({"validate", "--model", "binomial", "--n", "20", "--null", "theta<=0.4", "--reps", "5000"});
    CHECK(ok.code == 0);
    CHECK(ok.json["pass"] == true);
    CHECK(ok.json["theta"].get<double>() == 0.4);

    CHECK(call({"validate", "--model", "normal-mean", "--null", "theta==0", "--reps", "20000", "--prs", "symmetric",
                "--negative-control"})
              .code == 4);
    CHECK(call({"validate", "--model", "normal-mean", "--null", "theta<=0", "--reps", "20000", "--wrong-null"}).code == 4);
    CHECK(call({"validate", "--model", "binomial", "--n", "20", "--null", "theta<=0.4", "--reps", "0"}).code == 2);
    CHECK(call({"validate", "--model", "binomial", "--n", "20", "--null", "theta<=0.4", "--theta", "0.6"}).code == 2);

    const Result u = call({"validate", "--model", "normal-mean", "--null", "theta==0", "--reps", "5000", "--uniformity"});
    CHECK(u.code == 0);
}

TEST_CASE("ingest") {
    const fs::path dir = scratch("ingest");
    // Twenty values with sample variance 0.79: +-a around 2 with 20 a^2 / 19 = 0.79.
    const double a = std::sqrt(0.79 * 19 / 20);
    std::ostringstream twenty;
    twenty << "value\n";
    twenty.precision(17);
    for (int i = 0; i < 20; ++i) twenty << (i % 2 ? 2 + a : 2 - a) << '\n';
    write(dir / "twenty.csv", twenty.str());
    const Result r = call({"ingest", (dir / "twenty.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.json["n"] == 20);
    CHECK(r.json["s2"].get<double>() == Approx(0.79).margin(1e-12));
    CHECK(r.json["mean"].get<double>() == Approx(2.0).margin(1e-12));

    write(dir / "arr.json", "[1, 2, 3, 4]");
    CHECK(call({"ingest", (dir / "arr.json").string()}).json["s2"].get<double>() == Approx(5.0 / 3));
    write(dir / "obj.json", "{\"values\": [1, 2, 3, 4]}");
    CHECK(call({"ingest", (dir / "obj.json").string()}).json["n"] == 4);

    write(dir / "flat.csv", "3\n3\n3\n");
    const Result flat = call({"ingest", (dir / "flat.csv").string()});
    CHECK(flat.code == 0);
    CHECK(flat.json["s2"].get<double>() == 0.0);
    CHECK_FALSE(flat.json["warnings"].empty());

    write(dir / "one.csv", "3\n");
    CHECK(call({"ingest", (dir / "one.csv").string()}).code == 2);
    write(dir / "bad.csv", "1\nabc\n");
    CHECK(call({"ingest", (dir / "bad.csv").string()}).code == 2);
    write(dir / "empty.csv", "");
    CHECK(call({"ingest", (dir / "empty.csv").string()}).code == 2);
    CHECK(call({"ingest", (dir / "missing.csv").string()}).code == 2);

    // Raw data feeds pval directly.
    const Result p = call({"pval", "--model", "normal-variance", "--data", (dir / "twenty.csv").string(), "--sigma0-sq", "1"});
    REQUIRE(p.code == 0);
    CHECK(p.json["pvalue"].get<double>() == Approx(0.72).margin(0.005));
}

TEST_CASE("coherence") {
    const Result r = call({"coherence"});
    REQUIRE(r.code == 0);
    CHECK(r.json["reversal_count"].get<int>() >= 1);
    CHECK(r.json["single_im_monotone"] == true);
    CHECK_FALSE(r.json["first_reversal"].is_null());
    CHECK(call({"coherence", "--null", "-1<=theta<=1", "--null", "theta==0"}).code == 2);
}

TEST_CASE("manifests replay bit for bit") {
    const fs::path dir = scratch("rerun");
    const Result r = call({"--out-dir", dir.string(), "validate", "--model", "binomial", "--n", "12", "--null",
                           "theta<=0.3", "--reps", "3000", "--seed", "5"});
    REQUIRE(r.code == 0);
    const fs::path manifest = dir / "validate.manifest.json";
    REQUIRE(fs::exists(manifest));
    const Json m = Json::parse(slurp(manifest));
    CHECK(m["schema"] == "pvim.manifest/1");
    CHECK(m["seed"] == 5);
    CHECK(m["command"] == "validate");

    const Result again = call({"rerun", manifest.string(), "--verify"});
    CHECK(again.code == 0);
    CHECK(again.json["reproduced"] == true);

    // Tamper with the recorded output and the verification must fail.
    write(dir / "validate.json", "{}");
    CHECK(call({"rerun", manifest.string(), "--verify"}).code == 4);
}
