#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rmtgaps/cli_io.hpp"
#include "rmtgaps/errors.hpp"
#include "variants.hpp"

using namespace rmtgaps;
using namespace rmtgaps::io;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "rmtgaps");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("rmtgaps_test_" + name);
}

std::string error_of(const std::string& ini) {
    try {
        parse_spec(parse_ini(ini));
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("spec round trip through INI text") {
    auto specs = rmtgaps::testing::reference_variants(3);
    EnsembleSpec exact;
    exact.family = Family::LaguerreWishart;
    exact.correlated = true;
    exact.n = 3;
    exact.sigma = {3.0 / 4, 4.0 / 9, 1.0 / 3};
    exact.alpha = 0.1;
    specs.push_back(exact);
    for (const EnsembleSpec& s : specs) {
        CAPTURE(describe(s));
        const EnsembleSpec t = parse_spec(parse_ini(spec_to_ini(s)));
        CHECK(t.family == s.family);
        CHECK(t.correlated == s.correlated);
        CHECK(t.n == s.n);
        CHECK(t.sigma == s.sigma);
        CHECK(t.alpha == s.alpha);
        CHECK(t.beta == s.beta);
        CHECK(t.kappa == s.kappa);
    }
}

TEST_CASE("rational sigma entries") {
    const EnsembleSpec s = parse_spec(parse_ini("[ensemble]\nfamily = laguerre-wishart\nn = 2\nalpha = 1\nsigma = 3/4, 4/9\n"));
    CHECK(s.correlated);
    CHECK(s.sigma[0] == 0.75);
    CHECK(s.sigma[1] == 4.0 / 9);
}

TEST_CASE("spec validation messages") {
    CHECK(error_of("[ensemble]\nfamily = laguerre-wishart\nn = 3\nalpha = 1\nsigma = 3/4,4/9\n").find("sigma has 2 entries") !=
          std::string::npos);
    CHECK(error_of("[ensemble]\nfamily = cauchy-lorentz-i\nn = 3\nkappa = 2.4\n").find("κ>n−1/2") != std::string::npos);
    CHECK(error_of("[ensemble]\nfamily = wigner\nn = 3\n").find("unknown family") != std::string::npos);
    CHECK(error_of("[ensemble]\nfamily = jacobi-manova\nn = 3\nalpha = 1\n").find("missing required parameter 'beta'") !=
          std::string::npos);
    CHECK(error_of("[ensemble]\nfamily = gauss-wigner\nn = 3\nkappa = 4\n").find("does not apply") != std::string::npos);
    CHECK(error_of("[ensemble]\nfamily = gauss-wigner\nn = 3\n").empty());
    CHECK_THROWS_AS(parse_ini("[results]\nx = 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_ini("[ensemble\nn = 3\n"), ValidationError);
}

TEST_CASE("simulation settings") {
    const auto c = parse_simulation(parse_ini("[simulation]\nrealizations = 1000\nseed = 99\nmethod = loggas\nchains = 3\n"));
    CHECK(c.realizations == 1000);
    CHECK(c.seed == 99);
    CHECK(c.method == mc::Method::LogGas);
    CHECK(c.loggas.chains == 3);
    CHECK_THROWS_AS(parse_simulation(parse_ini("[simulation]\nrealizations = many\n")), ValidationError);
}

TEST_CASE("CSV layout") {
    RunReport report;
    Record r;
    r.query = "gap";
    r.r = -INFINITY;
    r.s = 1.5;
    r.analytic = 0.123456789012345;
    report.records.push_back(r);
    std::ostringstream os;
    write_csv(report, os);
    CHECK(os.str() == "r,s,analytic,mc_value,mc_stderr,z_score\n-inf,1.5,0.123456789,,,\n");

    Record c = r;
    c.has_x = true;
    c.x = 2;
    c.mc_value = 0.12;
    c.mc_stderr = 0.001;
    RunReport curve;
    curve.records = {c, c};
    std::ostringstream oc;
    write_csv(curve, oc);
    CHECK(oc.str() ==
          "x,analytic,mc_value,mc_stderr,z_score\n2,0.123456789,0.12,0.001,-3.456789012\n2,0.123456789,0.12,0.001,"
          "-3.456789012\n");
    CHECK_FALSE(curve.records[0].pass());
    CHECK_THROWS_AS(emit(RunReport{}, Format::CSV, "-"), ValidationError);
}

TEST_CASE("pass rule allows 3 standard errors plus rounding") {
    Record r;
    r.analytic = 0.5;
    CHECK(r.pass());
    r.mc_value = 0.503;
    r.mc_stderr = 0.001;
    CHECK(r.pass());
    r.mc_value = 0.50306;
    CHECK_FALSE(r.pass());
    r.mc_value = 0.50004;
    r.mc_stderr = 0.0;
    CHECK(r.pass());
    r.published_value = 0.5001;
    CHECK_FALSE(*r.published_match());
}

TEST_CASE("command line: point queries and exit codes") {
    const auto out = scratch("gap.csv");
    CHECK(run({"gap", "--family", "laguerre-wishart", "--n", "2", "--alpha", "2", "--r", "1", "--s", "5", "--output",
               out.string()}) == 0);
    const std::string text = slurp(out);
    CHECK(text.rfind("r,s,analytic,mc_value,mc_stderr,z_score\n1,5,0.1221", 0) == 0);
    CHECK(text.back() == '\n');

    CHECK(run({"gap", "--family", "laguerre-wishart", "--n", "2", "--alpha", "2", "--r", "2", "--s", "1"}) == 1);
    CHECK(run({"gap", "--family", "cauchy-lorentz-i", "--n", "3", "--kappa", "2", "--r", "0", "--s", "1"}) == 1);
    CHECK(run({"frobnicate"}) == 1);

    const auto grid = scratch("grid.csv");
    CHECK(run({"curve", "--family", "gauss-wigner", "--n", "3", "--quantity", "sf-min", "--grid", "-3,3,200",
               "--output", grid.string()}) == 0);
    const std::string g = slurp(grid);
    CHECK(std::count(g.begin(), g.end(), '\n') == 201);
    std::filesystem::remove(out);
    std::filesystem::remove(grid);
}

TEST_CASE("command line: flags override the config file") {
    const auto ini = scratch("spec.ini");
    std::ofstream(ini) << "[ensemble]\nfamily = laguerre-wishart\nn = 2\nalpha = 2\n\n[query]\nr = 1\ns = 5\n";
    const auto a = scratch("a.json"), b = scratch("b.json");
    CHECK(run({"gap", "--config", ini.string(), "--format", "json", "--output", a.string()}) == 0);
    CHECK(run({"gap", "--config", ini.string(), "--s", "2", "--format", "json", "--output", b.string()}) == 0);
    const auto ja = nlohmann::json::parse(slurp(a)), jb = nlohmann::json::parse(slurp(b));
    CHECK(ja["records"][0]["s"] == 5.0);
    CHECK(jb["records"][0]["s"] == 2.0);
    CHECK(ja["records"][0]["analytic"].get<double>() == doctest::Approx(0.1221).epsilon(5e-4));
    CHECK_FALSE(ja.contains("wall_time"));
    for (const auto& p : {ini, a, b}) std::filesystem::remove(p);
}

TEST_CASE("table harness, analytic only") {
    TableRunOptions o;
    o.analytic_only = true;
    const RunReport r = reproduce_table("4", o);
    CHECK(r.records.size() == 10);
    CHECK(r.all_pass());
    CHECK(r.records[0].label == "table 4 row 1");
    CHECK(r.records[0].analytic == doctest::Approx(0.1221).epsilon(5e-4));
    CHECK_THROWS_AS(reproduce_table("11", o), ValidationError);
}
