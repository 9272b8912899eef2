#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "binchoice/cli.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = binchoice::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("binchoice_cli_" + std::to_string(std::rand()) + "_" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string write(const std::string& name, const std::string& body) const {
        std::ofstream(path / name) << body;
        return (path / name).string();
    }
};

std::string logit_csv(std::size_t n, double g0, double g1, double g2, std::uint64_t seed, const std::string& group = "") {
    std::ostringstream os;
    for (const auto& r : oracle::logit_rows(n, g0, g1, g2, seed, 0, 4, 4, 10)) {
        os << r.p << ',' << r.y << ',' << r.c;
        if (!group.empty()) os << ',' << group;
        os << '\n';
    }
    return os.str();
}

}  // namespace

TEST_CASE("check on a monotone grid passes") {
    TempDir dir;
    const auto g = dir.write("g.csv", "a,b,q\n0,0,0.5\n0,1,0.7\n1,0,0.3\n1,1,0.6\n");
    const auto r = run({"check", "--grid", g, "--tol", "0"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["pass"] == true);
    for (const char* key : {"a_violations", "b_violations", "max_violation", "continuity_flags", "limit_flags"})
        CHECK(j.contains(key));
}

TEST_CASE("check on a failing grid exits 2") {
    TempDir dir;
    const auto g = dir.write("g.csv", "a,b,q\n0,0,0.5\n1,0,0.6\n");
    const auto r = run({"check", "--grid", g});
    CHECK(r.code == 2);
    const auto j = json::parse(r.out);
    CHECK(j["pass"] == false);
    CHECK(j["a_violations"].size() == 1);
    CHECK(j["max_violation"].get<double>() == doctest::Approx(0.1));
}

TEST_CASE("operational errors exit 1 with a diagnostic") {
    TempDir dir;
    CHECK(run({"check", "--grid", (dir.path / "missing.csv").string()}).code == 1);
    const auto bad = dir.write("bad.csv", "a,b,q\n0,0,zz\n");
    const auto r = run({"check", "--grid", bad});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK(r.out.empty());
    CHECK(run({"check", "--grid", bad, "--no-such-flag"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({}).code == 1);
    // lenient CSV skips the row and then has nothing left
    CHECK(run({"--lenient-csv", "check", "--grid", bad}).code == 1);
}

TEST_CASE("fit reports gamma and binding") {
    TempDir dir;
    const auto d = dir.write("d.csv", "price,income,choice\n" + logit_csv(4000, 0.5, -1, 0.4, 1));
    const auto r = run({"fit", "--data", d, "--link", "logit", "--constrain"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["gamma"].size() == 3);
    CHECK(j["binding"].is_array());
    CHECK(j["constrained"] == true);
    for (const char* key : {"loglik", "iterations", "gtol_achieved"}) CHECK(j.contains(key));
}

TEST_CASE("unconstrained fit of a non-rationalizable generator exits 2") {
    TempDir dir;
    const auto d = dir.write("d.csv", "price,income,choice\n" + logit_csv(4000, 0.2, -1, 1.5, 2));
    CHECK(run({"fit", "--data", d, "--no-constrain"}).code == 2);
    const auto r = run({"fit", "--data", d});
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["binding"] == json::array({"gamma1+gamma2<=0"}));
}

TEST_CASE("welfare with exact breakpoints gives an ordered interval") {
    TempDir dir;
    const auto o = dir.write("o.csv", "price,income,q\n1,5,0.6\n1.5,6,0.55\n0.5,4.5,0.7\n2,7,0.4\n");
    const auto r = run({"welfare", "--obs", o, "--y", "5", "--p0", "1", "--p1", "2", "--exact-breakpoints"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["lower"].get<double>() <= j["upper"].get<double>());
    CHECK(j.contains("attaining"));
    const auto t = run({"welfare", "--obs", o, "--y", "5", "--p0", "1", "--p1", "2", "--nodes", "11"});
    CHECK(json::parse(t.out)["quadrature_nodes"] == 11);
}

TEST_CASE("bounds subcommand") {
    TempDir dir;
    const auto o = dir.write("o.csv", "price,income,q\n2,10,0.6\n1,9,0.7\n");
    const auto r = run({"bounds", "--obs", o, "--target-p", "1.5", "--target-y", "9.5"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["lower"] == 0.6);
    CHECK(j["upper"] == 0.7);
    CHECK(j["attaining"]["lower"]["p"] == 2.0);
    const auto bad = dir.write("bad.csv", "price,income,q\n1,9,0.5\n2,10,0.6\n");
    CHECK(run({"bounds", "--obs", bad, "--target-p", "1.5", "--target-y", "9.5"}).code == 2);
}

TEST_CASE("srp subcommand") {
    auto r = run({"srp", "--kind", "same-income", "--p1", "1", "--y1", "5", "--p2", "2", "--y2", "5", "--q1", "0.6",
                  "--q2", "0.4"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["feasible"] == true);
    CHECK(j["pi"][2] == 0.4);
    r = run({"srp", "--kind", "same-income", "--p1", "1", "--y1", "5", "--p2", "2", "--y2", "5", "--q1", "0.3",
             "--q2", "0.5"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.out)["pi"].is_null());
    CHECK(run({"srp", "--kind", "sideways", "--p1", "1", "--y1", "5", "--p2", "2", "--y2", "5", "--q1", "0.3",
               "--q2", "0.5"})
              .code == 1);
}

TEST_CASE("simulate then rationalize with verification and export") {
    TempDir dir;
    const auto grid = (dir.path / "g.csv").string();
    const auto s = run({"--seed", "4", "simulate", "--spec", "logistic-ARUM", "--a-n", "6", "--b-n", "5", "--draws",
                        "20000", "--out", grid});
    REQUIRE(s.code == 0);
    CHECK(json::parse(s.out)["validation"]["valid"] == true);
    const auto table = (dir.path / "w1.csv").string();
    const auto r = run({"rationalize", "--grid", grid, "--verify-draws", "20000", "--export", table, "--levels", "9"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["rationalizable"] == true);
    CHECK(j["verification"]["pass"] == true);
    std::ifstream in(table);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 9 * 5);
}

TEST_CASE("rationalize refuses a violating grid with exit 2") {
    TempDir dir;
    const auto g = dir.write("g.csv", "a,b,q\n0,0,0.5\n1,0,0.6\n0,1,0.7\n1,1,0.8\n");
    const auto r = run({"rationalize", "--grid", g});
    CHECK(r.code == 2);
    CHECK(json::parse(r.out)["error"]["code"] == "not-rationalizable");
}

TEST_CASE("simulate writes CSV to stdout by default") {
    auto r = run({"simulate", "--spec", "point-mass", "--a-n", "2", "--b-n", "2", "--a-min", "0", "--a-max", "1",
                  "--b-min", "0", "--b-max", "1", "--draws", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "a,b,q\n0,0,1\n0,1,1\n1,0,0\n1,1,1\n");
    r = run({"simulate", "--spec", "uniform-additive", "--output", "dataset", "--rows", "5"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("price,income,choice\n", 0) == 0);
    CHECK(run({"simulate", "--spec", "uniform-additive", "--param", "scale"}).code == 1);
    CHECK(run({"simulate", "--spec", "uniform-additive", "--output", "table"}).code == 1);
}

TEST_CASE("identical invocations give byte-identical reports") {
    TempDir dir;
    const auto d = dir.write("d.csv", "price,income,choice\n" + logit_csv(2000, 0.5, -1, 0.4, 3));
    const auto grid = (dir.path / "g.csv").string();
    REQUIRE(run({"--seed", "9", "simulate", "--spec", "random-coefficient", "--out", grid}).code == 0);
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"fit", "--data", d},
             {"--seed", "5", "rationalize", "--grid", grid, "--verify-draws", "5000"},
             {"--threads", "3", "--seed", "5", "rationalize", "--grid", grid, "--verify-draws", "5000"},
             {"check", "--data", d, "--bins", "3"}}) {
        const auto a = run(args);
        const auto b = run(args);
        CHECK(a.code == b.code);
        CHECK(a.out == b.out);
    }
    // thread count does not change the verification
    const auto t1 = run({"--threads", "1", "--seed", "5", "rationalize", "--grid", grid, "--verify-draws", "9000"});
    const auto t4 = run({"--threads", "4", "--seed", "5", "rationalize", "--grid", grid, "--verify-draws", "9000"});
    CHECK(t1.out == t4.out);
}

TEST_CASE("stratified runs") {
    TempDir dir;
    // group "good" is binned from a monotone generator; group "bad" has
    // choices rising with price
    std::ostringstream body;
    body << "price,income,choice,group\n";
    body << logit_csv(3000, 0.5, -1, 0.4, 4, "good");
    body << logit_csv(3000, -2, 1.5, 0.0, 5, "bad");
    const auto d = dir.write("d.csv", body.str());
    const auto r = run({"--by-group", "--tol", "0.15", "check", "--data", d, "--bins", "3", "--min-count", "20"});
    CHECK(r.code == 2);
    const auto j = json::parse(r.out);
    CHECK(j["groups"]["good"]["pass"] == true);
    CHECK(j["groups"]["bad"]["pass"] == false);
    CHECK(j["pass"] == false);

    // one group only: per-group report equals the pooled one
    const auto single = dir.write("s.csv", "price,income,choice,group\n" + logit_csv(3000, 0.5, -1, 0.4, 6, "only"));
    const auto grouped = json::parse(run({"--by-group", "fit", "--data", single}).out);
    auto pooled = json::parse(run({"fit", "--data", single}).out);
    pooled.erase("skipped_rows");
    CHECK(grouped["groups"]["only"] == pooled);

    // a group with too little data becomes an error entry, others still run
    const auto thin = dir.write("t.csv", "price,income,choice,group\n" + logit_csv(3000, 0.5, -1, 0.4, 7, "big") +
                                             "1,5,1,tiny\n");
    const auto rt = run({"--by-group", "fit", "--data", thin});
    CHECK(rt.code == 1);
    const auto jt = json::parse(rt.out);
    CHECK(jt["groups"]["tiny"].contains("error"));
    CHECK(jt["groups"]["big"]["pass"] == true);

    // --by-group without a group column is a usage error
    const auto plain = dir.write("p.csv", "price,income,choice\n" + logit_csv(100, 0.5, -1, 0.4, 8));
    CHECK(run({"--by-group", "fit", "--data", plain}).code == 1);
}

TEST_CASE("fifty groups from the same generator all pass") {
    TempDir dir;
    std::ostringstream body;
    body << "price,income,q,group\n";
    for (int g = 0; g < 50; ++g) {
        for (int k = 0; k < 20; ++k) {
            const double p = 0.2 * k, y = 5 + 0.1 * g;
            body << p << ',' << y << ',' << oracle::logistic(0.5 - p + 0.4 * y) << ",g" << g << '\n';
        }
    }
    const auto o = dir.write("o.csv", body.str());
    const auto r = run({"--by-group", "welfare", "--obs", o, "--y", "5", "--p0", "1", "--p1", "2", "--exact-breakpoints"});
    CHECK(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["groups"].size() == 50);
    for (const auto& [label, rep] : j["groups"].items()) CHECK(rep["lower"].get<double>() <= rep["upper"].get<double>());
}

TEST_CASE("human summary goes to stderr") {
    TempDir dir;
    const auto g = dir.write("g.csv", "a,b,q\n0,0,0.5\n1,0,0.4\n");
    const auto r = run({"--human", "check", "--grid", g});
    CHECK(r.code == 0);
    CHECK(r.err.find("check: pass") != std::string::npos);
    CHECK_NOTHROW((void)json::parse(r.out));
}
