#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "binchoice/error.hpp"
#include "binchoice/parametric.hpp"
#include "binchoice/random.hpp"
#include "binchoice/rationalize.hpp"

using namespace binchoice;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ChoiceProbGrid index_grid(double g1, double g2, std::size_t na = 12, std::size_t nb = 9) {
    std::vector<double> as, bs, q;
    for (std::size_t k = 0; k < na; ++k) as.push_back(-2.0 + 0.4 * static_cast<double>(k));
    for (std::size_t k = 0; k < nb; ++k) bs.push_back(-1.0 + 0.3 * static_cast<double>(k));
    for (double a : as)
        for (double b : bs) q.push_back(logistic(0.2 + (g1 + g2) * a - g1 * b));
    return ChoiceProbGrid(as, bs, q);
}

}  // namespace

TEST_CASE("q_inverse on a linear column") {
    const ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<double>{1, 1, 0, 0});
    const auto r = q_inverse(g, 0.5, 0.0);
    CHECK(r.kind == Reservation::Kind::Finite);
    CHECK(r.value == doctest::Approx(0.5));
}

TEST_CASE("q_inverse sentinels") {
    const ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<double>{0.8, 0.9, 0.2, 0.3});
    CHECK(q_inverse(g, 0.0, 0.5).kind == Reservation::Kind::AboveDomain);
    CHECK(std::isinf(q_inverse(g, 0.0, 0.5).value));
    const auto below = q_inverse(g, 0.95, 0.0);
    CHECK(below.kind == Reservation::Kind::BelowDomain);
    CHECK(below.value == 0.0);
    CHECK_FALSE(below.admits(0.0));
    CHECK(q_inverse(g, 1.0, 1.0).kind == Reservation::Kind::BelowDomain);
}

TEST_CASE("q_inverse argument errors") {
    const ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<double>{0.8, 0.9, 0.2, 0.3});
    auto code = [&](double u, double b) {
        try {
            (void)q_inverse(g, u, b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    CHECK(code(-0.1, 0.5) == ErrorCode::InvalidArgument);
    CHECK(code(1.1, 0.5) == ErrorCode::InvalidArgument);
    CHECK(code(0.5, 1.5) == ErrorCode::Extrapolation);
    CHECK(code(0.5, -0.01) == ErrorCode::Extrapolation);
}

TEST_CASE("q_inverse of logistic(5 - a) at u = 0.5 is close to 5") {
    std::vector<double> as, q;
    for (int k = 0; k <= 100; ++k) as.push_back(k * 0.1);
    for (double a : as) q.push_back(logistic(5 - a));
    const ChoiceProbGrid g(as, {0}, q);
    const auto r = q_inverse(g, 0.5, 0.0);
    REQUIRE(r.kind == Reservation::Kind::Finite);
    // interpolation error bound: half the spacing squared times max |q''| / 8
    // over the bracketing segment; brute force on a fine grid instead
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        for (int s = 0; s <= 100; ++s) {
            const double x = as[k] + 0.001 * s;
            const double lin = q[k] + (q[k + 1] - q[k]) * (x - as[k]) / 0.1;
            worst = std::max(worst, std::abs(lin - logistic(5 - x)));
        }
    }
    // slope of q near a = 5 is 1/4, so a level error of `worst` moves x by at most 4 * worst
    CHECK(std::abs(r.value - 5.0) <= 4 * worst + 1e-12);
    CHECK(std::abs(r.value - 5.0) < 1e-3);
}

TEST_CASE("q_inverse interpolates q linearly between b columns") {
    const ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<double>{1.0, 1.0, 0.0, 0.5});
    // at b = 0.5 the column is (1, 0.25); level 0.625 is reached at a = 0.5
    const auto r = q_inverse(g, 0.625, 0.5);
    CHECK(r.value == doctest::Approx(0.5));
}

TEST_CASE("constant grid gives step-shaped w1") {
    std::vector<double> q(4 * 3, 0.5);
    const auto model = build_rationalizing_model(ChoiceProbGrid({0, 1, 2, 3}, {0, 1, 2}, q));
    for (double b : {0.0, 0.5, 2.0}) {
        for (double v : {0.1, 0.5}) CHECK(model.w1(b, v).kind == Reservation::Kind::AboveDomain);
        for (double v : {0.5000001, 0.9}) {
            const auto r = model.w1(b, v);
            CHECK(r.kind == Reservation::Kind::BelowDomain);
            CHECK(r.value == 0.0);
        }
    }
}

TEST_CASE("w1 is non-decreasing in b and non-increasing in v for a logistic grid") {
    const auto model = build_rationalizing_model(index_grid(-1.0, 0.3));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    const auto order = [](const Reservation& r) -> double {
        switch (r.kind) {
            case Reservation::Kind::BelowDomain: return -INFINITY;
            case Reservation::Kind::AboveDomain: return INFINITY;
            default: return r.value;
        }
    };
    for (int t = 0; t < 100; ++t) {
        const double v = u(rng);
        double prev = -INFINITY;
        for (double b = -1.0; b <= 1.4; b += 0.05) {
            const double w = order(model.w1(b, v));
            REQUIRE(w >= prev);
            prev = w;
        }
        const double b = -1.0 + 2.4 * u(rng);
        REQUIRE(order(model.w1(b, std::min(1.0, v + 0.05))) <= order(model.w1(b, v)));
    }
}

TEST_CASE("Galois property at grid nodes") {
    const auto grid = index_grid(-0.7, 0.1);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        const double v = u(rng);
        for (std::size_t j = 0; j < grid.b_size(); ++j) {
            const auto r = q_inverse(grid, v, grid.b_values()[j]);
            for (std::size_t i = 0; i < grid.a_size(); ++i) {
                REQUIRE((grid.q(i, j) >= v) == r.admits(grid.a_values()[i]));
            }
        }
    }
}

TEST_CASE("grids with a violation are not rationalizable and carry the report") {
    auto q = std::vector<double>{0.9, 0.95, 0.5, 0.4};
    try {
        (void)build_rationalizing_model(ChoiceProbGrid({0, 1}, {0, 1}, q));
        FAIL("expected error");
    } catch (const NotRationalizableError& e) {
        CHECK(e.code() == ErrorCode::NotRationalizable);
        CHECK(e.report().b_violations.size() == 1);
        CHECK(std::string(e.what()).find("max violation 0.09") != std::string::npos);
    }
}

TEST_CASE("continuity heuristic: strict refuses, lenient builds and flags") {
    const ChoiceProbGrid g({0, 1, 2}, {0, 1}, std::vector<double>{1, 1, 0.95, 1, 0.05, 0.1});
    CHECK_THROWS_AS((void)build_rationalizing_model(g), NotRationalizableError);
    const auto model = build_rationalizing_model(g, {true, 0.5});
    CHECK(model.flagged());
    const auto rep = verify_rationalization(model, g, 20000, 3, 0.03);
    CHECK(rep.pass);
}

TEST_CASE("grids with missing cells are refused") {
    ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<std::optional<double>>{0.9, std::nullopt, 0.5, 0.6});
    CHECK_THROWS_AS((void)build_rationalizing_model(g), Error);
}

TEST_CASE("verification reproduces the grid and is deterministic") {
    const auto grid = index_grid(-1.0, 0.3);
    const auto model = build_rationalizing_model(grid);
    const auto a = verify_rationalization(model, grid, 100000, 42, 0.0063);
    const auto b = verify_rationalization(model, grid, 100000, 42, 0.0063, 3);
    CHECK(a.pass);
    CHECK(a.max_deviation == b.max_deviation);
    CHECK(a.frequencies == b.frequencies);
    CHECK_THROWS_AS((void)verify_rationalization(model, grid, 0, 42, 0.01), Error);
}

TEST_CASE("verification deviation shrinks with more draws") {
    const auto grid = index_grid(-1.5, 0.5);
    const auto model = build_rationalizing_model(grid);
    int decreases = 0;
    double prev = INFINITY;
    // average over a few seeds so the comparison is not a coin flip
    for (std::size_t n : {1000u, 10000u, 100000u}) {
        double mean = 0.0;
        for (std::uint64_t s = 1; s <= 5; ++s) mean += verify_rationalization(model, grid, n, s, 1.0).max_deviation;
        mean /= 5;
        decreases += mean < prev;
        prev = mean;
    }
    CHECK(decreases == 3);
}

TEST_CASE("parametric and nonparametric rationalizations agree in distribution") {
    const IndexModel m{0.2, -1.0, 0.5, Link::Logit};
    const auto grid = index_grid(-1.0, 0.5);
    const auto model = build_rationalizing_model(grid);
    const auto rep = verify_rationalization(model, grid, 100000, 9, 0.0063);
    CHECK(rep.pass);
    const auto util = rationalizing_utilities_parametric(m);
    UniformStream rng(10);
    const double a = grid.a_values()[4], b = grid.b_values()[3];
    std::size_t buys = 0;
    for (int k = 0; k < 100000; ++k) {
        const double v = rng.next();
        buys += util.u1(b, v) >= util.u0(a, v);
    }
    CHECK(std::abs(static_cast<double>(buys) / 1e5 - grid.q(4, 3)) < 0.0063);
}

TEST_CASE("w1 table export") {
    const auto model = build_rationalizing_model(ChoiceProbGrid({0, 1}, {0, 1}, std::vector<double>{1, 1, 0.6, 0.8}));
    std::ostringstream out;
    write_w1_table(out, model, quantile_levels(3));
    const std::string s = out.str();
    CHECK(s.rfind("v,b,w1,kind\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3 * 2);
    CHECK(s.find("0.5,1,inf,above") != std::string::npos);
    CHECK(quantile_levels().size() == 99);
    CHECK(quantile_levels()[49] == 0.5);
}
