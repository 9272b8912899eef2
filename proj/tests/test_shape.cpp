#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "binchoice/error.hpp"
#include "binchoice/parametric.hpp"
#include "binchoice/shape.hpp"

using namespace binchoice;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ChoiceProbGrid logistic_grid(double g0, double g1, double g2, std::size_t n) {
    // independent of the library's link code
    std::vector<double> as, bs, q;
    for (std::size_t k = 0; k < n; ++k) as.push_back(0.5 * static_cast<double>(k));
    for (std::size_t k = 0; k < n; ++k) bs.push_back(-2.0 + 0.4 * static_cast<double>(k));
    for (double a : as)
        for (double b : bs) q.push_back(logistic(g0 + g1 * (a - b) + g2 * a));
    return ChoiceProbGrid(as, bs, q);
}

}  // namespace

TEST_CASE("clamped linear q passes at tol 0") {
    std::vector<double> as, bs, q;
    for (int k = 0; k < 11; ++k) as.push_back(k * 0.3);
    for (int k = 0; k < 9; ++k) bs.push_back(k * 0.25);
    for (double a : as)
        for (double b : bs) q.push_back(std::clamp(0.5 + 0.1 * (b - a), 0.0, 1.0));
    const auto rep = check_shape(ChoiceProbGrid(as, bs, q));
    CHECK(rep.pass());
    CHECK(rep.max_violation == 0.0);
}

TEST_CASE("2x1 grid with q rising in a has one violation of 0.1") {
    const auto rep = check_shape(ChoiceProbGrid({1, 2}, {0}, std::vector<double>{0.3, 0.4}));
    REQUIRE(rep.a_violations.size() == 1);
    CHECK(rep.a_violations[0].magnitude == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rep.a_violations[0].cells.i_from == 0);
    CHECK(rep.a_violations[0].cells.i_to == 1);
    CHECK(rep.b_violations.empty());
    CHECK_FALSE(rep.b_checked);
    CHECK(rep.max_violation == rep.a_violations[0].magnitude);
    CHECK_FALSE(rep.pass());
}

TEST_CASE("1x1 grid is insufficient") {
    try {
        (void)check_shape(ChoiceProbGrid({1}, {0}, std::vector<double>{0.3}));
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientGrid);
    }
}

TEST_CASE("logistic grid with gamma1=-1, gamma2=0.3 on 20x20 has no violations") {
    const auto rep = check_shape(logistic_grid(0.2, -1.0, 0.3, 20));
    CHECK(rep.a_violations.empty());
    CHECK(rep.b_violations.empty());
    CHECK(rep.pass());
}

TEST_CASE("b-violation is reported with positive magnitude") {
    const auto rep = check_shape(ChoiceProbGrid({0}, {0, 1}, std::vector<double>{0.7, 0.5}));
    REQUIRE(rep.b_violations.size() == 1);
    CHECK(rep.b_violations[0].magnitude == doctest::Approx(0.2));
    CHECK(rep.max_violation == doctest::Approx(0.2));
}

TEST_CASE("tolerance absorbs small steps") {
    const ChoiceProbGrid g({1, 2}, {0}, std::vector<double>{0.3, 0.31});
    CHECK_FALSE(check_shape(g).pass());
    CHECK(check_shape(g, {0.02}).pass());
}

TEST_CASE("missing cells are skipped, neighbours across the gap are compared") {
    ChoiceProbGrid g({0, 1, 2}, {0}, std::vector<std::optional<double>>{0.5, std::nullopt, 0.6});
    const auto rep = check_shape(g);
    REQUIRE(rep.a_violations.size() == 1);
    CHECK(rep.a_violations[0].cells.i_from == 0);
    CHECK(rep.a_violations[0].cells.i_to == 2);
}

TEST_CASE("limit check flags columns short of one") {
    const ChoiceProbGrid g({0, 1}, {0, 1}, std::vector<double>{0.95, 1.0, 0.5, 0.6});
    ShapeOptions opt;
    opt.check_limit = true;
    auto rep = check_shape(g, opt);
    REQUIRE(rep.limit_checks.size() == 2);
    CHECK(rep.limit_checks[0].flagged);
    CHECK_FALSE(rep.limit_checks[1].flagged);
    CHECK_FALSE(rep.pass());
    opt.tol = 0.06;
    CHECK(check_shape(g, opt).pass());
    CHECK(check_shape(g).limit_checks.empty());
}

TEST_CASE("continuity flags") {
    const ChoiceProbGrid g({0, 1, 2}, {0}, std::vector<double>{1.0, 0.9, 0.1});
    ShapeOptions opt;
    opt.continuity_jump_tol = 0.5;
    const auto rep = check_shape(g, opt);
    CHECK(rep.monotone());
    REQUIRE(rep.continuity_flags.size() == 1);
    CHECK(rep.continuity_flags[0].cells.i_from == 1);
    CHECK(rep.continuity_flags[0].jump == doctest::Approx(0.8));
    CHECK_FALSE(rep.pass());
}

TEST_CASE("negative tolerance is rejected") {
    const ChoiceProbGrid g({1, 2}, {0}, std::vector<double>{0.3, 0.2});
    CHECK_THROWS_AS((void)check_shape(g, {-1.0}), Error);
}

TEST_CASE("max_violation equals the largest listed magnitude on random grids") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> q(5 * 4);
        for (auto& v : q) v = u(rng);
        const auto rep = check_shape(ChoiceProbGrid({0, 1, 2, 3, 4}, {0, 1, 2, 3}, q));
        double m = 0.0;
        for (const auto& v : rep.a_violations) m = std::max(m, v.magnitude);
        for (const auto& v : rep.b_violations) m = std::max(m, v.magnitude);
        REQUIRE(rep.max_violation == m);
        // brute-force count of wrong-signed adjacent steps
        std::size_t na = 0, nb = 0;
        for (int i = 0; i + 1 < 5; ++i)
            for (int j = 0; j < 4; ++j) na += q[(i + 1) * 4 + j] > q[i * 4 + j];
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j + 1 < 4; ++j) nb += q[i * 4 + j + 1] < q[i * 4 + j];
        REQUIRE(rep.a_violations.size() == na);
        REQUIRE(rep.b_violations.size() == nb);
    }
}

TEST_CASE("verdict is invariant to the order cells are supplied in") {
    std::mt19937_64 rng(3);
    const auto g = logistic_grid(0.0, -0.5, 0.9, 6);  // violates in a
    auto cells = g.cells();
    const auto ref = check_shape(g);
    for (int t = 0; t < 20; ++t) {
        std::shuffle(cells.begin(), cells.end(), rng);
        const auto rep = check_shape(ChoiceProbGrid::from_cells(cells));
        REQUIRE(rep.a_violations.size() == ref.a_violations.size());
        REQUIRE(rep.max_violation == ref.max_violation);
    }
}

TEST_CASE("sub-grids of passing grids pass") {
    std::mt19937_64 rng(5);
    const auto g = logistic_grid(0.3, -0.8, 0.2, 10);
    REQUIRE(check_shape(g).pass());
    for (int t = 0; t < 100; ++t) {
        std::vector<std::size_t> ai, bj;
        for (std::size_t k = 0; k < 10; ++k) {
            if (rng() % 2) ai.push_back(k);
            if (rng() % 2) bj.push_back(k);
        }
        if (ai.size() < 2 || bj.size() < 2) continue;
        std::vector<double> as, bs, q;
        for (auto i : ai) as.push_back(g.a_values()[i]);
        for (auto j : bj) bs.push_back(g.b_values()[j]);
        for (auto i : ai)
            for (auto j : bj) q.push_back(g.q(i, j));
        REQUIRE(check_shape(ChoiceProbGrid(as, bs, q)).pass());
    }
}

TEST_CASE("Slutsky derivatives for logistic(1 - p + 0.2y) at (1,5)") {
    const DemandSurface qbar{[](double p, double y) { return logistic(1 - p + 0.2 * y); }};
    const std::vector<BudgetSet> pts{{1, 5}};
    const auto res = check_slutsky_derivatives(qbar, pts, 1e-4);
    REQUIRE(res.size() == 1);
    const double f = logistic(1.0) * (1 - logistic(1.0));  // density at index 1
    CHECK(res[0].dq_dp == doctest::Approx(-f).epsilon(1e-7));
    CHECK(res[0].dq_dp_plus_dq_dy == doctest::Approx(-0.8 * f).epsilon(1e-7));
    CHECK(res[0].pass);
}

TEST_CASE("Slutsky derivatives: constant passes, rising price fails") {
    const std::vector<BudgetSet> pts{{1, 5}, {0.3, 2}};
    for (const auto& r : check_slutsky_derivatives({[](double, double) { return 0.4; }}, pts, 1e-3)) {
        CHECK(r.dq_dp == 0.0);
        CHECK(r.dq_dp_plus_dq_dy == 0.0);
        CHECK(r.pass);
    }
    for (const auto& r : check_slutsky_derivatives({[](double p, double) { return logistic(1 + 0.5 * p); }}, pts, 1e-3)) {
        CHECK(r.dq_dp > 0.0);
        CHECK_FALSE(r.pass);
    }
}

TEST_CASE("Slutsky evaluation failure names the point") {
    const DemandSurface bad{[](double p, double) -> double {
        if (p > 2) throw std::runtime_error("boom");
        return 0.5;
    }};
    const std::vector<BudgetSet> pts{{2.0, 7.5}};
    try {
        (void)check_slutsky_derivatives(bad, pts, 0.1);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Evaluation);
        CHECK(std::string(e.what()).find("y=7.5") != std::string::npos);
    }
}

TEST_CASE("Slutsky verdict agrees with grid check for linear-index models") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2, 2);
    int compared = 0;
    while (compared < 100) {
        const double g1 = u(rng), g2 = u(rng);
        if (std::abs(g1) < 0.05 || std::abs(g1 + g2) < 0.05) continue;
        ++compared;
        const IndexModel m{0.1, g1, g2, Link::Logit};
        std::vector<BudgetSet> pts;
        for (double p : {0.5, 1.0, 1.5})
            for (double y : {2.0, 3.0}) pts.push_back({p, y});
        const auto slutsky = check_slutsky_derivatives(
            {[&](double p, double y) { return predict_prob(m, p, y); }}, pts, 1e-4);
        const bool slutsky_pass = std::all_of(slutsky.begin(), slutsky.end(), [](const auto& r) { return r.pass; });
        const auto grid = grid_from_function(choice_surface(m), {0, 0.5, 1, 1.5}, {0, 0.5, 1, 1.5});
        REQUIRE(slutsky_pass == check_shape(grid).pass());
    }
}

TEST_CASE("continuous-good comparison diagnostic") {
    // qbar = 2 - p/2 + y/4: dq/dp + q dq/dy = -1/2 + q/4
    const DemandSurface qbar{[](double p, double y) { return 2 - p / 2 + y / 4; }};
    const std::vector<BudgetSet> pts{{1, 2}};
    const auto v = continuous_good_slutsky(qbar, pts, 1e-3);
    CHECK(v[0] == doctest::Approx(-0.5 + 2.0 / 4.0).epsilon(1e-10));
}

TEST_CASE("ARUM diagnostic vanishes on logistic(2b - a)") {
    const ChoiceSurface q{[](double a, double b) { return logistic(2 * b - a); }};
    std::vector<IncomeNumeraire> pts;
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (double b : {-0.5, -0.25, 0.0, 0.25, 0.5}) pts.push_back({a, b});
    for (const auto& r : arum_diagnostic(q, pts, 1e-3)) {
        REQUIRE(r.value.has_value());
        CHECK(std::abs(*r.value) < 1e-3);
    }
}

TEST_CASE("ARUM diagnostic is indeterminate where q_a vanishes") {
    const ChoiceSurface flat_a{[](double, double b) { return logistic(b); }};
    const std::vector<IncomeNumeraire> pts{{0, 0}};
    const auto res = arum_diagnostic(flat_a, pts, 1e-3);
    CHECK_FALSE(res[0].value.has_value());
}

TEST_CASE("ARUM diagnostic is bounded away from zero for a two-atom mixture") {
    // mixture of logistic(-a + b) and logistic(-3a + 2b): compute the
    // cross-derivative of log(q_b / -q_a) from analytic derivatives on a
    // brute-force scan, then compare with the finite-difference estimate
    const auto L = [](double x) { return logistic(x); };
    const auto dL = [&](double x) { return L(x) * (1 - L(x)); };
    const auto log_ratio = [&](double a, double b) {
        const double qa = 0.5 * (-1 * dL(-a + b)) + 0.5 * (-3 * dL(-3 * a + 2 * b));
        const double qb = 0.5 * (1 * dL(-a + b)) + 0.5 * (2 * dL(-3 * a + 2 * b));
        return std::log(qb / -qa);
    };
    double best = 0.0;
    IncomeNumeraire at{};
    const double e = 1e-4;
    for (double a = -2; a <= 2; a += 0.25) {
        for (double b = -2; b <= 2; b += 0.25) {
            const double cross = (log_ratio(a + e, b + e) - log_ratio(a + e, b - e) - log_ratio(a - e, b + e) +
                                  log_ratio(a - e, b - e)) /
                                 (4 * e * e);
            if (std::abs(cross) > std::abs(best)) {
                best = cross;
                at = {a, b};
            }
        }
    }
    REQUIRE(std::abs(best) > 0.05);
    const ChoiceSurface q{[](double a, double b) { return 0.5 * logistic(-a + b) + 0.5 * logistic(-3 * a + 2 * b); }};
    const std::vector<IncomeNumeraire> pts{at};
    const auto res = arum_diagnostic(q, pts, 1e-3);
    REQUIRE(res[0].value.has_value());
    CHECK(*res[0].value == doctest::Approx(best).epsilon(1e-2));
}
