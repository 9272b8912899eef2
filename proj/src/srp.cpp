#include "binchoice/srp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binchoice/error.hpp"
#include "binchoice/shape.hpp"

namespace binchoice {

std::string_view to_string(TwoBudgetKind kind) noexcept {
    return kind == TwoBudgetKind::SameIncome ? "same-income" : "same-numeraire";
}

TwoBudgetKind parse_two_budget_kind(std::string_view name) {
    if (name == "same-income") return TwoBudgetKind::SameIncome;
    if (name == "same-numeraire") return TwoBudgetKind::SameNumeraire;
    throw Error(ErrorCode::InvalidArgument, "unknown two-budget kind '" + std::string(name) + "'");
}

namespace {

bool same_numeraire(const BudgetSet& x, const BudgetSet& y) {
    const double scale = std::max({1.0, std::abs(x.y), std::abs(y.y), std::abs(x.p), std::abs(y.p)});
    return std::abs(x.numeraire() - y.numeraire()) <= 1e-12 * scale;
}

}  // namespace

void TwoBudgetCase::validate() const {
    for (double v : {first.p, first.y, second.p, second.y}) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "budget values must be finite");
    }
    if (!(q1 >= 0.0 && q1 <= 1.0) || !(q2 >= 0.0 && q2 <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "probabilities must lie in [0,1]");
    }
    if (kind == TwoBudgetKind::SameIncome) {
        if (first.y != second.y) throw Error(ErrorCode::InvalidArgument, "same-income case needs equal incomes");
        if (!(first.p < second.p)) throw Error(ErrorCode::InvalidArgument, "same-income case needs p1 < p2");
    } else {
        if (!same_numeraire(first, second)) {
            throw Error(ErrorCode::InvalidArgument, "same-numeraire case needs y1 - p1 == y2 - p2");
        }
        if (!(first.y < second.y)) throw Error(ErrorCode::InvalidArgument, "same-numeraire case needs y1 < y2");
    }
}

TwoBudgetCase TwoBudgetCase::canonical() const {
    const bool swap = kind == TwoBudgetKind::SameIncome ? first.p > second.p : first.y > second.y;
    if (!swap) return *this;
    return {kind, second, first, q2, q1};
}

SrpSolution srp_feasible(const TwoBudgetCase& c) {
    c.validate();
    if (c.q1 < c.q2) return {false, std::nullopt};
    // pi3 is q2 exactly; pi2 is the double nearest to q1 - q2, which is
    // exact whenever q2 >= q1 / 2
    return {true, std::array<double, 3>{1.0 - c.q1, c.q1 - c.q2, c.q2}};
}

bool pairwise_shape_holds(const TwoBudgetCase& c) {
    c.validate();
    if (c.kind == TwoBudgetKind::SameIncome) {
        // common income; the first budget leaves more numeraire
        ChoiceProbGrid grid({c.first.y}, {c.second.numeraire(), c.first.numeraire()}, std::vector<double>{c.q2, c.q1});
        return check_shape(grid).monotone();
    }
    // common numeraire; the first budget has less income
    ChoiceProbGrid grid({c.first.y, c.second.y}, {c.first.numeraire()}, std::vector<double>{c.q1, c.q2});
    return check_shape(grid).monotone();
}

bool srp_shape_equivalence(const TwoBudgetCase& c) {
    return srp_feasible(c).feasible == pairwise_shape_holds(c);
}

}  // namespace binchoice
