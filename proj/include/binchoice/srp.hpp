#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "binchoice/core.hpp"

namespace binchoice {

enum class TwoBudgetKind {
    SameIncome,     ///< y1 == y2, p1 < p2
    SameNumeraire,  ///< y1 < y2, y1 - p1 == y2 - p2
};

[[nodiscard]] std::string_view to_string(TwoBudgetKind kind) noexcept;
[[nodiscard]] TwoBudgetKind parse_two_budget_kind(std::string_view name);

/// Choice probabilities of buying on two budgets that share either income or
/// post-purchase numeraire.
struct TwoBudgetCase {
    TwoBudgetKind kind = TwoBudgetKind::SameIncome;
    BudgetSet first;
    BudgetSet second;
    double q1 = 0.0;  ///< buying probability on `first`
    double q2 = 0.0;

    /// Throws InvalidArgument unless probabilities are in [0, 1] and the
    /// budgets are in the kind's order.
    void validate() const;
    /// Same case with the budgets swapped if needed to meet the kind's order.
    [[nodiscard]] TwoBudgetCase canonical() const;
};

struct SrpSolution {
    bool feasible = false;
    /// Shares of the three preference profiles: never buy, buy only on the
    /// first budget, buy on both.
    std::optional<std::array<double, 3>> pi;
};

/// Solves pi2 + pi3 = q1, pi3 = q2 on the unit simplex. pi3 is q2 itself;
/// pi2 and pi1 are the nearest doubles to q1 - q2 and 1 - q1, so the
/// equations hold up to half an ulp of those differences.
[[nodiscard]] SrpSolution srp_feasible(const TwoBudgetCase& c);

/// The monotonicity inequality the pair must satisfy, evaluated with
/// check_shape on the two-cell grid.
[[nodiscard]] bool pairwise_shape_holds(const TwoBudgetCase& c);

/// srp_feasible(c).feasible == pairwise_shape_holds(c). Always true; kept as
/// an executable statement of the equivalence.
[[nodiscard]] bool srp_shape_equivalence(const TwoBudgetCase& c);

}  // namespace binchoice
