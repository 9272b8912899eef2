#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "binchoice/core.hpp"

namespace binchoice {

/// Two neighbouring present cells along one axis, `from` before `to`.
struct CellPair {
    std::size_t i_from = 0, j_from = 0;
    std::size_t i_to = 0, j_to = 0;
};

struct ShapeViolation {
    CellPair cells;
    double magnitude = 0.0;  ///< size of the wrong-signed step
};

struct ContinuityFlag {
    CellPair cells;
    double jump = 0.0;
};

struct LimitCheck {
    double b = 0.0;
    std::optional<double> q_at_min_a;  ///< empty when the whole column is missing
    bool flagged = false;
};

struct ShapeOptions {
    double tol = 0.0;
    /// Flags columns whose smallest-a value is below 1 - tol. Off by default:
    /// a finite grid cannot see a -> -infinity.
    bool check_limit = false;
    /// Jumps between a-neighbours larger than this are flagged. This is only a
    /// heuristic for continuity in a; infinity disables it.
    double continuity_jump_tol = std::numeric_limits<double>::infinity();
};

struct ShapeReport {
    std::vector<ShapeViolation> a_violations;  ///< q rising in a
    std::vector<ShapeViolation> b_violations;  ///< q falling in b
    double max_violation = 0.0;
    std::vector<ContinuityFlag> continuity_flags;
    std::vector<LimitCheck> limit_checks;  ///< one per b when check_limit is set
    bool a_checked = false;                ///< false when the a-axis has one point
    bool b_checked = false;

    [[nodiscard]] bool monotone() const noexcept { return a_violations.empty() && b_violations.empty(); }
    [[nodiscard]] bool pass() const noexcept;
};

/// Scans adjacent present cells for breaches of "non-increasing in a,
/// non-decreasing in b". Missing cells are skipped, so neighbours are the
/// nearest present cells along a line; by transitivity that is complete.
///
/// A grid with a single point on an axis cannot be checked along that axis
/// (reported through a_checked/b_checked); a 1x1 grid raises InsufficientGrid.
[[nodiscard]] ShapeReport check_shape(const ChoiceProbGrid& grid, const ShapeOptions& options = {});

struct SlutskyPoint {
    BudgetSet at;
    double dq_dp = 0.0;
    double dq_dp_plus_dq_dy = 0.0;
    bool pass = false;
};

/// Central-difference check of dq/dp <= tol and dq/dp + dq/dy <= tol for the
/// price/income form. Failures of `qbar` are rethrown as Evaluation errors
/// naming the point.
[[nodiscard]] std::vector<SlutskyPoint> check_slutsky_derivatives(const DemandSurface& qbar,
                                                                  std::span<const BudgetSet> points, double h,
                                                                  double tol = 0.0);

/// dq/dp + q * dq/dy, the textbook Slutsky expression for a continuous good.
/// Only a comparison diagnostic; binary demand is not required to make it <= 0.
[[nodiscard]] std::vector<double> continuous_good_slutsky(const DemandSurface& qbar,
                                                          std::span<const BudgetSet> points, double h);

struct ArumPoint {
    IncomeNumeraire at;
    std::optional<double> value;  ///< empty when a derivative is below the floor
};

/// Finite-difference estimate of d^2/(da db) log(-q_b / q_a). Additive random
/// utility models make this identically zero. Points where q_a or q_b is too
/// flat (or has the wrong sign) anywhere on the stencil are indeterminate.
[[nodiscard]] std::vector<ArumPoint> arum_diagnostic(const ChoiceSurface& q, std::span<const IncomeNumeraire> points,
                                                     double h, double derivative_floor = 1e-10);

}  // namespace binchoice
