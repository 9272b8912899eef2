#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binchoice/core.hpp"
#include "binchoice/csv.hpp"

namespace binchoice {

/// A choice probability observed on one budget set.
struct DemandPoint {
    BudgetSet budget;
    double q = 0.0;

    [[nodiscard]] double a() const noexcept { return budget.y; }
    [[nodiscard]] double b() const noexcept { return budget.numeraire(); }
};

/// The set of observed budgets with their choice probabilities.
///
/// Construction rejects data that already contradict monotonicity: a pair
/// with a_i <= a_j and b_i >= b_j but q_i < q_j.
class ObservedDemand {
public:
    ObservedDemand() = default;
    explicit ObservedDemand(std::vector<DemandPoint> points);

    /// Skips the pairwise consistency check (still checks ranges). Bounds on
    /// such data raise Inconsistency if they come out crossed.
    [[nodiscard]] static ObservedDemand unchecked(std::vector<DemandPoint> points);

    [[nodiscard]] std::span<const DemandPoint> points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] bool empty() const noexcept { return points_.empty(); }

private:
    struct Unchecked {};
    ObservedDemand(std::vector<DemandPoint> points, Unchecked);

    std::vector<DemandPoint> points_;
};

struct DemandBounds {
    double lo = 0.0;
    double hi = 1.0;
    std::optional<BudgetSet> lo_attained_at;  ///< empty when no observation qualified
    std::optional<BudgetSet> hi_attained_at;
};

/// lo = max q over observed budgets with y >= y', y - p <= y' - p';
/// hi = min q over those with y <= y', y - p >= y' - p'. Empty sets give 0
/// and 1. Ties go to the lexicographically smallest (p, y).
[[nodiscard]] DemandBounds counterfactual_demand_bounds(const ObservedDemand& obs, const BudgetSet& target);

/// Bounds (L, M) on q(y + p - p0, y - p0), the demand that enters the average
/// compensating variation of a price move starting at p0.
[[nodiscard]] DemandBounds cv_pointwise_bounds(const ObservedDemand& obs, double y, double p0, double p);

enum class CvQuadrature {
    Trapezoid,
    /// L and M are step functions of p; integrate them exactly between the
    /// prices where some observation enters or leaves a qualifying set.
    ExactBreakpoints,
};

struct CvNode {
    double p = 0.0;  ///< node (trapezoid) or segment midpoint (exact mode)
    DemandBounds bounds;
};

struct CvInterval {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t quadrature_nodes = 0;
    std::vector<CvNode> attaining;
};

/// [integral of L, integral of M] over p in [p0, p1]. In trapezoid mode
/// `n_nodes` (>= 2) evenly spaced nodes are used; exact mode ignores it.
[[nodiscard]] CvInterval average_cv_bounds(const ObservedDemand& obs, double y, double p0, double p1,
                                           std::size_t n_nodes, CvQuadrature mode = CvQuadrature::Trapezoid);

/// Trapezoid rule for the integral of q(y + p - p0, y - p0) over [p0, p1].
[[nodiscard]] double average_cv_exact(const ChoiceSurface& q, double y, double p0, double p1, std::size_t n_nodes);

struct ObservedDemandFile {
    /// One entry per group label ("" when the file has no group column), sorted.
    std::vector<std::pair<std::string, std::vector<DemandPoint>>> groups;
    std::size_t skipped = 0;
    bool has_group = false;
};

/// Columns `price,income,q[,group]`.
ObservedDemandFile read_observed_demand(std::istream& in, csv::Mode mode = csv::Mode::Strict,
                                        const BudgetPolicy& policy = {});
ObservedDemandFile load_observed_demand(const std::filesystem::path& path, csv::Mode mode = csv::Mode::Strict,
                                        const BudgetPolicy& policy = {});

}  // namespace binchoice
