#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace binchoice {

/// A price/income pair. The post-purchase numeraire is `y - p`.
struct BudgetSet {
    double p = 0.0;
    double y = 0.0;

    [[nodiscard]] double numeraire() const noexcept { return y - p; }
    friend bool operator==(const BudgetSet&, const BudgetSet&) = default;
};

/// What ingestion accepts beyond finiteness. Both flags default to off.
struct BudgetPolicy {
    bool allow_negative_price = false;
    bool allow_negative_numeraire = false;
};

/// Throws InvalidArgument when the budget is non-finite or breaks the policy.
void validate_budget(const BudgetSet& budget, const BudgetPolicy& policy = {});

struct IncomeNumeraire {
    double a = 0.0;  ///< income
    double b = 0.0;  ///< numeraire left after buying
    friend bool operator==(const IncomeNumeraire&, const IncomeNumeraire&) = default;
};

[[nodiscard]] IncomeNumeraire pq_to_ab(double p, double y);
[[nodiscard]] BudgetSet ab_to_pq(double a, double b);

struct ChoiceObservation {
    BudgetSet budget;
    int choice = 0;
    std::optional<std::string> group;
};

using Dataset = std::vector<ChoiceObservation>;

/// Splits a dataset by its group label. Rows without a label go under "".
/// Groups come back sorted by label.
[[nodiscard]] std::vector<std::pair<std::string, Dataset>> split_by_group(const Dataset& data);

/// Choice probability as a function of income and numeraire, q(a, b).
struct ChoiceSurface {
    std::function<double(double a, double b)> fn;
    double operator()(double a, double b) const { return fn(a, b); }
};

/// Choice probability in the conventional price/income form, qbar(p, y).
struct DemandSurface {
    std::function<double(double p, double y)> fn;
    double operator()(double p, double y) const { return fn(p, y); }
};

/// qbar(p, y) = q(y, y - p)
[[nodiscard]] DemandSurface to_demand_surface(ChoiceSurface q);
/// q(a, b) = qbar(a - b, a)
[[nodiscard]] ChoiceSurface to_choice_surface(DemandSurface qbar);

struct GridCell {
    double a = 0.0;
    double b = 0.0;
    double q = 0.0;
};

/// Tabulated q(a, b) on a rectangular lattice, with cells that may be absent.
///
/// Axes are strictly increasing and finite; every present cell lies in
/// [0, 1]. Instances are immutable once built.
class ChoiceProbGrid {
public:
    /// Fully populated grid; `q` is row-major with the a-axis outermost.
    ChoiceProbGrid(std::vector<double> a_values, std::vector<double> b_values, std::vector<double> q);
    /// Grid where empty optionals mark missing cells.
    ChoiceProbGrid(std::vector<double> a_values, std::vector<double> b_values,
                   const std::vector<std::optional<double>>& cells);

    /// Builds the canonical (sorted) grid from long-form cells in any order.
    /// Axis values are the distinct a's and b's; absent combinations are missing.
    [[nodiscard]] static ChoiceProbGrid from_cells(std::span<const GridCell> cells);

    [[nodiscard]] std::span<const double> a_values() const noexcept { return a_; }
    [[nodiscard]] std::span<const double> b_values() const noexcept { return b_; }
    [[nodiscard]] std::size_t a_size() const noexcept { return a_.size(); }
    [[nodiscard]] std::size_t b_size() const noexcept { return b_.size(); }

    [[nodiscard]] bool has(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::optional<double> at(std::size_t i, std::size_t j) const;
    /// Value of a present cell; throws InvalidArgument for a missing one.
    [[nodiscard]] double q(std::size_t i, std::size_t j) const;

    [[nodiscard]] bool complete() const noexcept;
    [[nodiscard]] std::size_t present_count() const noexcept;
    /// Present cells in canonical order (a outer, b inner).
    [[nodiscard]] std::vector<GridCell> cells() const;

private:
    void validate() const;

    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> q_;  // NaN marks a missing cell
};

/// Evaluates `f` at every lattice node. Values outside [0, 1] raise a Range
/// error naming the node.
[[nodiscard]] ChoiceProbGrid grid_from_function(const ChoiceSurface& f, std::vector<double> a_values,
                                                std::vector<double> b_values);

struct BinnedGrid {
    ChoiceProbGrid grid;
    std::vector<std::size_t> counts;  ///< per cell, row-major like the grid
    std::vector<std::size_t> ones;
    std::size_t outside = 0;          ///< rows falling outside every bin
};

/// Cell means of the binary choice over half-open bins [e_k, e_{k+1}) (the
/// last bin is closed). Grid axes are bin midpoints; cells holding fewer than
/// `min_cell_count` rows are missing.
[[nodiscard]] BinnedGrid grid_from_dataset(const Dataset& data, std::span<const double> a_edges,
                                           std::span<const double> b_edges, std::size_t min_cell_count = 1);

/// `n` evenly spaced points from lo to hi inclusive.
[[nodiscard]] std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace binchoice
