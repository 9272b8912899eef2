#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "binchoice/core.hpp"
#include "binchoice/error.hpp"
#include "binchoice/shape.hpp"

namespace binchoice {

/// A value of the constructed utility W1(b, v) = sup{x : q(x, b) >= v}.
///
/// The supremum is taken over the grid's a-range only. When the whole range
/// qualifies the true supremum lies at or beyond a_max and the result is the
/// +infinity sentinel. When nothing in range qualifies the supremum lies
/// strictly below a_min; `value` then holds a_min but the reservation orders
/// below every grid income.
struct Reservation {
    enum class Kind { BelowDomain, Finite, AboveDomain };

    Kind kind = Kind::Finite;
    double value = 0.0;

    /// W0(a) = a <= W1, i.e. the consumer buys at income a.
    [[nodiscard]] bool admits(double a) const noexcept {
        switch (kind) {
            case Kind::BelowDomain: return false;
            case Kind::AboveDomain: return true;
            case Kind::Finite: return a <= value;
        }
        return false;
    }
};

/// sup{x in [a_min, a_max] : q(x, b) >= u} on the interpolant that is linear
/// in a between nodes (and linear in b between columns). Requires a complete
/// grid; b outside the b-range raises Extrapolation.
[[nodiscard]] Reservation q_inverse(const ChoiceProbGrid& grid, double u, double b);

/// Bilinear interpolant of a complete grid, throwing Extrapolation outside it.
[[nodiscard]] ChoiceSurface bilinear_surface(std::shared_ptr<const ChoiceProbGrid> grid);

class NotRationalizableError : public Error {
public:
    NotRationalizableError(const std::string& what, ShapeReport report)
        : Error(ErrorCode::NotRationalizable, what), report_(std::move(report)) {}

    [[nodiscard]] const ShapeReport& report() const noexcept { return report_; }

private:
    ShapeReport report_;
};

struct RationalizeOptions {
    /// Build even when only the continuity heuristic fails; the model is then
    /// flagged. Monotonicity failures are always fatal.
    bool lenient = false;
    double continuity_jump_tol = 0.5;
};

/// The pair W0(a, v) = a, W1(b, v) = q^{-1}(v, b) with v ~ Uniform(0, 1).
class RationalizingModel {
public:
    [[nodiscard]] double w0(double a, double /*v*/) const noexcept { return a; }
    [[nodiscard]] Reservation w1(double b, double v) const { return q_inverse(*grid_, v, b); }

    [[nodiscard]] const ChoiceProbGrid& source_grid() const noexcept { return *grid_; }
    [[nodiscard]] const ShapeReport& shape_report() const noexcept { return report_; }
    /// True when built in lenient mode over continuity flags.
    [[nodiscard]] bool flagged() const noexcept { return !report_.continuity_flags.empty(); }

private:
    friend RationalizingModel build_rationalizing_model(ChoiceProbGrid grid, const RationalizeOptions& options);
    RationalizingModel(std::shared_ptr<const ChoiceProbGrid> grid, ShapeReport report)
        : grid_(std::move(grid)), report_(std::move(report)) {}

    std::shared_ptr<const ChoiceProbGrid> grid_;
    ShapeReport report_;
};

/// Checks the grid at tol = 0 (with the continuity heuristic) and wraps it.
/// Throws NotRationalizableError carrying the shape report on failure and
/// InvalidArgument for grids with missing cells.
[[nodiscard]] RationalizingModel build_rationalizing_model(ChoiceProbGrid grid,
                                                           const RationalizeOptions& options = {});

struct VerificationReport {
    std::size_t n_draws = 0;
    double tol = 0.0;
    double max_deviation = 0.0;
    IncomeNumeraire worst_cell;
    std::vector<double> frequencies;  ///< per grid cell, row-major
    bool pass = false;
};

/// Monte Carlo check that Pr(W1(b, V) >= a) reproduces q(a, b) on every cell
/// of `grid`. Draws are chunked with per-chunk substreams, so the report is
/// identical for any thread count.
[[nodiscard]] VerificationReport verify_rationalization(const RationalizingModel& model, const ChoiceProbGrid& grid,
                                                        std::size_t n_draws, std::uint64_t seed, double tol,
                                                        unsigned threads = 1);

/// Levels 1/(n+1), ..., n/(n+1); the default gives the 99 percentiles.
[[nodiscard]] std::vector<double> quantile_levels(std::size_t n = 99);

/// Long-form table `v,b,w1,kind` of W1 over the levels and the model's b grid.
void write_w1_table(std::ostream& out, const RationalizingModel& model, const std::vector<double>& levels);

}  // namespace binchoice
