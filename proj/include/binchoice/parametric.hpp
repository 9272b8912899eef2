#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "binchoice/core.hpp"
#include "binchoice/distributions.hpp"
#include "binchoice/error.hpp"

namespace binchoice {

/// qbar(p, y) = F(gamma0 + gamma1 * p + gamma2 * y).
struct IndexModel {
    double gamma0 = 0.0;
    double gamma1 = 0.0;  ///< price coefficient
    double gamma2 = 0.0;  ///< income coefficient
    Link link = Link::Logit;

    [[nodiscard]] double index(double p, double y) const noexcept { return gamma0 + gamma1 * p + gamma2 * y; }
    /// Same index written in income/numeraire: gamma0 + (gamma1 + gamma2) a - gamma1 b.
    [[nodiscard]] double index_ab(double a, double b) const noexcept {
        return gamma0 + (gamma1 + gamma2) * a - gamma1 * b;
    }
};

[[nodiscard]] double predict_prob(const IndexModel& model, double p, double y) noexcept;
/// Evaluated through index_ab. Agrees with predict_prob up to rounding, and is
/// exactly flat in a when gamma1 + gamma2 == 0 (and in b when gamma1 == 0).
[[nodiscard]] double predict_prob_ab(const IndexModel& model, double a, double b) noexcept;
[[nodiscard]] ChoiceSurface choice_surface(const IndexModel& model);

struct RationalizabilityVerdict {
    bool pass = false;
    bool price_violated = false;   ///< gamma1 > 0
    bool income_violated = false;  ///< gamma1 + gamma2 > 0
    bool price_binding = false;    ///< gamma1 == 0 up to rounding
    bool income_binding = false;   ///< gamma1 + gamma2 == 0 up to rounding
    /// gamma1 + gamma2 == 0 keeps the shape inequalities but loses the limit
    /// q -> 1 as the price falls, so it is a warning rather than a failure.
    bool limit_warning = false;

    [[nodiscard]] std::vector<std::string> binding() const;
};

/// gamma1 <= 0 and gamma1 + gamma2 <= 0.
[[nodiscard]] RationalizabilityVerdict check_rationalizable(const IndexModel& model) noexcept;

struct FitOptions {
    Link link = Link::Logit;
    bool constrain = true;
    /// Convergence when the projected gradient of the mean log-likelihood, in
    /// standardized coordinates, is below this.
    double gtol = 1e-8;
    std::size_t max_iter = 50000;
};

struct FitResult {
    IndexModel model;
    double loglik = 0.0;  ///< summed over observations
    bool constrained = false;
    RationalizabilityVerdict verdict;
    std::size_t iterations = 0;
    double gtol_achieved = 0.0;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, IndexModel last, double gnorm)
        : Error(ErrorCode::NonConvergence, what), last_(last), gnorm_(gnorm) {}

    [[nodiscard]] const IndexModel& last_iterate() const noexcept { return last_; }
    [[nodiscard]] double gradient_norm() const noexcept { return gnorm_; }

private:
    IndexModel last_;
    double gnorm_;
};

/// Sum of choice * log F(index) + (1 - choice) * log(1 - F(index)), with
/// compensated summation in row order.
[[nodiscard]] double log_likelihood(const IndexModel& model, const Dataset& data);

/// Maximum likelihood for the index model, optionally subject to
/// gamma1 <= 0 and gamma1 + gamma2 <= 0.
///
/// Works in coordinates (gamma0, gamma1, gamma1 + gamma2) with centred and
/// scaled regressors (1, -b, a). The constraint set becomes the orthant
/// {t1 <= 0, t2 <= 0}, so the projection is a clamp and the constrained
/// solution satisfies both inequalities exactly after mapping back. Ascent
/// uses Barzilai-Borwein steps with Armijo backtracking along the projection
/// arc. Deterministic given data and options.
///
/// Throws InvalidArgument when fewer than 3 rows or a single choice value is
/// present, Separation when the likelihood is unbounded, and
/// NonConvergenceError (with the last iterate) after max_iter steps.
[[nodiscard]] FitResult fit_constrained_mle(const Dataset& data, const FitOptions& options = {});

/// U1(y - p, V) = (F^{-1}(V) - gamma0) / (gamma1 + gamma2) + gamma1 / (gamma1 + gamma2) * (y - p),
/// U0(y, V) = y, with V ~ Uniform(0, 1). Buying (U1 >= U0) then has
/// probability F(index).
class ParametricUtilities {
public:
    explicit ParametricUtilities(const IndexModel& model);

    [[nodiscard]] double u1(double numeraire, double v) const noexcept;
    [[nodiscard]] double u0(double income, double /*v*/) const noexcept { return income; }
    /// gamma1 / (gamma1 + gamma2), strictly positive.
    [[nodiscard]] double slope() const noexcept { return model_.gamma1 / (model_.gamma1 + model_.gamma2); }
    [[nodiscard]] const IndexModel& model() const noexcept { return model_; }

private:
    IndexModel model_;
};

/// Throws NotRationalizable unless gamma1 + gamma2 < 0 and gamma1 <= 0, and
/// SlopeDegenerate when gamma1 == 0.
[[nodiscard]] ParametricUtilities rationalizing_utilities_parametric(const IndexModel& model);

struct CoefficientAtom {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double weight = 0.0;
};

/// Finite mixture over (gamma1, gamma2) with a shared link and intercept.
struct RandomCoeffSpec {
    std::vector<CoefficientAtom> atoms;
    Link link = Link::Logit;
    double gamma0 = 0.0;
    std::string theta;  ///< free-form label

    /// Weights nonnegative and summing to 1 within 1e-12.
    void validate() const;
};

/// H = sum_k w_k F(gamma0 + gamma1_k p + gamma2_k y).
[[nodiscard]] double random_coeff_prob(const RandomCoeffSpec& spec, double p, double y);

struct RandomCoeffShapePoint {
    BudgetSet at;
    double dH_da = 0.0;  ///< income derivative at fixed numeraire; should be <= 0
    double dH_db = 0.0;  ///< numeraire derivative at fixed income; should be >= 0
    bool pass = false;
};

struct RandomCoeffShapeReport {
    /// Every atom has gamma1 <= 0 and gamma1 + gamma2 <= 0.
    bool sufficient_condition = false;
    bool pass = false;
    std::vector<RandomCoeffShapePoint> points;
};

/// Passes outright when the support condition holds; otherwise passes only if
/// the central-difference derivatives have the right signs at every point.
[[nodiscard]] RandomCoeffShapeReport check_random_coeff_shape(const RandomCoeffSpec& spec,
                                                              std::span<const BudgetSet> points, double h,
                                                              double tol = 0.0);

}  // namespace binchoice
