#include "binchoice/shape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "binchoice/error.hpp"

namespace binchoice {

bool ShapeReport::pass() const noexcept {
    const bool limits_ok =
        std::none_of(limit_checks.begin(), limit_checks.end(), [](const LimitCheck& c) { return c.flagged; });
    return monotone() && continuity_flags.empty() && limits_ok;
}

ShapeReport check_shape(const ChoiceProbGrid& grid, const ShapeOptions& options) {
    if (!(options.tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be nonnegative");
    if (!(options.continuity_jump_tol >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "continuity_jump_tol must be nonnegative");
    }
    const std::size_t na = grid.a_size();
    const std::size_t nb = grid.b_size();
    if (na < 2 && nb < 2) {
        throw Error(ErrorCode::InsufficientGrid, "grid needs at least two points on some axis");
    }

    ShapeReport report;
    report.a_checked = na >= 2;
    report.b_checked = nb >= 2;

    // along a, for each b
    for (std::size_t j = 0; j < nb; ++j) {
        std::optional<std::size_t> prev;
        for (std::size_t i = 0; i < na; ++i) {
            if (!grid.has(i, j)) continue;
            if (prev) {
                const CellPair cells{*prev, j, i, j};
                const double step = grid.q(i, j) - grid.q(*prev, j);
                if (step > options.tol) report.a_violations.push_back({cells, step});
                if (std::abs(step) > options.continuity_jump_tol) {
                    report.continuity_flags.push_back({cells, std::abs(step)});
                }
            }
            prev = i;
        }
    }
    // along b, for each a
    for (std::size_t i = 0; i < na; ++i) {
        std::optional<std::size_t> prev;
        for (std::size_t j = 0; j < nb; ++j) {
            if (!grid.has(i, j)) continue;
            if (prev) {
                const double step = grid.q(i, j) - grid.q(i, *prev);
                if (step < -options.tol) report.b_violations.push_back({{i, *prev, i, j}, -step});
            }
            prev = j;
        }
    }

    if (options.check_limit) {
        for (std::size_t j = 0; j < nb; ++j) {
            LimitCheck check{grid.b_values()[j], std::nullopt, false};
            for (std::size_t i = 0; i < na; ++i) {
                if (auto v = grid.at(i, j)) {
                    check.q_at_min_a = *v;
                    check.flagged = *v < 1.0 - options.tol;
                    break;
                }
            }
            report.limit_checks.push_back(check);
        }
    }

    for (const auto& v : report.a_violations) report.max_violation = std::max(report.max_violation, v.magnitude);
    for (const auto& v : report.b_violations) report.max_violation = std::max(report.max_violation, v.magnitude);
    return report;
}

namespace {

std::string point_label(double x, double y, const char* xn, const char* yn) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << xn << "=" << x << ", " << yn << "=" << y << ")";
    return os.str();
}

// Evaluates f and insists on a finite result; anything else becomes an
// Evaluation error tagged with the point being differentiated.
template <typename F>
double eval_at(const F& f, double x, double y, const std::string& where) {
    double v = 0.0;
    try {
        v = f(x, y);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::Evaluation, "evaluation failed near " + where + ": " + e.what());
    }
    if (!std::isfinite(v)) throw Error(ErrorCode::Evaluation, "non-finite value near " + where);
    return v;
}

void require_step(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
}

}  // namespace

std::vector<SlutskyPoint> check_slutsky_derivatives(const DemandSurface& qbar, std::span<const BudgetSet> points,
                                                    double h, double tol) {
    require_step(h);
    std::vector<SlutskyPoint> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        const auto where = point_label(pt.p, pt.y, "p", "y");
        const double dp = (eval_at(qbar, pt.p + h, pt.y, where) - eval_at(qbar, pt.p - h, pt.y, where)) / (2 * h);
        const double dy = (eval_at(qbar, pt.p, pt.y + h, where) - eval_at(qbar, pt.p, pt.y - h, where)) / (2 * h);
        const double total = dp + dy;
        out.push_back({pt, dp, total, dp <= tol && total <= tol});
    }
    return out;
}

std::vector<double> continuous_good_slutsky(const DemandSurface& qbar, std::span<const BudgetSet> points, double h) {
    require_step(h);
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        const auto where = point_label(pt.p, pt.y, "p", "y");
        const double q = eval_at(qbar, pt.p, pt.y, where);
        const double dp = (eval_at(qbar, pt.p + h, pt.y, where) - eval_at(qbar, pt.p - h, pt.y, where)) / (2 * h);
        const double dy = (eval_at(qbar, pt.p, pt.y + h, where) - eval_at(qbar, pt.p, pt.y - h, where)) / (2 * h);
        out.push_back(dp + q * dy);
    }
    return out;
}

std::vector<ArumPoint> arum_diagnostic(const ChoiceSurface& q, std::span<const IncomeNumeraire> points, double h,
                                       double derivative_floor) {
    require_step(h);
    std::vector<ArumPoint> out;
    out.reserve(points.size());
    for (const auto& pt : points) {
        const auto where = point_label(pt.a, pt.b, "a", "b");
        // log(-q_b / q_a) at (x, y), or nullopt when the ratio is not usable
        const auto log_ratio = [&](double x, double y) -> std::optional<double> {
            const double qa = (eval_at(q, x + h, y, where) - eval_at(q, x - h, y, where)) / (2 * h);
            const double qb = (eval_at(q, x, y + h, where) - eval_at(q, x, y - h, where)) / (2 * h);
            if (!(qa < -derivative_floor) || !(qb > derivative_floor)) return std::nullopt;
            return std::log(qb) - std::log(-qa);
        };
        const auto pp = log_ratio(pt.a + h, pt.b + h);
        const auto pm = log_ratio(pt.a + h, pt.b - h);
        const auto mp = log_ratio(pt.a - h, pt.b + h);
        const auto mm = log_ratio(pt.a - h, pt.b - h);
        ArumPoint result{pt, std::nullopt};
        if (pp && pm && mp && mm) result.value = ((*pp - *pm) - (*mp - *mm)) / (4 * h * h);
        out.push_back(result);
    }
    return out;
}

}  // namespace binchoice
