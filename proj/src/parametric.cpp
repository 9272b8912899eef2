#include "binchoice/parametric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace binchoice {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

bool near_zero(double x, double scale) noexcept {
    return std::abs(x) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
}

using Vec3 = std::array<double, 3>;

double dot(const Vec3& x, const Vec3& y) noexcept { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

// Regressors (1, -b, a) centred and scaled; the sign of each slope survives.
struct StandardizedDesign {
    std::vector<double> z1;  // -(b - mean_b) / scale_b
    std::vector<double> z2;  // (a - mean_a) / scale_a
    std::vector<int> choice;
    double mean_a = 0.0, mean_b = 0.0, scale_a = 1.0, scale_b = 1.0;

    explicit StandardizedDesign(const Dataset& data) {
        const double n = static_cast<double>(data.size());
        CompensatedSum sa, sb;
        for (const auto& r : data) {
            sa.add(r.budget.y);
            sb.add(r.budget.numeraire());
        }
        mean_a = sa.value() / n;
        mean_b = sb.value() / n;
        CompensatedSum va, vb;
        for (const auto& r : data) {
            va.add((r.budget.y - mean_a) * (r.budget.y - mean_a));
            vb.add((r.budget.numeraire() - mean_b) * (r.budget.numeraire() - mean_b));
        }
        scale_a = std::sqrt(va.value() / n);
        scale_b = std::sqrt(vb.value() / n);
        if (!(scale_a > 0.0)) scale_a = 1.0;
        if (!(scale_b > 0.0)) scale_b = 1.0;
        z1.reserve(data.size());
        z2.reserve(data.size());
        choice.reserve(data.size());
        for (const auto& r : data) {
            z1.push_back(-(r.budget.numeraire() - mean_b) / scale_b);
            z2.push_back((r.budget.y - mean_a) / scale_a);
            choice.push_back(r.choice);
        }
    }

    [[nodiscard]] IndexModel to_model(const Vec3& t, Link link) const noexcept {
        IndexModel m;
        m.link = link;
        m.gamma1 = t[1] / scale_b;
        const double sigma = t[2] / scale_a;
        m.gamma2 = sigma - m.gamma1;
        m.gamma0 = t[0] + m.gamma1 * mean_b - sigma * mean_a;
        return m;
    }
};

struct Evaluation {
    double mean_loglik = 0.0;
    Vec3 grad{};
};

Evaluation evaluate(const StandardizedDesign& d, const Vec3& t, Link link) {
    CompensatedSum ll, g0, g1, g2;
    const std::size_t n = d.choice.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double x = t[0] + t[1] * d.z1[k] + t[2] * d.z2[k];
        double w = 0.0;
        if (d.choice[k] == 1) {
            ll.add(link_log_cdf(link, x));
            w = link_dlog_cdf(link, x);
        } else {
            ll.add(link_log_sf(link, x));
            w = link_dlog_sf(link, x);
        }
        g0.add(w);
        g1.add(w * d.z1[k]);
        g2.add(w * d.z2[k]);
    }
    const double inv = 1.0 / static_cast<double>(n);
    return {ll.value() * inv, {g0.value() * inv, g1.value() * inv, g2.value() * inv}};
}

Vec3 project(Vec3 t, bool constrain) noexcept {
    if (constrain) {
        t[1] = std::min(t[1], 0.0);
        t[2] = std::min(t[2], 0.0);
    }
    return t;
}

}  // namespace

double predict_prob(const IndexModel& model, double p, double y) noexcept {
    return link_cdf(model.link, model.index(p, y));
}

double predict_prob_ab(const IndexModel& model, double a, double b) noexcept {
    return link_cdf(model.link, model.index_ab(a, b));
}

ChoiceSurface choice_surface(const IndexModel& model) {
    return {[model](double a, double b) { return predict_prob_ab(model, a, b); }};
}

std::vector<std::string> RationalizabilityVerdict::binding() const {
    std::vector<std::string> out;
    if (price_binding) out.emplace_back("gamma1<=0");
    if (income_binding) out.emplace_back("gamma1+gamma2<=0");
    return out;
}

RationalizabilityVerdict check_rationalizable(const IndexModel& model) noexcept {
    RationalizabilityVerdict v;
    const double sum = model.gamma1 + model.gamma2;
    const double scale = std::max(std::abs(model.gamma1), std::abs(model.gamma2));
    v.price_violated = model.gamma1 > 0.0;
    v.income_violated = sum > 0.0;
    v.pass = !v.price_violated && !v.income_violated;
    v.price_binding = near_zero(model.gamma1, scale);
    v.income_binding = near_zero(sum, scale);
    v.limit_warning = v.income_binding;
    return v;
}

double log_likelihood(const IndexModel& model, const Dataset& data) {
    CompensatedSum ll;
    for (const auto& r : data) {
        const double x = model.index(r.budget.p, r.budget.y);
        ll.add(r.choice == 1 ? link_log_cdf(model.link, x) : link_log_sf(model.link, x));
    }
    return ll.value();
}

FitResult fit_constrained_mle(const Dataset& data, const FitOptions& options) {
    if (data.size() < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 observations to fit");
    bool any0 = false, any1 = false;
    for (const auto& r : data) {
        if (r.choice != 0 && r.choice != 1) throw Error(ErrorCode::InvalidArgument, "choice must be 0 or 1");
        if (!std::isfinite(r.budget.p) || !std::isfinite(r.budget.y)) {
            throw Error(ErrorCode::InvalidArgument, "budget values must be finite");
        }
        (r.choice == 1 ? any1 : any0) = true;
    }
    if (!any0 || !any1) throw Error(ErrorCode::InvalidArgument, "both choice values must be present");
    if (!(options.gtol > 0.0)) throw Error(ErrorCode::InvalidArgument, "gtol must be positive");

    const StandardizedDesign design(data);
    const Link link = options.link;
    const bool constrain = options.constrain;
    constexpr double kArmijo = 1e-4;
    constexpr double kSeparationNorm = 1e3;
    constexpr double kSeparationLoglik = -1e-12;

    Vec3 t{0.0, 0.0, 0.0};
    Evaluation cur = evaluate(design, t, link);
    double step = 1.0;
    std::size_t iter = 0;
    double pg_norm = 0.0;

    const auto separation_check = [&](const Vec3& x, double mean_ll) {
        if (std::sqrt(dot(x, x)) > kSeparationNorm || mean_ll > kSeparationLoglik) {
            throw Error(ErrorCode::Separation, "likelihood appears unbounded (perfect separation in the data)");
        }
    };

    for (;; ++iter) {
        Vec3 target{t[0] + cur.grad[0], t[1] + cur.grad[1], t[2] + cur.grad[2]};
        const Vec3 pt = project(target, constrain);
        const Vec3 pg{pt[0] - t[0], pt[1] - t[1], pt[2] - t[2]};
        pg_norm = std::sqrt(dot(pg, pg));
        if (pg_norm < options.gtol) break;
        if (iter >= options.max_iter) {
            std::ostringstream os;
            os << "no convergence after " << iter << " iterations (projected gradient " << pg_norm << ")";
            throw NonConvergenceError(os.str(), design.to_model(t, link), pg_norm);
        }

        // Backtrack along the projection arc. A rounding-level slack lets the
        // search finish once loglik differences drop below double precision.
        const double slack = 1e-15 * (1.0 + std::abs(cur.mean_loglik));
        Vec3 next{};
        Evaluation trial;
        bool accepted = false;
        for (int halving = 0; halving < 80; ++halving) {
            next = project({t[0] + step * cur.grad[0], t[1] + step * cur.grad[1], t[2] + step * cur.grad[2]},
                           constrain);
            const Vec3 s{next[0] - t[0], next[1] - t[1], next[2] - t[2]};
            trial = evaluate(design, next, link);
            if (std::isfinite(trial.mean_loglik) &&
                trial.mean_loglik >= cur.mean_loglik + kArmijo * dot(cur.grad, s) - slack) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            std::ostringstream os;
            os << "line search stalled at iteration " << iter << " (projected gradient " << pg_norm << ")";
            throw NonConvergenceError(os.str(), design.to_model(t, link), pg_norm);
        }
        separation_check(next, trial.mean_loglik);

        // Barzilai-Borwein step for the next iteration (ascent on a concave function).
        const Vec3 s{next[0] - t[0], next[1] - t[1], next[2] - t[2]};
        const Vec3 yv{trial.grad[0] - cur.grad[0], trial.grad[1] - cur.grad[1], trial.grad[2] - cur.grad[2]};
        const double sy = dot(s, yv);
        step = sy < 0.0 ? std::clamp(dot(s, s) / -sy, 1e-10, 1e10) : 1.0;
        t = next;
        cur = trial;
    }

    FitResult result;
    result.model = design.to_model(t, link);
    result.loglik = log_likelihood(result.model, data);
    result.constrained = constrain;
    result.verdict = check_rationalizable(result.model);
    if (constrain) {
        // exact zeros from the clamp are what "binding" means for a constrained fit
        result.verdict.price_binding = t[1] == 0.0;
        result.verdict.income_binding = t[2] == 0.0;
        result.verdict.limit_warning = result.verdict.income_binding;
    }
    result.iterations = iter;
    result.gtol_achieved = pg_norm;
    return result;
}

ParametricUtilities::ParametricUtilities(const IndexModel& model) : model_(model) {}

double ParametricUtilities::u1(double numeraire, double v) const noexcept {
    const double sum = model_.gamma1 + model_.gamma2;
    return (link_quantile(model_.link, v) - model_.gamma0) / sum + (model_.gamma1 / sum) * numeraire;
}

ParametricUtilities rationalizing_utilities_parametric(const IndexModel& model) {
    const double sum = model.gamma1 + model.gamma2;
    if (!(sum < 0.0)) {
        throw Error(ErrorCode::NotRationalizable,
                    "gamma1 + gamma2 must be strictly negative to build rationalizing utilities");
    }
    if (model.gamma1 > 0.0) throw Error(ErrorCode::NotRationalizable, "gamma1 must be nonpositive");
    if (model.gamma1 == 0.0) {
        throw Error(ErrorCode::SlopeDegenerate, "gamma1 == 0 gives a utility flat in the numeraire");
    }
    return ParametricUtilities(model);
}

void RandomCoeffSpec::validate() const {
    if (atoms.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one atom");
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (!(atom.weight >= 0.0) || !std::isfinite(atom.gamma1) || !std::isfinite(atom.gamma2)) {
            throw Error(ErrorCode::InvalidArgument, "atom weights must be nonnegative and coefficients finite");
        }
        total += atom.weight;
    }
    if (!(std::abs(total - 1.0) <= 1e-12)) {
        throw Error(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
    }
}

double random_coeff_prob(const RandomCoeffSpec& spec, double p, double y) {
    spec.validate();
    double h = 0.0;
    for (const auto& atom : spec.atoms) {
        h += atom.weight * link_cdf(spec.link, spec.gamma0 + atom.gamma1 * p + atom.gamma2 * y);
    }
    return h;
}

RandomCoeffShapeReport check_random_coeff_shape(const RandomCoeffSpec& spec, std::span<const BudgetSet> points,
                                                double h, double tol) {
    spec.validate();
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
    RandomCoeffShapeReport report;
    report.sufficient_condition = std::all_of(spec.atoms.begin(), spec.atoms.end(), [](const CoefficientAtom& at) {
        return at.gamma1 <= 0.0 && at.gamma1 + at.gamma2 <= 0.0;
    });
    // H in income/numeraire coordinates
    const auto H = [&](double a, double b) { return random_coeff_prob(spec, a - b, a); };
    bool all_points = true;
    for (const auto& pt : points) {
        const double a = pt.y;
        const double b = pt.numeraire();
        RandomCoeffShapePoint out{pt, (H(a + h, b) - H(a - h, b)) / (2 * h), (H(a, b + h) - H(a, b - h)) / (2 * h),
                                  false};
        out.pass = out.dH_da <= tol && out.dH_db >= -tol;
        all_points = all_points && out.pass;
        report.points.push_back(out);
    }
    report.pass = report.sufficient_condition || all_points;
    return report;
}

}  // namespace binchoice
