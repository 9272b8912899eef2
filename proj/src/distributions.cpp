#include "binchoice/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "binchoice/error.hpp"

namespace binchoice {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Mills-type ratio phi(x) / Phi(x); falls back to the asymptotic -x far in
// the left tail where Phi underflows.
double normal_hazard_left(double x) noexcept {
    if (x < -37.0) return -x;
    return normal_pdf(x) / normal_cdf(x);
}

}  // namespace

// One expression on the whole line keeps the result monotone in x after rounding.
double logistic_cdf(double x) noexcept {
    return 1.0 / (1.0 + std::exp(-x));
}

double logistic_pdf(double x) noexcept {
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

double logistic_quantile(double u) noexcept {
    if (u <= 0.0) return -kInf;
    if (u >= 1.0) return kInf;
    return std::log(u) - std::log1p(-u);
}

double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double u) noexcept {
    if (std::isnan(u)) return u;
    if (u <= 0.0) return -kInf;
    if (u >= 1.0) return kInf;

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - p_low) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement. Both forms equal Phi(x) - u; the upper one keeps
    // relative precision in the right tail.
    const double e = x <= 0 ? normal_cdf(x) - u : (1.0 - u) - normal_cdf(-x);
    const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

std::string_view to_string(Link link) noexcept {
    return link == Link::Logit ? "logit" : "probit";
}

Link parse_link(std::string_view name) {
    if (name == "logit" || name == "logistic") return Link::Logit;
    if (name == "probit" || name == "normal") return Link::Probit;
    throw Error(ErrorCode::InvalidArgument, "unknown link '" + std::string(name) + "'");
}

double link_cdf(Link link, double x) noexcept {
    return link == Link::Logit ? logistic_cdf(x) : normal_cdf(x);
}

double link_pdf(Link link, double x) noexcept {
    return link == Link::Logit ? logistic_pdf(x) : normal_pdf(x);
}

double link_quantile(Link link, double u) noexcept {
    return link == Link::Logit ? logistic_quantile(u) : normal_quantile(u);
}

double link_log_cdf(Link link, double x) noexcept {
    if (link == Link::Logit) return -softplus(-x);
    if (x < -37.0) {
        // log Phi(x) ~ log phi(x) - log(-x) for large negative x
        return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return std::log(normal_cdf(x));
}

double link_log_sf(Link link, double x) noexcept {
    if (link == Link::Logit) return -softplus(x);
    return link_log_cdf(Link::Probit, -x);
}

double link_dlog_cdf(Link link, double x) noexcept {
    if (link == Link::Logit) return logistic_cdf(-x);
    return normal_hazard_left(x);
}

double link_dlog_sf(Link link, double x) noexcept {
    if (link == Link::Logit) return -logistic_cdf(x);
    return -normal_hazard_left(-x);
}

}  // namespace binchoice
