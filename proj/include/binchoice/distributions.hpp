#pragma once

#include <string_view>

namespace binchoice {

[[nodiscard]] double logistic_cdf(double x) noexcept;
[[nodiscard]] double logistic_pdf(double x) noexcept;
/// log(u / (1 - u)); -inf at 0 and +inf at 1.
[[nodiscard]] double logistic_quantile(double u) noexcept;

[[nodiscard]] double normal_pdf(double x) noexcept;
/// Phi(x) through erfc, accurate to rounding in both tails.
[[nodiscard]] double normal_cdf(double x) noexcept;
/// Inverse of Phi. Acklam's rational approximation (relative error about
/// 1.15e-9) followed by one Halley step against normal_cdf, which brings the
/// absolute error to the 1e-15 level on (1e-300, 1 - 1e-16).
[[nodiscard]] double normal_quantile(double u) noexcept;

/// Strictly increasing link CDF of a binary index model.
enum class Link { Logit, Probit };

[[nodiscard]] std::string_view to_string(Link link) noexcept;
/// Accepts "logit"/"logistic" and "probit"/"normal"; throws InvalidArgument otherwise.
[[nodiscard]] Link parse_link(std::string_view name);

[[nodiscard]] double link_cdf(Link link, double x) noexcept;
[[nodiscard]] double link_pdf(Link link, double x) noexcept;
[[nodiscard]] double link_quantile(Link link, double u) noexcept;
/// log F(x) and log(1 - F(x)) without cancellation in the tails.
[[nodiscard]] double link_log_cdf(Link link, double x) noexcept;
[[nodiscard]] double link_log_sf(Link link, double x) noexcept;
/// d/dx log F(x) = f(x) / F(x), finite for all x.
[[nodiscard]] double link_dlog_cdf(Link link, double x) noexcept;
/// d/dx log(1 - F(x)) = -f(x) / (1 - F(x)).
[[nodiscard]] double link_dlog_sf(Link link, double x) noexcept;

}  // namespace binchoice
