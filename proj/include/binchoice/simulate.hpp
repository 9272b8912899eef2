#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binchoice/core.hpp"
#include "binchoice/random.hpp"

namespace binchoice {

/// Utility of an alternative as a function of the numeraire left and the
/// consumer's heterogeneity vector.
using UtilityFn = std::function<double(double numeraire, std::span<const double> eta)>;
/// Fills `eta` (of the spec's dimension) from the uniform stream.
using EtaSampler = std::function<void(UniformStream& rng, std::span<double> eta)>;

/// A heterogeneous population: W0(a, eta) for not buying, W1(b, eta) for
/// buying, and a distribution for eta. Ties W0 == W1 count as buying.
struct PopulationSpec {
    UtilityFn w0;
    UtilityFn w1;
    std::size_t eta_dim = 0;
    EtaSampler sample_eta;
    std::string descriptor;
};

struct SpecValidation {
    bool w0_increasing = true;     ///< strictly, on every draw and grid step
    bool w1_nondecreasing = true;
    double tie_fraction = 0.0;     ///< over (draw, a, b) triples
    bool valid = false;            ///< monotone and tie_fraction < 1e-6
};

/// Spot-checks the spec's monotonicity and no-tie requirements on a grid.
[[nodiscard]] SpecValidation validate_spec(const PopulationSpec& spec, std::span<const double> a_values,
                                           std::span<const double> b_values, std::size_t n_draws,
                                           std::uint64_t seed);

/// Fraction of eta draws with W0(a_i, eta) <= W1(b_j, eta) on each cell. The
/// same draws serve every cell, so monotone utilities give an exactly
/// monotone grid for any sample size. Results do not depend on `threads`.
[[nodiscard]] ChoiceProbGrid simulate_grid(const PopulationSpec& spec, std::vector<double> a_values,
                                           std::vector<double> b_values, std::size_t n_draws, std::uint64_t seed,
                                           unsigned threads = 1);

using BudgetSampler = std::function<BudgetSet(UniformStream& rng)>;

/// Budget drawn uniformly on [p_lo, p_hi] x [y_lo, y_hi].
[[nodiscard]] BudgetSampler uniform_budgets(double p_lo, double p_hi, double y_lo, double y_hi);

/// Each row draws a budget, then eta independently of it, then the choice.
[[nodiscard]] Dataset simulate_dataset(const PopulationSpec& spec, const BudgetSampler& budgets, std::size_t n_obs,
                                       std::uint64_t seed);

/// Continuous strictly increasing CDF with its quantile function.
struct NoiseDistribution {
    std::function<double(double)> cdf;
    std::function<double(double)> quantile;
    std::string name;

    [[nodiscard]] static NoiseDistribution logistic();
    [[nodiscard]] static NoiseDistribution normal();
};

/// Additive random utility: buy iff w0(a) + eta <= w1(b) with eta ~ F, so
/// q(a, b) = F(w1(b) - w0(a)).
[[nodiscard]] PopulationSpec make_arum_spec(std::function<double(double)> w0, std::function<double(double)> w1,
                                            NoiseDistribution noise);
/// The closed form F(w1(b) - w0(a)) of the same model.
[[nodiscard]] ChoiceSurface arum_choice_surface(std::function<double(double)> w0, std::function<double(double)> w1,
                                                NoiseDistribution noise);

struct GiffenReport {
    std::size_t violations = 0;
    std::vector<std::size_t> per_pair;
};

/// Counts draws that buy at the higher price p' but not at the lower p, for
/// each pair (p, p') at income y. Pairs need p <= p'.
[[nodiscard]] GiffenReport giffen_check(const PopulationSpec& spec, double y,
                                        std::span<const std::pair<double, double>> price_pairs, std::size_t n_draws,
                                        std::uint64_t seed);

/// Names accepted by catalog_spec.
[[nodiscard]] std::vector<std::string> catalog_names();

/// Built-in populations, parameters by name (unknown names are rejected):
///  - uniform-additive: W0 = a, W1 = b + scale * eta, eta ~ U(0,1). {scale=1}
///  - logistic-arum: W0 = a, W1 = slope * b + intercept, logistic noise. {slope=2, intercept=0}
///  - random-coefficient: two atoms (gamma1, gamma2) picked with weight w for
///    the first, logistic intercept noise; eta = (atom draw, noise).
///    {gamma1_a=-1, gamma2_a=0.5, gamma1_b=-2, gamma2_b=1.5, weight=0.5, gamma0=0}
///  - point-mass: W0 = a, W1 = b + shift, no heterogeneity. {shift=0.5}
[[nodiscard]] PopulationSpec catalog_spec(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace binchoice
