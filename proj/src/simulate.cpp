#include "binchoice/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "binchoice/distributions.hpp"
#include "binchoice/error.hpp"

namespace binchoice {

namespace {

constexpr std::size_t kChunk = 1024;

void require_axis(std::span<const double> axis, const char* name) {
    if (axis.empty()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be non-empty");
    for (std::size_t k = 1; k < axis.size(); ++k) {
        if (!(axis[k] > axis[k - 1])) {
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be strictly increasing");
        }
    }
}

void require_spec(const PopulationSpec& spec) {
    if (!spec.w0 || !spec.w1) throw Error(ErrorCode::InvalidArgument, "population spec lacks utilities");
    if (spec.eta_dim > 0 && !spec.sample_eta) {
        throw Error(ErrorCode::InvalidArgument, "population spec lacks an eta sampler");
    }
}

void draw_eta(const PopulationSpec& spec, UniformStream& rng, std::vector<double>& eta) {
    if (spec.eta_dim > 0) spec.sample_eta(rng, eta);
}

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params, std::initializer_list<const char*> known,
                    const std::string& name) {
    for (const auto& [key, value] : params) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::InvalidArgument, "spec '" + name + "' has no parameter '" + key + "'");
        }
    }
}

}  // namespace

SpecValidation validate_spec(const PopulationSpec& spec, std::span<const double> a_values,
                             std::span<const double> b_values, std::size_t n_draws, std::uint64_t seed) {
    require_spec(spec);
    require_axis(a_values, "a_values");
    require_axis(b_values, "b_values");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be at least 1");

    SpecValidation out;
    UniformStream rng(seed);
    std::vector<double> eta(spec.eta_dim);
    std::vector<double> u0(a_values.size());
    std::vector<double> u1(b_values.size());
    std::size_t ties = 0;
    for (std::size_t d = 0; d < n_draws; ++d) {
        draw_eta(spec, rng, eta);
        for (std::size_t i = 0; i < a_values.size(); ++i) u0[i] = spec.w0(a_values[i], eta);
        for (std::size_t j = 0; j < b_values.size(); ++j) u1[j] = spec.w1(b_values[j], eta);
        for (std::size_t i = 1; i < u0.size(); ++i) out.w0_increasing = out.w0_increasing && u0[i] > u0[i - 1];
        for (std::size_t j = 1; j < u1.size(); ++j) out.w1_nondecreasing = out.w1_nondecreasing && u1[j] >= u1[j - 1];
        for (double x : u0) {
            for (double y : u1) ties += x == y ? 1 : 0;
        }
    }
    out.tie_fraction = static_cast<double>(ties) / (static_cast<double>(n_draws) * static_cast<double>(u0.size()) *
                                                    static_cast<double>(u1.size()));
    out.valid = out.w0_increasing && out.w1_nondecreasing && out.tie_fraction < 1e-6;
    return out;
}

ChoiceProbGrid simulate_grid(const PopulationSpec& spec, std::vector<double> a_values, std::vector<double> b_values,
                             std::size_t n_draws, std::uint64_t seed, unsigned threads) {
    require_spec(spec);
    require_axis(a_values, "a_values");
    require_axis(b_values, "b_values");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be at least 1");

    const std::size_t na = a_values.size();
    const std::size_t nb = b_values.size();
    const std::size_t n_chunks = (n_draws + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> counts(n_chunks);

    for_each_chunk(n_draws, kChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        UniformStream rng(seed, c);
        std::vector<double> eta(spec.eta_dim);
        std::vector<double> u0(na);
        std::vector<double> u1(nb);
        auto& local = counts[c];
        local.assign(na * nb, 0);
        for (std::size_t d = begin; d < end; ++d) {
            draw_eta(spec, rng, eta);
            for (std::size_t i = 0; i < na; ++i) u0[i] = spec.w0(a_values[i], eta);
            for (std::size_t j = 0; j < nb; ++j) u1[j] = spec.w1(b_values[j], eta);
            for (std::size_t i = 0; i < na; ++i) {
                for (std::size_t j = 0; j < nb; ++j) local[i * nb + j] += u0[i] <= u1[j] ? 1 : 0;
            }
        }
    });

    std::vector<double> q(na * nb);
    for (std::size_t k = 0; k < q.size(); ++k) {
        std::size_t total = 0;
        for (const auto& local : counts) total += local[k];
        q[k] = static_cast<double>(total) / static_cast<double>(n_draws);
    }
    return ChoiceProbGrid(std::move(a_values), std::move(b_values), std::move(q));
}

BudgetSampler uniform_budgets(double p_lo, double p_hi, double y_lo, double y_hi) {
    if (!(p_lo <= p_hi) || !(y_lo <= y_hi)) throw Error(ErrorCode::InvalidArgument, "empty budget ranges");
    return [=](UniformStream& rng) {
        const double p = p_lo + (p_hi - p_lo) * rng.next();
        const double y = y_lo + (y_hi - y_lo) * rng.next();
        return BudgetSet{p, y};
    };
}

Dataset simulate_dataset(const PopulationSpec& spec, const BudgetSampler& budgets, std::size_t n_obs,
                         std::uint64_t seed) {
    require_spec(spec);
    if (n_obs < 1) throw Error(ErrorCode::InvalidArgument, "n_obs must be at least 1");
    if (!budgets) throw Error(ErrorCode::InvalidArgument, "missing budget sampler");
    // separate streams keep budgets independent of eta
    UniformStream budget_rng(seed, 0);
    UniformStream eta_rng(seed, 1);
    std::vector<double> eta(spec.eta_dim);
    Dataset data;
    data.reserve(n_obs);
    for (std::size_t k = 0; k < n_obs; ++k) {
        const BudgetSet budget = budgets(budget_rng);
        draw_eta(spec, eta_rng, eta);
        const bool buys = spec.w0(budget.y, eta) <= spec.w1(budget.numeraire(), eta);
        data.push_back({budget, buys ? 1 : 0, std::nullopt});
    }
    return data;
}

NoiseDistribution NoiseDistribution::logistic() {
    return {[](double x) { return logistic_cdf(x); }, [](double u) { return logistic_quantile(u); }, "logistic"};
}

NoiseDistribution NoiseDistribution::normal() {
    return {[](double x) { return normal_cdf(x); }, [](double u) { return normal_quantile(u); }, "normal"};
}

PopulationSpec make_arum_spec(std::function<double(double)> w0, std::function<double(double)> w1,
                              NoiseDistribution noise) {
    if (!w0 || !w1 || !noise.quantile) throw Error(ErrorCode::InvalidArgument, "ARUM spec needs w0, w1 and F");
    PopulationSpec spec;
    spec.eta_dim = 1;
    spec.w0 = [w0](double a, std::span<const double> eta) { return w0(a) + eta[0]; };
    spec.w1 = [w1](double b, std::span<const double>) { return w1(b); };
    spec.sample_eta = [q = noise.quantile](UniformStream& rng, std::span<double> eta) { eta[0] = q(rng.next()); };
    spec.descriptor = "arum(" + noise.name + ")";
    return spec;
}

ChoiceSurface arum_choice_surface(std::function<double(double)> w0, std::function<double(double)> w1,
                                  NoiseDistribution noise) {
    return {[w0 = std::move(w0), w1 = std::move(w1), cdf = std::move(noise.cdf)](double a, double b) {
        return cdf(w1(b) - w0(a));
    }};
}

GiffenReport giffen_check(const PopulationSpec& spec, double y, std::span<const std::pair<double, double>> price_pairs,
                          std::size_t n_draws, std::uint64_t seed) {
    require_spec(spec);
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be at least 1");
    for (const auto& [p, p_hi] : price_pairs) {
        if (!(p <= p_hi)) throw Error(ErrorCode::InvalidArgument, "price pairs need p <= p'");
    }
    GiffenReport report;
    report.per_pair.assign(price_pairs.size(), 0);
    UniformStream rng(seed);
    std::vector<double> eta(spec.eta_dim);
    for (std::size_t d = 0; d < n_draws; ++d) {
        draw_eta(spec, rng, eta);
        const double stay = spec.w0(y, eta);
        for (std::size_t k = 0; k < price_pairs.size(); ++k) {
            const auto [p, p_hi] = price_pairs[k];
            const bool buys_low = stay <= spec.w1(y - p, eta);
            const bool buys_high = stay <= spec.w1(y - p_hi, eta);
            if (buys_high && !buys_low) ++report.per_pair[k];
        }
    }
    for (auto c : report.per_pair) report.violations += c;
    return report;
}

std::vector<std::string> catalog_names() {
    return {"logistic-arum", "point-mass", "random-coefficient", "uniform-additive"};
}

PopulationSpec catalog_spec(const std::string& requested, const std::map<std::string, double>& params) {
    std::string name = requested;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name == "uniform-additive") {
        reject_unknown(params, {"scale"}, name);
        const double scale = param(params, "scale", 1.0);
        if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale must be positive");
        PopulationSpec spec;
        spec.eta_dim = 1;
        spec.w0 = [](double a, std::span<const double>) { return a; };
        spec.w1 = [scale](double b, std::span<const double> eta) { return b + scale * eta[0]; };
        spec.sample_eta = [](UniformStream& rng, std::span<double> eta) { eta[0] = rng.next(); };
        spec.descriptor = name;
        return spec;
    }
    if (name == "logistic-arum") {
        reject_unknown(params, {"slope", "intercept"}, name);
        const double slope = param(params, "slope", 2.0);
        const double intercept = param(params, "intercept", 0.0);
        auto spec = make_arum_spec([](double a) { return a; },
                                   [slope, intercept](double b) { return slope * b + intercept; },
                                   NoiseDistribution::logistic());
        spec.descriptor = name;
        return spec;
    }
    if (name == "random-coefficient") {
        reject_unknown(params, {"gamma1_a", "gamma2_a", "gamma1_b", "gamma2_b", "weight", "gamma0"}, name);
        const double g1a = param(params, "gamma1_a", -1.0);
        const double g2a = param(params, "gamma2_a", 0.5);
        const double g1b = param(params, "gamma1_b", -2.0);
        const double g2b = param(params, "gamma2_b", 1.5);
        const double weight = param(params, "weight", 0.5);
        const double gamma0 = param(params, "gamma0", 0.0);
        if (!(weight >= 0.0 && weight <= 1.0)) throw Error(ErrorCode::InvalidArgument, "weight must lie in [0,1]");
        PopulationSpec spec;
        spec.eta_dim = 2;
        // eta[0] picks the atom, eta[1] is the logistic intercept shock;
        // buy iff eps <= gamma0 + (g1 + g2) a - g1 b
        spec.w0 = [=](double a, std::span<const double> eta) {
            const bool first = eta[0] < weight;
            const double sigma = first ? g1a + g2a : g1b + g2b;
            return eta[1] - gamma0 - sigma * a;
        };
        spec.w1 = [=](double b, std::span<const double> eta) {
            const double g1 = eta[0] < weight ? g1a : g1b;
            return -g1 * b;
        };
        spec.sample_eta = [](UniformStream& rng, std::span<double> eta) {
            eta[0] = rng.next();
            eta[1] = logistic_quantile(rng.next());
        };
        spec.descriptor = name;
        return spec;
    }
    if (name == "point-mass") {
        reject_unknown(params, {"shift"}, name);
        const double shift = param(params, "shift", 0.5);
        PopulationSpec spec;
        spec.eta_dim = 0;
        spec.w0 = [](double a, std::span<const double>) { return a; };
        spec.w1 = [shift](double b, std::span<const double>) { return b + shift; };
        spec.descriptor = name;
        return spec;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown population spec '" + name + "'");
}

}  // namespace binchoice
