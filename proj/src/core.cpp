#include "binchoice/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "binchoice/error.hpp"

namespace binchoice {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite");
    }
}

void require_strictly_increasing(std::span<const double> axis, const char* name) {
    for (std::size_t k = 0; k < axis.size(); ++k) {
        if (!std::isfinite(axis[k])) {
            throw Error(ErrorCode::InvalidArgument,
                        std::string(name) + " value at index " + std::to_string(k) + " is not finite");
        }
        if (k > 0 && !(axis[k] > axis[k - 1])) {
            throw Error(ErrorCode::InvalidArgument,
                        std::string(name) + " is not strictly increasing at index " + std::to_string(k));
        }
    }
}

std::string node_label(double a, double b) {
    std::ostringstream os;
    os.precision(17);
    os << "(a=" << a << ", b=" << b << ")";
    return os.str();
}

// Index of the bin holding x, or npos. Bins are [e_k, e_{k+1}) except the last,
// which also holds its right edge.
std::size_t bin_index(std::span<const double> edges, double x) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    if (edges.size() < 2 || x < edges.front() || x > edges.back()) return npos;
    if (x == edges.back()) return edges.size() - 2;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

}  // namespace

void validate_budget(const BudgetSet& budget, const BudgetPolicy& policy) {
    require_finite(budget.p, "price");
    require_finite(budget.y, "income");
    const double b = budget.numeraire();
    require_finite(b, "numeraire");
    if (!policy.allow_negative_price && budget.p < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "negative price not allowed without the negative-price flag");
    }
    if (!policy.allow_negative_numeraire && b < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "income below price (negative numeraire) not allowed");
    }
}

IncomeNumeraire pq_to_ab(double p, double y) {
    require_finite(p, "price");
    require_finite(y, "income");
    return {y, y - p};
}

BudgetSet ab_to_pq(double a, double b) {
    require_finite(a, "income");
    require_finite(b, "numeraire");
    return {a - b, a};
}

std::vector<std::pair<std::string, Dataset>> split_by_group(const Dataset& data) {
    std::map<std::string, Dataset> groups;
    for (const auto& row : data) groups[row.group.value_or("")].push_back(row);
    return {groups.begin(), groups.end()};
}

DemandSurface to_demand_surface(ChoiceSurface q) {
    return {[q = std::move(q)](double p, double y) { return q(y, y - p); }};
}

ChoiceSurface to_choice_surface(DemandSurface qbar) {
    return {[qbar = std::move(qbar)](double a, double b) { return qbar(a - b, a); }};
}

ChoiceProbGrid::ChoiceProbGrid(std::vector<double> a_values, std::vector<double> b_values, std::vector<double> q)
    : a_(std::move(a_values)), b_(std::move(b_values)), q_(std::move(q)) {
    if (q_.size() != a_.size() * b_.size()) {
        throw Error(ErrorCode::InvalidArgument, "grid value count does not match axis sizes");
    }
    for (std::size_t k = 0; k < q_.size(); ++k) {
        if (std::isnan(q_[k])) {
            throw Error(ErrorCode::InvalidArgument, "complete grid constructor given a missing cell");
        }
    }
    validate();
}

ChoiceProbGrid::ChoiceProbGrid(std::vector<double> a_values, std::vector<double> b_values,
                               const std::vector<std::optional<double>>& cells)
    : a_(std::move(a_values)), b_(std::move(b_values)) {
    if (cells.size() != a_.size() * b_.size()) {
        throw Error(ErrorCode::InvalidArgument, "grid value count does not match axis sizes");
    }
    q_.reserve(cells.size());
    for (const auto& c : cells) {
        if (c && std::isnan(*c)) throw Error(ErrorCode::Range, "grid cell is NaN");
        q_.push_back(c.value_or(kMissing));
    }
    validate();
}

void ChoiceProbGrid::validate() const {
    if (a_.empty() || b_.empty()) throw Error(ErrorCode::InvalidArgument, "grid axes must be non-empty");
    require_strictly_increasing(a_, "a_values");
    require_strictly_increasing(b_, "b_values");
    for (std::size_t i = 0; i < a_.size(); ++i) {
        for (std::size_t j = 0; j < b_.size(); ++j) {
            const double v = q_[i * b_.size() + j];
            if (std::isnan(v)) continue;
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorCode::Range, "probability outside [0,1] at " + node_label(a_[i], b_[j]));
            }
        }
    }
}

ChoiceProbGrid ChoiceProbGrid::from_cells(std::span<const GridCell> cells) {
    if (cells.empty()) throw Error(ErrorCode::InvalidArgument, "no grid cells");
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(cells.size());
    b.reserve(cells.size());
    for (const auto& c : cells) {
        require_finite(c.a, "a");
        require_finite(c.b, "b");
        a.push_back(c.a);
        b.push_back(c.b);
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());

    std::vector<std::optional<double>> values(a.size() * b.size());
    for (const auto& c : cells) {
        const auto i = static_cast<std::size_t>(std::lower_bound(a.begin(), a.end(), c.a) - a.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), c.b) - b.begin());
        auto& slot = values[i * b.size() + j];
        if (slot) throw Error(ErrorCode::InvalidArgument, "duplicate grid cell at " + node_label(c.a, c.b));
        slot = c.q;
    }
    return ChoiceProbGrid(std::move(a), std::move(b), values);
}

bool ChoiceProbGrid::has(std::size_t i, std::size_t j) const {
    return !std::isnan(q_.at(i * b_.size() + j));
}

std::optional<double> ChoiceProbGrid::at(std::size_t i, std::size_t j) const {
    const double v = q_.at(i * b_.size() + j);
    if (std::isnan(v)) return std::nullopt;
    return v;
}

double ChoiceProbGrid::q(std::size_t i, std::size_t j) const {
    const double v = q_.at(i * b_.size() + j);
    if (std::isnan(v)) {
        throw Error(ErrorCode::InvalidArgument, "grid cell " + node_label(a_[i], b_[j]) + " is missing");
    }
    return v;
}

bool ChoiceProbGrid::complete() const noexcept {
    return std::none_of(q_.begin(), q_.end(), [](double v) { return std::isnan(v); });
}

std::size_t ChoiceProbGrid::present_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(q_.begin(), q_.end(), [](double v) { return !std::isnan(v); }));
}

std::vector<GridCell> ChoiceProbGrid::cells() const {
    std::vector<GridCell> out;
    out.reserve(q_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) {
        for (std::size_t j = 0; j < b_.size(); ++j) {
            const double v = q_[i * b_.size() + j];
            if (!std::isnan(v)) out.push_back({a_[i], b_[j], v});
        }
    }
    return out;
}

ChoiceProbGrid grid_from_function(const ChoiceSurface& f, std::vector<double> a_values,
                                  std::vector<double> b_values) {
    require_strictly_increasing(a_values, "a_values");
    require_strictly_increasing(b_values, "b_values");
    std::vector<double> q;
    q.reserve(a_values.size() * b_values.size());
    for (double a : a_values) {
        for (double b : b_values) {
            const double v = f(a, b);
            if (!(v >= 0.0 && v <= 1.0)) {
                std::ostringstream os;
                os.precision(17);
                os << "function value " << v << " outside [0,1] at " << node_label(a, b);
                throw Error(ErrorCode::Range, os.str());
            }
            q.push_back(v);
        }
    }
    return ChoiceProbGrid(std::move(a_values), std::move(b_values), std::move(q));
}

BinnedGrid grid_from_dataset(const Dataset& data, std::span<const double> a_edges, std::span<const double> b_edges,
                             std::size_t min_cell_count) {
    if (data.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no rows");
    if (min_cell_count < 1) throw Error(ErrorCode::InvalidArgument, "min_cell_count must be at least 1");
    if (a_edges.size() < 2 || b_edges.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "bin edges need at least two values per axis");
    }
    require_strictly_increasing(a_edges, "a bin edges");
    require_strictly_increasing(b_edges, "b bin edges");

    const std::size_t na = a_edges.size() - 1;
    const std::size_t nb = b_edges.size() - 1;
    std::vector<std::size_t> counts(na * nb, 0);
    std::vector<std::size_t> ones(na * nb, 0);
    std::size_t outside = 0;
    constexpr auto npos = static_cast<std::size_t>(-1);

    for (const auto& row : data) {
        if (row.choice != 0 && row.choice != 1) throw Error(ErrorCode::InvalidArgument, "choice must be 0 or 1");
        const auto [a, b] = pq_to_ab(row.budget.p, row.budget.y);
        const std::size_t i = bin_index(a_edges, a);
        const std::size_t j = bin_index(b_edges, b);
        if (i == npos || j == npos) {
            ++outside;
            continue;
        }
        ++counts[i * nb + j];
        ones[i * nb + j] += static_cast<std::size_t>(row.choice);
    }

    std::vector<std::optional<double>> cells(na * nb);
    bool any = false;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (counts[k] >= min_cell_count) {
            cells[k] = static_cast<double>(ones[k]) / static_cast<double>(counts[k]);
            any = true;
        }
    }
    if (!any) throw Error(ErrorCode::DegenerateGrid, "every cell has fewer than min_cell_count observations");

    std::vector<double> a_mid(na);
    std::vector<double> b_mid(nb);
    for (std::size_t i = 0; i < na; ++i) a_mid[i] = 0.5 * (a_edges[i] + a_edges[i + 1]);
    for (std::size_t j = 0; j < nb; ++j) b_mid[j] = 0.5 * (b_edges[j] + b_edges[j + 1]);
    return BinnedGrid{ChoiceProbGrid(std::move(a_mid), std::move(b_mid), cells), std::move(counts), std::move(ones),
                      outside};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> v(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) v[k] = lo + step * static_cast<double>(k);
    v.back() = hi;
    return v;
}

}  // namespace binchoice
