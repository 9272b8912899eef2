#include "binchoice/bounds.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <map>
#include <sstream>

#include "binchoice/error.hpp"

namespace binchoice {

namespace {

std::string describe(const DemandPoint& pt) {
    std::ostringstream os;
    os.precision(17);
    os << "(p=" << pt.budget.p << ", y=" << pt.budget.y << ", q=" << pt.q << ")";
    return os.str();
}

bool lex_less(const BudgetSet& x, const BudgetSet& y) noexcept {
    return x.p < y.p || (x.p == y.p && x.y < y.y);
}

void check_ranges(const std::vector<DemandPoint>& points) {
    for (const auto& pt : points) {
        if (!std::isfinite(pt.budget.p) || !std::isfinite(pt.budget.y) || !std::isfinite(pt.b())) {
            throw Error(ErrorCode::InvalidArgument, "observed budget " + describe(pt) + " is not finite");
        }
        if (!(pt.q >= 0.0 && pt.q <= 1.0)) {
            throw Error(ErrorCode::Range, "observed probability outside [0,1] at " + describe(pt));
        }
    }
}

// Bounds at income/numeraire target (a, b).
DemandBounds bounds_at(const ObservedDemand& obs, double a, double b) {
    DemandBounds out;
    const DemandPoint* lo_pt = nullptr;
    const DemandPoint* hi_pt = nullptr;
    for (const auto& pt : obs.points()) {
        if (pt.a() >= a && pt.b() <= b) {
            if (!lo_pt || pt.q > lo_pt->q || (pt.q == lo_pt->q && lex_less(pt.budget, lo_pt->budget))) lo_pt = &pt;
        }
        if (pt.a() <= a && pt.b() >= b) {
            if (!hi_pt || pt.q < hi_pt->q || (pt.q == hi_pt->q && lex_less(pt.budget, hi_pt->budget))) hi_pt = &pt;
        }
    }
    if (lo_pt) {
        out.lo = lo_pt->q;
        out.lo_attained_at = lo_pt->budget;
    }
    if (hi_pt) {
        out.hi = hi_pt->q;
        out.hi_attained_at = hi_pt->budget;
    }
    if (lo_pt && hi_pt && out.lo > out.hi) {
        throw Error(ErrorCode::Inconsistency, "observations " + describe(*hi_pt) + " and " + describe(*lo_pt) +
                                                  " violate monotonicity, bounds cross");
    }
    return out;
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite");
}

}  // namespace

ObservedDemand::ObservedDemand(std::vector<DemandPoint> points) : points_(std::move(points)) {
    check_ranges(points_);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        for (std::size_t j = 0; j < points_.size(); ++j) {
            const auto& pi = points_[i];
            const auto& pj = points_[j];
            // pi has no more income and at least as much numeraire, so q must not be lower
            if (pi.a() <= pj.a() && pi.b() >= pj.b() && pi.q < pj.q) {
                throw Error(ErrorCode::Inconsistency,
                            "observations " + describe(pi) + " and " + describe(pj) + " violate monotonicity");
            }
        }
    }
}

ObservedDemand::ObservedDemand(std::vector<DemandPoint> points, Unchecked) : points_(std::move(points)) {
    check_ranges(points_);
}

ObservedDemand ObservedDemand::unchecked(std::vector<DemandPoint> points) {
    return ObservedDemand(std::move(points), Unchecked{});
}

DemandBounds counterfactual_demand_bounds(const ObservedDemand& obs, const BudgetSet& target) {
    require_finite(target.p, "target price");
    require_finite(target.y, "target income");
    return bounds_at(obs, target.y, target.numeraire());
}

DemandBounds cv_pointwise_bounds(const ObservedDemand& obs, double y, double p0, double p) {
    require_finite(y, "income");
    require_finite(p0, "p0");
    require_finite(p, "p");
    return bounds_at(obs, y + p - p0, y - p0);
}

CvInterval average_cv_bounds(const ObservedDemand& obs, double y, double p0, double p1, std::size_t n_nodes,
                             CvQuadrature mode) {
    require_finite(y, "income");
    require_finite(p0, "p0");
    require_finite(p1, "p1");
    if (!(p0 < p1)) throw Error(ErrorCode::InvalidArgument, "need p0 < p1");

    CvInterval out;
    if (mode == CvQuadrature::Trapezoid) {
        if (n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "trapezoid quadrature needs at least 2 nodes");
        const auto nodes = linspace(p0, p1, n_nodes);
        const double h = (p1 - p0) / static_cast<double>(n_nodes - 1);
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < n_nodes; ++k) {
            const auto bnd = cv_pointwise_bounds(obs, y, p0, nodes[k]);
            const double w = (k == 0 || k + 1 == n_nodes) ? 0.5 * h : h;
            lo += w * bnd.lo;
            hi += w * bnd.hi;
            out.attaining.push_back({nodes[k], bnd});
        }
        out.lower = lo;
        out.upper = hi;
        out.quadrature_nodes = n_nodes;
        return out;
    }

    // an observation with income a_i enters/leaves at p = a_i - y + p0
    std::vector<double> cuts{p0, p1};
    for (const auto& pt : obs.points()) {
        const double c = pt.a() - y + p0;
        if (c > p0 && c < p1) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double width = cuts[k + 1] - cuts[k];
        const double mid = cuts[k] + 0.5 * width;
        const auto bnd = cv_pointwise_bounds(obs, y, p0, mid);
        lo += width * bnd.lo;
        hi += width * bnd.hi;
        out.attaining.push_back({mid, bnd});
    }
    out.lower = lo;
    out.upper = hi;
    out.quadrature_nodes = cuts.size() - 1;
    return out;
}

double average_cv_exact(const ChoiceSurface& q, double y, double p0, double p1, std::size_t n_nodes) {
    if (!(p0 < p1)) throw Error(ErrorCode::InvalidArgument, "need p0 < p1");
    if (n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "trapezoid quadrature needs at least 2 nodes");
    const auto nodes = linspace(p0, p1, n_nodes);
    const double h = (p1 - p0) / static_cast<double>(n_nodes - 1);
    double total = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
        double v = 0.0;
        try {
            v = q(y + nodes[k] - p0, y - p0);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::Evaluation, "evaluation failed on the integration path at p=" +
                                                   csv::format_number(nodes[k]) + ": " + e.what());
        }
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::Evaluation, "non-finite value on the integration path at p=" +
                                                   csv::format_number(nodes[k]));
        }
        total += ((k == 0 || k + 1 == n_nodes) ? 0.5 * h : h) * v;
    }
    return total;
}

ObservedDemandFile read_observed_demand(std::istream& in, csv::Mode mode, const BudgetPolicy& policy) {
    ObservedDemandFile out;
    auto table = csv::read_table(in, {"price", "income", "q"}, mode, out.skipped);
    out.has_group = table.has_group;
    std::map<std::string, std::vector<DemandPoint>> groups;
    for (const auto& row : table.rows) {
        const auto p = csv::parse_number(row.fields[0]);
        const auto y = csv::parse_number(row.fields[1]);
        const auto q = csv::parse_number(row.fields[2]);
        std::string why;
        if (!p || !y || !q) {
            why = "unparsable price, income or q";
        } else if (!(*q >= 0.0 && *q <= 1.0)) {
            why = "q outside [0,1]";
        } else {
            try {
                validate_budget({*p, *y}, policy);
            } catch (const Error& e) {
                why = e.what();
            }
        }
        if (!why.empty()) {
            if (mode == csv::Mode::Strict) {
                throw Error(ErrorCode::Io, "line " + std::to_string(row.line) + ": " + why);
            }
            ++out.skipped;
            continue;
        }
        groups[row.group.value_or("")].push_back({{*p, *y}, *q});
    }
    out.groups.assign(groups.begin(), groups.end());
    return out;
}

ObservedDemandFile load_observed_demand(const std::filesystem::path& path, csv::Mode mode,
                                        const BudgetPolicy& policy) {
    auto in = csv::open_input(path);
    return read_observed_demand(in, mode, policy);
}

}  // namespace binchoice
