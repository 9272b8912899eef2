#include "binchoice/report.hpp"

namespace binchoice::report {

namespace {

Json cell_json(const ChoiceProbGrid& grid, std::size_t i, std::size_t j) {
    return {{"i", i}, {"j", j}, {"a", grid.a_values()[i]}, {"b", grid.b_values()[j]}};
}

Json pair_json(const ChoiceProbGrid& grid, const CellPair& cells) {
    return {{"from", cell_json(grid, cells.i_from, cells.j_from)}, {"to", cell_json(grid, cells.i_to, cells.j_to)}};
}

Json violations_json(const std::vector<ShapeViolation>& list, const ChoiceProbGrid& grid) {
    Json out = Json::array();
    for (const auto& v : list) {
        Json entry = pair_json(grid, v.cells);
        entry["magnitude"] = v.magnitude;
        out.push_back(std::move(entry));
    }
    return out;
}

Json optional_budget(const std::optional<BudgetSet>& budget) {
    return budget ? to_json(*budget) : Json(nullptr);
}

}  // namespace

Json to_json(const BudgetSet& budget) { return {{"p", budget.p}, {"y", budget.y}}; }

Json to_json(const IncomeNumeraire& point) { return {{"a", point.a}, {"b", point.b}}; }

Json to_json(const ShapeReport& report, const ChoiceProbGrid& grid) {
    Json continuity = Json::array();
    for (const auto& f : report.continuity_flags) {
        Json entry = pair_json(grid, f.cells);
        entry["jump"] = f.jump;
        continuity.push_back(std::move(entry));
    }
    Json limits = Json::array();
    for (const auto& c : report.limit_checks) {
        if (!c.flagged) continue;
        limits.push_back({{"b", c.b}, {"q_at_min_a", c.q_at_min_a ? Json(*c.q_at_min_a) : Json(nullptr)}});
    }
    return {
        {"a_violations", violations_json(report.a_violations, grid)},
        {"b_violations", violations_json(report.b_violations, grid)},
        {"max_violation", report.max_violation},
        {"continuity_flags", std::move(continuity)},
        {"limit_flags", std::move(limits)},
        {"a_checked", report.a_checked},
        {"b_checked", report.b_checked},
        {"pass", report.pass()},
    };
}

Json to_json(const VerificationReport& report) {
    return {
        {"n_draws", report.n_draws},
        {"tol", report.tol},
        {"max_deviation", report.max_deviation},
        {"worst_cell", to_json(report.worst_cell)},
        {"pass", report.pass},
    };
}

Json to_json(const IndexModel& model) {
    return {{"gamma", {model.gamma0, model.gamma1, model.gamma2}}, {"link", std::string(to_string(model.link))}};
}

Json to_json(const RationalizabilityVerdict& verdict) {
    return {
        {"pass", verdict.pass},
        {"price_violated", verdict.price_violated},
        {"income_violated", verdict.income_violated},
        {"binding", verdict.binding()},
        {"limit_warning", verdict.limit_warning},
    };
}

Json to_json(const FitResult& fit) {
    return {
        {"gamma", {fit.model.gamma0, fit.model.gamma1, fit.model.gamma2}},
        {"link", std::string(to_string(fit.model.link))},
        {"loglik", fit.loglik},
        {"constrained", fit.constrained},
        {"binding", fit.verdict.binding()},
        {"rationalizable", to_json(fit.verdict)},
        {"iterations", fit.iterations},
        {"gtol_achieved", fit.gtol_achieved},
        {"pass", fit.verdict.pass},
    };
}

Json to_json(const DemandBounds& bounds) {
    return {
        {"lower", bounds.lo},
        {"upper", bounds.hi},
        {"attaining", {{"lower", optional_budget(bounds.lo_attained_at)}, {"upper", optional_budget(bounds.hi_attained_at)}}},
    };
}

Json to_json(const CvInterval& interval) {
    Json nodes = Json::array();
    for (const auto& node : interval.attaining) {
        nodes.push_back({{"p", node.p},
                         {"lower", node.bounds.lo},
                         {"upper", node.bounds.hi},
                         {"lower_at", optional_budget(node.bounds.lo_attained_at)},
                         {"upper_at", optional_budget(node.bounds.hi_attained_at)}});
    }
    return {
        {"lower", interval.lower},
        {"upper", interval.upper},
        {"quadrature_nodes", interval.quadrature_nodes},
        {"attaining", std::move(nodes)},
    };
}

Json to_json(const TwoBudgetCase& c, const SrpSolution& solution) {
    return {
        {"kind", std::string(to_string(c.kind))},
        {"budgets", {to_json(c.first), to_json(c.second)}},
        {"q", {c.q1, c.q2}},
        {"feasible", solution.feasible},
        {"pi", solution.pi ? Json(*solution.pi) : Json(nullptr)},
        {"pass", solution.feasible},
    };
}

Json to_json(const SpecValidation& validation) {
    return {
        {"w0_increasing", validation.w0_increasing},
        {"w1_nondecreasing", validation.w1_nondecreasing},
        {"tie_fraction", validation.tie_fraction},
        {"valid", validation.valid},
    };
}

Json error_json(ErrorCode code, const std::string& message) {
    return {{"error", {{"code", std::string(to_string(code))}, {"message", message}}}};
}

}  // namespace binchoice::report
