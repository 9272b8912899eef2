#include "binchoice/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "binchoice/bounds.hpp"
#include "binchoice/csv.hpp"
#include "binchoice/parametric.hpp"
#include "binchoice/random.hpp"
#include "binchoice/rationalize.hpp"
#include "binchoice/report.hpp"
#include "binchoice/shape.hpp"
#include "binchoice/simulate.hpp"
#include "binchoice/srp.hpp"

namespace binchoice::cli {

namespace {

using report::Json;

struct Globals {
    std::uint64_t seed = 1;
    std::optional<unsigned> threads;
    double tol = 0.0;
    bool human = false;
    bool lenient_csv = false;
    bool by_group = false;
    BudgetPolicy policy;

    [[nodiscard]] csv::Mode mode() const { return lenient_csv ? csv::Mode::Lenient : csv::Mode::Strict; }
};

// A finished analysis: the JSON body plus whether the verdict was negative.
struct Outcome {
    Json body;
    bool negative = false;
};

// Error codes that describe the data rather than the invocation.
bool is_verdict(ErrorCode code) {
    return code == ErrorCode::NotRationalizable || code == ErrorCode::Inconsistency;
}

struct GroupedOutcome {
    Json body;
    int exit = kExitPass;
};

template <typename Item>
GroupedOutcome run_groups(const std::vector<std::pair<std::string, Item>>& groups,
                          const std::function<Outcome(const Item&)>& analyse) {
    GroupedOutcome result;
    Json per_group = Json::object();
    bool all_pass = true;
    bool any_error = false;
    for (const auto& [label, item] : groups) {
        try {
            Outcome o = analyse(item);
            all_pass = all_pass && !o.negative;
            per_group[label] = std::move(o.body);
        } catch (const Error& e) {
            if (is_verdict(e.code())) {
                all_pass = false;
                Json entry = report::error_json(e.code(), e.what());
                entry["pass"] = false;
                per_group[label] = std::move(entry);
            } else {
                any_error = true;
                per_group[label] = report::error_json(e.code(), e.what());
            }
        }
    }
    result.body = {{"groups", std::move(per_group)}, {"pass", all_pass && !any_error}};
    result.exit = any_error ? kExitError : (all_pass ? kExitPass : kExitNegative);
    return result;
}

Outcome single(const std::function<Outcome()>& analyse) {
    try {
        return analyse();
    } catch (const Error& e) {
        if (!is_verdict(e.code())) throw;
        Json body = report::error_json(e.code(), e.what());
        body["pass"] = false;
        if (const auto* nr = dynamic_cast<const NotRationalizableError*>(&e)) {
            body["violations"] = nr->report().a_violations.size() + nr->report().b_violations.size();
        }
        return {std::move(body), true};
    }
}

std::vector<double> equal_edges(double lo, double hi, std::size_t bins) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    return linspace(lo, hi, bins + 1);
}

void emit(std::ostream& out, const Json& body) { out << body.dump(2) << '\n'; }

std::string verdict_word(int exit) {
    switch (exit) {
        case kExitPass: return "pass";
        case kExitNegative: return "negative";
        default: return "error";
    }
}

// ---- check ----------------------------------------------------------------

struct CheckArgs {
    std::string grid_path;
    std::string data_path;
    std::vector<double> a_edges;
    std::vector<double> b_edges;
    std::size_t bins = 5;
    std::size_t min_count = 1;
    bool check_limit = false;
    double continuity_tol = std::numeric_limits<double>::infinity();
};

Outcome check_grid(const ChoiceProbGrid& grid, const ShapeOptions& options) {
    const ShapeReport rep = check_shape(grid, options);
    Json body = report::to_json(rep, grid);
    body["cells"] = grid.present_count();
    return {std::move(body), !rep.pass()};
}

int do_check(const CheckArgs& args, const Globals& g, std::ostream& out, std::ostream& err) {
    ShapeOptions options{g.tol, args.check_limit, args.continuity_tol};
    if (!args.grid_path.empty()) {
        if (g.by_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a data file with a group column");
        const auto file = csv::load_grid(args.grid_path, g.mode());
        Outcome o = single([&] { return check_grid(file.grid, options); });
        o.body["skipped_rows"] = file.skipped;
        emit(out, o.body);
        const int code = o.negative ? kExitNegative : kExitPass;
        if (g.human) err << "check: " << verdict_word(code) << ", max violation " << o.body.value("max_violation", 0.0) << '\n';
        return code;
    }
    const auto file = csv::load_dataset(args.data_path, g.mode(), g.policy);
    if (file.data.empty()) throw Error(ErrorCode::InvalidArgument, "data file has no rows");
    std::vector<double> a_edges = args.a_edges;
    std::vector<double> b_edges = args.b_edges;
    if (a_edges.empty() || b_edges.empty()) {
        double a_lo = std::numeric_limits<double>::infinity(), a_hi = -a_lo, b_lo = a_lo, b_hi = -a_lo;
        for (const auto& row : file.data) {
            a_lo = std::min(a_lo, row.budget.y);
            a_hi = std::max(a_hi, row.budget.y);
            b_lo = std::min(b_lo, row.budget.numeraire());
            b_hi = std::max(b_hi, row.budget.numeraire());
        }
        if (a_edges.empty()) a_edges = equal_edges(a_lo, a_hi, args.bins);
        if (b_edges.empty()) b_edges = equal_edges(b_lo, b_hi, args.bins);
    }
    const auto analyse = [&](const Dataset& data) {
        const BinnedGrid binned = grid_from_dataset(data, a_edges, b_edges, args.min_count);
        Outcome o = check_grid(binned.grid, options);
        o.body["outside"] = binned.outside;
        return o;
    };
    int code = kExitPass;
    Json body;
    if (g.by_group) {
        if (!file.has_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a group column");
        auto grouped = run_groups<Dataset>(split_by_group(file.data), analyse);
        body = std::move(grouped.body);
        code = grouped.exit;
    } else {
        Outcome o = single([&] { return analyse(file.data); });
        body = std::move(o.body);
        code = o.negative ? kExitNegative : kExitPass;
    }
    body["skipped_rows"] = file.skipped;
    emit(out, body);
    if (g.human) err << "check: " << verdict_word(code) << '\n';
    return code;
}

// ---- rationalize ------------------------------------------------------------

struct RationalizeArgs {
    std::string grid_path;
    bool lenient = false;
    double continuity_tol = 0.5;
    std::size_t verify_draws = 0;
    std::optional<double> verify_tol;
    std::string export_path;
    std::size_t levels = 99;
};

int do_rationalize(const RationalizeArgs& args, const Globals& g, std::ostream& out, std::ostream& err) {
    if (g.by_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a data file with a group column");
    const auto file = csv::load_grid(args.grid_path, g.mode());
    Outcome o = single([&] {
        const RationalizingModel model =
            build_rationalizing_model(file.grid, {args.lenient, args.continuity_tol});
        Json body = {{"rationalizable", true},
                     {"flagged", model.flagged()},
                     {"shape", report::to_json(model.shape_report(), file.grid)}};
        bool negative = false;
        if (args.verify_draws > 0) {
            const double tol = args.verify_tol.value_or(2.0 / std::sqrt(static_cast<double>(args.verify_draws)));
            const auto rep = verify_rationalization(model, file.grid, args.verify_draws, g.seed, tol,
                                                    resolve_threads(g.threads));
            body["verification"] = report::to_json(rep);
            negative = !rep.pass;
        }
        if (!args.export_path.empty()) {
            std::ofstream table(args.export_path);
            if (!table) throw Error(ErrorCode::Io, "cannot write " + args.export_path);
            write_w1_table(table, model, quantile_levels(args.levels));
            body["export"] = args.export_path;
        }
        body["pass"] = !negative;
        return Outcome{std::move(body), negative};
    });
    emit(out, o.body);
    const int code = o.negative ? kExitNegative : kExitPass;
    if (g.human) err << "rationalize: " << verdict_word(code) << '\n';
    return code;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    std::string data_path;
    std::string link = "logit";
    bool constrain = true;
    double gtol = 1e-8;
    std::size_t max_iter = 50000;
};

int do_fit(const FitArgs& args, const Globals& g, std::ostream& out, std::ostream& err) {
    FitOptions options;
    options.link = parse_link(args.link);
    options.constrain = args.constrain;
    options.gtol = args.gtol;
    options.max_iter = args.max_iter;
    const auto file = csv::load_dataset(args.data_path, g.mode(), g.policy);
    const auto analyse = [&](const Dataset& data) {
        const FitResult fit = fit_constrained_mle(data, options);
        Json body = report::to_json(fit);
        body["rows"] = data.size();
        return Outcome{std::move(body), !fit.verdict.pass};
    };
    int code = kExitPass;
    Json body;
    if (g.by_group) {
        if (!file.has_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a group column");
        auto grouped = run_groups<Dataset>(split_by_group(file.data), analyse);
        body = std::move(grouped.body);
        code = grouped.exit;
    } else {
        Outcome o = single([&] { return analyse(file.data); });
        body = std::move(o.body);
        code = o.negative ? kExitNegative : kExitPass;
    }
    body["skipped_rows"] = file.skipped;
    emit(out, body);
    if (g.human) {
        err << "fit: " << verdict_word(code);
        if (body.contains("gamma")) err << ", gamma = " << body["gamma"].dump();
        err << '\n';
    }
    return code;
}

// ---- bounds / welfare -------------------------------------------------------

struct BoundsArgs {
    std::string obs_path;
    double target_p = 0.0;
    double target_y = 0.0;
};

struct WelfareArgs {
    std::string obs_path;
    double y = 0.0;
    double p0 = 0.0;
    double p1 = 0.0;
    std::size_t nodes = 1001;
    bool exact = false;
};

int run_observed(const std::string& path, const Globals& g, const std::string& name, std::ostream& out,
                 std::ostream& err, const std::function<Json(const ObservedDemand&)>& analyse) {
    auto file = load_observed_demand(path, g.mode(), g.policy);
    const auto wrap = [&](const std::vector<DemandPoint>& points) {
        Json body = analyse(ObservedDemand(points));
        body["pass"] = true;
        return Outcome{std::move(body), false};
    };
    int code = kExitPass;
    Json body;
    if (g.by_group) {
        if (!file.has_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a group column");
        auto grouped = run_groups<std::vector<DemandPoint>>(file.groups, wrap);
        body = std::move(grouped.body);
        code = grouped.exit;
    } else {
        std::vector<DemandPoint> all;
        for (auto& [label, points] : file.groups) all.insert(all.end(), points.begin(), points.end());
        Outcome o = single([&] { return wrap(all); });
        body = std::move(o.body);
        code = o.negative ? kExitNegative : kExitPass;
    }
    body["skipped_rows"] = file.skipped;
    emit(out, body);
    if (g.human) {
        err << name << ": " << verdict_word(code);
        if (body.contains("lower")) err << ", [" << body["lower"].dump() << ", " << body["upper"].dump() << "]";
        err << '\n';
    }
    return code;
}

// ---- srp ------------------------------------------------------------------

struct SrpArgs {
    std::string kind;
    double p1 = 0.0, y1 = 0.0, p2 = 0.0, y2 = 0.0, q1 = 0.0, q2 = 0.0;
};

int do_srp(const SrpArgs& args, const Globals& g, std::ostream& out, std::ostream& err) {
    if (g.by_group) throw Error(ErrorCode::InvalidArgument, "--by-group needs a data file with a group column");
    TwoBudgetCase c{parse_two_budget_kind(args.kind), {args.p1, args.y1}, {args.p2, args.y2}, args.q1, args.q2};
    c.validate();
    const SrpSolution sol = srp_feasible(c);
    Json body = report::to_json(c, sol);
    body["shape_holds"] = pairwise_shape_holds(c);
    emit(out, body);
    const int code = sol.feasible ? kExitPass : kExitNegative;
    if (g.human) err << "srp: " << (sol.feasible ? "feasible" : "infeasible") << '\n';
    return code;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string spec;
    std::vector<std::string> params;
    std::string output = "grid";
    double a_min = 0.0, a_max = 2.0;
    std::size_t a_n = 15;
    double b_min = 0.0, b_max = 2.0;
    std::size_t b_n = 15;
    std::size_t draws = 10000;
    double p_min = 0.0, p_max = 1.0;
    double y_min = 1.0, y_max = 2.0;
    std::size_t rows = 1000;
    std::string out_path;
};

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
    std::map<std::string, double> params;
    for (const auto& item : raw) {
        const auto eq = item.find('=');
        const auto value = eq == std::string::npos ? std::nullopt : csv::parse_number(item.substr(eq + 1));
        if (!value) throw Error(ErrorCode::InvalidArgument, "parameter '" + item + "' is not key=number");
        params[item.substr(0, eq)] = *value;
    }
    return params;
}

int do_simulate(const SimulateArgs& args, const Globals& g, std::ostream& out, std::ostream& err) {
    if (g.by_group) throw Error(ErrorCode::InvalidArgument, "--by-group does not apply to simulate");
    const PopulationSpec spec = catalog_spec(args.spec, parse_params(args.params));
    std::ostringstream table;
    Json summary = {{"spec", spec.descriptor}, {"seed", g.seed}, {"output", args.output}};
    if (args.output == "grid") {
        if (args.a_n < 2 || args.b_n < 2) throw Error(ErrorCode::InvalidArgument, "grid axes need at least 2 points");
        const auto as = linspace(args.a_min, args.a_max, args.a_n);
        const auto bs = linspace(args.b_min, args.b_max, args.b_n);
        const auto validation = validate_spec(spec, as, bs, std::min<std::size_t>(args.draws, 1000), g.seed);
        const auto grid = simulate_grid(spec, as, bs, args.draws, g.seed, resolve_threads(g.threads));
        csv::write_grid(table, grid);
        summary["draws"] = args.draws;
        summary["validation"] = report::to_json(validation);
    } else if (args.output == "dataset") {
        const auto data = simulate_dataset(spec, uniform_budgets(args.p_min, args.p_max, args.y_min, args.y_max),
                                           args.rows, g.seed);
        csv::write_dataset(table, data);
        summary["rows"] = args.rows;
    } else {
        throw Error(ErrorCode::InvalidArgument, "--output must be grid or dataset");
    }
    if (args.out_path.empty()) {
        out << table.str();
    } else {
        std::ofstream file(args.out_path, std::ios::binary);
        if (!file) throw Error(ErrorCode::Io, "cannot write " + args.out_path);
        file << table.str();
        summary["out"] = args.out_path;
        emit(out, summary);
    }
    if (g.human) err << "simulate: wrote " << args.output << " for " << spec.descriptor << '\n';
    return kExitPass;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Shape tests, rationalization, fitting and bounds for binary choice data", "binchoice"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "seed for every random draw");
    app.add_option("--threads", g.threads, "worker threads (default: BINARY_DEMAND_THREADS or all cores)");
    app.add_option("--tol", g.tol, "shape tolerance")->check(CLI::NonNegativeNumber);
    app.add_flag("--human", g.human, "print a short summary to stderr");
    app.add_flag("--lenient-csv", g.lenient_csv, "skip malformed CSV rows instead of failing");
    app.add_flag("--by-group", g.by_group, "run the analysis separately for each value of the group column");
    app.add_flag("--allow-negative-price", g.policy.allow_negative_price, "accept subsidies (p < 0)");
    app.add_flag("--allow-negative-numeraire", g.policy.allow_negative_numeraire, "accept p > y");

    CheckArgs check;
    auto* check_cmd = app.add_subcommand("check", "test a grid or binned data against the shape conditions");
    auto* grid_opt = check_cmd->add_option("--grid", check.grid_path, "grid CSV with columns a,b,q");
    auto* data_opt = check_cmd->add_option("--data", check.data_path, "dataset CSV with columns price,income,choice");
    grid_opt->excludes(data_opt);
    check_cmd->add_option("--a-edges", check.a_edges, "income bin edges")->delimiter(',')->needs(data_opt);
    check_cmd->add_option("--b-edges", check.b_edges, "numeraire bin edges")->delimiter(',')->needs(data_opt);
    check_cmd->add_option("--bins", check.bins, "equal-width bins per axis when edges are omitted")
        ->check(CLI::PositiveNumber);
    check_cmd->add_option("--min-count", check.min_count, "rows a bin needs to be reported")
        ->check(CLI::PositiveNumber);
    check_cmd->add_flag("--check-limit", check.check_limit, "flag columns where q stays below 1 at the lowest income");
    check_cmd->add_option("--continuity-tol", check.continuity_tol, "flag neighbouring cells jumping by more");

    RationalizeArgs rat;
    auto* rat_cmd = app.add_subcommand("rationalize", "construct utilities that reproduce a grid");
    rat_cmd->add_option("--grid", rat.grid_path, "grid CSV with columns a,b,q")->required();
    rat_cmd->add_flag("--lenient", rat.lenient, "accept grids with suspicious jumps and flag them");
    rat_cmd->add_option("--continuity-tol", rat.continuity_tol, "jump size treated as a discontinuity");
    rat_cmd->add_option("--verify-draws", rat.verify_draws, "Monte Carlo draws for the verification (0 skips)");
    rat_cmd->add_option("--verify-tol", rat.verify_tol, "allowed cell deviation (default 2/sqrt(draws))");
    rat_cmd->add_option("--export", rat.export_path, "write the w1 table to this CSV");
    rat_cmd->add_option("--levels", rat.levels, "number of quantile levels in the export")
        ->check(CLI::PositiveNumber);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "maximum likelihood for a logit or probit index model");
    fit_cmd->add_option("--data", fit.data_path, "dataset CSV with columns price,income,choice")->required();
    fit_cmd->add_option("--link", fit.link, "logit or probit");
    fit_cmd->add_flag("--constrain,!--no-constrain", fit.constrain, "impose the rationalizability constraints");
    fit_cmd->add_option("--gtol", fit.gtol, "projected gradient tolerance");
    fit_cmd->add_option("--max-iter", fit.max_iter, "iteration cap");

    BoundsArgs bnd;
    auto* bnd_cmd = app.add_subcommand("bounds", "bounds on demand at an unobserved budget");
    bnd_cmd->add_option("--obs", bnd.obs_path, "CSV with columns price,income,q")->required();
    bnd_cmd->add_option("--target-p", bnd.target_p)->required();
    bnd_cmd->add_option("--target-y", bnd.target_y)->required();

    WelfareArgs wel;
    auto* wel_cmd = app.add_subcommand("welfare", "bounds on average compensating variation");
    wel_cmd->add_option("--obs", wel.obs_path, "CSV with columns price,income,q")->required();
    wel_cmd->add_option("--y", wel.y, "income")->required();
    wel_cmd->add_option("--p0", wel.p0, "initial price")->required();
    wel_cmd->add_option("--p1", wel.p1, "new price")->required();
    wel_cmd->add_option("--nodes", wel.nodes, "trapezoid nodes");
    wel_cmd->add_flag("--exact-breakpoints", wel.exact, "integrate the step bounds exactly");

    SrpArgs srp;
    auto* srp_cmd = app.add_subcommand("srp", "two-budget stochastic revealed preference test");
    srp_cmd->add_option("--kind", srp.kind, "same-income or same-numeraire")->required();
    srp_cmd->add_option("--p1", srp.p1)->required();
    srp_cmd->add_option("--y1", srp.y1)->required();
    srp_cmd->add_option("--p2", srp.p2)->required();
    srp_cmd->add_option("--y2", srp.y2)->required();
    srp_cmd->add_option("--q1", srp.q1)->required();
    srp_cmd->add_option("--q2", srp.q2)->required();

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "draw a grid or dataset from a built-in population");
    sim_cmd->add_option("--spec", sim.spec, "uniform-additive, logistic-arum, random-coefficient or point-mass")
        ->required();
    sim_cmd->add_option("--param", sim.params, "spec parameter as key=value (repeatable)");
    sim_cmd->add_option("--output", sim.output, "grid or dataset");
    sim_cmd->add_option("--a-min", sim.a_min);
    sim_cmd->add_option("--a-max", sim.a_max);
    sim_cmd->add_option("--a-n", sim.a_n);
    sim_cmd->add_option("--b-min", sim.b_min);
    sim_cmd->add_option("--b-max", sim.b_max);
    sim_cmd->add_option("--b-n", sim.b_n);
    sim_cmd->add_option("--draws", sim.draws)->check(CLI::PositiveNumber);
    sim_cmd->add_option("--p-min", sim.p_min);
    sim_cmd->add_option("--p-max", sim.p_max);
    sim_cmd->add_option("--y-min", sim.y_min);
    sim_cmd->add_option("--y-max", sim.y_max);
    sim_cmd->add_option("--rows", sim.rows)->check(CLI::PositiveNumber);
    sim_cmd->add_option("--out", sim.out_path, "write the CSV here and print a JSON summary");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*check_cmd) {
            if (check.grid_path.empty() && check.data_path.empty()) {
                throw Error(ErrorCode::InvalidArgument, "check needs --grid or --data");
            }
            return do_check(check, g, out, err);
        }
        if (*rat_cmd) return do_rationalize(rat, g, out, err);
        if (*fit_cmd) return do_fit(fit, g, out, err);
        if (*bnd_cmd) {
            const BudgetSet target{bnd.target_p, bnd.target_y};
            validate_budget(target, g.policy);
            return run_observed(bnd.obs_path, g, "bounds", out, err, [&](const ObservedDemand& obs) {
                Json body = report::to_json(counterfactual_demand_bounds(obs, target));
                body["target"] = report::to_json(target);
                return body;
            });
        }
        if (*wel_cmd) {
            const auto mode = wel.exact ? CvQuadrature::ExactBreakpoints : CvQuadrature::Trapezoid;
            return run_observed(wel.obs_path, g, "welfare", out, err, [&](const ObservedDemand& obs) {
                Json body = report::to_json(average_cv_bounds(obs, wel.y, wel.p0, wel.p1, wel.nodes, mode));
                body["quadrature"] = wel.exact ? "exact-breakpoints" : "trapezoid";
                return body;
            });
        }
        if (*srp_cmd) return do_srp(srp, g, out, err);
        if (*sim_cmd) return do_simulate(sim, g, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace binchoice::cli
