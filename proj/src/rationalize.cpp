#include "binchoice/rationalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "binchoice/csv.hpp"
#include "binchoice/random.hpp"

namespace binchoice {

namespace {

// Column of q at numeraire b, linear between neighbouring b nodes.
std::vector<double> column_at(const ChoiceProbGrid& grid, double b) {
    const auto bs = grid.b_values();
    if (!(b >= bs.front() && b <= bs.back())) {
        std::ostringstream os;
        os.precision(17);
        os << "b=" << b << " outside grid range [" << bs.front() << ", " << bs.back() << "]";
        throw Error(ErrorCode::Extrapolation, os.str());
    }
    const std::size_t na = grid.a_size();
    std::vector<double> col(na);
    const auto it = std::lower_bound(bs.begin(), bs.end(), b);
    const auto j = static_cast<std::size_t>(it - bs.begin());
    if (*it == b) {
        for (std::size_t i = 0; i < na; ++i) col[i] = grid.q(i, j);
        return col;
    }
    const double t = (b - bs[j - 1]) / (bs[j] - bs[j - 1]);
    for (std::size_t i = 0; i < na; ++i) col[i] = (1.0 - t) * grid.q(i, j - 1) + t * grid.q(i, j);
    return col;
}

Reservation sup_level_set(std::span<const double> a, std::span<const double> col, double u) {
    if (col.back() >= u) return {Reservation::Kind::AboveDomain, std::numeric_limits<double>::infinity()};
    // largest node still at or above u
    std::size_t k = col.size() - 1;
    while (k > 0 && !(col[k - 1] >= u)) --k;
    if (k == 0) return {Reservation::Kind::BelowDomain, a.front()};
    --k;
    // col[k] >= u > col[k + 1]; solve on the segment
    const double frac = (col[k] - u) / (col[k] - col[k + 1]);
    double x = a[k] + frac * (a[k + 1] - a[k]);
    if (x >= a[k + 1]) x = std::nextafter(a[k + 1], a[k]);
    return {Reservation::Kind::Finite, std::max(x, a[k])};
}

}  // namespace

Reservation q_inverse(const ChoiceProbGrid& grid, double u, double b) {
    if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::InvalidArgument, "level u must lie in [0,1]");
    if (!grid.complete()) throw Error(ErrorCode::InvalidArgument, "q_inverse needs a grid without missing cells");
    const auto col = column_at(grid, b);
    return sup_level_set(grid.a_values(), col, u);
}

ChoiceSurface bilinear_surface(std::shared_ptr<const ChoiceProbGrid> grid) {
    if (!grid->complete()) throw Error(ErrorCode::InvalidArgument, "interpolation needs a grid without missing cells");
    return {[grid = std::move(grid)](double a, double b) {
        const auto as = grid->a_values();
        if (!(a >= as.front() && a <= as.back())) {
            throw Error(ErrorCode::Extrapolation, "a outside grid range");
        }
        const auto col = column_at(*grid, b);
        const auto it = std::lower_bound(as.begin(), as.end(), a);
        const auto i = static_cast<std::size_t>(it - as.begin());
        if (*it == a) return col[i];
        const double t = (a - as[i - 1]) / (as[i] - as[i - 1]);
        return (1.0 - t) * col[i - 1] + t * col[i];
    }};
}

RationalizingModel build_rationalizing_model(ChoiceProbGrid grid, const RationalizeOptions& options) {
    if (!grid.complete()) {
        throw Error(ErrorCode::InvalidArgument, "cannot rationalize a grid with missing cells");
    }
    ShapeOptions shape_options;
    shape_options.tol = 0.0;
    shape_options.continuity_jump_tol = options.continuity_jump_tol;
    auto report = check_shape(grid, shape_options);
    if (!report.monotone()) {
        const std::string what =
            "grid violates monotonicity (max violation " + csv::format_number(report.max_violation) + ")";
        throw NotRationalizableError(what, std::move(report));
    }
    if (!report.continuity_flags.empty() && !options.lenient) {
        const std::string what =
            "grid fails the continuity heuristic (" + std::to_string(report.continuity_flags.size()) + " jumps)";
        throw NotRationalizableError(what, std::move(report));
    }
    return RationalizingModel(std::make_shared<const ChoiceProbGrid>(std::move(grid)), std::move(report));
}

VerificationReport verify_rationalization(const RationalizingModel& model, const ChoiceProbGrid& grid,
                                          std::size_t n_draws, std::uint64_t seed, double tol, unsigned threads) {
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be at least 1");
    if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be nonnegative");
    if (!grid.complete()) throw Error(ErrorCode::InvalidArgument, "verification grid has missing cells");

    const auto as = grid.a_values();
    const auto bs = grid.b_values();
    const std::size_t na = as.size();
    const std::size_t nb = bs.size();
    constexpr std::size_t kChunk = 4096;
    const std::size_t n_chunks = (n_draws + kChunk - 1) / kChunk;

    // prefix[c][j * (na + 1) + k]: draws in chunk c admitting exactly the first k incomes
    std::vector<std::vector<std::size_t>> prefix(n_chunks, std::vector<std::size_t>(nb * (na + 1), 0));
    for_each_chunk(n_draws, kChunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        UniformStream rng(seed, c);
        auto& local = prefix[c];
        for (std::size_t d = begin; d < end; ++d) {
            const double v = rng.next();
            for (std::size_t j = 0; j < nb; ++j) {
                const Reservation w1 = model.w1(bs[j], v);
                std::size_t k = 0;
                while (k < na && w1.admits(model.w0(as[k], v))) ++k;
                ++local[j * (na + 1) + k];
            }
        }
    });

    VerificationReport report;
    report.n_draws = n_draws;
    report.tol = tol;
    report.frequencies.assign(na * nb, 0.0);
    bool first = true;
    for (std::size_t j = 0; j < nb; ++j) {
        std::vector<std::size_t> totals(na + 1, 0);
        for (const auto& local : prefix) {
            for (std::size_t k = 0; k <= na; ++k) totals[k] += local[j * (na + 1) + k];
        }
        // admitted at income i iff k > i
        std::size_t at_least = 0;
        for (std::size_t i = na; i-- > 0;) {
            at_least += totals[i + 1];
            const double freq = static_cast<double>(at_least) / static_cast<double>(n_draws);
            report.frequencies[i * nb + j] = freq;
            const double dev = std::abs(freq - grid.q(i, j));
            if (first || dev > report.max_deviation) {
                report.max_deviation = dev;
                report.worst_cell = {as[i], bs[j]};
                first = false;
            }
        }
    }
    report.pass = report.max_deviation <= tol;
    return report;
}

std::vector<double> quantile_levels(std::size_t n) {
    std::vector<double> levels(n);
    for (std::size_t k = 0; k < n; ++k) levels[k] = static_cast<double>(k + 1) / static_cast<double>(n + 1);
    return levels;
}

void write_w1_table(std::ostream& out, const RationalizingModel& model, const std::vector<double>& levels) {
    out << "v,b,w1,kind\n";
    for (double v : levels) {
        for (double b : model.source_grid().b_values()) {
            const auto r = model.w1(b, v);
            const char* kind = r.kind == Reservation::Kind::Finite       ? "finite"
                               : r.kind == Reservation::Kind::AboveDomain ? "above"
                                                                          : "below";
            out << csv::format_number(v) << ',' << csv::format_number(b) << ',' << csv::format_number(r.value) << ','
                << kind << '\n';
        }
    }
}

}  // namespace binchoice
