#include "binchoice/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "binchoice/error.hpp"

namespace binchoice::csv {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void bad_row(std::size_t line, const std::string& why) {
    throw Error(ErrorCode::Io, "line " + std::to_string(line) + ": " + why);
}

}  // namespace

std::optional<double> parse_number(const std::string& field) {
    if (field.empty()) return std::nullopt;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (*first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

Table read_table(std::istream& in, const std::vector<std::string>& required, Mode mode, std::size_t& skipped) {
    skipped = 0;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::Io, "missing CSV header row");

    std::vector<std::size_t> index;
    for (const auto& name : required) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorCode::Io, "CSV header lacks column '" + name + "'");
        index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    const auto group_it = std::find(header.begin(), header.end(), "group");
    Table table;
    table.has_group = group_it != header.end();
    const auto group_index = static_cast<std::size_t>(group_it - header.begin());

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (fields.size() != header.size()) {
            if (mode == Mode::Strict) {
                bad_row(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
            }
            ++skipped;
            continue;
        }
        Row row;
        row.line = line_no;
        for (auto k : index) row.fields.push_back(fields[k]);
        if (table.has_group) row.group = fields[group_index];
        table.rows.push_back(std::move(row));
    }
    return table;
}

DatasetFile read_dataset(std::istream& in, Mode mode, const BudgetPolicy& policy) {
    DatasetFile out;
    auto table = read_table(in, {"price", "income", "choice"}, mode, out.skipped);
    out.has_group = table.has_group;
    for (const auto& row : table.rows) {
        const auto p = parse_number(row.fields[0]);
        const auto y = parse_number(row.fields[1]);
        const auto& c = row.fields[2];
        std::string why;
        if (!p || !y) {
            why = "unparsable price or income";
        } else if (c != "0" && c != "1") {
            why = "choice must be 0 or 1, got '" + c + "'";
        } else {
            try {
                validate_budget({*p, *y}, policy);
            } catch (const Error& e) {
                why = e.what();
            }
        }
        if (!why.empty()) {
            if (mode == Mode::Strict) bad_row(row.line, why);
            ++out.skipped;
            continue;
        }
        out.data.push_back({{*p, *y}, c == "1" ? 1 : 0, row.group});
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return in;
}

DatasetFile load_dataset(const std::filesystem::path& path, Mode mode, const BudgetPolicy& policy) {
    auto in = open_input(path);
    return read_dataset(in, mode, policy);
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
    const bool grouped = std::any_of(data.begin(), data.end(), [](const auto& r) { return r.group.has_value(); });
    out << (grouped ? "price,income,choice,group\n" : "price,income,choice\n");
    for (const auto& r : data) {
        out << format_number(r.budget.p) << ',' << format_number(r.budget.y) << ',' << r.choice;
        if (grouped) out << ',' << r.group.value_or("");
        out << '\n';
    }
}

GridFile read_grid(std::istream& in, Mode mode) {
    std::size_t skipped = 0;
    auto table = read_table(in, {"a", "b", "q"}, mode, skipped);
    std::vector<GridCell> cells;
    for (const auto& row : table.rows) {
        const auto a = parse_number(row.fields[0]);
        const auto b = parse_number(row.fields[1]);
        const auto q = parse_number(row.fields[2]);
        std::string why;
        if (!a || !b || !q) {
            why = "unparsable a, b or q";
        } else if (!std::isfinite(*a) || !std::isfinite(*b)) {
            why = "non-finite a or b";
        } else if (!(*q >= 0.0 && *q <= 1.0)) {
            why = "q outside [0,1]";
        }
        if (!why.empty()) {
            if (mode == Mode::Strict) bad_row(row.line, why);
            ++skipped;
            continue;
        }
        cells.push_back({*a, *b, *q});
    }
    if (cells.empty()) throw Error(ErrorCode::Io, "grid file has no usable rows");
    return {ChoiceProbGrid::from_cells(cells), skipped};
}

GridFile load_grid(const std::filesystem::path& path, Mode mode) {
    auto in = open_input(path);
    return read_grid(in, mode);
}

void write_grid(std::ostream& out, const ChoiceProbGrid& grid) {
    out << "a,b,q\n";
    for (const auto& c : grid.cells()) {
        out << format_number(c.a) << ',' << format_number(c.b) << ',' << format_number(c.q) << '\n';
    }
}

}  // namespace binchoice::csv
