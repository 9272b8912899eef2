#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "binchoice/core.hpp"

namespace binchoice::csv {

/// Strict rejects the file at the first bad row, lenient skips and counts.
enum class Mode { Strict, Lenient };

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;  ///< in the order the columns were requested
    std::optional<std::string> group;
};

struct Table {
    std::vector<Row> rows;
    bool has_group = false;
};

/// Reads a header-first CSV, locating `required` columns by name (any order).
/// The optional "group" column is picked up when present. Rows with the wrong
/// field count are rejected or skipped according to `mode`.
Table read_table(std::istream& in, const std::vector<std::string>& required, Mode mode, std::size_t& skipped);

/// Parses a decimal number with '.' as separator; nullopt on any junk.
[[nodiscard]] std::optional<double> parse_number(const std::string& field);

struct DatasetFile {
    Dataset data;
    std::size_t skipped = 0;
    bool has_group = false;
};

/// Columns `price,income,choice[,group]`.
DatasetFile read_dataset(std::istream& in, Mode mode = Mode::Strict, const BudgetPolicy& policy = {});
DatasetFile load_dataset(const std::filesystem::path& path, Mode mode = Mode::Strict,
                         const BudgetPolicy& policy = {});
void write_dataset(std::ostream& out, const Dataset& data);

struct GridFile {
    ChoiceProbGrid grid;
    std::size_t skipped = 0;
};

/// Long form `a,b,q`; combinations that never appear are missing cells.
GridFile read_grid(std::istream& in, Mode mode = Mode::Strict);
GridFile load_grid(const std::filesystem::path& path, Mode mode = Mode::Strict);
void write_grid(std::ostream& out, const ChoiceProbGrid& grid);

/// Opens a file for reading or throws an Io error.
std::ifstream open_input(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_number(double v);

}  // namespace binchoice::csv
