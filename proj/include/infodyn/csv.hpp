#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace infodyn {

struct CsvRow {
    std::size_t line = 0;  ///< 1-based line number in the source file
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
};

/// Strict comma-separated reader. Blank lines and lines starting with '#' are skipped.
/// The header must begin with `required_columns` (extra trailing columns are allowed);
/// every data row must have exactly as many fields as the header. Violations throw
/// DataError naming the file and line.
[[nodiscard]] CsvTable read_csv(const std::string& path, const std::vector<std::string>& required_columns);

[[nodiscard]] double parse_double(const CsvRow& row, std::size_t col, const std::string& path);
[[nodiscard]] std::int64_t parse_int64(const CsvRow& row, std::size_t col, const std::string& path);

/// File stem, e.g. "data/kraken_spread.csv" -> "kraken_spread".
[[nodiscard]] std::string default_label_from_path(const std::string& path);

}  // namespace infodyn
