#include "infodyn/csv.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "infodyn/error.hpp"

namespace infodyn {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.pop_back();
        std::size_t lead = 0;
        while (lead < field.size() && (field[lead] == ' ' || field[lead] == '\t')) ++lead;
        out.push_back(field.substr(lead));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

CsvTable read_csv(const std::string& path, const std::vector<std::string>& required_columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto fields = split_fields(line);
        if (!have_header) {
            if (fields.size() < required_columns.size()) {
                throw DataError(fmt::format("{}:{}: header has {} columns, expected at least {}", path, lineno,
                                            fields.size(), required_columns.size()));
            }
            for (std::size_t i = 0; i < required_columns.size(); ++i) {
                if (fields[i] != required_columns[i]) {
                    throw DataError(fmt::format("{}:{}: header column {} is '{}', expected '{}'", path, lineno, i + 1,
                                                fields[i], required_columns[i]));
                }
            }
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw DataError(fmt::format("{}:{}: expected {} fields, found {}", path, lineno, table.header.size(),
                                        fields.size()));
        }
        table.rows.push_back(CsvRow{lineno, std::move(fields)});
    }
    if (!have_header) throw DataError(path + ": missing header");
    return table;
}

double parse_double(const CsvRow& row, std::size_t col, const std::string& path) {
    const std::string& f = row.fields.at(col);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() || !std::isfinite(v)) {
        throw DataError(fmt::format("{}:{}: field {} ('{}') is not a finite number", path, row.line, col + 1, f));
    }
    return v;
}

std::int64_t parse_int64(const CsvRow& row, std::size_t col, const std::string& path) {
    const std::string& f = row.fields.at(col);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || f.empty()) {
        throw DataError(fmt::format("{}:{}: field {} ('{}') is not an integer", path, row.line, col + 1, f));
    }
    return v;
}

std::string default_label_from_path(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

}  // namespace infodyn
