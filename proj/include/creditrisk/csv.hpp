#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "creditrisk/errors.hpp"

namespace creditrisk {

// Raw parsed CSV: header plus row-major text cells. Cell text is kept
// verbatim; missingness is a predicate over the text, not a destructive
// rewrite.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_columns() const { return columns.size(); }

    std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        return std::nullopt;
    }
};

// Missing markers: "", "NA", "n/a", "null" (case-insensitive).
inline bool is_missing_cell(std::string_view cell) {
    if (cell.empty()) return true;
    auto equals_ci = [cell](std::string_view marker) {
        if (cell.size() != marker.size()) return false;
        for (std::size_t i = 0; i < cell.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(cell[i])) != marker[i]) return false;
        }
        return true;
    };
    return equals_ci("na") || equals_ci("n/a") || equals_ci("null");
}

inline std::optional<double> parse_double(std::string_view cell) {
    // from_chars does not skip whitespace; real-world CSVs pad cells.
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    if (cell.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

namespace detail {

// One RFC-4180 record; quoted fields may contain commas, escaped quotes
// ("") and line breaks. Returns false at end of input.
inline bool read_record(std::istream& in, std::vector<std::string>& fields,
                        std::size_t& line_number) {
    fields.clear();
    int c = in.get();
    if (c == std::istream::traits_type::eof()) return false;

    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    for (;;) {
        if (c == std::istream::traits_type::eof()) {
            if (in_quotes) {
                throw ParseError("unterminated quoted field at line " +
                                 std::to_string(line_number));
            }
            fields.push_back(std::move(field));
            return true;
        }
        const char ch = static_cast<char>(c);
        saw_any = true;
        if (in_quotes) {
            if (ch == '"') {
                const int next = in.peek();
                if (next == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_number;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // swallow; CRLF handled at the '\n'
        } else if (ch == '\n') {
            ++line_number;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
        c = in.get();
    }
    (void)saw_any;
}

} // namespace detail

inline RawTable read_csv(std::istream& in) {
    RawTable table;
    std::size_t line_number = 1;
    std::vector<std::string> record;
    if (!detail::read_record(in, record, line_number)) {
        throw ParseError("empty input: a header row is required");
    }
    table.columns = record;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        for (std::size_t j = i + 1; j < table.columns.size(); ++j) {
            if (table.columns[i] == table.columns[j]) {
                throw ParseError("duplicate header column '" + table.columns[i] + "'");
            }
        }
    }
    std::size_t row_number = 1;
    while (detail::read_record(in, record, line_number)) {
        ++row_number;
        if (record.size() == 1 && record[0].empty()) continue; // trailing blank line
        if (record.size() != table.columns.size()) {
            throw ParseError("row " + std::to_string(row_number) + " has " +
                             std::to_string(record.size()) + " fields, expected " +
                             std::to_string(table.columns.size()));
        }
        table.rows.push_back(record);
    }
    return table;
}

inline RawTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file '" + path + "'");
    return read_csv(in);
}

inline std::string csv_escape(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline void write_csv(std::ostream& out, const RawTable& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i > 0) out << ',';
        out << csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    }
}

inline void write_csv_file(const std::string& path, const RawTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open file '" + path + "' for writing");
    write_csv(out, table);
}

// Round-trip-exact formatting for doubles in emitted CSVs.
inline std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    (void)ec;
    return std::string(buffer, ptr);
}

} // namespace creditrisk
