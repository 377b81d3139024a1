#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace grag {

// Throw Error{Io} on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// %.17g, with ".0" appended when the result would read back as a JSON
// integer (keeps -0.0 and integral values typed as doubles).
std::string format_double(double value);

// JSON-escaped string literal including the quotes.
std::string json_quote(std::string_view text);

// RFC 4180 records: quoted fields may hold commas, doubled quotes and
// newlines. A trailing newline does not create an empty record.
struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line;  // 1-based line the record starts on
};
std::vector<CsvRecord> parse_csv(std::string_view text);

} // namespace grag
