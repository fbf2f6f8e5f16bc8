#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace roadsafe {

/// One data row keyed by header name, plus its 1-based line number.
struct CsvRow {
    std::size_t line = 0;
    std::map<std::string, std::string> fields;

    /// Throws ValidationError naming the line when the column is absent.
    [[nodiscard]] const std::string& at(const std::string& column) const;
};

/// RFC 4180-style: comma separated, double-quoted fields may hold commas and "" escapes.
/// The first non-empty line is the header. Throws ValidationError on ragged rows.
[[nodiscard]] std::vector<CsvRow> parse_csv(std::string_view text);

} // namespace roadsafe
