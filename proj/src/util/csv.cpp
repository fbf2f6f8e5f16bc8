#include "roadsafe/util/csv.hpp"

#include "roadsafe/error.hpp"

namespace roadsafe {

const std::string& CsvRow::at(const std::string& column) const
{
    auto it = fields.find(column);
    if (it == fields.end()) throw ValidationError("line " + std::to_string(line) + ": missing column '" + column + "'");
    return it->second;
}

namespace {

std::vector<std::string> split_record(std::string_view line, std::size_t line_no)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ValidationError("line " + std::to_string(line_no) + ": unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

} // namespace

std::vector<CsvRow> parse_csv(std::string_view text)
{
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        auto cells = split_record(line, line_no);
        if (header.empty()) {
            header = std::move(cells);
            continue;
        }
        if (cells.size() != header.size())
            throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(cells.size()));
        CsvRow row;
        row.line = line_no;
        for (std::size_t i = 0; i < header.size(); ++i) row.fields[header[i]] = std::move(cells[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace roadsafe
