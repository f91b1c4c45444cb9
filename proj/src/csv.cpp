#include "crescent/csv.hpp"

#include "crescent/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace crescent {

namespace {

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

} // namespace

CsvTable::CsvTable(std::string source, std::vector<std::string> header,
                   std::vector<std::vector<std::string>> rows)
    : source_(std::move(source)), header_(std::move(header)),
      rows_(std::move(rows))
{
}

bool CsvTable::has_column(std::string_view name) const
{
    return std::find(header_.begin(), header_.end(), name) != header_.end();
}

std::size_t CsvTable::column_index(std::string_view name) const
{
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) {
        throw ParseError(source_, 0, std::string(name), "missing column");
    }
    return static_cast<std::size_t>(it - header_.begin());
}

void CsvTable::require_columns(std::initializer_list<std::string_view> names) const
{
    for (auto name : names) {
        column_index(name);
    }
}

const std::string& CsvTable::text(std::size_t row, std::string_view column) const
{
    const std::size_t c = column_index(column);
    const auto& r = rows_.at(row);
    if (c >= r.size()) {
        throw ParseError(source_, row + 1, std::string(column), "missing field");
    }
    return r[c];
}

double CsvTable::number(std::size_t row, std::string_view column) const
{
    auto v = optional_number(row, column);
    if (!v) {
        throw ParseError(source_, row + 1, std::string(column),
                         "empty numeric field");
    }
    return *v;
}

std::optional<double> CsvTable::optional_number(std::size_t row,
                                                std::string_view column) const
{
    const std::string t = trim(text(row, column));
    if (t.empty()) {
        return std::nullopt;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError(source_, row + 1, std::string(column),
                         "not a number: '" + t + "'");
    }
    return value;
}

long long CsvTable::integer(std::size_t row, std::string_view column) const
{
    const std::string t = trim(text(row, column));
    long long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ParseError(source_, row + 1, std::string(column),
                         "not an integer: '" + t + "'");
    }
    return value;
}

bool CsvTable::boolean(std::size_t row, std::string_view column) const
{
    std::string t = trim(text(row, column));
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (t == "1" || t == "true" || t == "yes") {
        return true;
    }
    if (t == "0" || t == "false" || t == "no") {
        return false;
    }
    throw ParseError(source_, row + 1, std::string(column),
                     "not a boolean: '" + t + "'");
}

CsvTable parse_csv(std::string_view content, std::string source)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_quoted = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(field_quoted ? field : trim(field));
        field.clear();
        field_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record[0].empty();
        if (!blank) {
            records.push_back(std::move(record));
        }
        record.clear();
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!trim(field).empty()) {
                throw ParseError(source, line, "", "stray quote");
            }
            field.clear();
            in_quotes = true;
            field_quoted = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_record();
            ++line;
            break;
        default:
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw ParseError(source, line, "", "unterminated quoted field");
    }
    if (!field.empty() || !record.empty()) {
        end_record();
    }
    if (records.empty()) {
        throw ParseError(source, 0, "", "header row required");
    }
    std::vector<std::string> header = std::move(records.front());
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        header[0].erase(0, 3);
    }
    records.erase(records.begin());
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (records[r].size() != header.size()) {
            throw ParseError(source, r + 1, "",
                             "expected " + std::to_string(header.size()) +
                                 " fields, found " +
                                 std::to_string(records[r].size()));
        }
    }
    return CsvTable(std::move(source), std::move(header), std::move(records));
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFile(path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path)
{
    return parse_csv(read_text_file(path), path.filename().string());
}

std::string csv_field(std::string_view value)
{
    if (value.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(value);
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

} // namespace crescent
