#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crescent {

/// A header-addressed CSV table (RFC 4180 quoting, UTF-8).
class CsvTable
{
public:
    CsvTable(std::string source, std::vector<std::string> header,
             std::vector<std::vector<std::string>> rows);

    const std::string& source() const noexcept { return source_; }
    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t size() const noexcept { return rows_.size(); }

    bool has_column(std::string_view name) const;

    /// Raw field; rows are 0-based, reported 1-based (after the header) in errors.
    const std::string& text(std::size_t row, std::string_view column) const;

    double number(std::size_t row, std::string_view column) const;
    std::optional<double> optional_number(std::size_t row,
                                          std::string_view column) const;
    long long integer(std::size_t row, std::string_view column) const;
    bool boolean(std::size_t row, std::string_view column) const;

    /// Throws ParseError unless every named column exists.
    void require_columns(std::initializer_list<std::string_view> names) const;

private:
    std::size_t column_index(std::string_view name) const;

    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Parses CSV text. Blank lines are skipped.
CsvTable parse_csv(std::string_view content, std::string source);

/// Reads a file; throws MissingFile when absent.
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains a delimiter, quote or newline.
std::string csv_field(std::string_view value);

std::string read_text_file(const std::filesystem::path& path);

} // namespace crescent
