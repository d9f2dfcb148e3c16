#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace salesrf::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes; embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

std::string quote(std::string_view field);

/// Whole-file reader that tracks 1-based line numbers for error messages.
class Reader {
public:
    explicit Reader(const std::filesystem::path& path);

    const std::vector<std::string>& header() const { return header_; }
    const std::filesystem::path& path() const { return path_; }

    /// Next non-empty record, or false at end of file.
    bool next(std::vector<std::string>& fields);
    std::size_t line_number() const { return line_no_; }

    /// Column index by name, or throws a schema error listing `expected`.
    std::size_t column(std::string_view name, std::string_view expected) const;

    [[noreturn]] void fail(std::size_t column, const std::string& what) const;

private:
    std::filesystem::path path_;
    std::vector<std::string> lines_;
    std::size_t cursor_ = 0;
    std::size_t line_no_ = 0;
    std::vector<std::string> header_;
};

double parse_double(const Reader& reader, const std::vector<std::string>& fields,
                    std::size_t column);
long long parse_int(const Reader& reader, const std::vector<std::string>& fields,
                    std::size_t column);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace salesrf::csv
