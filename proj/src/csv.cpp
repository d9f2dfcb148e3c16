#include "salesrf/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "salesrf/error.hpp"

namespace salesrf::csv {

std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Reader::Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines_.push_back(std::move(line));
    }
    // Strip a UTF-8 byte-order mark.
    if (!lines_.empty() && lines_[0].rfind("\xEF\xBB\xBF", 0) == 0) lines_[0].erase(0, 3);
    if (lines_.empty() || lines_[0].empty())
        throw Error(ErrorKind::Schema, fmt::format("{}: missing header row", path.string()));
    header_ = split_record(lines_[0]);
    cursor_ = 1;
    line_no_ = 1;
}

bool Reader::next(std::vector<std::string>& fields) {
    while (cursor_ < lines_.size()) {
        line_no_ = cursor_ + 1;
        const std::string& line = lines_[cursor_++];
        if (line.empty()) continue;
        fields = split_record(line);
        if (fields.size() != header_.size()) {
            throw Error(ErrorKind::Parse,
                        fmt::format("{}:{}: expected {} fields, found {}", path_.string(),
                                    line_no_, header_.size(), fields.size()));
        }
        return true;
    }
    return false;
}

std::size_t Reader::column(std::string_view name, std::string_view expected) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    throw Error(ErrorKind::Schema,
                fmt::format("{}: unknown header layout, missing column '{}'; expected columns: {}",
                            path_.string(), name, expected));
}

void Reader::fail(std::size_t column, const std::string& what) const {
    const std::string name = column < header_.size() ? header_[column] : "?";
    throw Error(ErrorKind::Parse, fmt::format("{}:{}: column '{}': {}", path_.string(),
                                              line_no_, name, what));
}

double parse_double(const Reader& reader, const std::vector<std::string>& fields,
                    std::size_t column) {
    const std::string& text = fields[column];
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last)
        reader.fail(column, fmt::format("not a number: '{}'", text));
    return value;
}

long long parse_int(const Reader& reader, const std::vector<std::string>& fields,
                    std::size_t column) {
    const std::string& text = fields[column];
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        reader.fail(column, fmt::format("not an integer: '{}'", text));
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::Io, fmt::format("write failed for {}", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace salesrf::csv
