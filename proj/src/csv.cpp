#include "graphlaunder/csv.hpp"

#include <charconv>
#include <cstdio>

#include "graphlaunder/errors.hpp"

namespace graphlaunder {

CsvReader::CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_.is_open()) {
        throw FileNotFound("cannot open " + path);
    }
}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) return false;
    ++line_;
    record_line_ = line_;

    std::string field;
    bool in_quotes = false;
    std::size_t i = 0;
    while (true) {
        if (i >= line.size()) {
            if (in_quotes) {
                // Quoted field continues on the next physical line.
                if (!std::getline(in_, line)) {
                    throw MalformedRow(path_ + ":" + std::to_string(record_line_) +
                                       ": unterminated quoted field");
                }
                ++line_;
                field.push_back('\n');
                i = 0;
                continue;
            }
            break;
        }
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++i;
        } else if (c == '\r' && i + 1 == line.size()) {
            ++i; // trailing CR from CRLF input
        } else {
            field.push_back(c);
            ++i;
        }
    }
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << csv_escape(fields[i]);
    }
    out.put('\n');
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return std::string(buf);
    }
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::int64_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

} // namespace graphlaunder
