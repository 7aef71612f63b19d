#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graphlaunder {

// RFC-4180-style CSV reader: comma separated, double-quote quoting with ""
// escapes, fields may span lines when quoted. Rows are streamed so large
// files never live in memory as strings.
class CsvReader {
public:
    explicit CsvReader(const std::string& path);

    // Reads the next record into `fields` (reused between calls).
    // Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based line number of the first line of the record last returned.
    int record_line() const noexcept { return record_line_; }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    int line_ = 0;
    int record_line_ = 0;
};

// Quotes a field iff it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

} // namespace graphlaunder
