#include "fqkit/util/csv.hpp"

#include <charconv>
#include <fmt/format.h>

#include "fqkit/util/error.hpp"

namespace fqkit {

std::string format_real(double v) {
    if (v == 0.0) return "0";
    return fmt::format("{:.9g}", v);
}

void CsvWriter::header(std::initializer_list<std::string_view> cols) {
    for (auto c : cols) cell(c);
    end_row();
}

void CsvWriter::header(const std::vector<std::string>& cols) {
    for (const auto& c : cols) cell(std::string_view(c));
    end_row();
}

void CsvWriter::sep() {
    if (row_open_) out_ << ',';
    row_open_ = true;
}

CsvWriter& CsvWriter::cell(double v) {
    sep();
    out_ << format_real(v);
    return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
    sep();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    out_ << '\n';
    row_open_ = false;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_row(std::string_view line, std::vector<double>& row) {
    row.clear();
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        std::string_view field = trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
        if (!field.empty() && field.front() == '+') field.remove_prefix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return false;
        row.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return true;
}

}  // namespace

std::vector<std::vector<double>> parse_numeric_csv(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool first = true;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (parse_row(line, row)) {
            rows.push_back(row);
        } else if (!first) {
            throw Error("csv line " + std::to_string(line_no) + " is not numeric");
        }
        first = false;
    }
    return rows;
}

}  // namespace fqkit
