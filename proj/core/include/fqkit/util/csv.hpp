#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace fqkit {

// 9 significant digits, '.' decimal point, no locale, "-0" folded to "0".
std::string format_real(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(std::initializer_list<std::string_view> cols);
    void header(const std::vector<std::string>& cols);

    CsvWriter& cell(double v);
    CsvWriter& cell(std::int64_t v);
    CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
    CsvWriter& cell(std::string_view v);
    void end_row();

private:
    void sep();

    std::ostream& out_;
    bool row_open_ = false;
};

// Parses a numeric CSV matrix. Blank lines are skipped; a first line that
// does not parse as numbers is treated as a header and dropped.
std::vector<std::vector<double>> parse_numeric_csv(std::string_view text);

}  // namespace fqkit
