#pragma once

#include <string>
#include <string_view>

#include "fqkit/lut/kernel.hpp"

namespace fqkit::lut {

// JSON (keys sorted):
//   table: {"entries": [...], "entry_max": int, "entry_min": int, "i_bit": int, "t_bit": int}
//   pair:  {"in_scale", "in_zero_point", "out_scale", "out_zero_point", "table1", "table2"}
//   linear: {"in_scale", "in_zero_point", "out_scale", "out_zero_point", "table"}
// entry_min/entry_max and the zero points are optional on input.
std::string to_json(const LutTable& table);
std::string to_json(const DulutPair& pair);
std::string to_json(const LinearLut& lut);

LutTable table_from_json(std::string_view text);
DulutPair pair_from_json(std::string_view text);
LinearLut linear_from_json(std::string_view text);

// Little-endian binary dump, layout in docs/lut_binary_format.md.
std::string to_binary(const DulutPair& pair);
std::string to_binary(const LinearLut& lut);

struct BinaryArtifact {
    AffineMap input;
    AffineMap output;
    std::vector<LutTable> tables;  // 1 (linear) or 2 (pair)
};
BinaryArtifact from_binary(std::string_view bytes);

}  // namespace fqkit::lut
