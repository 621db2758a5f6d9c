#pragma once

#include <iosfwd>
#include <string>

#include "sindex/dataset.hpp"

namespace sindex {

// Dataset CSV: header "x1,...,xd,y", one sample per line, decimal notation
// with optional scientific exponent. Parse errors carry line numbers.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv_file(const std::string& path);

// Writes doubles in shortest round-trip form.
void write_dataset_csv(std::ostream& out, const Dataset& ds);
void write_dataset_csv_file(const std::string& path, const Dataset& ds);

std::string format_double(double v);  // shortest round-trip decimal
double parse_double(const std::string& tok, int line_no);

}  // namespace sindex
