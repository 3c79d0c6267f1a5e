#pragma once

#include <string>
#include <vector>

#include "slova/types.hpp"

namespace slova::io {

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;
};

/// Formats with 17 significant digits so reading back what was written is
/// lossless for doubles.
std::string format_double(double v);

/// Strict numeric CSV: comma separated, one header row, '.' decimal point.
/// Malformed rows and non-finite entries raise ValidationError naming the
/// 1-based line number. At least one data row is required.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values);

/// Single "label" column of zero-based integers.
LabelVector read_labels(const std::string& path);
void write_labels(const std::string& path, const LabelVector& labels);

}  // namespace slova::io
