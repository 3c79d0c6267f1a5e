#include "slova/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slova::io {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr != last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
    if (ec != std::errc{} || ptr != last)
        throw ValidationError(path + ": malformed value '" + cell + "' at line " +
                              std::to_string(line_no));
    if (!std::isfinite(v))
        throw ValidationError(path + ": non-finite value at line " + std::to_string(line_no));
    return v;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    table.header = split_line(line);
    const std::size_t cols = table.header.size();

    std::vector<double> data;
    std::size_t rows = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != cols)
            throw ValidationError(path + ": expected " + std::to_string(cols) +
                                  " columns, got " + std::to_string(cells.size()) +
                                  " at line " + std::to_string(line_no));
        for (const auto& c : cells) data.push_back(parse_cell(c, path, line_no));
        ++rows;
    }
    if (rows == 0) throw ValidationError(path + ": no data rows");
    table.values = Matrix(rows, cols);
    table.values.data() = std::move(data);
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values) {
    if (!header.empty() && header.size() != values.cols())
        throw ValidationError(path + ": header width does not match matrix");
    std::ofstream out(path);
    if (!out) throw ValidationError(path + ": cannot open file for writing");
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t j = 0; j < values.cols(); ++j)
            out << (j ? "," : "") << format_double(values(i, j));
        out << '\n';
    }
    if (!out) throw ValidationError(path + ": write failed");
}

LabelVector read_labels(const std::string& path) {
    CsvTable t = read_csv(path);
    if (t.values.cols() != 1)
        throw ValidationError(path + ": labels file must have a single column");
    LabelVector out(t.values.rows());
    for (std::size_t i = 0; i < t.values.rows(); ++i) {
        const double v = t.values(i, 0);
        if (v != std::floor(v) || v < 0)
            throw ValidationError(path + ": labels must be non-negative integers (line " +
                                  std::to_string(i + 2) + ")");
        out[i] = static_cast<int>(v);
    }
    return out;
}

void write_labels(const std::string& path, const LabelVector& labels) {
    std::ofstream out(path);
    if (!out) throw ValidationError(path + ": cannot open file for writing");
    out << "label\n";
    for (int v : labels) out << v << '\n';
}

}  // namespace slova::io
