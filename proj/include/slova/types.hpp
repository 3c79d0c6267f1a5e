#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace slova {

/// Raised when inputs violate a documented precondition (shape mismatch,
/// out-of-range label, non-finite entry, malformed file, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a computation fails numerically (diverged training, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dense row-major matrix of doubles. Rows are samples, columns are classes
/// or features depending on context.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_)
                throw ValidationError("Matrix::from_rows: ragged rows");
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Raw per-class network outputs f_k(x); one row per sample.
using LogitMatrix = Matrix;

/// Zero-based class index per sample.
using LabelVector = std::vector<int>;

enum class ProbKind { sigmoid, slova, calibrated, softmax };

/// Probability matrix tagged with how its entries are to be interpreted.
struct ProbMatrix {
    Matrix values;
    ProbKind kind = ProbKind::sigmoid;

    std::size_t rows() const { return values.rows(); }
    std::size_t cols() const { return values.cols(); }
};

void require_finite(const Matrix& m, const std::string& what);
void require_nonempty(const Matrix& m, const std::string& what);
void require_probabilities(const Matrix& m, const std::string& what);
void require_labels(const LabelVector& y, std::size_t n_rows, std::size_t n_classes,
                    const std::string& what);

}  // namespace slova
