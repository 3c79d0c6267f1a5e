#include "slova/core.hpp"

#include <algorithm>
#include <cmath>

namespace slova {

void require_finite(const Matrix& m, const std::string& what) {
    for (double v : m.data())
        if (!std::isfinite(v))
            throw ValidationError(what + ": non-finite entry");
}

void require_nonempty(const Matrix& m, const std::string& what) {
    if (m.rows() == 0 || m.cols() == 0)
        throw ValidationError(what + ": empty matrix");
}

void require_probabilities(const Matrix& m, const std::string& what) {
    for (double v : m.data())
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError(what + ": entry outside [0,1]");
}

void require_labels(const LabelVector& y, std::size_t n_rows, std::size_t n_classes,
                    const std::string& what) {
    if (y.size() != n_rows)
        throw ValidationError(what + ": label count does not match row count");
    for (int v : y)
        if (v < 0 || static_cast<std::size_t>(v) >= n_classes)
            throw ValidationError(what + ": label out of range [0," +
                                  std::to_string(n_classes) + ")");
}

}  // namespace slova

namespace slova::core {

double sigmoid(double f) {
    if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
    const double e = std::exp(f);
    return e / (1.0 + e);
}

ProbMatrix sigmoid_probs(const LogitMatrix& logits) {
    require_nonempty(logits, "sigmoid_probs");
    require_finite(logits, "sigmoid_probs");
    ProbMatrix out{Matrix(logits.rows(), logits.cols()), ProbKind::sigmoid};
    for (std::size_t i = 0; i < logits.size(); ++i)
        out.values.data()[i] = sigmoid(logits.data()[i]);
    return out;
}

namespace {

double clamped_log(double x) { return std::log(std::max(x, kLogClamp)); }

}  // namespace

ProbMatrix slova_probs(const ProbMatrix& sigmoid_p) {
    require_nonempty(sigmoid_p.values, "slova_probs");
    require_probabilities(sigmoid_p.values, "slova_probs");
    const Matrix& p = sigmoid_p.values;
    const std::size_t n = p.rows(), k = p.cols();
    ProbMatrix out{Matrix(n, k), ProbKind::slova};
    std::vector<double> log1m(k);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            log1m[j] = clamped_log(1.0 - p(i, j));
            total += log1m[j];
        }
        for (std::size_t j = 0; j < k; ++j) {
            const double pj = p(i, j);
            // empty product for K=1: total - log1m[j] == 0 exactly
            out.values(i, j) = pj == 0.0 ? 0.0 : pj * std::exp(total - log1m[j]);
        }
    }
    return out;
}

namespace {

std::vector<double> row_max(const ProbMatrix& pm) {
    require_nonempty(pm.values, "confidence");
    std::vector<double> out(pm.rows());
    for (std::size_t i = 0; i < pm.rows(); ++i) {
        auto r = pm.values.row(i);
        out[i] = *std::max_element(r.begin(), r.end());
    }
    return out;
}

}  // namespace

std::vector<double> ova_confidence(const ProbMatrix& sigmoid_p) { return row_max(sigmoid_p); }

std::vector<double> slova_confidence(const ProbMatrix& slova_p) { return row_max(slova_p); }

std::vector<double> none_prob(const ProbMatrix& sigmoid_p) {
    require_nonempty(sigmoid_p.values, "none_prob");
    require_probabilities(sigmoid_p.values, "none_prob");
    const Matrix& p = sigmoid_p.values;
    std::vector<double> out(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) total += clamped_log(1.0 - p(i, j));
        out[i] = std::exp(total);
    }
    return out;
}

std::vector<double> multilabel_confidence(const ProbMatrix& sigmoid_p) {
    require_nonempty(sigmoid_p.values, "multilabel_confidence");
    require_probabilities(sigmoid_p.values, "multilabel_confidence");
    const Matrix& p = sigmoid_p.values;
    std::vector<double> out(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double pj = p(i, j);
            total += clamped_log(pj >= 0.5 ? pj : 1.0 - pj);
        }
        out[i] = std::exp(total);
    }
    return out;
}

double ova_loss(const LogitMatrix& logits, const LabelVector& labels) {
    require_nonempty(logits, "ova_loss");
    require_finite(logits, "ova_loss");
    require_labels(labels, logits.rows(), logits.cols(), "ova_loss");
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            const double p = sigmoid(logits(i, j));
            const bool positive = static_cast<std::size_t>(labels[i]) == j;
            total -= clamped_log(positive ? p : 1.0 - p);
        }
    }
    return total / static_cast<double>(logits.rows());
}

std::size_t argmax_row(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

}  // namespace slova::core
