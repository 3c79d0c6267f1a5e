#pragma once

#include "slova/types.hpp"

namespace slova::core {

/// Floor for log arguments; keeps products finite instead of collapsing to
/// hard zero when a sigmoid saturates.
inline constexpr double kLogClamp = 1e-12;

/// Numerically stable logistic function, exact at 0 and safe for |f| up to
/// at least 1e4.
double sigmoid(double f);

/// p(k|x) = 1 / (1 + exp(-f_k(x))) per class, per sample.
ProbMatrix sigmoid_probs(const LogitMatrix& logits);

/// P(k|x) = p(k|x) * prod_{j != k} (1 - p(j|x)): the probability that the
/// model asserts class k and rejects all others. The (1-p) product is
/// accumulated in log space (clamped at kLogClamp) so large K does not
/// underflow; the leading p_k factor is applied outside the exponential,
/// which also guarantees every entry stays <= p_k in floating point.
ProbMatrix slova_probs(const ProbMatrix& sigmoid_p);

/// Per-row max of the sigmoid matrix.
std::vector<double> ova_confidence(const ProbMatrix& sigmoid_p);

/// Per-row max of the single-label matrix.
std::vector<double> slova_confidence(const ProbMatrix& slova_p);

/// prod_k (1 - p(k|x)): probability that no class is correct.
std::vector<double> none_prob(const ProbMatrix& sigmoid_p);

/// Multi-label confidence: prod_{k: p >= 1/2} p * prod_{j: p < 1/2} (1 - p).
/// The p = 1/2 boundary belongs to the positive factor.
std::vector<double> multilabel_confidence(const ProbMatrix& sigmoid_p);

/// Mean one-vs-all binary cross entropy: mean over samples of
/// -log p(y|x) - sum_{k != y} log(1 - p(k|x)), logs clamped at kLogClamp.
double ova_loss(const LogitMatrix& logits, const LabelVector& labels);

/// Row argmax with lowest-index tie-break.
std::size_t argmax_row(std::span<const double> row);

}  // namespace slova::core
