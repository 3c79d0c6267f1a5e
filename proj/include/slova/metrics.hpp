#pragma once

#include <vector>

#include "slova/types.hpp"

namespace slova::metrics {

inline constexpr double kProbFloor = 1e-12;
inline constexpr int kDefaultBins = 15;

struct ReliabilityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double avg_conf = 0.0;
    double avg_acc = 0.0;
};

struct EceResult {
    double ece = 0.0;
    std::vector<ReliabilityBin> bins;
};

/// Per-dataset metrics bundle.
struct EvalReport {
    double accuracy = 0.0;
    double ece = 0.0;
    double nll = 0.0;
    double brier = 0.0;
    double mmc = 0.0;
    std::vector<ReliabilityBin> bins;
};

/// Binned calibration error over raw (confidence, correct) pairs. Bins are
/// equal-width over (0,1]; a sample lands in bin ceil(conf * bins), with
/// conf = 0 assigned to bin 1. By default the per-bin gaps are weighted by
/// |B_i|/N; normalize_by_bins switches the denominator to the bin count.
EceResult ece_from_pairs(const std::vector<double>& conf, const std::vector<int>& correct,
                         int bins, bool normalize_by_bins = false);

/// ECE of a probability matrix: confidence = row max, prediction = row
/// argmax (lowest index wins ties).
EceResult ece(const ProbMatrix& p, const LabelVector& labels, int bins,
              bool normalize_by_bins = false);

/// Mean over samples of sum_k (p_k - [k == y])^2, on the vectors as given.
double brier(const ProbMatrix& p, const LabelVector& labels);

/// Mean over samples of -log p(y|x), probabilities clamped to [1e-12, 1].
double nll(const ProbMatrix& p, const LabelVector& labels);

/// Mean maximum confidence: mean over rows of the row max.
double mmc(const ProbMatrix& p);

double accuracy(const ProbMatrix& p, const LabelVector& labels);

/// All of the above in one pass-friendly bundle.
EvalReport evaluate(const ProbMatrix& p, const LabelVector& labels, int bins = kDefaultBins);

/// Row-wise softmax of raw logits (baseline predictive distribution).
Matrix softmax_probs(const LogitMatrix& logits);

/// Mean softmax cross entropy of logits/T against the labels.
double softmax_nll(const LogitMatrix& logits, const LabelVector& labels, double temperature);

struct TempScaleResult {
    double temperature = 1.0;
    bool degenerate = false;  // all labels identical; T is best found anyway
};

/// Single-scalar temperature baseline: minimizes softmax NLL of logits/T by
/// golden-section search over log T in [-3, 3]. Deterministic.
TempScaleResult temperature_scale_fit(const LogitMatrix& logits, const LabelVector& labels);

struct RankingTable {
    Matrix scores;      // rows = cases, cols = methods
    Matrix ranks;       // per-case ranks, ties share the mean rank
    std::vector<double> mean_ranks;
    double chi2 = 0.0;              // Friedman statistic
    double critical_distance = 0.0; // Bonferroni-Dunn CD at the chosen alpha
};

/// Friedman ranking plus the Bonferroni-Dunn critical distance. alpha must
/// be 0.05 or 0.10; the two-tailed q table covers up to 10 methods.
RankingTable friedman_dunn(const Matrix& scores, bool lower_is_better, double alpha);

}  // namespace slova::metrics
