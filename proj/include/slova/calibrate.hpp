#pragma once

#include <cstdint>
#include <vector>

#include "slova/types.hpp"

namespace slova::calib {

/// Fitted exponential calibration map c(p) = sum_i beta_i * p^alpha_i with
/// alpha_i > 0, beta_i in (0,1), sum beta_i = 1. Monotone on [0,1] with
/// c(0) = 0 and c(1) = 1 by construction.
struct CalibrationModel {
    std::vector<double> alphas;
    std::vector<double> betas;
    double fit_loss = 0.0;
    std::uint64_t seed = 0;
    int epochs = 0;

    double evaluate(double p) const;
};

/// Sorted (probability, binary label) pairs with sliding-window moving
/// averages and the subset of averaged points selected for fitting.
struct CalibrationDataset {
    std::vector<double> sorted_probs;  // P, ascending
    std::vector<int> sorted_labels;    // D, co-sorted with P (stable)
    std::size_t window_size = 1;       // n
    std::vector<double> avg_conf;      // moving average of P
    std::vector<double> avg_acc;       // moving average of D
    std::vector<double> fit_conf;      // selected avg_conf points
    std::vector<double> fit_acc;       // selected avg_acc points
};

enum class NoiseMode { unit_uniform, feature_range_uniform };

/// Core of the calibration pipeline, working on raw (probability, 0/1)
/// pairs: stable ascending sort, window size n = max(1, |pairs|/100),
/// moving averages, then n_b equally index-spaced fit points (all points
/// when n_b exceeds availability).
CalibrationDataset build_calibration_dataset_from_pairs(const std::vector<double>& probs,
                                                        const std::vector<int>& labels01,
                                                        std::size_t n_b);

/// Flattens a single-label validation matrix into K pairs per sample
/// (per-class probability, one-hot label). Noise rows, when present,
/// contribute K pairs each with label 0.
CalibrationDataset build_calibration_dataset(const ProbMatrix& slova_p,
                                             const LabelVector& labels,
                                             const ProbMatrix& noise_slova_p,
                                             std::size_t n_b);

/// Random feature rows for the "none"-labeled calibration augmentation.
/// unit_uniform draws every entry from U[0,1]; feature_range_uniform draws
/// each column from the [min,max] range observed in ref_features.
Matrix make_noise_samples(const Matrix& ref_features, std::size_t count,
                          std::uint64_t seed, NoiseMode mode);

/// Fits the exponential map to the dataset's fit points by full-batch
/// gradient descent (fixed step 0.1) on unconstrained parameters:
/// alpha_i = exp(a_i), beta = softmax(b). The a_i start from U[-1,2] and
/// b = 0, so every iterate is a valid monotone map. Deterministic.
CalibrationModel fit_exponential(const CalibrationDataset& ds, int num_terms, int epochs,
                                 std::uint64_t seed);

/// c applied elementwise to every entry of the matrix.
ProbMatrix apply_calibration(const CalibrationModel& model, const ProbMatrix& slova_p);

/// CDF of the product of K independent U(0,1) variables, evaluated through
/// the integer-order series p * sum_{j<K} (log 1/p)^j / j!. This is the
/// calibration map that turns fully random per-class scores back into a
/// uniform confidence distribution.
double exact_random_calibration(double p_hat, int k_classes);

/// Elementary approximation of the exact curve: 1 - (1 - p)^K.
double approx_random_calibration(double p_hat, int k_classes);

/// Density of the product of K independent U(0,1) variables:
/// (log 1/p)^(K-1) / (K-1)!. Diverges at p = 0 for K >= 2.
double random_slova_density(double p_hat, int k_classes);

}  // namespace slova::calib
