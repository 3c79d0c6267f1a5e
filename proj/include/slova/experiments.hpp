#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slova/calibrate.hpp"
#include "slova/config.hpp"
#include "slova/metrics.hpp"
#include "slova/nets.hpp"
#include "slova/types.hpp"

namespace slova::experiments {

/// Everything the desk-scale harnesses share: data splits, both trained
/// heads, the fitted calibration map, and the temperature baseline.
struct DeskRig {
    nets::SyntheticDataset train, val, test;
    nets::MlpModel ova_model;
    nets::MlpModel softmax_model;
    calib::CalibrationModel cal;
    metrics::TempScaleResult temp;
    // the (probability, one-hot label) pool the calibration was fitted from,
    // kept so stability refits reuse exactly the same pairs
    std::vector<double> cal_pair_probs;
    std::vector<int> cal_pair_labels;
};

/// Trains both heads and fits the calibration/temperature baselines. When a
/// pretrained OVA model is given it is used in place of training one; it
/// must have an ova_sigmoid head matching the configured data shape.
DeskRig make_rig(const RunConfig& cfg, const nets::MlpModel* pretrained_ova = nullptr);

/// forward -> sigmoid -> single-label probabilities in one call.
ProbMatrix slova_matrix(const nets::MlpModel& model, const Matrix& features);

// ---------------------------------------------------------------------------
// saturation (rays x + alpha * direction, alpha -> huge)
// ---------------------------------------------------------------------------

inline constexpr double kSaturationTol = 1e-6;
inline constexpr double kConfidenceThreshold = 0.99;

/// One ray x = anchor + alpha * direction, evaluated over the whole alpha
/// grid. direction is unit-norm; sigmoid holds one row per alpha.
struct SaturationRay {
    std::size_t anchor_index = 0;
    std::vector<double> direction;
    Matrix sigmoid;
    std::vector<double> conf_ova;
    std::vector<double> conf_slova;
};

struct SaturationSummary {
    std::size_t rays = 0;
    std::size_t saturated = 0;        // all sigmoids within tol of {0,1} at alpha_max
    std::size_t exactly_one = 0;      // saturated rays with exactly one sigmoid at 1
    std::size_t slova_iff_violations = 0;
    std::size_t ova_iff_violations = 0;
    double saturated_fraction = 0.0;
    double exactly_one_frequency = 0.0;  // among saturated rays; reported, not asserted
    double theoretical_exactly_one = 0.0;  // 1 / 2^K
    bool degenerate_model = false;       // nothing saturated at alpha_max
    std::vector<double> alphas;          // 0 plus the log-spaced grid
    std::vector<double> mean_conf_ova;   // per alpha, averaged over rays
    std::vector<double> mean_conf_slova;
};

/// When rays_out is non-null, every per-ray sweep is captured there.
SaturationSummary saturation_sweep(const nets::MlpModel& model, const Matrix& anchors,
                                   std::size_t directions_per_anchor, double alpha_max,
                                   int alpha_points, std::uint64_t seed,
                                   std::vector<SaturationRay>* rays_out = nullptr);

// ---------------------------------------------------------------------------
// plane spanned by three samples
// ---------------------------------------------------------------------------

struct PlaneResult {
    std::size_t triplets_used = 0;
    std::size_t triplets_skipped = 0;  // collinear
    std::size_t grid_size = 0;
    std::vector<double> alpha;           // grid_size^2 cells, row-major
    std::vector<double> beta;
    std::vector<double> mean_conf_ova;
    std::vector<double> mean_conf_slova;
};

using Triplet = std::array<std::size_t, 3>;

std::vector<Triplet> random_triplets(std::size_t n_samples, std::size_t n_triplets,
                                     std::uint64_t seed);

/// Averages both confidence maps over the planes through the given sample
/// triplets; the plane through (x0,x1,x2) is x0 + a(x1-x0) + b(x2-x0) with
/// (a,b) on a grid_size^2 lattice over [-extent,extent]^2.
PlaneResult plane_sweep(const nets::MlpModel& model, const Matrix& samples,
                        const std::vector<Triplet>& triplets, std::size_t grid_size,
                        double extent);

// ---------------------------------------------------------------------------
// dataset shift / ablation / OOD / stability
// ---------------------------------------------------------------------------

inline const std::vector<std::string> kShiftMethods = {"softmax", "temp_scaling", "ova",
                                                       "slova", "slova_calibrated"};

struct ShiftLevel {
    int level = 0;
    double sigma = 0.0;
    std::vector<metrics::EvalReport> method_reports;  // aligned with kShiftMethods
};

struct ShiftResult {
    std::vector<ShiftLevel> levels;       // level 0 is the clean test set
    metrics::RankingTable ranking;        // cases = (level, metric in {ece,nll,brier})
    std::vector<int> dunn_significant;    // per method, vs slova_calibrated; -1 for self
};

ShiftResult shift_sweep(const DeskRig& rig, const std::vector<double>& sigmas, int bins,
                        double dunn_alpha, std::uint64_t seed);

struct OodResult {
    double in_test_error = 0.0;
    std::vector<std::string> methods;
    std::vector<std::string> datasets;  // in, uniform_noise, shifted_blobs, two_moons
    Matrix mmc_table;                   // methods x datasets
};

/// MMC of every method on the in-distribution test set plus the given out
/// sets; out sets must share the model's feature dimension.
OodResult ood_mmc(const DeskRig& rig,
                  const std::vector<std::pair<std::string, Matrix>>& out_sets);

/// Builds the three desk-scale out sets (uniform noise, shifted blobs, an
/// embedded two-moons sample) and delegates to ood_mmc.
OodResult ood_sweep(const DeskRig& rig, std::size_t n_ood, std::uint64_t seed);

struct AblationVariant {
    std::string name;
    double accuracy = 0.0, ece = 0.0, nll = 0.0, brier = 0.0;
};

struct AblationResult {
    std::vector<AblationVariant> variants;  // softmax, ova, slova, slova_calibrated
    bool accuracy_identical = false;        // across the three OVA-derived variants
    double val_ece_slova = 0.0;             // clean fitting split, before calibration
    double val_ece_slova_calibrated = 0.0;  // and after
};

AblationResult ablation_sweep(const DeskRig& rig, const std::vector<double>& sigmas, int bins,
                              std::uint64_t seed);

struct StabilityCell {
    int m_terms = 0;
    std::size_t n_b = 0;
    double ece = 0.0, nll = 0.0, brier = 0.0;
};

struct StabilityResult {
    std::vector<StabilityCell> cells;
    // max - min over the cells with M > 10 and n_b > 400
    double ece_spread = 0.0, nll_spread = 0.0, brier_spread = 0.0;
};

StabilityResult stability_sweep(const DeskRig& rig, const std::vector<int>& m_grid,
                                const std::vector<std::size_t>& nb_grid, int fit_epochs,
                                int bins, std::uint64_t seed);

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

struct NamedCsv {
    std::string name;  // file name, e.g. "saturation.curve.csv"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // cells pre-rendered (numbers at %.17g)
};

struct ExperimentOutput {
    nlohmann::json report;  // written as <name>.report.json
    std::vector<NamedCsv> csvs;
};

ExperimentOutput run_saturation(const RunConfig& cfg,
                                const nets::MlpModel* pretrained_ova = nullptr);
ExperimentOutput run_plane(const RunConfig& cfg, const nets::MlpModel* pretrained_ova = nullptr);
ExperimentOutput run_shift(const RunConfig& cfg, const nets::MlpModel* pretrained_ova = nullptr);
ExperimentOutput run_ood(const RunConfig& cfg, const nets::MlpModel* pretrained_ova = nullptr);
ExperimentOutput run_ablation(const RunConfig& cfg,
                              const nets::MlpModel* pretrained_ova = nullptr);
ExperimentOutput run_stability(const RunConfig& cfg,
                               const nets::MlpModel* pretrained_ova = nullptr);

/// Dispatch by experiment name; throws ValidationError for unknown names.
/// Trains the toy models itself unless a pretrained OVA model is supplied.
ExperimentOutput run_experiment(const std::string& name, const RunConfig& cfg,
                                const nets::MlpModel* pretrained_ova = nullptr);

const std::vector<std::string>& experiment_names();

}  // namespace slova::experiments
