#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slova/calibrate.hpp"
#include "slova/nets.hpp"

namespace slova {

struct DataConfig {
    nets::Generator generator = nets::Generator::gaussian_blobs;
    int classes = 4;
    std::size_t dim = 8;
    double noise_sigma = 2.0;
    std::size_t train_n = 2000;
    std::size_t val_n = 2500;
    std::size_t test_n = 4000;
};

struct NetConfig {
    std::vector<std::size_t> hidden{64, 64};
    int epochs = 60;
    double lr = 0.05;
    std::size_t batch = 64;
};

struct CalibConfig {
    int m_terms = 20;       // M
    int epochs = 20;
    std::size_t n_b = 4000;
    calib::NoiseMode noise_mode = calib::NoiseMode::feature_range_uniform;
    double noise_fraction = 0.1;
};

struct SaturationConfig {
    std::size_t anchors = 2;
    std::size_t directions = 500;  // per anchor
    double alpha_max = 1e6;
    int alpha_points = 30;
};

struct PlaneConfig {
    std::size_t triplets = 100;
    std::size_t grid_size = 21;
    double extent = 4.0;
};

struct ShiftConfig {
    std::vector<double> sigmas{0.75, 1.5, 2.5, 4.0, 6.0};
    double dunn_alpha = 0.05;
};

struct OodConfig {
    std::size_t n_ood = 2000;
};

struct StabilityConfig {
    std::vector<int> m_grid{12, 20, 50};
    std::vector<std::size_t> nb_grid{500, 1000, 4000};
};

/// Effective run configuration: defaults, overridden by an optional JSON
/// config file, overridden by CLI flags. Unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 1234;
    DataConfig data;
    NetConfig net;
    CalibConfig calibration;
    int metric_bins = 15;
    int experiment_fit_epochs = 5000;  // calibration fit inside experiment harnesses
    SaturationConfig saturation;
    PlaneConfig plane;
    ShiftConfig shift;
    OodConfig ood;
    StabilityConfig stability;
};

/// Applies a config document on top of the given defaults. Throws
/// ValidationError on unknown keys or ill-typed values.
RunConfig apply_config_json(RunConfig base, const nlohmann::json& doc);

/// Full effective config, echoed into every report.
nlohmann::json config_to_json(const RunConfig& cfg);

std::string to_string(nets::Generator g);
std::string to_string(calib::NoiseMode m);
nets::Generator generator_from_string(const std::string& s);
calib::NoiseMode noise_mode_from_string(const std::string& s);

}  // namespace slova
