#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "slova/calibrate.hpp"
#include "slova/metrics.hpp"
#include "slova/nets.hpp"

namespace slova::io {

inline constexpr int kCalibrationModelVersion = 1;
inline constexpr int kNetModelVersion = 1;

nlohmann::json calibration_to_json(const calib::CalibrationModel& model);
calib::CalibrationModel calibration_from_json(const nlohmann::json& doc);

nlohmann::json net_to_json(const nets::MlpModel& model);
nets::MlpModel net_from_json(const nlohmann::json& doc);

nlohmann::json reliability_bin_to_json(const metrics::ReliabilityBin& bin);
nlohmann::json eval_report_to_json(const metrics::EvalReport& report);
nlohmann::json ranking_to_json(const metrics::RankingTable& table);

/// Structural check of an emitted report document against the compact
/// per-schema field list (see docs/schemas.md). Throws ValidationError.
void validate_report(const nlohmann::json& report);

void save_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json load_json(const std::string& path);

}  // namespace slova::io
