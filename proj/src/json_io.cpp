#include "slova/json_io.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace slova::io {

using nlohmann::json;

json calibration_to_json(const calib::CalibrationModel& model) {
    return json{{"version", kCalibrationModelVersion},
                {"M", model.alphas.size()},
                {"alphas", model.alphas},
                {"betas", model.betas},
                {"fit_loss", model.fit_loss},
                {"seed", model.seed},
                {"epochs", model.epochs}};
}

calib::CalibrationModel calibration_from_json(const json& doc) {
    try {
        if (!doc.contains("version") || doc.at("version").get<int>() != kCalibrationModelVersion)
            throw ValidationError("calibration model: unsupported or missing version");
        calib::CalibrationModel m;
        doc.at("alphas").get_to(m.alphas);
        doc.at("betas").get_to(m.betas);
        doc.at("fit_loss").get_to(m.fit_loss);
        doc.at("seed").get_to(m.seed);
        doc.at("epochs").get_to(m.epochs);
        if (m.alphas.size() != m.betas.size() || m.alphas.empty() ||
            m.alphas.size() != doc.at("M").get<std::size_t>())
            throw ValidationError("calibration model: inconsistent parameter arrays");
        for (double a : m.alphas)
            if (!(a > 0.0)) throw ValidationError("calibration model: alpha must be > 0");
        for (double b : m.betas)
            if (!(b > 0.0 && b < 1.0))
                throw ValidationError("calibration model: beta must be in (0,1)");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("calibration model: ") + e.what());
    }
}

json net_to_json(const nets::MlpModel& model) {
    json layers = json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l)
        layers.push_back(json{{"weights", model.weights[l].data()},
                              {"biases", model.biases[l]}});
    return json{{"version", kNetModelVersion},
                {"dims", model.layer_dims},
                {"head", model.head == nets::Head::ova_sigmoid ? "ova_sigmoid" : "softmax"},
                {"layers", layers}};
}

nets::MlpModel net_from_json(const json& doc) {
    try {
        if (!doc.contains("version") || doc.at("version").get<int>() != kNetModelVersion)
            throw ValidationError("net model: unsupported or missing version");
        nets::MlpModel m;
        doc.at("dims").get_to(m.layer_dims);
        const std::string head = doc.at("head").get<std::string>();
        if (head == "ova_sigmoid")
            m.head = nets::Head::ova_sigmoid;
        else if (head == "softmax")
            m.head = nets::Head::softmax;
        else
            throw ValidationError("net model: unknown head '" + head + "'");
        const json& layers = doc.at("layers");
        if (m.layer_dims.size() < 2 || layers.size() != m.layer_dims.size() - 1)
            throw ValidationError("net model: layer count does not match dims");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            Matrix w(m.layer_dims[l + 1], m.layer_dims[l]);
            std::vector<double> flat;
            layers[l].at("weights").get_to(flat);
            if (flat.size() != w.size())
                throw ValidationError("net model: weight size mismatch in layer " +
                                      std::to_string(l));
            w.data() = std::move(flat);
            std::vector<double> b;
            layers[l].at("biases").get_to(b);
            if (b.size() != m.layer_dims[l + 1])
                throw ValidationError("net model: bias size mismatch in layer " +
                                      std::to_string(l));
            m.weights.push_back(std::move(w));
            m.biases.push_back(std::move(b));
        }
        for (const auto& w : m.weights) require_finite(w, "net model");
        for (const auto& b : m.biases)
            for (double v : b)
                if (!std::isfinite(v)) throw ValidationError("net model: non-finite bias");
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("net model: ") + e.what());
    }
}

json reliability_bin_to_json(const metrics::ReliabilityBin& bin) {
    return json{{"lo", bin.lo},
                {"hi", bin.hi},
                {"count", bin.count},
                {"avg_conf", bin.avg_conf},
                {"avg_acc", bin.avg_acc}};
}

json eval_report_to_json(const metrics::EvalReport& report) {
    json bins = json::array();
    for (const auto& b : report.bins) bins.push_back(reliability_bin_to_json(b));
    return json{{"accuracy", report.accuracy}, {"ece", report.ece},   {"nll", report.nll},
                {"brier", report.brier},       {"mmc", report.mmc},   {"bins", bins}};
}

json ranking_to_json(const metrics::RankingTable& table) {
    json rank_rows = json::array();
    for (std::size_t i = 0; i < table.ranks.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < table.ranks.cols(); ++j) row.push_back(table.ranks(i, j));
        rank_rows.push_back(row);
    }
    return json{{"mean_ranks", table.mean_ranks},
                {"ranks", rank_rows},
                {"chi2", table.chi2},
                {"critical_distance", table.critical_distance}};
}

namespace {

// required top-level fields per schema id
const std::map<std::string, std::vector<std::string>> kSchemas = {
    {"slova.eval.report/1",
     {"schema", "config", "accuracy", "ece", "nll", "brier", "mmc", "bins", "calibrated"}},
    {"slova.saturation.report/1",
     {"schema", "config", "rays", "saturated_fraction", "exactly_one_frequency",
      "theoretical_exactly_one", "slova_iff_violations", "ova_iff_violations",
      "degenerate_model"}},
    {"slova.plane.report/1",
     {"schema", "config", "triplets_used", "triplets_skipped", "grid_size"}},
    {"slova.shift.report/1", {"schema", "config", "methods", "levels", "friedman"}},
    {"slova.ood.report/1", {"schema", "config", "in_test_error", "methods", "datasets", "mmc"}},
    {"slova.ablation.report/1",
     {"schema", "config", "variants", "accuracy_identical", "val_ece_slova",
      "val_ece_slova_calibrated"}},
    {"slova.stability.report/1", {"schema", "config", "cells", "spread"}},
};

}  // namespace

void validate_report(const json& report) {
    if (!report.is_object() || !report.contains("schema") || !report.at("schema").is_string())
        throw ValidationError("report: missing schema id");
    const std::string id = report.at("schema").get<std::string>();
    auto it = kSchemas.find(id);
    if (it == kSchemas.end()) throw ValidationError("report: unknown schema '" + id + "'");
    for (const auto& field : it->second)
        if (!report.contains(field))
            throw ValidationError("report: schema '" + id + "' requires field '" + field + "'");
}

void save_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw ValidationError(path + ": cannot open file for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw ValidationError(path + ": write failed");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

}  // namespace slova::io
