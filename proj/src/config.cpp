#include "slova/config.hpp"

namespace slova {

using nlohmann::json;

std::string to_string(nets::Generator g) {
    return g == nets::Generator::gaussian_blobs ? "gaussian_blobs" : "two_moons";
}

std::string to_string(calib::NoiseMode m) {
    return m == calib::NoiseMode::unit_uniform ? "unit_uniform" : "feature_range_uniform";
}

nets::Generator generator_from_string(const std::string& s) {
    if (s == "gaussian_blobs") return nets::Generator::gaussian_blobs;
    if (s == "two_moons") return nets::Generator::two_moons;
    throw ValidationError("unknown generator '" + s + "'");
}

calib::NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "unit_uniform") return calib::NoiseMode::unit_uniform;
    if (s == "feature_range_uniform") return calib::NoiseMode::feature_range_uniform;
    throw ValidationError("unknown noise_mode '" + s + "'");
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ValidationError("config: unknown key '" + where + it.key() + "'");
    }
}

template <typename T>
void get_to(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        obj.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig apply_config_json(RunConfig cfg, const json& doc) {
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");
    reject_unknown(doc, "", {"seed", "data", "net", "calibration", "metrics", "experiment"});
    get_to(doc, "seed", cfg.seed);

    if (doc.contains("data")) {
        const json& d = doc.at("data");
        reject_unknown(d, "data.",
                       {"generator", "classes", "dim", "noise_sigma", "train_n", "val_n",
                        "test_n"});
        if (d.contains("generator"))
            cfg.data.generator = generator_from_string(d.at("generator").get<std::string>());
        get_to(d, "classes", cfg.data.classes);
        get_to(d, "dim", cfg.data.dim);
        get_to(d, "noise_sigma", cfg.data.noise_sigma);
        get_to(d, "train_n", cfg.data.train_n);
        get_to(d, "val_n", cfg.data.val_n);
        get_to(d, "test_n", cfg.data.test_n);
    }
    if (doc.contains("net")) {
        const json& d = doc.at("net");
        reject_unknown(d, "net.", {"hidden", "epochs", "lr", "batch"});
        get_to(d, "hidden", cfg.net.hidden);
        get_to(d, "epochs", cfg.net.epochs);
        get_to(d, "lr", cfg.net.lr);
        get_to(d, "batch", cfg.net.batch);
    }
    if (doc.contains("calibration")) {
        const json& d = doc.at("calibration");
        reject_unknown(d, "calibration.",
                       {"M", "epochs", "n_b", "noise_mode", "noise_fraction"});
        get_to(d, "M", cfg.calibration.m_terms);
        get_to(d, "epochs", cfg.calibration.epochs);
        get_to(d, "n_b", cfg.calibration.n_b);
        if (d.contains("noise_mode"))
            cfg.calibration.noise_mode =
                noise_mode_from_string(d.at("noise_mode").get<std::string>());
        get_to(d, "noise_fraction", cfg.calibration.noise_fraction);
    }
    if (doc.contains("metrics")) {
        const json& d = doc.at("metrics");
        reject_unknown(d, "metrics.", {"bins"});
        get_to(d, "bins", cfg.metric_bins);
    }
    if (doc.contains("experiment")) {
        const json& d = doc.at("experiment");
        reject_unknown(d, "experiment.",
                       {"fit_epochs", "saturation", "plane", "shift", "ood", "stability"});
        get_to(d, "fit_epochs", cfg.experiment_fit_epochs);
        if (d.contains("saturation")) {
            const json& s = d.at("saturation");
            reject_unknown(s, "experiment.saturation.",
                           {"anchors", "directions", "alpha_max", "alpha_points"});
            get_to(s, "anchors", cfg.saturation.anchors);
            get_to(s, "directions", cfg.saturation.directions);
            get_to(s, "alpha_max", cfg.saturation.alpha_max);
            get_to(s, "alpha_points", cfg.saturation.alpha_points);
        }
        if (d.contains("plane")) {
            const json& s = d.at("plane");
            reject_unknown(s, "experiment.plane.", {"triplets", "grid_size", "extent"});
            get_to(s, "triplets", cfg.plane.triplets);
            get_to(s, "grid_size", cfg.plane.grid_size);
            get_to(s, "extent", cfg.plane.extent);
        }
        if (d.contains("shift")) {
            const json& s = d.at("shift");
            reject_unknown(s, "experiment.shift.", {"sigmas", "dunn_alpha"});
            get_to(s, "sigmas", cfg.shift.sigmas);
            get_to(s, "dunn_alpha", cfg.shift.dunn_alpha);
        }
        if (d.contains("ood")) {
            const json& s = d.at("ood");
            reject_unknown(s, "experiment.ood.", {"n_ood"});
            get_to(s, "n_ood", cfg.ood.n_ood);
        }
        if (d.contains("stability")) {
            const json& s = d.at("stability");
            reject_unknown(s, "experiment.stability.", {"m_grid", "nb_grid"});
            get_to(s, "m_grid", cfg.stability.m_grid);
            get_to(s, "nb_grid", cfg.stability.nb_grid);
        }
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"data",
         {{"generator", to_string(cfg.data.generator)},
          {"classes", cfg.data.classes},
          {"dim", cfg.data.dim},
          {"noise_sigma", cfg.data.noise_sigma},
          {"train_n", cfg.data.train_n},
          {"val_n", cfg.data.val_n},
          {"test_n", cfg.data.test_n}}},
        {"net",
         {{"hidden", cfg.net.hidden},
          {"epochs", cfg.net.epochs},
          {"lr", cfg.net.lr},
          {"batch", cfg.net.batch}}},
        {"calibration",
         {{"M", cfg.calibration.m_terms},
          {"epochs", cfg.calibration.epochs},
          {"n_b", cfg.calibration.n_b},
          {"noise_mode", to_string(cfg.calibration.noise_mode)},
          {"noise_fraction", cfg.calibration.noise_fraction}}},
        {"metrics", {{"bins", cfg.metric_bins}}},
        {"experiment",
         {{"fit_epochs", cfg.experiment_fit_epochs},
          {"saturation",
           {{"anchors", cfg.saturation.anchors},
            {"directions", cfg.saturation.directions},
            {"alpha_max", cfg.saturation.alpha_max},
            {"alpha_points", cfg.saturation.alpha_points}}},
          {"plane",
           {{"triplets", cfg.plane.triplets},
            {"grid_size", cfg.plane.grid_size},
            {"extent", cfg.plane.extent}}},
          {"shift", {{"sigmas", cfg.shift.sigmas}, {"dunn_alpha", cfg.shift.dunn_alpha}}},
          {"ood", {{"n_ood", cfg.ood.n_ood}}},
          {"stability",
           {{"m_grid", cfg.stability.m_grid}, {"nb_grid", cfg.stability.nb_grid}}}}}};
}

}  // namespace slova
