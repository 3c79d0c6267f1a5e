// slova command line: transform / calibrate / evaluate / train-toy / experiment
//
// Exit codes: 0 ok, 2 usage, 3 input validation, 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "slova/calibrate.hpp"
#include "slova/config.hpp"
#include "slova/core.hpp"
#include "slova/csv.hpp"
#include "slova/experiments.hpp"
#include "slova/json_io.hpp"
#include "slova/metrics.hpp"
#include "slova/nets.hpp"
#include "slova/rng.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace slova;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

struct GlobalOpts {
    RunConfig cfg;
    std::string out_dir = ".";
    bool quiet = false;

    std::string path(const std::string& name) const {
        return (fs::path(out_dir) / name).string();
    }
    void info(const std::string& msg) const {
        if (!quiet) std::cout << msg << '\n';
    }
};

void write_named_csv(const std::string& path, const experiments::NamedCsv& csv) {
    std::ofstream out(path);
    if (!out) throw ValidationError(path + ": cannot open file for writing");
    for (std::size_t j = 0; j < csv.header.size(); ++j)
        out << (j ? "," : "") << csv.header[j];
    out << '\n';
    for (const auto& row : csv.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << '\n';
    }
    if (!out) throw ValidationError(path + ": write failed");
}

// ---------------------------------------------------------------------------

void cmd_transform(const GlobalOpts& g, const std::string& logits_path,
                   const std::string& head, const std::string& out_path) {
    const io::CsvTable in = io::read_csv(logits_path);
    const std::size_t k = in.values.cols();

    std::vector<std::string> header;
    Matrix out;
    if (head == "ova") {
        const ProbMatrix sig = core::sigmoid_probs(in.values);
        const ProbMatrix slv = core::slova_probs(sig);
        const auto conf_o = core::ova_confidence(sig);
        const auto conf_s = core::slova_confidence(slv);
        const auto none = core::none_prob(sig);
        out = Matrix(in.values.rows(), 2 * k + 3);
        for (std::size_t j = 0; j < k; ++j) header.push_back("sigmoid_" + std::to_string(j));
        for (std::size_t j = 0; j < k; ++j) header.push_back("slova_" + std::to_string(j));
        header.insert(header.end(), {"conf_ova", "conf_slova", "none_prob"});
        for (std::size_t i = 0; i < out.rows(); ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                out(i, j) = sig.values(i, j);
                out(i, k + j) = slv.values(i, j);
            }
            out(i, 2 * k) = conf_o[i];
            out(i, 2 * k + 1) = conf_s[i];
            out(i, 2 * k + 2) = none[i];
        }
    } else {  // softmax
        const Matrix sm = metrics::softmax_probs(in.values);
        out = Matrix(in.values.rows(), k + 1);
        for (std::size_t j = 0; j < k; ++j) header.push_back("softmax_" + std::to_string(j));
        header.push_back("conf_softmax");
        for (std::size_t i = 0; i < out.rows(); ++i) {
            double best = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                out(i, j) = sm(i, j);
                best = std::max(best, sm(i, j));
            }
            out(i, k) = best;
        }
    }
    io::write_csv(out_path, header, out);
    g.info("wrote " + out_path);
}

void cmd_calibrate(const GlobalOpts& g, const std::string& probs_path,
                   const std::string& labels_path, const std::string& features_path,
                   const std::string& net_path, const std::string& out_path,
                   const std::string& diagnostics_path) {
    const io::CsvTable probs = io::read_csv(probs_path);
    require_probabilities(probs.values, probs_path);
    const LabelVector labels = io::read_labels(labels_path);
    if (labels.size() != probs.values.rows())
        throw ValidationError("calibrate: probs and labels row counts differ");

    ProbMatrix slova_p{probs.values, ProbKind::slova};
    ProbMatrix noise_p;
    if (!features_path.empty() || !net_path.empty()) {
        if (features_path.empty() || net_path.empty())
            throw ValidationError(
                "calibrate: noise augmentation needs both --features and --net");
        const io::CsvTable feats = io::read_csv(features_path);
        if (feats.values.rows() != probs.values.rows())
            throw ValidationError("calibrate: features and probs row counts differ");
        const nets::MlpModel net = io::net_from_json(io::load_json(net_path));
        const std::size_t count = static_cast<std::size_t>(
            g.cfg.calibration.noise_fraction * static_cast<double>(feats.values.rows()));
        const Matrix noise = calib::make_noise_samples(feats.values, count, g.cfg.seed,
                                                       g.cfg.calibration.noise_mode);
        if (count > 0)
            noise_p = experiments::slova_matrix(net, noise);
    }

    const auto ds = calib::build_calibration_dataset(slova_p, labels, noise_p,
                                                     g.cfg.calibration.n_b);
    if (ds.fit_conf.size() < g.cfg.calibration.n_b)
        std::cerr << "warning: n_b=" << g.cfg.calibration.n_b << " exceeds the "
                  << ds.fit_conf.size() << " available averaged points; using all\n";
    const auto model = calib::fit_exponential(ds, g.cfg.calibration.m_terms,
                                              g.cfg.calibration.epochs, g.cfg.seed);
    io::save_json(out_path, io::calibration_to_json(model));
    g.info("wrote " + out_path);

    if (!diagnostics_path.empty()) {
        Matrix diag(ds.fit_conf.size(), 3);
        for (std::size_t i = 0; i < ds.fit_conf.size(); ++i) {
            diag(i, 0) = ds.fit_conf[i];
            diag(i, 1) = ds.fit_acc[i];
            diag(i, 2) = model.evaluate(ds.fit_conf[i]);
        }
        io::write_csv(diagnostics_path, {"pi_bar", "b_bar", "c_pi_bar"}, diag);
        g.info("wrote " + diagnostics_path);
    }
}

void cmd_evaluate(const GlobalOpts& g, const std::string& probs_path,
                  const std::string& labels_path, const std::string& model_path, int bins,
                  const std::string& out_path, const std::string& reliability_path) {
    const io::CsvTable probs = io::read_csv(probs_path);
    require_probabilities(probs.values, probs_path);
    const LabelVector labels = io::read_labels(labels_path);

    ProbMatrix p{probs.values, ProbKind::slova};
    bool calibrated = false;
    if (!model_path.empty()) {
        const auto model = io::calibration_from_json(io::load_json(model_path));
        p = calib::apply_calibration(model, p);
        calibrated = true;
    }
    const metrics::EvalReport report = metrics::evaluate(p, labels, bins);

    json doc = io::eval_report_to_json(report);
    doc["schema"] = "slova.eval.report/1";
    doc["config"] = config_to_json(g.cfg);
    doc["calibrated"] = calibrated;
    io::validate_report(doc);
    io::save_json(out_path, doc);
    g.info("wrote " + out_path);

    if (!reliability_path.empty()) {
        Matrix rel(report.bins.size(), 5);
        for (std::size_t i = 0; i < report.bins.size(); ++i) {
            rel(i, 0) = report.bins[i].lo;
            rel(i, 1) = report.bins[i].hi;
            rel(i, 2) = static_cast<double>(report.bins[i].count);
            rel(i, 3) = report.bins[i].avg_conf;
            rel(i, 4) = report.bins[i].avg_acc;
        }
        io::write_csv(reliability_path, {"lo", "hi", "count", "avg_conf", "avg_acc"}, rel);
        g.info("wrote " + reliability_path);
    }
}

void cmd_train_toy(const GlobalOpts& g, const std::string& generator, int classes,
                   std::size_t samples, std::size_t dim, double noise_sigma,
                   const std::string& head, const std::string& out_path,
                   const std::string& data_out) {
    const auto gen = generator_from_string(generator);
    const auto ds = nets::make_synthetic(gen, classes, samples, dim, noise_sigma, g.cfg.seed);

    std::vector<std::size_t> dims;
    dims.push_back(dim);
    dims.insert(dims.end(), g.cfg.net.hidden.begin(), g.cfg.net.hidden.end());
    dims.push_back(static_cast<std::size_t>(classes));
    const auto net_head = head == "ova" ? nets::Head::ova_sigmoid : nets::Head::softmax;
    const auto loss = head == "ova" ? nets::LossKind::ova : nets::LossKind::softmax_ce;
    nets::TrainConfig tc{g.cfg.net.epochs, g.cfg.net.lr, g.cfg.net.batch};
    const auto trained =
        nets::train(nets::MlpModel::init(dims, net_head, child_seed(g.cfg.seed, 20)), ds, loss,
                    tc, child_seed(g.cfg.seed, 21));
    io::save_json(out_path, io::net_to_json(trained.model));
    g.info("wrote " + out_path + " (final loss " + io::format_double(trained.final_loss) + ")");

    if (!data_out.empty()) {
        Matrix table(ds.features.rows(), dim + 1);
        std::vector<std::string> header;
        for (std::size_t j = 0; j < dim; ++j) header.push_back("f" + std::to_string(j));
        header.push_back("label");
        for (std::size_t i = 0; i < ds.features.rows(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) table(i, j) = ds.features(i, j);
            table(i, dim) = ds.labels[i];
        }
        io::write_csv(data_out, header, table);
        g.info("wrote " + data_out);
    }
}

void cmd_experiment(const GlobalOpts& g, const std::string& name,
                    const std::string& net_path) {
    nets::MlpModel pretrained;
    const nets::MlpModel* pretrained_ptr = nullptr;
    if (!net_path.empty()) {
        pretrained = io::net_from_json(io::load_json(net_path));
        pretrained_ptr = &pretrained;
    }
    const auto out = experiments::run_experiment(name, g.cfg, pretrained_ptr);
    io::validate_report(out.report);
    const std::string report_path = g.path(name + ".report.json");
    io::save_json(report_path, out.report);
    g.info("wrote " + report_path);
    for (const auto& csv : out.csvs) {
        const std::string csv_path = g.path(csv.name);
        write_named_csv(csv_path, csv);
        g.info("wrote " + csv_path);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slova: one-vs-all confidence transforms, exponential calibration, and "
                 "uncertainty experiments"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 2 usage error, 3 input validation error, "
               "4 numeric failure.\nAll randomness derives from --seed; repeated runs are "
               "byte-identical.");

    GlobalOpts g;
    std::string config_path;
    std::uint64_t seed_flag = 0;
    auto* seed_opt =
        app.add_option("--seed", seed_flag, "master seed; all randomness derives from it");
    app.add_option("--config", config_path, "JSON config file (unknown keys rejected)");
    app.add_option("--out-dir", g.out_dir, "directory for experiment outputs");
    app.add_flag("--quiet,-q", g.quiet, "suppress informational output");

    // transform
    auto* transform = app.add_subcommand(
        "transform", "logits CSV -> sigmoid/slova probabilities and confidence columns");
    std::string t_logits, t_head = "ova", t_out = "transformed.csv";
    transform->add_option("--logits", t_logits, "input logits CSV")->required();
    transform->add_option("--head", t_head, "ova or softmax")
        ->check(CLI::IsMember({"ova", "softmax"}));
    transform->add_option("--out", t_out, "output CSV");

    // calibrate
    auto* calibrate = app.add_subcommand(
        "calibrate", "fit the exponential calibration map from probabilities and labels");
    std::string c_probs, c_labels, c_features, c_net, c_out = "model.json", c_diag;
    int c_m = -1, c_epochs = -1;
    long long c_nb = -1;
    calibrate->add_option("--probs", c_probs, "single-label probabilities CSV")->required();
    calibrate->add_option("--labels", c_labels, "labels CSV (single zero-based column)")
        ->required();
    calibrate->add_option("--features", c_features,
                          "validation features CSV; enables noise augmentation with --net");
    calibrate->add_option("--net", c_net, "net model JSON used to score noise samples");
    calibrate->add_option("--out", c_out, "output calibration model JSON");
    calibrate->add_option("--diagnostics", c_diag, "fit points CSV (pi_bar, b_bar, c(pi_bar))");
    calibrate->add_option("--M", c_m, "number of (alpha, beta) terms");
    calibrate->add_option("--epochs", c_epochs, "gradient descent epochs");
    calibrate->add_option("--n-b", c_nb, "number of fit points");

    // evaluate
    auto* evaluate = app.add_subcommand(
        "evaluate", "metrics report (accuracy, ECE, NLL, Brier, MMC, reliability bins)");
    std::string e_probs, e_labels, e_model, e_out = "report.json", e_rel;
    int e_bins = -1;
    evaluate->add_option("--probs", e_probs, "probabilities CSV")->required();
    evaluate->add_option("--labels", e_labels, "labels CSV")->required();
    evaluate->add_option("--model", e_model, "optional calibration model JSON to apply");
    evaluate->add_option("--bins", e_bins, "reliability bin count");
    evaluate->add_option("--out", e_out, "output report JSON");
    evaluate->add_option("--reliability", e_rel, "reliability bins CSV");

    // train-toy
    auto* train_toy =
        app.add_subcommand("train-toy", "train the reference MLP on a synthetic dataset");
    std::string y_gen = "gaussian_blobs", y_head = "ova", y_out = "net.json", y_data;
    int y_classes = 4;
    std::size_t y_samples = 2000, y_dim = 8;
    double y_sigma = 2.0;
    int y_epochs = -1;
    double y_lr = -1.0;
    train_toy->add_option("--generator", y_gen, "gaussian_blobs or two_moons")
        ->check(CLI::IsMember({"gaussian_blobs", "two_moons"}));
    train_toy->add_option("--classes", y_classes, "number of classes");
    train_toy->add_option("--samples", y_samples, "number of samples");
    train_toy->add_option("--dim", y_dim, "feature dimension");
    train_toy->add_option("--noise-sigma", y_sigma, "generator noise sigma");
    train_toy->add_option("--head", y_head, "ova or softmax")
        ->check(CLI::IsMember({"ova", "softmax"}));
    train_toy->add_option("--epochs", y_epochs, "training epochs");
    train_toy->add_option("--lr", y_lr, "learning rate");
    train_toy->add_option("--out", y_out, "output net model JSON");
    train_toy->add_option("--data-out", y_data, "also export the dataset CSV");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a named experiment harness");
    std::string x_name, x_net;
    experiment->add_option("name", x_name, "saturation, plane, shift, ood, ablation, stability")
        ->required()
        ->check(CLI::IsMember(experiments::experiment_names()));
    experiment->add_option("--net", x_net,
                           "pretrained OVA net model JSON; trains a toy model when omitted");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error[usage]: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (!config_path.empty())
            g.cfg = apply_config_json(g.cfg, io::load_json(config_path));
        // flags win over the config file
        if (seed_opt->count()) g.cfg.seed = seed_flag;
        if (c_m > 0) g.cfg.calibration.m_terms = c_m;
        if (c_epochs > 0) g.cfg.calibration.epochs = c_epochs;
        if (c_nb > 0) g.cfg.calibration.n_b = static_cast<std::size_t>(c_nb);
        if (e_bins > 0) g.cfg.metric_bins = e_bins;
        if (y_epochs > 0) g.cfg.net.epochs = y_epochs;
        if (y_lr > 0) g.cfg.net.lr = y_lr;

        if (!fs::exists(g.out_dir)) fs::create_directories(g.out_dir);

        if (transform->parsed()) cmd_transform(g, t_logits, t_head, t_out);
        if (calibrate->parsed())
            cmd_calibrate(g, c_probs, c_labels, c_features, c_net, c_out, c_diag);
        if (evaluate->parsed())
            cmd_evaluate(g, e_probs, e_labels, e_model, g.cfg.metric_bins, e_out, e_rel);
        if (train_toy->parsed())
            cmd_train_toy(g, y_gen, y_classes, y_samples, y_dim, y_sigma, y_head, y_out, y_data);
        if (experiment->parsed()) cmd_experiment(g, x_name, x_net);
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "error[validation]: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "error[numeric]: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error[numeric]: " << e.what() << '\n';
        return kExitNumeric;
    }
}
