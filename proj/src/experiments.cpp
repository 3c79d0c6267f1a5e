#include "slova/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slova/core.hpp"
#include "slova/csv.hpp"
#include "slova/json_io.hpp"
#include "slova/rng.hpp"

namespace slova::experiments {

using nlohmann::json;

namespace {

// fixed substream ids so adding an experiment never shifts another's stream
enum Stream : std::uint64_t {
    kTrainData = 10,
    kValData = 11,
    kTestData = 12,
    kNetInit = 20,
    kNetTrain = 21,
    kCalNoise = 30,
    kCalFit = 31,
    kShiftNoiseBase = 40,  // + level
    kSatDirections = 50,
    kPlaneTriplets = 60,
    kOodUniform = 70,
    kOodShifted = 71,
    kOodMoons = 72,
};

LogitMatrix scaled_logits(const LogitMatrix& z, double temperature) {
    LogitMatrix out = z;
    for (double& v : out.data()) v /= temperature;
    return out;
}

Matrix add_noise(const Matrix& x, double sigma, std::uint64_t seed) {
    Matrix out = x;
    Rng rng(seed);
    for (double& v : out.data()) v += sigma * rng.normal();
    return out;
}

}  // namespace

ProbMatrix slova_matrix(const nets::MlpModel& model, const Matrix& features) {
    return core::slova_probs(core::sigmoid_probs(nets::forward(model, features)));
}

DeskRig make_rig(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig;
    const auto& d = cfg.data;
    rig.train = nets::make_synthetic(d.generator, d.classes, d.train_n, d.dim, d.noise_sigma,
                                     child_seed(cfg.seed, kTrainData));
    rig.val = nets::make_synthetic(d.generator, d.classes, d.val_n, d.dim, d.noise_sigma,
                                   child_seed(cfg.seed, kValData));
    rig.test = nets::make_synthetic(d.generator, d.classes, d.test_n, d.dim, d.noise_sigma,
                                    child_seed(cfg.seed, kTestData));

    std::vector<std::size_t> dims;
    dims.push_back(d.dim);
    dims.insert(dims.end(), cfg.net.hidden.begin(), cfg.net.hidden.end());
    dims.push_back(static_cast<std::size_t>(d.classes));
    nets::TrainConfig tc{cfg.net.epochs, cfg.net.lr, cfg.net.batch};
    if (pretrained_ova) {
        if (pretrained_ova->head != nets::Head::ova_sigmoid)
            throw ValidationError("make_rig: pretrained model must have an ova_sigmoid head");
        if (pretrained_ova->input_dim() != d.dim ||
            pretrained_ova->output_dim() != static_cast<std::size_t>(d.classes))
            throw ValidationError("make_rig: pretrained model shape does not match the data");
        rig.ova_model = *pretrained_ova;
    } else {
        rig.ova_model =
            nets::train(nets::MlpModel::init(dims, nets::Head::ova_sigmoid,
                                             child_seed(cfg.seed, kNetInit)),
                        rig.train, nets::LossKind::ova, tc, child_seed(cfg.seed, kNetTrain))
                .model;
    }
    rig.softmax_model =
        nets::train(nets::MlpModel::init(dims, nets::Head::softmax,
                                         child_seed(cfg.seed, kNetInit)),
                    rig.train, nets::LossKind::softmax_ce, tc, child_seed(cfg.seed, kNetTrain))
            .model;

    // calibration pair pool: validation samples plus "none"-labeled noise rows
    const ProbMatrix val_slova = slova_matrix(rig.ova_model, rig.val.features);
    const std::size_t noise_count =
        static_cast<std::size_t>(cfg.calibration.noise_fraction *
                                 static_cast<double>(rig.val.features.rows()));
    ProbMatrix noise_slova;
    if (noise_count > 0) {
        const Matrix noise = calib::make_noise_samples(
            rig.val.features, noise_count, child_seed(cfg.seed, kCalNoise),
            cfg.calibration.noise_mode);
        noise_slova = slova_matrix(rig.ova_model, noise);
    }
    const std::size_t k = val_slova.cols();
    for (std::size_t i = 0; i < val_slova.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            rig.cal_pair_probs.push_back(val_slova.values(i, j));
            rig.cal_pair_labels.push_back(
                static_cast<std::size_t>(rig.val.labels[i]) == j ? 1 : 0);
        }
    for (std::size_t i = 0; i < noise_slova.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            rig.cal_pair_probs.push_back(noise_slova.values(i, j));
            rig.cal_pair_labels.push_back(0);
        }

    const auto ds = calib::build_calibration_dataset_from_pairs(
        rig.cal_pair_probs, rig.cal_pair_labels, cfg.calibration.n_b);
    rig.cal = calib::fit_exponential(ds, cfg.calibration.m_terms, cfg.experiment_fit_epochs,
                                     child_seed(cfg.seed, kCalFit));
    rig.temp = metrics::temperature_scale_fit(nets::forward(rig.softmax_model, rig.val.features),
                                              rig.val.labels);
    return rig;
}

// ---------------------------------------------------------------------------
// saturation
// ---------------------------------------------------------------------------

SaturationSummary saturation_sweep(const nets::MlpModel& model, const Matrix& anchors,
                                   std::size_t directions_per_anchor, double alpha_max,
                                   int alpha_points, std::uint64_t seed,
                                   std::vector<SaturationRay>* rays_out) {
    require_nonempty(anchors, "saturation_sweep");
    if (anchors.cols() != model.input_dim())
        throw ValidationError("saturation_sweep: anchor dim does not match model");
    if (alpha_max < 1e4) throw ValidationError("saturation_sweep: alpha_max must be >= 1e4");
    if (alpha_points < 2) throw ValidationError("saturation_sweep: need >= 2 alpha points");

    SaturationSummary s;
    s.alphas.push_back(0.0);
    const double max_exp = std::log10(alpha_max);
    for (int i = 0; i < alpha_points; ++i)
        s.alphas.push_back(std::pow(10.0, max_exp * static_cast<double>(i) /
                                              static_cast<double>(alpha_points - 1)));
    const std::size_t n_alpha = s.alphas.size();
    s.mean_conf_ova.assign(n_alpha, 0.0);
    s.mean_conf_slova.assign(n_alpha, 0.0);

    const std::size_t k = model.output_dim();
    const std::size_t dim = model.input_dim();
    s.theoretical_exactly_one = std::ldexp(1.0, -static_cast<int>(k));

    Rng rng(seed);
    Matrix points(n_alpha, dim);
    for (std::size_t a = 0; a < anchors.rows(); ++a) {
        for (std::size_t dir = 0; dir < directions_per_anchor; ++dir) {
            std::vector<double> direction(dim);
            double norm = 0.0;
            for (double& v : direction) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
            for (double& v : direction) v /= norm;

            for (std::size_t ai = 0; ai < n_alpha; ++ai)
                for (std::size_t c = 0; c < dim; ++c)
                    points(ai, c) = anchors(a, c) + s.alphas[ai] * direction[c];

            const ProbMatrix sig = core::sigmoid_probs(nets::forward(model, points));
            const ProbMatrix slv = core::slova_probs(sig);
            const auto conf_o = core::ova_confidence(sig);
            const auto conf_s = core::slova_confidence(slv);
            for (std::size_t ai = 0; ai < n_alpha; ++ai) {
                s.mean_conf_ova[ai] += conf_o[ai];
                s.mean_conf_slova[ai] += conf_s[ai];
            }
            if (rays_out)
                rays_out->push_back(
                    SaturationRay{a, direction, sig.values, conf_o, conf_s});

            ++s.rays;
            const std::size_t last = n_alpha - 1;
            std::size_t ones = 0, zeros = 0;
            for (std::size_t j = 0; j < k; ++j) {
                const double p = sig.values(last, j);
                if (p >= 1.0 - kSaturationTol) ++ones;
                else if (p <= kSaturationTol) ++zeros;
            }
            if (ones + zeros == k) {
                ++s.saturated;
                if (ones == 1) ++s.exactly_one;
                const bool slova_high = conf_s[last] >= kConfidenceThreshold;
                const bool ova_high = conf_o[last] >= kConfidenceThreshold;
                if (slova_high != (ones == 1)) ++s.slova_iff_violations;
                if (ova_high != (ones >= 1)) ++s.ova_iff_violations;
            }
        }
    }

    const double n_rays = static_cast<double>(s.rays);
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
        s.mean_conf_ova[ai] /= n_rays;
        s.mean_conf_slova[ai] /= n_rays;
    }
    s.saturated_fraction = static_cast<double>(s.saturated) / n_rays;
    s.exactly_one_frequency =
        s.saturated ? static_cast<double>(s.exactly_one) / static_cast<double>(s.saturated)
                    : 0.0;
    s.degenerate_model = s.saturated == 0;
    return s;
}

// ---------------------------------------------------------------------------
// plane
// ---------------------------------------------------------------------------

std::vector<Triplet> random_triplets(std::size_t n_samples, std::size_t n_triplets,
                                     std::uint64_t seed) {
    if (n_samples < 3) throw ValidationError("random_triplets: need >= 3 samples");
    Rng rng(seed);
    std::vector<Triplet> out;
    out.reserve(n_triplets);
    for (std::size_t t = 0; t < n_triplets; ++t) {
        Triplet tr;
        tr[0] = rng.below(n_samples);
        do { tr[1] = rng.below(n_samples); } while (tr[1] == tr[0]);
        do { tr[2] = rng.below(n_samples); } while (tr[2] == tr[0] || tr[2] == tr[1]);
        out.push_back(tr);
    }
    return out;
}

PlaneResult plane_sweep(const nets::MlpModel& model, const Matrix& samples,
                        const std::vector<Triplet>& triplets, std::size_t grid_size,
                        double extent) {
    require_nonempty(samples, "plane_sweep");
    if (samples.cols() != model.input_dim())
        throw ValidationError("plane_sweep: sample dim does not match model");
    if (grid_size < 3) throw ValidationError("plane_sweep: grid_size must be >= 3");
    if (!(extent > 0.0)) throw ValidationError("plane_sweep: extent must be > 0");

    const std::size_t dim = samples.cols();
    const std::size_t cells = grid_size * grid_size;
    PlaneResult res;
    res.grid_size = grid_size;
    res.alpha.resize(cells);
    res.beta.resize(cells);
    res.mean_conf_ova.assign(cells, 0.0);
    res.mean_conf_slova.assign(cells, 0.0);
    for (std::size_t gi = 0; gi < grid_size; ++gi)
        for (std::size_t gj = 0; gj < grid_size; ++gj) {
            const std::size_t cell = gi * grid_size + gj;
            res.alpha[cell] = -extent + 2.0 * extent * static_cast<double>(gi) /
                                            static_cast<double>(grid_size - 1);
            res.beta[cell] = -extent + 2.0 * extent * static_cast<double>(gj) /
                                           static_cast<double>(grid_size - 1);
        }

    Matrix points(cells, dim);
    std::vector<double> u(dim), v(dim);
    for (const Triplet& tr : triplets) {
        for (std::size_t i : tr)
            if (i >= samples.rows())
                throw ValidationError("plane_sweep: triplet index out of range");
        double uu = 0.0, vv = 0.0, uv = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            u[c] = samples(tr[1], c) - samples(tr[0], c);
            v[c] = samples(tr[2], c) - samples(tr[0], c);
            uu += u[c] * u[c];
            vv += v[c] * v[c];
            uv += u[c] * v[c];
        }
        if (uu == 0.0 || vv == 0.0 || uv * uv >= (1.0 - 1e-12) * uu * vv) {
            ++res.triplets_skipped;
            continue;
        }
        for (std::size_t cell = 0; cell < cells; ++cell)
            for (std::size_t c = 0; c < dim; ++c)
                points(cell, c) =
                    samples(tr[0], c) + res.alpha[cell] * u[c] + res.beta[cell] * v[c];
        const ProbMatrix sig = core::sigmoid_probs(nets::forward(model, points));
        const auto conf_o = core::ova_confidence(sig);
        const auto conf_s = core::slova_confidence(core::slova_probs(sig));
        for (std::size_t cell = 0; cell < cells; ++cell) {
            res.mean_conf_ova[cell] += conf_o[cell];
            res.mean_conf_slova[cell] += conf_s[cell];
        }
        ++res.triplets_used;
    }
    if (res.triplets_used > 0) {
        const double n = static_cast<double>(res.triplets_used);
        for (std::size_t cell = 0; cell < cells; ++cell) {
            res.mean_conf_ova[cell] /= n;
            res.mean_conf_slova[cell] /= n;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// shift
// ---------------------------------------------------------------------------

namespace {

std::vector<metrics::EvalReport> eval_methods(const DeskRig& rig, const Matrix& features,
                                              const LabelVector& labels, int bins) {
    const LogitMatrix z_sm = nets::forward(rig.softmax_model, features);
    const LogitMatrix z_ova = nets::forward(rig.ova_model, features);
    const ProbMatrix p_sig = core::sigmoid_probs(z_ova);
    const ProbMatrix p_slova = core::slova_probs(p_sig);

    std::vector<metrics::EvalReport> reports;
    reports.push_back(metrics::evaluate(
        ProbMatrix{metrics::softmax_probs(z_sm), ProbKind::softmax}, labels, bins));
    reports.push_back(metrics::evaluate(
        ProbMatrix{metrics::softmax_probs(scaled_logits(z_sm, rig.temp.temperature)),
                   ProbKind::softmax},
        labels, bins));
    reports.push_back(metrics::evaluate(p_sig, labels, bins));
    reports.push_back(metrics::evaluate(p_slova, labels, bins));
    reports.push_back(
        metrics::evaluate(calib::apply_calibration(rig.cal, p_slova), labels, bins));
    return reports;
}

}  // namespace

ShiftResult shift_sweep(const DeskRig& rig, const std::vector<double>& sigmas, int bins,
                        double dunn_alpha, std::uint64_t seed) {
    ShiftResult res;
    for (std::size_t lvl = 0; lvl <= sigmas.size(); ++lvl) {
        ShiftLevel level;
        level.level = static_cast<int>(lvl);
        level.sigma = lvl == 0 ? 0.0 : sigmas[lvl - 1];
        const Matrix features =
            lvl == 0 ? rig.test.features
                     : add_noise(rig.test.features, level.sigma,
                                 child_seed(seed, kShiftNoiseBase + lvl));
        level.method_reports = eval_methods(rig, features, rig.test.labels, bins);
        res.levels.push_back(std::move(level));
    }

    // cases = every (level, metric) pair; lower is better for all three
    const std::size_t m = kShiftMethods.size();
    Matrix scores(res.levels.size() * 3, m);
    for (std::size_t lvl = 0; lvl < res.levels.size(); ++lvl)
        for (std::size_t j = 0; j < m; ++j) {
            const auto& r = res.levels[lvl].method_reports[j];
            scores(lvl * 3 + 0, j) = r.ece;
            scores(lvl * 3 + 1, j) = r.nll;
            scores(lvl * 3 + 2, j) = r.brier;
        }
    res.ranking = metrics::friedman_dunn(scores, /*lower_is_better=*/true, dunn_alpha);

    const std::size_t self = m - 1;  // slova_calibrated
    res.dunn_significant.assign(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        if (j == self) {
            res.dunn_significant[j] = -1;
            continue;
        }
        const double dist = std::abs(res.ranking.mean_ranks[j] - res.ranking.mean_ranks[self]);
        res.dunn_significant[j] = dist > res.ranking.critical_distance ? 1 : 0;
    }
    return res;
}

// ---------------------------------------------------------------------------
// OOD
// ---------------------------------------------------------------------------

OodResult ood_mmc(const DeskRig& rig,
                  const std::vector<std::pair<std::string, Matrix>>& out_sets) {
    for (const auto& [name, feats] : out_sets)
        if (feats.cols() != rig.ova_model.input_dim())
            throw ValidationError("ood_mmc: dataset '" + name + "' feature dim mismatch");

    OodResult res;
    res.methods = kShiftMethods;
    res.datasets.push_back("in");
    for (const auto& [name, feats] : out_sets) res.datasets.push_back(name);
    res.mmc_table = Matrix(res.methods.size(), res.datasets.size());

    {
        const ProbMatrix p_slova = slova_matrix(rig.ova_model, rig.test.features);
        res.in_test_error = 1.0 - metrics::accuracy(p_slova, rig.test.labels);
    }
    for (std::size_t dsi = 0; dsi < res.datasets.size(); ++dsi) {
        const Matrix& feats = dsi == 0 ? rig.test.features : out_sets[dsi - 1].second;
        const LogitMatrix z_sm = nets::forward(rig.softmax_model, feats);
        const ProbMatrix p_sig = core::sigmoid_probs(nets::forward(rig.ova_model, feats));
        const ProbMatrix p_slova = core::slova_probs(p_sig);
        res.mmc_table(0, dsi) =
            metrics::mmc(ProbMatrix{metrics::softmax_probs(z_sm), ProbKind::softmax});
        res.mmc_table(1, dsi) = metrics::mmc(
            ProbMatrix{metrics::softmax_probs(scaled_logits(z_sm, rig.temp.temperature)),
                       ProbKind::softmax});
        res.mmc_table(2, dsi) = metrics::mmc(p_sig);
        res.mmc_table(3, dsi) = metrics::mmc(p_slova);
        res.mmc_table(4, dsi) = metrics::mmc(calib::apply_calibration(rig.cal, p_slova));
    }
    return res;
}

OodResult ood_sweep(const DeskRig& rig, std::size_t n_ood, std::uint64_t seed) {
    const std::size_t dim = rig.ova_model.input_dim();
    std::vector<std::pair<std::string, Matrix>> out_sets;

    out_sets.emplace_back("uniform_noise",
                          calib::make_noise_samples(rig.test.features, n_ood,
                                                    child_seed(seed, kOodUniform),
                                                    calib::NoiseMode::unit_uniform));

    nets::SyntheticDataset shifted = nets::make_synthetic(
        nets::Generator::gaussian_blobs, static_cast<int>(rig.ova_model.output_dim()), n_ood,
        dim, rig.test.noise_sigma, child_seed(seed, kOodShifted));
    for (std::size_t i = 0; i < shifted.features.rows(); ++i) {
        shifted.features(i, 0) += 10.0;
        shifted.features(i, 1) += 10.0;
    }
    out_sets.emplace_back("shifted_blobs", std::move(shifted.features));

    nets::SyntheticDataset moons = nets::make_synthetic(nets::Generator::two_moons, 2, n_ood,
                                                        dim, 0.1, child_seed(seed, kOodMoons));
    out_sets.emplace_back("two_moons", std::move(moons.features));

    return ood_mmc(rig, out_sets);
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

AblationResult ablation_sweep(const DeskRig& rig, const std::vector<double>& sigmas, int bins,
                              std::uint64_t seed) {
    // pool the clean test set with every shifted copy (same noise streams as
    // the shift harness, so the two reports describe the same data)
    const std::size_t n = rig.test.features.rows();
    Matrix pooled((sigmas.size() + 1) * n, rig.test.features.cols());
    LabelVector labels((sigmas.size() + 1) * n);
    for (std::size_t lvl = 0; lvl <= sigmas.size(); ++lvl) {
        const Matrix features =
            lvl == 0 ? rig.test.features
                     : add_noise(rig.test.features, sigmas[lvl - 1],
                                 child_seed(seed, kShiftNoiseBase + lvl));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < pooled.cols(); ++c)
                pooled(lvl * n + i, c) = features(i, c);
            labels[lvl * n + i] = rig.test.labels[i];
        }
    }

    const LogitMatrix z_sm = nets::forward(rig.softmax_model, pooled);
    const ProbMatrix p_sig = core::sigmoid_probs(nets::forward(rig.ova_model, pooled));
    const ProbMatrix p_slova = core::slova_probs(p_sig);
    const ProbMatrix p_cal = calib::apply_calibration(rig.cal, p_slova);

    AblationResult res;
    auto add = [&](const std::string& name, const ProbMatrix& p) {
        AblationVariant v;
        v.name = name;
        v.accuracy = metrics::accuracy(p, labels);
        v.ece = metrics::ece(p, labels, bins).ece;
        v.nll = metrics::nll(p, labels);
        v.brier = metrics::brier(p, labels);
        res.variants.push_back(v);
    };
    add("softmax", ProbMatrix{metrics::softmax_probs(z_sm), ProbKind::softmax});
    add("ova", p_sig);
    add("slova", p_slova);
    add("slova_calibrated", p_cal);

    res.accuracy_identical = res.variants[1].accuracy == res.variants[2].accuracy &&
                             res.variants[2].accuracy == res.variants[3].accuracy;
    if (!res.accuracy_identical)
        throw NumericError("ablation_sweep: OVA-derived variants disagree on accuracy");

    const ProbMatrix val_slova = slova_matrix(rig.ova_model, rig.val.features);
    res.val_ece_slova = metrics::ece(val_slova, rig.val.labels, bins).ece;
    res.val_ece_slova_calibrated =
        metrics::ece(calib::apply_calibration(rig.cal, val_slova), rig.val.labels, bins).ece;
    return res;
}

// ---------------------------------------------------------------------------
// stability
// ---------------------------------------------------------------------------

StabilityResult stability_sweep(const DeskRig& rig, const std::vector<int>& m_grid,
                                const std::vector<std::size_t>& nb_grid, int fit_epochs,
                                int bins, std::uint64_t seed) {
    if (m_grid.empty() || nb_grid.empty())
        throw ValidationError("stability_sweep: grids must be nonempty");
    const ProbMatrix p_slova = slova_matrix(rig.ova_model, rig.test.features);

    StabilityResult res;
    double lo_e = 1e300, hi_e = -1e300, lo_n = 1e300, hi_n = -1e300, lo_b = 1e300,
           hi_b = -1e300;
    bool any_stable = false;
    for (int m : m_grid) {
        for (std::size_t nb : nb_grid) {
            const auto ds = calib::build_calibration_dataset_from_pairs(rig.cal_pair_probs,
                                                                        rig.cal_pair_labels, nb);
            const auto model = calib::fit_exponential(ds, m, fit_epochs,
                                                      child_seed(seed, kCalFit));
            const ProbMatrix p_cal = calib::apply_calibration(model, p_slova);
            StabilityCell cell;
            cell.m_terms = m;
            cell.n_b = nb;
            cell.ece = metrics::ece(p_cal, rig.test.labels, bins).ece;
            cell.nll = metrics::nll(p_cal, rig.test.labels);
            cell.brier = metrics::brier(p_cal, rig.test.labels);
            res.cells.push_back(cell);
            if (m > 10 && nb > 400) {
                any_stable = true;
                lo_e = std::min(lo_e, cell.ece);
                hi_e = std::max(hi_e, cell.ece);
                lo_n = std::min(lo_n, cell.nll);
                hi_n = std::max(hi_n, cell.nll);
                lo_b = std::min(lo_b, cell.brier);
                hi_b = std::max(hi_b, cell.brier);
            }
        }
    }
    if (any_stable) {
        res.ece_spread = hi_e - lo_e;
        res.nll_spread = hi_n - lo_n;
        res.brier_spread = hi_b - lo_b;
    }
    return res;
}

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> num_row(std::initializer_list<double> values) {
    std::vector<std::string> row;
    for (double v : values) row.push_back(io::format_double(v));
    return row;
}

}  // namespace

ExperimentOutput run_saturation(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    Matrix anchors(std::min<std::size_t>(cfg.saturation.anchors, rig.test.features.rows()),
                   rig.test.features.cols());
    for (std::size_t i = 0; i < anchors.rows(); ++i)
        for (std::size_t c = 0; c < anchors.cols(); ++c)
            anchors(i, c) = rig.test.features(i, c);
    const SaturationSummary s =
        saturation_sweep(rig.ova_model, anchors, cfg.saturation.directions,
                         cfg.saturation.alpha_max, cfg.saturation.alpha_points,
                         child_seed(cfg.seed, kSatDirections));

    ExperimentOutput out;
    out.report = json{{"schema", "slova.saturation.report/1"},
                      {"config", config_to_json(cfg)},
                      {"rays", s.rays},
                      {"saturated_fraction", s.saturated_fraction},
                      {"exactly_one_frequency", s.exactly_one_frequency},
                      {"theoretical_exactly_one", s.theoretical_exactly_one},
                      {"slova_iff_violations", s.slova_iff_violations},
                      {"ova_iff_violations", s.ova_iff_violations},
                      {"degenerate_model", s.degenerate_model}};
    NamedCsv curve{"saturation.curve.csv", {"alpha", "mean_conf_ova", "mean_conf_slova"}, {}};
    for (std::size_t i = 0; i < s.alphas.size(); ++i)
        curve.rows.push_back(num_row({s.alphas[i], s.mean_conf_ova[i], s.mean_conf_slova[i]}));
    out.csvs.push_back(std::move(curve));
    return out;
}

ExperimentOutput run_plane(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    const auto triplets = random_triplets(rig.test.features.rows(), cfg.plane.triplets,
                                          child_seed(cfg.seed, kPlaneTriplets));
    const PlaneResult r = plane_sweep(rig.ova_model, rig.test.features, triplets,
                                      cfg.plane.grid_size, cfg.plane.extent);

    double max_gap = 0.0;  // max conf_slova - conf_ova over cells; must stay <= 0
    for (std::size_t i = 0; i < r.mean_conf_ova.size(); ++i)
        max_gap = std::max(max_gap, r.mean_conf_slova[i] - r.mean_conf_ova[i]);

    ExperimentOutput out;
    out.report = json{{"schema", "slova.plane.report/1"},
                      {"config", config_to_json(cfg)},
                      {"triplets_used", r.triplets_used},
                      {"triplets_skipped", r.triplets_skipped},
                      {"grid_size", r.grid_size},
                      {"max_slova_minus_ova", max_gap}};
    NamedCsv grid{"plane.grid.csv", {"alpha", "beta", "conf_ova", "conf_slova"}, {}};
    for (std::size_t i = 0; i < r.alpha.size(); ++i)
        grid.rows.push_back(
            num_row({r.alpha[i], r.beta[i], r.mean_conf_ova[i], r.mean_conf_slova[i]}));
    out.csvs.push_back(std::move(grid));
    return out;
}

ExperimentOutput run_shift(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    const ShiftResult r =
        shift_sweep(rig, cfg.shift.sigmas, cfg.metric_bins, cfg.shift.dunn_alpha, cfg.seed);

    json levels = json::array();
    for (const auto& lvl : r.levels) {
        json methods = json::object();
        for (std::size_t j = 0; j < kShiftMethods.size(); ++j)
            methods[kShiftMethods[j]] = io::eval_report_to_json(lvl.method_reports[j]);
        levels.push_back(
            json{{"level", lvl.level}, {"noise_sigma", lvl.sigma}, {"methods", methods}});
    }
    json friedman = io::ranking_to_json(r.ranking);
    friedman["methods"] = kShiftMethods;
    friedman["significant_vs_slova_calibrated"] = r.dunn_significant;

    ExperimentOutput out;
    out.report = json{{"schema", "slova.shift.report/1"},
                      {"config", config_to_json(cfg)},
                      {"methods", kShiftMethods},
                      {"temperature", rig.temp.temperature},
                      {"levels", levels},
                      {"friedman", friedman}};
    NamedCsv table{"shift.metrics.csv",
                   {"level", "noise_sigma", "method", "accuracy", "ece", "nll", "brier", "mmc"},
                   {}};
    for (const auto& lvl : r.levels)
        for (std::size_t j = 0; j < kShiftMethods.size(); ++j) {
            const auto& rep = lvl.method_reports[j];
            std::vector<std::string> row{std::to_string(lvl.level),
                                         io::format_double(lvl.sigma), kShiftMethods[j]};
            for (double v : {rep.accuracy, rep.ece, rep.nll, rep.brier, rep.mmc})
                row.push_back(io::format_double(v));
            table.rows.push_back(std::move(row));
        }
    out.csvs.push_back(std::move(table));
    return out;
}

ExperimentOutput run_ood(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    const OodResult r = ood_sweep(rig, cfg.ood.n_ood, cfg.seed);

    json mmc = json::object();
    for (std::size_t i = 0; i < r.methods.size(); ++i) {
        json per_ds = json::object();
        for (std::size_t j = 0; j < r.datasets.size(); ++j)
            per_ds[r.datasets[j]] = r.mmc_table(i, j);
        mmc[r.methods[i]] = per_ds;
    }
    ExperimentOutput out;
    out.report = json{{"schema", "slova.ood.report/1"},
                      {"config", config_to_json(cfg)},
                      {"in_test_error", r.in_test_error},
                      {"methods", r.methods},
                      {"datasets", r.datasets},
                      {"mmc", mmc}};
    NamedCsv table{"ood.mmc.csv", {"method", "dataset", "mmc"}, {}};
    for (std::size_t i = 0; i < r.methods.size(); ++i)
        for (std::size_t j = 0; j < r.datasets.size(); ++j)
            table.rows.push_back(
                {r.methods[i], r.datasets[j], io::format_double(r.mmc_table(i, j))});
    out.csvs.push_back(std::move(table));
    return out;
}

ExperimentOutput run_ablation(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    const AblationResult r = ablation_sweep(rig, cfg.shift.sigmas, cfg.metric_bins, cfg.seed);

    json variants = json::array();
    for (const auto& v : r.variants)
        variants.push_back(json{{"name", v.name},
                                {"accuracy", v.accuracy},
                                {"ece", v.ece},
                                {"nll", v.nll},
                                {"brier", v.brier}});
    ExperimentOutput out;
    out.report = json{{"schema", "slova.ablation.report/1"},
                      {"config", config_to_json(cfg)},
                      {"variants", variants},
                      {"accuracy_identical", r.accuracy_identical},
                      {"val_ece_slova", r.val_ece_slova},
                      {"val_ece_slova_calibrated", r.val_ece_slova_calibrated}};
    NamedCsv table{"ablation.metrics.csv", {"variant", "accuracy", "ece", "nll", "brier"}, {}};
    for (const auto& v : r.variants) {
        std::vector<std::string> row{v.name};
        for (double x : {v.accuracy, v.ece, v.nll, v.brier})
            row.push_back(io::format_double(x));
        table.rows.push_back(std::move(row));
    }
    out.csvs.push_back(std::move(table));
    return out;
}

ExperimentOutput run_stability(const RunConfig& cfg, const nets::MlpModel* pretrained_ova) {
    DeskRig rig = make_rig(cfg, pretrained_ova);
    const StabilityResult r =
        stability_sweep(rig, cfg.stability.m_grid, cfg.stability.nb_grid,
                        cfg.experiment_fit_epochs, cfg.metric_bins, cfg.seed);

    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back(json{{"M", c.m_terms},
                             {"n_b", c.n_b},
                             {"ece", c.ece},
                             {"nll", c.nll},
                             {"brier", c.brier}});
    ExperimentOutput out;
    out.report = json{{"schema", "slova.stability.report/1"},
                      {"config", config_to_json(cfg)},
                      {"cells", cells},
                      {"spread",
                       {{"region", "M > 10 and n_b > 400"},
                        {"ece", r.ece_spread},
                        {"nll", r.nll_spread},
                        {"brier", r.brier_spread}}}};
    NamedCsv table{"stability.grid.csv", {"M", "n_b", "ece", "nll", "brier"}, {}};
    for (const auto& c : r.cells)
        table.rows.push_back({std::to_string(c.m_terms), std::to_string(c.n_b),
                              io::format_double(c.ece), io::format_double(c.nll),
                              io::format_double(c.brier)});
    out.csvs.push_back(std::move(table));
    return out;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"saturation", "plane",    "shift",
                                                   "ood",        "ablation", "stability"};
    return names;
}

ExperimentOutput run_experiment(const std::string& name, const RunConfig& cfg,
                                const nets::MlpModel* pretrained_ova) {
    if (name == "saturation") return run_saturation(cfg, pretrained_ova);
    if (name == "plane") return run_plane(cfg, pretrained_ova);
    if (name == "shift") return run_shift(cfg, pretrained_ova);
    if (name == "ood") return run_ood(cfg, pretrained_ova);
    if (name == "ablation") return run_ablation(cfg, pretrained_ova);
    if (name == "stability") return run_stability(cfg, pretrained_ova);
    std::string valid;
    for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ValidationError("unknown experiment '" + name + "' (valid: " + valid + ")");
}

}  // namespace slova::experiments
