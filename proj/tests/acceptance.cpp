// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "slova/calibrate.hpp"
#include "slova/core.hpp"
#include "slova/experiments.hpp"
#include "slova/json_io.hpp"
#include "slova/metrics.hpp"
#include "slova/nets.hpp"
#include "slova/rng.hpp"

using namespace slova;

namespace {

int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void criterion(const char* id, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------------------

void c1_total_probability() {
    Timer t;
    Rng rng(101);
    double worst = 0.0;
    for (std::size_t k = 2; k <= 12; ++k) {
        Matrix rows(1000, k);
        for (double& v : rows.data()) v = rng.uniform01();
        ProbMatrix p{rows, ProbKind::sigmoid};
        auto none = core::none_prob(p);
        for (std::size_t i = 0; i < rows.rows(); ++i) {
            double subsets = 0.0;
            for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
                double prod = 1.0;
                for (std::size_t j = 0; j < k; ++j)
                    prod *= (mask >> j) & 1 ? rows(i, j) : 1.0 - rows(i, j);
                subsets += prod;
            }
            worst = std::max(worst, std::abs(none[i] + subsets - 1.0));
        }
    }
    const double secs = t.seconds();
    criterion("C1 total-probability oracle", worst <= 1e-9 && secs < 10.0,
              fmt("max |none + subset sum - 1| = %.3g over K=2..12 x 1000 rows, %.1fs", worst,
                  secs));
}

void c2_dominance() {
    Rng rng(102);
    Matrix rows(100000, 10);
    for (double& v : rows.data()) v = rng.uniform01();
    ProbMatrix p{rows, ProbKind::sigmoid};
    auto co = core::ova_confidence(p);
    auto cs = core::slova_confidence(core::slova_probs(p));
    std::size_t violations = 0;
    for (std::size_t i = 0; i < rows.rows(); ++i)
        if (cs[i] > co[i]) ++violations;
    criterion("C2 confidence dominance", violations == 0,
              fmt("%.0f violations of conf_slova <= conf_ova on 1e5 rows",
                  static_cast<double>(violations)));
}

void c3_saturation(const experiments::DeskRig& rig, double rig_seconds) {
    Timer t;
    RunConfig cfg;
    Matrix anchors(2, rig.test.features.cols());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t c = 0; c < anchors.cols(); ++c)
            anchors(i, c) = rig.test.features(i, c);
    auto s = experiments::saturation_sweep(rig.ova_model, anchors, 500, 1e6, 30,
                                           child_seed(cfg.seed, 50));
    const double secs = t.seconds() + rig_seconds;
    const bool ok = s.rays == 1000 && s.saturated > 0 && s.slova_iff_violations == 0 &&
                    s.ova_iff_violations == 0 && !s.degenerate_model && secs < 120.0;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "saturated fraction %.3f of 1000 rays, iff violations slova=%zu ova=%zu; "
                  "exactly-one freq %.4f vs 1/2^K = 0.0625 (reported), %.1fs incl. training",
                  s.saturated_fraction, s.slova_iff_violations, s.ova_iff_violations,
                  s.exactly_one_frequency, secs);
    criterion("C3 saturation iff-condition", ok, buf);
}

void c4_random_score_curves() {
    Timer t;
    bool ok = true;
    std::string detail;

    // empirical CDF of products of K uniforms vs the exact curve
    Rng rng(104);
    double worst_sup = 0.0;
    for (int k : {2, 3, 5}) {
        const std::size_t n = 1000000;
        std::vector<double> prod(n);
        for (auto& v : prod) {
            double p = 1.0;
            for (int j = 0; j < k; ++j) p *= rng.uniform01();
            v = p;
        }
        std::sort(prod.begin(), prod.end());
        double sup = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = calib::exact_random_calibration(prod[i], k);
            sup = std::max({sup, std::abs(c - static_cast<double>(i) / n),
                            std::abs(c - static_cast<double>(i + 1) / n)});
        }
        worst_sup = std::max(worst_sup, sup);
    }
    ok = ok && worst_sup <= 0.005;

    double worst_fd = 0.0;
    const double h = 1e-6;
    for (int k : {2, 3, 5})
        for (int i = 1; i <= 99; ++i) {
            const double p = i / 100.0;
            const double fd = (calib::exact_random_calibration(p + h, k) -
                               calib::exact_random_calibration(p - h, k)) /
                              (2.0 * h);
            worst_fd = std::max(worst_fd, std::abs(fd - calib::random_slova_density(p, k)));
        }
    ok = ok && worst_fd <= 1e-6;

    const double v_exact = calib::exact_random_calibration(0.5, 3);
    const double v_appr = calib::approx_random_calibration(0.5, 3);
    ok = ok && std::abs(v_exact - 0.9667) <= 5e-5 && v_appr == 0.875;

    bool ordered = true;
    for (int k : {2, 3, 5})
        for (int i = 0; i <= 100; ++i) {
            const double p = i / 100.0;
            if (calib::exact_random_calibration(p, k) <
                calib::approx_random_calibration(p, k) - 1e-12)
                ordered = false;
        }
    ok = ok && ordered;

    const double secs = t.seconds();
    ok = ok && secs < 30.0;
    criterion("C4 random-score curves", ok,
              fmt("CDF sup %.4f (<=0.005), max |fd - density| %.2g (<=1e-6)", worst_sup,
                  worst_fd) +
                  fmt(", c(0.5,3)=%.6f, approx %.3f, exact>=approx ", v_exact, v_appr) +
                  (ordered ? "holds" : "BROKEN") + fmt(", %.1fs", secs));
}

struct FittedPair {
    calib::CalibrationModel square, identity;
};

FittedPair c5_calibration_recovery() {
    Rng rng(105);
    const std::size_t n = 10000;

    auto stream = [&](auto truth) {
        std::vector<double> probs(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = rng.uniform01();
            labels[i] = rng.uniform01() < truth(probs[i]) ? 1 : 0;
        }
        return calib::build_calibration_dataset_from_pairs(probs, labels, 4000);
    };

    auto ds_sq = stream([](double p) { return p * p; });
    auto model_sq = calib::fit_exponential(ds_sq, 5, 20000, 1051);
    double mae = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        mae += std::abs(model_sq.evaluate(p) - p * p);
    }
    mae /= 101.0;

    auto ds_id = stream([](double p) { return p; });
    auto model_id = calib::fit_exponential(ds_id, 5, 20000, 1052);
    double sup = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        sup = std::max(sup, std::abs(model_id.evaluate(p) - p));
    }

    criterion("C5 calibration recovery", mae <= 0.05 && sup <= 0.02,
              fmt("p^2 stream MAE %.4f (<=0.05), identity stream sup %.4f (<=0.02); "
                  "1e4 pairs, M=5",
                  mae, sup));
    return {model_sq, model_id};
}

void c6_calibration_structure(const FittedPair& fitted,
                              const calib::CalibrationModel& rig_cal) {
    bool ok = true;
    for (const auto* m : {&fitted.square, &fitted.identity, &rig_cal}) {
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double c = m->evaluate(i / 1000.0);
            if (c < prev) ok = false;
            prev = c;
        }
        if (m->evaluate(0.0) != 0.0) ok = false;
        if (std::abs(m->evaluate(1.0) - 1.0) > 1e-9) ok = false;
    }

    Rng rng(106);
    Matrix rows(10000, 10);
    for (double& v : rows.data()) v = rng.uniform01();
    auto cal = calib::apply_calibration(rig_cal, ProbMatrix{rows, ProbKind::slova});
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < rows.rows(); ++i)
        if (core::argmax_row(cal.values.row(i)) != core::argmax_row(rows.row(i))) ++mismatches;
    ok = ok && mismatches == 0;
    criterion("C6 calibration structure", ok,
              fmt("3 fitted maps monotone on 1001-grid with c(0)=0, |c(1)-1|<=1e-9; "
                  "argmax changes on 1e4 rows: %.0f",
                  static_cast<double>(mismatches)));
}

void c7_metrics_sanity() {
    bool ok = true;

    Rng rng(107);
    const std::size_t n = 100000;
    std::vector<double> conf(n);
    std::vector<int> correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        conf[i] = rng.uniform01();
        correct[i] = rng.uniform01() < conf[i] ? 1 : 0;
    }
    const double stream_ece = metrics::ece_from_pairs(conf, correct, 15).ece;
    ok = ok && stream_ece < 0.02;

    auto pm2 = [&](std::initializer_list<std::initializer_list<double>> rows) {
        return ProbMatrix{Matrix::from_rows(rows), ProbKind::slova};
    };
    ok = ok && metrics::ece(pm2({{1.0, 0.0}, {0.0, 1.0}}), {0, 1}, 15).ece == 0.0;
    ok = ok && std::abs(metrics::ece(pm2({{0.8, 0.2}, {0.8, 0.2}}), {0, 1}, 1).ece - 0.3) <=
                   1e-12;
    ok = ok && metrics::ece(pm2({{1.0, 0.0}, {1.0, 0.0}}), {1, 1}, 15).ece == 1.0;
    ok = ok && metrics::brier(pm2({{1.0, 0.0}}), {0}) == 0.0;
    ok = ok && std::abs(metrics::brier(pm2({{0.5, 0.5}}), {0}) - 0.5) <= 1e-12;
    ok = ok && metrics::brier(pm2({{0.0, 1.0}}), {0}) == 2.0;
    ok = ok && metrics::nll(pm2({{1.0, 0.0}}), {0}) == 0.0;
    ok = ok && std::abs(metrics::nll(pm2({{0.5, 0.5}}), {0}) - std::log(2.0)) <= 1e-12;
    ok = ok && std::abs(metrics::nll(pm2({{0.0, 1.0}}), {0}) + std::log(1e-12)) <= 1e-9;
    ok = ok && std::abs(metrics::mmc(pm2({{0.2, 0.8}, {0.4, 0.6}})) - 0.7) <= 1e-12;

    criterion("C7 metrics sanity", ok,
              fmt("calibrated-stream ECE %.4f (<0.02) and all hand micro-cases exact",
                  stream_ece));
}

void c8_stability(const experiments::DeskRig& rig) {
    Timer t;
    RunConfig cfg;
    auto res = experiments::stability_sweep(rig, {12, 20, 50}, {500, 1000, 4000},
                                            cfg.experiment_fit_epochs, cfg.metric_bins,
                                            cfg.seed);
    const double secs = t.seconds();
    criterion("C8 calibration stability", res.ece_spread <= 0.02 && secs < 300.0,
              fmt("ECE spread %.4f (<=0.02) over M in {12,20,50} x n_b in "
                  "{500,1000,4000}, %.1fs",
                  res.ece_spread, secs));
}

void c9_shift_direction(const experiments::DeskRig& rig) {
    RunConfig cfg;
    auto res = experiments::shift_sweep(rig, cfg.shift.sigmas, cfg.metric_bins,
                                        cfg.shift.dunn_alpha, cfg.seed);
    const std::size_t last = res.levels.size() - 1;
    const double conf0 = res.levels[0].method_reports[4].mmc;   // slova_calibrated
    const double conf5 = res.levels[last].method_reports[4].mmc;
    bool monotone = true;
    for (std::size_t j = 0; j < experiments::kShiftMethods.size(); ++j)
        for (std::size_t lvl = 1; lvl < res.levels.size(); ++lvl)
            if (res.levels[lvl].method_reports[j].accuracy >
                res.levels[lvl - 1].method_reports[j].accuracy)
                monotone = false;
    criterion("C9 shift direction", conf5 < conf0 && monotone,
              fmt("mean calibrated confidence %.4f (level 5) < %.4f (level 0); "
                  "accuracy non-increasing for all 5 methods: ",
                  conf5, conf0) +
                  (monotone ? "yes" : "NO"));
}

void c10_gradients() {
    auto ds = nets::make_synthetic(nets::Generator::gaussian_blobs, 3, 5, 4, 1.5, 110);
    const double step = 1e-5;
    double worst = 0.0;
    for (nets::LossKind loss : {nets::LossKind::ova, nets::LossKind::softmax_ce}) {
        auto m = nets::MlpModel::init(
            {4, 6, 3},
            loss == nets::LossKind::ova ? nets::Head::ova_sigmoid : nets::Head::softmax, 111);
        auto g = nets::loss_and_gradients(m, ds.features, ds.labels, loss);
        for (std::size_t l = 0; l < m.weights.size(); ++l)
            for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
                auto up = m, dn = m;
                up.weights[l].data()[i] += step;
                dn.weights[l].data()[i] -= step;
                const double fd =
                    (nets::loss_and_gradients(up, ds.features, ds.labels, loss).loss -
                     nets::loss_and_gradients(dn, ds.features, ds.labels, loss).loss) /
                    (2.0 * step);
                const double an = g.d_weights[l].data()[i];
                worst = std::max(worst, std::abs(fd - an) /
                                            std::max({std::abs(fd), std::abs(an), 1e-6}));
            }
    }
    criterion("C10 gradient correctness", worst <= 1e-4,
              fmt("max relative error %.2g vs central differences (both losses)", worst));
}

void c11_determinism() {
    RunConfig cfg;
    cfg.data.train_n = 300;
    cfg.data.val_n = 300;
    cfg.data.test_n = 300;
    cfg.net.epochs = 12;
    cfg.experiment_fit_epochs = 300;
    cfg.calibration.n_b = 400;
    cfg.saturation.anchors = 1;
    cfg.saturation.directions = 100;
    cfg.plane.triplets = 4;
    cfg.plane.grid_size = 7;
    cfg.ood.n_ood = 120;
    cfg.stability.m_grid = {12, 20};
    cfg.stability.nb_grid = {200, 500};

    bool ok = true;
    std::string bad;
    for (const auto& name : experiments::experiment_names()) {
        auto a = experiments::run_experiment(name, cfg);
        auto b = experiments::run_experiment(name, cfg);
        bool same = a.report.dump() == b.report.dump() && a.csvs.size() == b.csvs.size();
        for (std::size_t i = 0; same && i < a.csvs.size(); ++i)
            same = a.csvs[i].rows == b.csvs[i].rows;
        if (!same) {
            ok = false;
            bad += name + " ";
        }
    }
    criterion("C11 determinism", ok,
              ok ? "all six experiments byte-identical under a repeated seed"
                 : "non-deterministic: " + bad);
}

void c12_friedman_micro() {
    Matrix scores = Matrix::from_rows({{0.1, 0.2}, {0.3, 0.5}, {0.0, 0.4}, {0.2, 0.9}});
    auto t = metrics::friedman_dunn(scores, true, 0.05);
    const bool ok = t.mean_ranks[0] == 1.0 && t.mean_ranks[1] == 2.0 &&
                    std::abs(t.critical_distance - 1.960 / 2.0) <= 1e-12 &&
                    std::abs(t.chi2 - 4.0) <= 1e-12;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mean ranks (%.1f, %.1f), CD %.4f (= q_0.05 / 2), chi2 %.1f",
                  t.mean_ranks[0], t.mean_ranks[1], t.critical_distance, t.chi2);
    criterion("C12 Friedman/Dunn micro-case", ok, buf);
}

}  // namespace

int main() {
    std::printf("acceptance suite (desk-scale, seed 1234 defaults)\n");

    c1_total_probability();
    c2_dominance();

    Timer rig_timer;
    RunConfig cfg;
    experiments::DeskRig rig = experiments::make_rig(cfg);
    const double rig_seconds = rig_timer.seconds();

    c3_saturation(rig, rig_seconds);
    c4_random_score_curves();
    FittedPair fitted = c5_calibration_recovery();
    c6_calibration_structure(fitted, rig.cal);
    c7_metrics_sanity();
    c8_stability(rig);
    c9_shift_direction(rig);
    c10_gradients();
    c11_determinism();
    c12_friedman_micro();

    std::printf("%d of 12 criteria passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
