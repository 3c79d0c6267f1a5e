#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "slova/metrics.hpp"
#include "slova/nets.hpp"
#include "slova/rng.hpp"

using namespace slova;
using namespace slova::metrics;

namespace {

ProbMatrix pm(std::initializer_list<std::initializer_list<double>> rows) {
    return ProbMatrix{Matrix::from_rows(rows), ProbKind::slova};
}

}  // namespace

TEST_CASE("ece micro-cases") {
    // perfect, fully confident
    auto perfect = pm({{1.0, 0.0}, {0.0, 1.0}});
    CHECK(ece(perfect, {0, 1}, 15).ece == 0.0);

    // two samples at confidence 0.8, one correct, single bin
    auto two = pm({{0.8, 0.2}, {0.8, 0.2}});
    auto res = ece(two, {0, 1}, 1);
    CHECK(res.ece == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(res.bins.size() == 1);
    CHECK(res.bins[0].count == 2);
    CHECK(res.bins[0].avg_conf == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(res.bins[0].avg_acc == doctest::Approx(0.5).epsilon(1e-12));

    // fully confident and always wrong
    auto wrong = pm({{1.0, 0.0}, {1.0, 0.0}});
    CHECK(ece(wrong, {1, 1}, 15).ece == 1.0);
}

TEST_CASE("ece scalar is recomputable from its own bins") {
    Rng rng(5);
    Matrix m(2000, 4);
    for (double& v : m.data()) v = rng.uniform01();
    LabelVector y(2000);
    for (auto& v : y) v = static_cast<int>(rng.below(4));
    auto res = ece(ProbMatrix{m, ProbKind::slova}, y, 15);
    double recomputed = 0.0;
    std::size_t total = 0;
    for (const auto& b : res.bins) {
        total += b.count;
        recomputed += static_cast<double>(b.count) / 2000.0 * std::abs(b.avg_acc - b.avg_conf);
    }
    CHECK(total == 2000);
    CHECK(std::abs(recomputed - res.ece) <= 1e-12);
    CHECK(res.ece >= 0.0);
    CHECK(res.ece <= 1.0);
}

TEST_CASE("bin-normalized variant divides by the bin count instead") {
    auto two = pm({{0.8, 0.2}, {0.8, 0.2}});
    CHECK(ece(two, {0, 1}, 1, true).ece == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("brier micro-cases") {
    CHECK(brier(pm({{1.0, 0.0}}), {0}) == 0.0);
    CHECK(brier(pm({{0.5, 0.5}}), {0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(brier(pm({{0.0, 1.0}}), {0}) == 2.0);
}

TEST_CASE("nll micro-cases") {
    CHECK(nll(pm({{1.0, 0.0}}), {0}) == 0.0);
    CHECK(nll(pm({{0.5, 0.5}}), {0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(nll(pm({{0.0, 1.0}}), {0}) ==
          doctest::Approx(-std::log(1e-12)).epsilon(1e-9));
}

TEST_CASE("mmc micro-cases") {
    CHECK(mmc(pm({{1.0, 0.0}, {0.0, 1.0}})) == 1.0);
    CHECK(mmc(pm({{0.2, 0.8}, {0.4, 0.6}})) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(mmc(pm({{0.3, 0.1}})) == 0.3);
}

TEST_CASE("accuracy micro-cases") {
    CHECK(accuracy(pm({{0.9, 0.1}, {0.2, 0.8}}), {0, 1}) == 1.0);
    CHECK(accuracy(pm({{0.9, 0.1}, {0.2, 0.8}}), {1, 0}) == 0.0);
    CHECK(accuracy(pm({{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}, {0.6, 0.4}}), {0, 1, 0, 1}) == 0.75);
}

TEST_CASE("sample permutation leaves all metrics unchanged") {
    Rng rng(6);
    const std::size_t n = 500, k = 5;
    Matrix m(n, k);
    for (double& v : m.data()) v = rng.uniform01();
    LabelVector y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(k));

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    Matrix m2(n, k);
    LabelVector y2(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) m2(i, j) = m(perm[i], j);
        y2[i] = y[perm[i]];
    }
    auto a = ProbMatrix{m, ProbKind::slova};
    auto b = ProbMatrix{m2, ProbKind::slova};
    CHECK(ece(a, y, 15).ece == doctest::Approx(ece(b, y2, 15).ece).epsilon(1e-12));
    CHECK(brier(a, y) == doctest::Approx(brier(b, y2)).epsilon(1e-12));
    CHECK(nll(a, y) == doctest::Approx(nll(b, y2)).epsilon(1e-12));
    CHECK(mmc(a) == doctest::Approx(mmc(b)).epsilon(1e-12));
}

TEST_CASE("perfectly calibrated stream scores ECE below 0.02") {
    Rng rng(8);
    const std::size_t n = 100000;
    std::vector<double> conf(n);
    std::vector<int> correct(n);
    for (std::size_t i = 0; i < n; ++i) {
        conf[i] = rng.uniform01();
        correct[i] = rng.uniform01() < conf[i] ? 1 : 0;
    }
    CHECK(ece_from_pairs(conf, correct, 15).ece < 0.02);
}

// ---------------------------------------------------------------------------
// temperature scaling
// ---------------------------------------------------------------------------

namespace {

// blobs whose true posteriors are known: logit_k = -|x - c_k|^2 / (2 sigma^2)
// makes softmax(logits) the exact class posterior, so T* should sit at 1
void calibrated_blob_logits(std::size_t n, double sigma, std::uint64_t seed, Matrix& logits,
                            LabelVector& labels) {
    auto ds = nets::make_synthetic(nets::Generator::gaussian_blobs, 4, n, 2, sigma, seed);
    labels = ds.labels;
    logits = Matrix(n, 4);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < 4; ++k) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / 4.0;
            const double dx = ds.features(i, 0) - 5.0 * std::cos(ang);
            const double dy = ds.features(i, 1) - 5.0 * std::sin(ang);
            logits(i, k) = -(dx * dx + dy * dy) / (2.0 * sigma * sigma);
        }
}

}  // namespace

TEST_CASE("temperature recovery on calibrated logits (grid-scan oracle)") {
    Matrix logits;
    LabelVector labels;
    calibrated_blob_logits(4000, 2.5, 91, logits, labels);

    auto fit = temperature_scale_fit(logits, labels);
    CHECK(!fit.degenerate);
    CHECK(std::abs(fit.temperature - 1.0) <= 0.05);

    // oracle: dense scan over log T
    double best_t = 0.0, best = 1e300;
    for (int i = 0; i <= 1200; ++i) {
        const double t = std::exp(-3.0 + 6.0 * static_cast<double>(i) / 1200.0);
        const double v = softmax_nll(logits, labels, t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    CHECK(std::abs(std::log(fit.temperature) - std::log(best_t)) <= 0.02);

    // doubled logits need exactly twice the temperature
    Matrix doubled = logits;
    for (double& v : doubled.data()) v *= 2.0;
    auto fit2 = temperature_scale_fit(doubled, labels);
    CHECK(std::abs(fit2.temperature - 2.0) <= 0.1);

    auto again = temperature_scale_fit(logits, labels);
    CHECK(again.temperature == fit.temperature);
}

TEST_CASE("temperature fit flags degenerate label sets") {
    Matrix logits = Matrix::from_rows({{1.0, 0.0}, {2.0, 0.5}, {0.3, 0.1}});
    auto fit = temperature_scale_fit(logits, {0, 0, 0});
    CHECK(fit.degenerate);
    CHECK(fit.temperature > 0.0);
    CHECK_THROWS_AS(temperature_scale_fit(Matrix::from_rows({{1.0, 0.0}}), LabelVector{0}),
                    ValidationError);
}

// ---------------------------------------------------------------------------
// Friedman + Bonferroni-Dunn
// ---------------------------------------------------------------------------

TEST_CASE("friedman micro-case: 2 methods, 4 cases, A always better") {
    Matrix scores = Matrix::from_rows({{0.1, 0.2}, {0.3, 0.5}, {0.0, 0.4}, {0.2, 0.9}});
    auto t = friedman_dunn(scores, true, 0.05);
    CHECK(t.mean_ranks[0] == 1.0);
    CHECK(t.mean_ranks[1] == 2.0);
    CHECK(t.critical_distance == doctest::Approx(1.960 / 2.0).epsilon(1e-12));
    auto t10 = friedman_dunn(scores, true, 0.10);
    CHECK(t10.critical_distance == doctest::Approx(1.645 / 2.0).epsilon(1e-12));
}

TEST_CASE("friedman on identical columns: all ranks tie, chi2 = 0") {
    Matrix scores(5, 4);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) scores(i, j) = static_cast<double>(i);
    auto t = friedman_dunn(scores, true, 0.05);
    for (double r : t.mean_ranks) CHECK(r == 2.5);
    CHECK(t.chi2 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("every rank row sums to m(m+1)/2") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(8), m = 2 + rng.below(9);
        Matrix scores(n, m);
        for (double& v : scores.data())
            v = static_cast<double>(rng.below(4));  // coarse values force ties
        auto t = friedman_dunn(scores, rng.uniform01() < 0.5, 0.05);
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) sum += t.ranks(i, j);
            CHECK(sum == doctest::Approx(static_cast<double>(m * (m + 1)) / 2.0)
                             .epsilon(1e-12));
        }
    }
}

TEST_CASE("higher-is-better ranking puts the best method first") {
    Matrix scores = Matrix::from_rows({{0.9, 0.1}, {0.8, 0.3}});
    auto t = friedman_dunn(scores, false, 0.05);
    CHECK(t.mean_ranks[0] == 1.0);
    CHECK(t.mean_ranks[1] == 2.0);
}

TEST_CASE("friedman input validation") {
    Matrix one_col(3, 1, 0.0);
    CHECK_THROWS_AS(friedman_dunn(one_col, true, 0.05), ValidationError);
    Matrix one_row(1, 3, 0.0);
    CHECK_THROWS_AS(friedman_dunn(one_row, true, 0.05), ValidationError);
    Matrix ok(3, 3, 0.0);
    CHECK_THROWS_AS(friedman_dunn(ok, true, 0.01), ValidationError);
    Matrix wide(3, 11, 0.0);
    CHECK_THROWS_AS(friedman_dunn(wide, true, 0.05), ValidationError);
}

TEST_CASE("evaluate bundles a consistent report") {
    Rng rng(14);
    Matrix m(300, 3);
    for (double& v : m.data()) v = rng.uniform01();
    LabelVector y(300);
    for (auto& v : y) v = static_cast<int>(rng.below(3));
    auto p = ProbMatrix{m, ProbKind::slova};
    auto rep = evaluate(p, y, 10);
    CHECK(rep.accuracy == accuracy(p, y));
    CHECK(rep.ece == ece(p, y, 10).ece);
    CHECK(rep.nll == nll(p, y));
    CHECK(rep.brier == brier(p, y));
    CHECK(rep.mmc == mmc(p));
    std::size_t total = 0;
    for (const auto& b : rep.bins) total += b.count;
    CHECK(total == 300);
}
