#include "slova/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slova/core.hpp"

namespace slova::metrics {

EceResult ece_from_pairs(const std::vector<double>& conf, const std::vector<int>& correct,
                         int bins, bool normalize_by_bins) {
    if (bins < 1) throw ValidationError("ece: bins must be >= 1");
    if (conf.size() != correct.size() || conf.empty())
        throw ValidationError("ece: confidence/correct size mismatch or empty");

    EceResult res;
    res.bins.resize(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        res.bins[b].lo = static_cast<double>(b) / bins;
        res.bins[b].hi = static_cast<double>(b + 1) / bins;
    }
    std::vector<double> sum_conf(bins, 0.0), sum_acc(bins, 0.0);
    for (std::size_t i = 0; i < conf.size(); ++i) {
        int b = static_cast<int>(std::ceil(conf[i] * bins));
        b = std::clamp(b, 1, bins) - 1;
        res.bins[b].count += 1;
        sum_conf[b] += conf[i];
        sum_acc[b] += correct[i];
    }
    const double n = static_cast<double>(conf.size());
    double e = 0.0;
    for (int b = 0; b < bins; ++b) {
        if (res.bins[b].count == 0) continue;
        const double cnt = static_cast<double>(res.bins[b].count);
        res.bins[b].avg_conf = sum_conf[b] / cnt;
        res.bins[b].avg_acc = sum_acc[b] / cnt;
        const double denom = normalize_by_bins ? static_cast<double>(bins) : n;
        e += cnt / denom * std::abs(res.bins[b].avg_acc - res.bins[b].avg_conf);
    }
    res.ece = e;
    return res;
}

namespace {

void check_pair(const ProbMatrix& p, const LabelVector& labels, const std::string& what) {
    require_nonempty(p.values, what);
    require_labels(labels, p.rows(), p.cols(), what);
}

}  // namespace

EceResult ece(const ProbMatrix& p, const LabelVector& labels, int bins, bool normalize_by_bins) {
    check_pair(p, labels, "ece");
    std::vector<double> conf(p.rows());
    std::vector<int> correct(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        auto row = p.values.row(i);
        const std::size_t pred = core::argmax_row(row);
        conf[i] = row[pred];
        correct[i] = pred == static_cast<std::size_t>(labels[i]) ? 1 : 0;
    }
    return ece_from_pairs(conf, correct, bins, normalize_by_bins);
}

double brier(const ProbMatrix& p, const LabelVector& labels) {
    check_pair(p, labels, "brier");
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double t = static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0;
            const double d = p.values(i, j) - t;
            total += d * d;
        }
    return total / static_cast<double>(p.rows());
}

double nll(const ProbMatrix& p, const LabelVector& labels) {
    check_pair(p, labels, "nll");
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const double py = p.values(i, static_cast<std::size_t>(labels[i]));
        total -= std::log(std::clamp(py, kProbFloor, 1.0));
    }
    return total / static_cast<double>(p.rows());
}

double mmc(const ProbMatrix& p) {
    require_nonempty(p.values, "mmc");
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        auto row = p.values.row(i);
        total += *std::max_element(row.begin(), row.end());
    }
    return total / static_cast<double>(p.rows());
}

double accuracy(const ProbMatrix& p, const LabelVector& labels) {
    check_pair(p, labels, "accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.rows(); ++i)
        if (core::argmax_row(p.values.row(i)) == static_cast<std::size_t>(labels[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(p.rows());
}

EvalReport evaluate(const ProbMatrix& p, const LabelVector& labels, int bins) {
    EvalReport r;
    auto e = ece(p, labels, bins);
    r.ece = e.ece;
    r.bins = std::move(e.bins);
    r.accuracy = accuracy(p, labels);
    r.nll = nll(p, labels);
    r.brier = brier(p, labels);
    r.mmc = mmc(p);
    return r;
}

Matrix softmax_probs(const LogitMatrix& logits) {
    require_nonempty(logits, "softmax_probs");
    require_finite(logits, "softmax_probs");
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        const double m = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            out(i, j) = std::exp(row[j] - m);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

double softmax_nll(const LogitMatrix& logits, const LabelVector& labels, double temperature) {
    require_labels(labels, logits.rows(), logits.cols(), "softmax_nll");
    double total = 0.0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        const double m = *std::max_element(row.begin(), row.end()) / temperature;
        double lse = 0.0;
        for (double z : row) lse += std::exp(z / temperature - m);
        total += std::log(lse) + m - row[static_cast<std::size_t>(labels[i])] / temperature;
    }
    return total / static_cast<double>(logits.rows());
}

TempScaleResult temperature_scale_fit(const LogitMatrix& logits, const LabelVector& labels) {
    require_nonempty(logits, "temperature_scale_fit");
    require_labels(labels, logits.rows(), logits.cols(), "temperature_scale_fit");
    if (logits.rows() < logits.cols())
        throw ValidationError("temperature_scale_fit: needs at least K samples");

    TempScaleResult res;
    res.degenerate =
        std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; });

    // golden-section search on log T
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = -3.0, hi = 3.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = softmax_nll(logits, labels, std::exp(x1));
    double f2 = softmax_nll(logits, labels, std::exp(x2));
    for (int it = 0; it < 100; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = softmax_nll(logits, labels, std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = softmax_nll(logits, labels, std::exp(x2));
        }
    }
    res.temperature = std::exp(0.5 * (lo + hi));
    return res;
}

namespace {

// two-tailed Bonferroni-Dunn critical values, 2..10 methods
constexpr double kDunnQ05[] = {1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.724, 2.773};
constexpr double kDunnQ10[] = {1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539};

}  // namespace

RankingTable friedman_dunn(const Matrix& scores, bool lower_is_better, double alpha) {
    const std::size_t n = scores.rows(), m = scores.cols();
    if (n < 2 || m < 2) throw ValidationError("friedman_dunn: need >= 2 cases and >= 2 methods");
    if (m > 10) throw ValidationError("friedman_dunn: q table covers up to 10 methods");
    const double* q_table;
    if (alpha == 0.05)
        q_table = kDunnQ05;
    else if (alpha == 0.10)
        q_table = kDunnQ10;
    else
        throw ValidationError("friedman_dunn: alpha must be 0.05 or 0.10");

    RankingTable t;
    t.scores = scores;
    t.ranks = Matrix(n, m);
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return lower_is_better ? scores(i, a) < scores(i, b) : scores(i, a) > scores(i, b);
        });
        // tied scores share the mean of the rank positions they span
        std::size_t start = 0;
        while (start < m) {
            std::size_t end = start + 1;
            while (end < m && scores(i, order[end]) == scores(i, order[start])) ++end;
            const double r = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
            for (std::size_t j = start; j < end; ++j) t.ranks(i, order[j]) = r;
            start = end;
        }
    }
    t.mean_ranks.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) t.mean_ranks[j] += t.ranks(i, j);
    for (double& r : t.mean_ranks) r /= static_cast<double>(n);

    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    double sumsq = 0.0;
    for (double r : t.mean_ranks) sumsq += r * r;
    t.chi2 = 12.0 * dn / (dm * (dm + 1.0)) * (sumsq - dm * (dm + 1.0) * (dm + 1.0) / 4.0);
    t.critical_distance = q_table[m - 2] * std::sqrt(dm * (dm + 1.0) / (6.0 * dn));
    return t;
}

}  // namespace slova::metrics
