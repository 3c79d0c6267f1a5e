#include "slova/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slova/core.hpp"
#include "slova/rng.hpp"

namespace slova::calib {

double CalibrationModel::evaluate(double p) const {
    double c = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        c += betas[i] * (p == 0.0 ? 0.0 : std::pow(p, alphas[i]));
    return std::clamp(c, 0.0, 1.0);
}

CalibrationDataset build_calibration_dataset_from_pairs(const std::vector<double>& probs,
                                                        const std::vector<int>& labels01,
                                                        std::size_t n_b) {
    if (probs.empty()) throw ValidationError("build_calibration_dataset: no pairs");
    if (probs.size() != labels01.size())
        throw ValidationError("build_calibration_dataset: probs/labels size mismatch");
    if (n_b < 2) throw ValidationError("build_calibration_dataset: n_b must be >= 2");

    CalibrationDataset ds;
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
    ds.sorted_probs.reserve(order.size());
    ds.sorted_labels.reserve(order.size());
    for (std::size_t idx : order) {
        ds.sorted_probs.push_back(probs[idx]);
        ds.sorted_labels.push_back(labels01[idx]);
    }

    ds.window_size = std::max<std::size_t>(1, ds.sorted_probs.size() / 100);
    const std::size_t n = ds.window_size;
    const std::size_t n_avg = ds.sorted_probs.size() - n + 1;
    ds.avg_conf.resize(n_avg);
    ds.avg_acc.resize(n_avg);
    double sum_p = 0.0, sum_d = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sum_p += ds.sorted_probs[j];
        sum_d += ds.sorted_labels[j];
    }
    for (std::size_t i = 0;; ++i) {
        ds.avg_conf[i] = sum_p / static_cast<double>(n);
        ds.avg_acc[i] = sum_d / static_cast<double>(n);
        if (i + 1 == n_avg) break;
        sum_p += ds.sorted_probs[i + n] - ds.sorted_probs[i];
        sum_d += ds.sorted_labels[i + n] - ds.sorted_labels[i];
    }

    if (n_b >= n_avg) {
        ds.fit_conf = ds.avg_conf;
        ds.fit_acc = ds.avg_acc;
    } else {
        ds.fit_conf.reserve(n_b);
        ds.fit_acc.reserve(n_b);
        for (std::size_t i = 0; i < n_b; ++i) {
            const auto idx = static_cast<std::size_t>(std::llround(
                static_cast<double>(i) * static_cast<double>(n_avg - 1) /
                static_cast<double>(n_b - 1)));
            ds.fit_conf.push_back(ds.avg_conf[idx]);
            ds.fit_acc.push_back(ds.avg_acc[idx]);
        }
    }
    return ds;
}

CalibrationDataset build_calibration_dataset(const ProbMatrix& slova_p,
                                             const LabelVector& labels,
                                             const ProbMatrix& noise_slova_p,
                                             std::size_t n_b) {
    require_nonempty(slova_p.values, "build_calibration_dataset");
    require_probabilities(slova_p.values, "build_calibration_dataset");
    require_labels(labels, slova_p.rows(), slova_p.cols(), "build_calibration_dataset");
    if (!noise_slova_p.values.empty() && noise_slova_p.cols() != slova_p.cols())
        throw ValidationError("build_calibration_dataset: noise class count mismatch");

    const std::size_t k = slova_p.cols();
    std::vector<double> probs;
    std::vector<int> labels01;
    probs.reserve((slova_p.rows() + noise_slova_p.rows()) * k);
    labels01.reserve(probs.capacity());
    for (std::size_t i = 0; i < slova_p.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            probs.push_back(slova_p.values(i, j));
            labels01.push_back(static_cast<std::size_t>(labels[i]) == j ? 1 : 0);
        }
    for (std::size_t i = 0; i < noise_slova_p.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j) {
            probs.push_back(noise_slova_p.values(i, j));
            labels01.push_back(0);
        }
    return build_calibration_dataset_from_pairs(probs, labels01, n_b);
}

Matrix make_noise_samples(const Matrix& ref_features, std::size_t count,
                          std::uint64_t seed, NoiseMode mode) {
    const std::size_t d = ref_features.cols();
    Matrix out(count, d);
    if (count == 0) return out;
    Rng rng(seed);
    if (mode == NoiseMode::unit_uniform) {
        for (double& v : out.data()) v = rng.uniform01();
        return out;
    }
    if (ref_features.rows() == 0)
        throw ValidationError("make_noise_samples: feature_range_uniform needs reference rows");
    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) {
        lo[j] = hi[j] = ref_features(0, j);
        for (std::size_t i = 1; i < ref_features.rows(); ++i) {
            lo[j] = std::min(lo[j], ref_features(i, j));
            hi[j] = std::max(hi[j], ref_features(i, j));
        }
    }
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i, j) = rng.uniform(lo[j], hi[j]);
    return out;
}

namespace {

constexpr double kFitStep = 0.1;

void softmax_inplace(std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

}  // namespace

CalibrationModel fit_exponential(const CalibrationDataset& ds, int num_terms, int epochs,
                                 std::uint64_t seed) {
    if (num_terms < 1) throw ValidationError("fit_exponential: M must be >= 1");
    if (ds.fit_conf.empty()) throw ValidationError("fit_exponential: no fit points");
    const std::size_t m = static_cast<std::size_t>(num_terms);
    const std::size_t n = ds.fit_conf.size();

    Rng rng(seed);
    std::vector<double> a(m), b(m, 0.0);
    for (double& v : a) v = rng.uniform(-1.0, 2.0);

    std::vector<double> log_p(n);
    for (std::size_t i = 0; i < n; ++i)
        log_p[i] = ds.fit_conf[i] > 0.0 ? std::log(ds.fit_conf[i]) : 0.0;

    std::vector<double> alpha(m), beta(m), pow_cache(m), grad_a(m), grad_b(m);
    double loss = 0.0;
    for (int ep = 0; ep < epochs; ++ep) {
        for (std::size_t j = 0; j < m; ++j) alpha[j] = std::exp(a[j]);
        beta = b;
        softmax_inplace(beta);
        std::fill(grad_a.begin(), grad_a.end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double p = ds.fit_conf[i];
            double c = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                pow_cache[j] = p == 0.0 ? 0.0 : std::exp(alpha[j] * log_p[i]);
                c += beta[j] * pow_cache[j];
            }
            const double r = c - ds.fit_acc[i];
            loss += r * r;
            for (std::size_t j = 0; j < m; ++j) {
                if (p > 0.0) grad_a[j] += r * beta[j] * pow_cache[j] * log_p[i] * alpha[j];
                grad_b[j] += r * beta[j] * (pow_cache[j] - c);
            }
        }
        const double scale = 2.0 / static_cast<double>(n);
        loss /= static_cast<double>(n);
        for (std::size_t j = 0; j < m; ++j) {
            a[j] -= kFitStep * scale * grad_a[j];
            b[j] -= kFitStep * scale * grad_b[j];
        }
    }

    CalibrationModel model;
    model.alphas.resize(m);
    for (std::size_t j = 0; j < m; ++j) model.alphas[j] = std::exp(a[j]);
    model.betas = b;
    softmax_inplace(model.betas);
    // final loss at the returned parameters
    double final_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = model.evaluate(ds.fit_conf[i]) - ds.fit_acc[i];
        final_loss += r * r;
    }
    model.fit_loss = final_loss / static_cast<double>(n);
    model.seed = seed;
    model.epochs = epochs;
    return model;
}

ProbMatrix apply_calibration(const CalibrationModel& model, const ProbMatrix& slova_p) {
    if (model.alphas.empty() || model.alphas.size() != model.betas.size())
        throw ValidationError("apply_calibration: invalid model");
    require_probabilities(slova_p.values, "apply_calibration");
    ProbMatrix out{Matrix(slova_p.rows(), slova_p.cols()), ProbKind::calibrated};
    for (std::size_t i = 0; i < slova_p.values.size(); ++i)
        out.values.data()[i] = model.evaluate(slova_p.values.data()[i]);
    return out;
}

double exact_random_calibration(double p_hat, int k_classes) {
    if (k_classes < 1) throw ValidationError("exact_random_calibration: K must be >= 1");
    if (!(p_hat >= 0.0 && p_hat <= 1.0))
        throw ValidationError("exact_random_calibration: p outside [0,1]");
    if (p_hat == 0.0) return 0.0;
    const double x = -std::log(p_hat);
    // term j is the Poisson(x) pmf at j, so the running product stays in [0,1]
    double term = p_hat, sum = p_hat;
    for (int j = 1; j < k_classes; ++j) {
        term *= x / static_cast<double>(j);
        sum += term;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double approx_random_calibration(double p_hat, int k_classes) {
    if (k_classes < 1) throw ValidationError("approx_random_calibration: K must be >= 1");
    if (!(p_hat >= 0.0 && p_hat <= 1.0))
        throw ValidationError("approx_random_calibration: p outside [0,1]");
    return 1.0 - std::pow(1.0 - p_hat, static_cast<double>(k_classes));
}

double random_slova_density(double p_hat, int k_classes) {
    if (k_classes < 1) throw ValidationError("random_slova_density: K must be >= 1");
    if (!(p_hat > 0.0 && p_hat <= 1.0))
        throw ValidationError("random_slova_density: p must be in (0,1]");
    if (k_classes == 1) return 1.0;
    const double x = -std::log(p_hat);
    if (x == 0.0) return 0.0;
    return std::exp(static_cast<double>(k_classes - 1) * std::log(x) -
                    std::lgamma(static_cast<double>(k_classes)));
}

}  // namespace slova::calib
