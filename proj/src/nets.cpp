#include "slova/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "slova/core.hpp"
#include "slova/rng.hpp"

namespace slova::nets {

MlpModel MlpModel::init(std::vector<std::size_t> dims, Head head, std::uint64_t seed) {
    if (dims.size() < 2) throw ValidationError("MlpModel: need at least input and output dims");
    for (std::size_t d : dims)
        if (d == 0) throw ValidationError("MlpModel: zero layer width");
    MlpModel m;
    m.layer_dims = std::move(dims);
    m.head = head;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const std::size_t fan_in = m.layer_dims[l], fan_out = m.layer_dims[l + 1];
        const double lim = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = rng.uniform(-lim, lim);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

namespace {

// affine + ReLU for all hidden layers, returning every activation;
// activations[0] is the input, activations.back() the raw logits
std::vector<Matrix> forward_all(const MlpModel& model, const Matrix& x) {
    if (x.cols() != model.input_dim())
        throw ValidationError("forward: feature dim does not match layer_dims[0]");
    std::vector<Matrix> acts;
    acts.reserve(model.weights.size() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        const Matrix& h = acts.back();
        Matrix z(h.rows(), w.rows());
        for (std::size_t i = 0; i < h.rows(); ++i)
            for (std::size_t o = 0; o < w.rows(); ++o) {
                double s = model.biases[l][o];
                for (std::size_t c = 0; c < w.cols(); ++c) s += h(i, c) * w(o, c);
                z(i, o) = s;
            }
        const bool hidden = l + 1 < model.weights.size();
        if (hidden)
            for (double& v : z.data()) v = std::max(0.0, v);
        acts.push_back(std::move(z));
    }
    return acts;
}

}  // namespace

LogitMatrix forward(const MlpModel& model, const Matrix& x) {
    return forward_all(model, x).back();
}

LossGrad loss_and_gradients(const MlpModel& model, const Matrix& x, const LabelVector& y,
                            LossKind loss) {
    require_labels(y, x.rows(), model.output_dim(), "loss_and_gradients");
    auto acts = forward_all(model, x);
    const Matrix& z = acts.back();
    const std::size_t n = x.rows(), k = model.output_dim();
    const double inv_n = 1.0 / static_cast<double>(n);

    LossGrad out;
    out.d_weights.resize(model.weights.size());
    out.d_biases.resize(model.weights.size());

    // dL/dz; both losses share the (p - onehot)/n form
    Matrix dz(n, k);
    if (loss == LossKind::ova) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                const double p = core::sigmoid(z(i, j));
                const bool pos = static_cast<std::size_t>(y[i]) == j;
                out.loss -= std::log(std::max(pos ? p : 1.0 - p, core::kLogClamp));
                dz(i, j) = (p - (pos ? 1.0 : 0.0)) * inv_n;
            }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            auto row = z.row(i);
            const double m = *std::max_element(row.begin(), row.end());
            double lse = 0.0;
            for (double v : row) lse += std::exp(v - m);
            for (std::size_t j = 0; j < k; ++j) {
                const double p = std::exp(z(i, j) - m) / lse;
                const bool pos = static_cast<std::size_t>(y[i]) == j;
                if (pos) out.loss -= std::log(std::max(p, core::kLogClamp));
                dz(i, j) = (p - (pos ? 1.0 : 0.0)) * inv_n;
            }
        }
    }
    out.loss *= inv_n;

    Matrix delta = std::move(dz);
    for (std::size_t l = model.weights.size(); l-- > 0;) {
        const Matrix& h = acts[l];
        Matrix dw(model.weights[l].rows(), model.weights[l].cols());
        std::vector<double> db(model.weights[l].rows(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t o = 0; o < dw.rows(); ++o) {
                const double d = delta(i, o);
                db[o] += d;
                for (std::size_t c = 0; c < dw.cols(); ++c) dw(o, c) += d * h(i, c);
            }
        if (l > 0) {
            Matrix prev(n, model.weights[l].cols());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < prev.cols(); ++c) {
                    double s = 0.0;
                    for (std::size_t o = 0; o < model.weights[l].rows(); ++o)
                        s += delta(i, o) * model.weights[l](o, c);
                    prev(i, c) = h(i, c) > 0.0 ? s : 0.0;  // ReLU gate
                }
            delta = std::move(prev);
        }
        out.d_weights[l] = std::move(dw);
        out.d_biases[l] = std::move(db);
    }
    return out;
}

TrainResult train(MlpModel model, const SyntheticDataset& data, LossKind loss,
                  const TrainConfig& cfg, std::uint64_t seed) {
    require_nonempty(data.features, "train");
    require_labels(data.labels, data.features.rows(), model.output_dim(), "train");
    if (cfg.batch == 0) throw ValidationError("train: batch must be > 0");

    Rng shuffle_rng(child_seed(seed, 1));
    std::vector<Matrix> vel_w;
    std::vector<std::vector<double>> vel_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        vel_w.emplace_back(model.weights[l].rows(), model.weights[l].cols());
        vel_b.emplace_back(model.biases[l].size(), 0.0);
    }

    const std::size_t n = data.features.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    MlpModel last_finite = model;
    double last_loss = 0.0;
    for (int ep = 0; ep < cfg.epochs; ++ep) {
        last_finite = model;
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += cfg.batch) {
            const std::size_t bn = std::min(cfg.batch, n - start);
            Matrix xb(bn, data.features.cols());
            LabelVector yb(bn);
            for (std::size_t i = 0; i < bn; ++i) {
                const std::size_t src = order[start + i];
                for (std::size_t c = 0; c < xb.cols(); ++c)
                    xb(i, c) = data.features(src, c);
                yb[i] = data.labels[src];
            }
            auto g = loss_and_gradients(model, xb, yb, loss);
            if (!std::isfinite(g.loss))
                throw TrainDivergedError("train: loss became non-finite at epoch " +
                                             std::to_string(ep),
                                         last_finite, last_loss);
            last_loss = g.loss;
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                for (std::size_t i = 0; i < vel_w[l].size(); ++i) {
                    vel_w[l].data()[i] =
                        cfg.momentum * vel_w[l].data()[i] - cfg.lr * g.d_weights[l].data()[i];
                    model.weights[l].data()[i] += vel_w[l].data()[i];
                }
                for (std::size_t i = 0; i < vel_b[l].size(); ++i) {
                    vel_b[l][i] = cfg.momentum * vel_b[l][i] - cfg.lr * g.d_biases[l][i];
                    model.biases[l][i] += vel_b[l][i];
                }
            }
        }
    }

    TrainResult res;
    res.final_loss =
        loss_and_gradients(model, data.features, data.labels, loss).loss;
    if (!std::isfinite(res.final_loss))
        throw TrainDivergedError("train: final loss non-finite", last_finite, last_loss);
    res.model = std::move(model);
    return res;
}

SyntheticDataset make_synthetic(Generator generator, int k_classes, std::size_t n,
                                std::size_t dim, double noise_sigma, std::uint64_t seed) {
    if (k_classes < 2) throw ValidationError("make_synthetic: K must be >= 2");
    if (n < static_cast<std::size_t>(k_classes))
        throw ValidationError("make_synthetic: need at least one sample per class");
    if (dim < 2) throw ValidationError("make_synthetic: need at least 2 feature dims");
    if (noise_sigma < 0.0) throw ValidationError("make_synthetic: noise_sigma must be >= 0");
    if (generator == Generator::two_moons && k_classes != 2)
        throw ValidationError("make_synthetic: two_moons is a 2-class generator");

    SyntheticDataset ds;
    ds.generator = generator;
    ds.seed = seed;
    ds.noise_sigma = noise_sigma;
    ds.features = Matrix(n, dim);
    ds.labels.resize(n);

    Rng rng(seed);
    const std::size_t k = static_cast<std::size_t>(k_classes);
    std::vector<std::size_t> counts(k, n / k);
    for (std::size_t c = 0; c < n % k; ++c) ++counts[c];

    std::size_t row = 0;
    if (generator == Generator::gaussian_blobs) {
        for (std::size_t c = 0; c < k; ++c) {
            const double ang = 2.0 * std::numbers::pi * static_cast<double>(c) /
                               static_cast<double>(k);
            const double cx = 5.0 * std::cos(ang), cy = 5.0 * std::sin(ang);
            for (std::size_t i = 0; i < counts[c]; ++i, ++row) {
                ds.features(row, 0) = cx + noise_sigma * rng.normal();
                ds.features(row, 1) = cy + noise_sigma * rng.normal();
                for (std::size_t d = 2; d < dim; ++d)
                    ds.features(row, d) = noise_sigma * rng.normal();
                ds.labels[row] = static_cast<int>(c);
            }
        }
    } else {
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t i = 0; i < counts[c]; ++i, ++row) {
                const double t = counts[c] > 1 ? std::numbers::pi * static_cast<double>(i) /
                                                     static_cast<double>(counts[c] - 1)
                                               : 0.0;
                double x0, x1;
                if (c == 0) {
                    x0 = std::cos(t);
                    x1 = std::sin(t);
                } else {
                    x0 = 1.0 - std::cos(t);
                    x1 = 0.5 - std::sin(t);
                }
                ds.features(row, 0) = x0 + noise_sigma * rng.normal();
                ds.features(row, 1) = x1 + noise_sigma * rng.normal();
                for (std::size_t d = 2; d < dim; ++d)
                    ds.features(row, d) = noise_sigma * rng.normal();
                ds.labels[row] = static_cast<int>(c);
            }
        }
    }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    Matrix shuffled(n, dim);
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) shuffled(i, d) = ds.features(perm[i], d);
        labels[i] = ds.labels[perm[i]];
    }
    ds.features = std::move(shuffled);
    ds.labels = std::move(labels);
    return ds;
}

}  // namespace slova::nets
