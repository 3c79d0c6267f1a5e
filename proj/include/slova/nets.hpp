#pragma once

#include <cstdint>
#include <vector>

#include "slova/types.hpp"

namespace slova::nets {

enum class Head { ova_sigmoid, softmax };
enum class LossKind { ova, softmax_ce };
enum class Generator { gaussian_blobs, two_moons };

/// Fully connected ReLU network. weights[l] has shape dims[l+1] x dims[l];
/// the last affine layer produces raw logits (the head only names how they
/// are meant to be read downstream).
struct MlpModel {
    std::vector<std::size_t> layer_dims;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    Head head = Head::ova_sigmoid;

    /// Seeded uniform init with limit sqrt(6 / (fan_in + fan_out)); zero biases.
    static MlpModel init(std::vector<std::size_t> dims, Head head, std::uint64_t seed);

    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
};

struct SyntheticDataset {
    Matrix features;
    LabelVector labels;
    Generator generator = Generator::gaussian_blobs;
    std::uint64_t seed = 0;
    double noise_sigma = 1.0;
};

LogitMatrix forward(const MlpModel& model, const Matrix& x);

struct LossGrad {
    double loss = 0.0;
    std::vector<Matrix> d_weights;
    std::vector<std::vector<double>> d_biases;
};

/// Loss and full backprop gradients on a batch. LossKind::ova is the mean
/// per-sample one-vs-all binary cross entropy; softmax_ce the usual mean
/// cross entropy.
LossGrad loss_and_gradients(const MlpModel& model, const Matrix& x, const LabelVector& y,
                            LossKind loss);

struct TrainConfig {
    int epochs = 60;
    double lr = 0.05;
    std::size_t batch = 64;
    double momentum = 0.9;
};

struct TrainResult {
    MlpModel model;
    double final_loss = 0.0;
};

/// Thrown when a mini-batch loss turns non-finite; carries the last state
/// that still evaluated to a finite loss.
class TrainDivergedError : public NumericError {
public:
    TrainDivergedError(std::string msg, MlpModel last, double loss)
        : NumericError(std::move(msg)), last_state(std::move(last)), last_loss(loss) {}
    MlpModel last_state;
    double last_loss;
};

/// Mini-batch SGD with momentum; batch order reshuffled every epoch from
/// the seed, so identical seeds give identical parameters.
TrainResult train(MlpModel model, const SyntheticDataset& data, LossKind loss,
                  const TrainConfig& cfg, std::uint64_t seed);

/// gaussian_blobs: K clusters with std noise_sigma centered at radius-5
/// regular positions in the first two dims, remaining dims pure noise.
/// two_moons: the usual pair of interleaved arcs (K must be 2), extra dims
/// noise. Class counts balanced within 1; rows shuffled under the seed.
SyntheticDataset make_synthetic(Generator generator, int k_classes, std::size_t n,
                                std::size_t dim, double noise_sigma, std::uint64_t seed);

}  // namespace slova::nets
