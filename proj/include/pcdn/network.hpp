// Encoder-decoder displacement regressor: shared per-point MLP layers with
// BatchNorm+ReLU, channel-wise max pooling, fully connected decoder, tanh
// output. Forward/backward are exact reverse-mode pairs.

#pragma once

#include "pcdn/rng.hpp"
#include "pcdn/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pcdn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Architecture {
    std::vector<int> encoder_widths{64, 128, 256, 512, 1024};
    std::vector<int> decoder_widths{512, 256, 3};

    int latent_width() const { return encoder_widths.back(); }
    int layer_count() const {
        return static_cast<int>(encoder_widths.size() + decoder_widths.size());
    }
    bool operator==(const Architecture&) const = default;
};

/// Throws ArgumentError unless all widths >= 1 and the final decoder width is 3.
void validate_architecture(const Architecture& arch);

struct LinearLayer {
    Matrix weight;  // in x out
    Vector bias;    // out
};

struct BatchNormLayer {
    Vector gamma, beta;
    Vector running_mean, running_var;
};

inline constexpr double kBnEpsilon = 1e-5;
inline constexpr double kBnMomentum = 0.1;

/// All learnable state. Linear layers are ordered encoder first, then
/// decoder; every layer except the last has a matching BatchNorm.
/// patch_size / radius_fraction describe the input contract the parameters
/// were trained for and travel with the checkpoint.
struct NetworkParams {
    Architecture arch;
    std::vector<LinearLayer> linear;
    std::vector<BatchNormLayer> bn;
    int patch_size = 500;
    double radius_fraction = 0.05;
};

struct NetworkGrads {
    std::vector<Matrix> d_weight;
    std::vector<Vector> d_bias;
    std::vector<Vector> d_gamma;
    std::vector<Vector> d_beta;
};

/// Cache of a train-mode forward, consumed by backward().
struct ForwardCache {
    int batch = 0;
    int points = 0;
    // Per linear layer: the input matrix it saw.
    std::vector<Matrix> inputs;
    // Per BN layer: normalized values and 1/sqrt(var + eps).
    std::vector<Matrix> xhat;
    std::vector<Vector> inv_std;
    // Per BN+ReLU layer: post-ReLU activations (mask source).
    std::vector<Matrix> relu_out;
    // Max-pool argument rows, batch x latent channels.
    Eigen::MatrixXi pool_argmax;
    Matrix output;  // batch x 3, post tanh
};

/// He-style fan-in initialization; biases zero, BN at identity.
NetworkParams init_params(const Architecture& arch, std::uint64_t seed);

/// Train-mode batch forward over `batch` patches of `points` rows each
/// (input is (batch*points) x 3). Uses batch statistics and updates the
/// running statistics in `params`.
ForwardCache forward_train(NetworkParams& params, const Matrix& input, int batch);

/// Inference-mode forward using running statistics. Row-independent:
/// batching does not change any per-patch result.
Matrix forward_infer(const NetworkParams& params, const Matrix& input, int batch);

/// Single-patch convenience wrappers.
Vec3 forward_point_infer(const NetworkParams& params, const std::vector<Vec3>& patch_points);

/// Exact gradients of the cached forward w.r.t. every parameter.
/// Running statistics receive no gradient.
NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Matrix& d_output);

NetworkGrads zero_grads(const NetworkParams& params);

/// Geometric interpolation lr_start * (lr_end/lr_start)^(e/(epochs-1)).
double lr_schedule(int epoch, int epochs, double lr_start, double lr_end);

/// theta <- theta - lr * g for every learnable parameter.
void sgd_step(NetworkParams& params, const NetworkGrads& grads, double lr);

/// Versioned self-describing text checkpoint; round trips exactly.
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

}  // namespace pcdn
