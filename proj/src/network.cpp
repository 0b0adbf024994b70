#include "pcdn/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pcdn {

namespace {

void check_input(const Matrix& input, int batch) {
    if (batch < 1) throw ArgumentError("batch must be >= 1");
    if (input.cols() != 3) throw ArgumentError("network input must have 3 columns");
    if (input.rows() % batch != 0) {
        throw ArgumentError("input rows are not a multiple of the batch size");
    }
    if (!input.allFinite()) throw NumericError("network input has non-finite values");
}

struct BnForward {
    Matrix xhat;
    Vector inv_std;
    Vector mu;
    Vector var;
};

// Train-mode batch normalization over the rows of z.
BnForward bn_train(const Matrix& z, const BatchNormLayer& bn, Matrix& y_out) {
    BnForward fwd;
    fwd.mu = z.colwise().mean();
    Matrix centered = z.rowwise() - fwd.mu.transpose();
    fwd.var = centered.array().square().colwise().mean();
    fwd.inv_std = (fwd.var.array() + kBnEpsilon).rsqrt();
    fwd.xhat = centered.array().rowwise() * fwd.inv_std.transpose().array();
    y_out = fwd.xhat.array().rowwise() * bn.gamma.transpose().array();
    y_out.array().rowwise() += bn.beta.transpose().array();
    return fwd;
}

Matrix relu_mask_times(const Matrix& relu_out, const Matrix& upstream) {
    return ((relu_out.array() > 0.0).cast<double>() * upstream.array()).matrix();
}

void bn_update_running(BatchNormLayer& bn, const BnForward& fwd, Eigen::Index rows) {
    const double m = static_cast<double>(rows);
    // Unbiased variance feeds the running estimate; normalization is biased.
    const Vector var_running = rows > 1 ? Vector(fwd.var * (m / (m - 1.0))) : fwd.var;
    bn.running_mean = (1.0 - kBnMomentum) * bn.running_mean + kBnMomentum * fwd.mu;
    bn.running_var = (1.0 - kBnMomentum) * bn.running_var + kBnMomentum * var_running;
}

Matrix bn_infer(const Matrix& z, const BatchNormLayer& bn) {
    const Vector inv_std = (bn.running_var.array() + kBnEpsilon).rsqrt();
    Matrix y = (z.rowwise() - bn.running_mean.transpose()).array().rowwise() *
               (inv_std.array() * bn.gamma.array()).transpose();
    y.array().rowwise() += bn.beta.transpose().array();
    return y;
}

// Reverse of bn_train. dY in, dZ out, accumulates parameter gradients.
Matrix bn_backward(const Matrix& d_y, const Matrix& xhat, const Vector& inv_std,
                   const Vector& gamma, Vector& d_gamma, Vector& d_beta) {
    const double m = static_cast<double>(d_y.rows());
    d_gamma = (d_y.array() * xhat.array()).colwise().sum();
    d_beta = d_y.colwise().sum();

    const Matrix d_xhat = d_y.array().rowwise() * gamma.transpose().array();
    const Vector sum_dxhat = d_xhat.colwise().sum();
    const Vector sum_dxhat_xhat = (d_xhat.array() * xhat.array()).colwise().sum();

    Matrix d_z = m * d_xhat;
    d_z.rowwise() -= sum_dxhat.transpose();
    d_z.array() -= xhat.array().rowwise() * sum_dxhat_xhat.transpose().array();
    d_z.array().rowwise() *= (inv_std.array() / m).transpose();
    return d_z;
}

}  // namespace

void validate_architecture(const Architecture& arch) {
    if (arch.encoder_widths.empty() || arch.decoder_widths.empty()) {
        throw ArgumentError("architecture needs encoder and decoder layers");
    }
    for (int w : arch.encoder_widths) {
        if (w < 1) throw ArgumentError("encoder width must be >= 1");
    }
    for (int w : arch.decoder_widths) {
        if (w < 1) throw ArgumentError("decoder width must be >= 1");
    }
    if (arch.decoder_widths.back() != 3) {
        throw ArgumentError("final decoder width must be 3");
    }
}

NetworkParams init_params(const Architecture& arch, std::uint64_t seed) {
    validate_architecture(arch);
    NetworkParams params;
    params.arch = arch;

    Rng base(seed);
    int fan_in = 3;
    int layer_id = 0;
    auto add_layer = [&](int fan_out, bool with_bn) {
        Rng rng = base.stream(static_cast<std::uint64_t>(layer_id++));
        LinearLayer layer;
        layer.weight.resize(fan_in, fan_out);
        const double sigma = std::sqrt(2.0 / fan_in);
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
            for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
                layer.weight(r, c) = rng.normal(0.0, sigma);
            }
        }
        layer.bias = Vector::Zero(fan_out);
        params.linear.push_back(std::move(layer));
        if (with_bn) {
            BatchNormLayer bn;
            bn.gamma = Vector::Ones(fan_out);
            bn.beta = Vector::Zero(fan_out);
            bn.running_mean = Vector::Zero(fan_out);
            bn.running_var = Vector::Ones(fan_out);
            params.bn.push_back(std::move(bn));
        }
        fan_in = fan_out;
    };

    for (int w : arch.encoder_widths) add_layer(w, true);
    for (std::size_t i = 0; i < arch.decoder_widths.size(); ++i) {
        add_layer(arch.decoder_widths[i], i + 1 < arch.decoder_widths.size());
    }
    return params;
}

ForwardCache forward_train(NetworkParams& params, const Matrix& input, int batch) {
    check_input(input, batch);
    const int points = static_cast<int>(input.rows()) / batch;
    const int enc_layers = static_cast<int>(params.arch.encoder_widths.size());
    const int total_layers = params.arch.layer_count();

    ForwardCache cache;
    cache.batch = batch;
    cache.points = points;
    cache.inputs.resize(static_cast<std::size_t>(total_layers));
    cache.xhat.resize(static_cast<std::size_t>(total_layers - 1));
    cache.inv_std.resize(static_cast<std::size_t>(total_layers - 1));
    cache.relu_out.resize(static_cast<std::size_t>(total_layers - 1));

    Matrix x = input;
    for (int l = 0; l < enc_layers; ++l) {
        cache.inputs[static_cast<std::size_t>(l)] = x;
        Matrix z = (x * params.linear[static_cast<std::size_t>(l)].weight).rowwise() +
                   params.linear[static_cast<std::size_t>(l)].bias.transpose();
        Matrix y;
        BnForward fwd = bn_train(z, params.bn[static_cast<std::size_t>(l)], y);
        bn_update_running(params.bn[static_cast<std::size_t>(l)], fwd, z.rows());
        cache.xhat[static_cast<std::size_t>(l)] = std::move(fwd.xhat);
        cache.inv_std[static_cast<std::size_t>(l)] = std::move(fwd.inv_std);
        x = y.cwiseMax(0.0);
        cache.relu_out[static_cast<std::size_t>(l)] = x;
    }

    // Channel-wise max over each patch's rows; ties resolve to the first row.
    const int latent = params.arch.latent_width();
    Matrix pooled(batch, latent);
    cache.pool_argmax.resize(batch, latent);
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < latent; ++c) {
            int best_row = b * points;
            double best = x(best_row, c);
            for (int r = 1; r < points; ++r) {
                const double v = x(b * points + r, c);
                if (v > best) {
                    best = v;
                    best_row = b * points + r;
                }
            }
            pooled(b, c) = best;
            cache.pool_argmax(b, c) = best_row;
        }
    }

    Matrix h = pooled;
    const int dec_layers = static_cast<int>(params.arch.decoder_widths.size());
    for (int j = 0; j < dec_layers; ++j) {
        const int l = enc_layers + j;
        cache.inputs[static_cast<std::size_t>(l)] = h;
        Matrix z = (h * params.linear[static_cast<std::size_t>(l)].weight).rowwise() +
                   params.linear[static_cast<std::size_t>(l)].bias.transpose();
        if (j + 1 < dec_layers) {
            Matrix y;
            BnForward fwd = bn_train(z, params.bn[static_cast<std::size_t>(l)], y);
            bn_update_running(params.bn[static_cast<std::size_t>(l)], fwd, z.rows());
            cache.xhat[static_cast<std::size_t>(l)] = std::move(fwd.xhat);
            cache.inv_std[static_cast<std::size_t>(l)] = std::move(fwd.inv_std);
            h = y.cwiseMax(0.0);
            cache.relu_out[static_cast<std::size_t>(l)] = h;
        } else {
            h = z.array().tanh();
        }
    }
    cache.output = h;
    return cache;
}

Matrix forward_infer(const NetworkParams& params, const Matrix& input, int batch) {
    check_input(input, batch);
    const int points = static_cast<int>(input.rows()) / batch;
    const int enc_layers = static_cast<int>(params.arch.encoder_widths.size());

    Matrix x = input;
    for (int l = 0; l < enc_layers; ++l) {
        Matrix z = (x * params.linear[static_cast<std::size_t>(l)].weight).rowwise() +
                   params.linear[static_cast<std::size_t>(l)].bias.transpose();
        x = bn_infer(z, params.bn[static_cast<std::size_t>(l)]).cwiseMax(0.0);
    }

    const int latent = params.arch.latent_width();
    Matrix pooled(batch, latent);
    for (int b = 0; b < batch; ++b) {
        pooled.row(b) = x.middleRows(b * points, points).colwise().maxCoeff();
    }

    Matrix h = pooled;
    const int dec_layers = static_cast<int>(params.arch.decoder_widths.size());
    for (int j = 0; j < dec_layers; ++j) {
        const int l = enc_layers + j;
        Matrix z = (h * params.linear[static_cast<std::size_t>(l)].weight).rowwise() +
                   params.linear[static_cast<std::size_t>(l)].bias.transpose();
        if (j + 1 < dec_layers) {
            h = bn_infer(z, params.bn[static_cast<std::size_t>(l)]).cwiseMax(0.0);
        } else {
            h = z.array().tanh();
        }
    }
    return h;
}

Vec3 forward_point_infer(const NetworkParams& params, const std::vector<Vec3>& patch_points) {
    if (static_cast<int>(patch_points.size()) != params.patch_size) {
        throw ArgumentError("patch has " + std::to_string(patch_points.size()) +
                            " points, expected " + std::to_string(params.patch_size));
    }
    Matrix input(patch_points.size(), 3);
    for (std::size_t i = 0; i < patch_points.size(); ++i) {
        input.row(static_cast<Eigen::Index>(i)) = patch_points[i].transpose();
    }
    const Matrix out = forward_infer(params, input, 1);
    return Vec3(out(0, 0), out(0, 1), out(0, 2));
}

NetworkGrads zero_grads(const NetworkParams& params) {
    NetworkGrads grads;
    for (const LinearLayer& layer : params.linear) {
        grads.d_weight.emplace_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
        grads.d_bias.emplace_back(Vector::Zero(layer.bias.size()));
    }
    for (const BatchNormLayer& bn : params.bn) {
        grads.d_gamma.emplace_back(Vector::Zero(bn.gamma.size()));
        grads.d_beta.emplace_back(Vector::Zero(bn.beta.size()));
    }
    return grads;
}

NetworkGrads backward(const NetworkParams& params, const ForwardCache& cache,
                      const Matrix& d_output) {
    const int enc_layers = static_cast<int>(params.arch.encoder_widths.size());
    const int dec_layers = static_cast<int>(params.arch.decoder_widths.size());
    const int total_layers = enc_layers + dec_layers;
    if (static_cast<int>(cache.inputs.size()) != total_layers) {
        throw StateError("forward cache does not match the network");
    }
    if (d_output.rows() != cache.batch || d_output.cols() != 3) {
        throw StateError("upstream gradient shape mismatch");
    }

    NetworkGrads grads = zero_grads(params);

    // Last layer: linear + tanh.
    Matrix d_z = d_output.array() * (1.0 - cache.output.array().square());
    Matrix d_x;
    for (int j = dec_layers - 1; j >= 0; --j) {
        const int l = enc_layers + j;
        const Matrix& x_in = cache.inputs[static_cast<std::size_t>(l)];
        grads.d_weight[static_cast<std::size_t>(l)] = x_in.transpose() * d_z;
        grads.d_bias[static_cast<std::size_t>(l)] = d_z.colwise().sum();
        d_x = d_z * params.linear[static_cast<std::size_t>(l)].weight.transpose();
        if (j > 0) {
            const int lp = l - 1;  // previous decoder layer's BN+ReLU
            Matrix d_y = relu_mask_times(cache.relu_out[static_cast<std::size_t>(lp)], d_x);
            d_z = bn_backward(d_y, cache.xhat[static_cast<std::size_t>(lp)],
                              cache.inv_std[static_cast<std::size_t>(lp)],
                              params.bn[static_cast<std::size_t>(lp)].gamma,
                              grads.d_gamma[static_cast<std::size_t>(lp)],
                              grads.d_beta[static_cast<std::size_t>(lp)]);
        }
    }

    // Max-pool scatter: the pooled gradient flows to the contributing row.
    const int latent = params.arch.latent_width();
    Matrix d_pool = Matrix::Zero(static_cast<Eigen::Index>(cache.batch) * cache.points, latent);
    for (int b = 0; b < cache.batch; ++b) {
        for (int c = 0; c < latent; ++c) {
            d_pool(cache.pool_argmax(b, c), c) += d_x(b, c);
        }
    }

    Matrix d_a = std::move(d_pool);
    for (int l = enc_layers - 1; l >= 0; --l) {
        Matrix d_y = relu_mask_times(cache.relu_out[static_cast<std::size_t>(l)], d_a);
        d_z = bn_backward(d_y, cache.xhat[static_cast<std::size_t>(l)],
                          cache.inv_std[static_cast<std::size_t>(l)],
                          params.bn[static_cast<std::size_t>(l)].gamma,
                          grads.d_gamma[static_cast<std::size_t>(l)],
                          grads.d_beta[static_cast<std::size_t>(l)]);
        const Matrix& x_in = cache.inputs[static_cast<std::size_t>(l)];
        grads.d_weight[static_cast<std::size_t>(l)] = x_in.transpose() * d_z;
        grads.d_bias[static_cast<std::size_t>(l)] = d_z.colwise().sum();
        if (l > 0) d_a = d_z * params.linear[static_cast<std::size_t>(l)].weight.transpose();
    }
    return grads;
}

double lr_schedule(int epoch, int epochs, double lr_start, double lr_end) {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (!(lr_end > 0.0) || lr_start < lr_end) {
        throw ArgumentError("learning rates must satisfy lr_start >= lr_end > 0");
    }
    if (epoch < 0 || epoch >= epochs) throw ArgumentError("epoch out of range");
    if (epochs == 1) return lr_start;
    const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return lr_start * std::pow(lr_end / lr_start, t);
}

void sgd_step(NetworkParams& params, const NetworkGrads& grads, double lr) {
    if (grads.d_weight.size() != params.linear.size() ||
        grads.d_gamma.size() != params.bn.size()) {
        throw StateError("gradient layout does not match the network");
    }
    for (std::size_t l = 0; l < params.linear.size(); ++l) {
        if (grads.d_weight[l].rows() != params.linear[l].weight.rows() ||
            grads.d_weight[l].cols() != params.linear[l].weight.cols() ||
            grads.d_bias[l].size() != params.linear[l].bias.size()) {
            throw StateError("gradient shape mismatch");
        }
        params.linear[l].weight -= lr * grads.d_weight[l];
        params.linear[l].bias -= lr * grads.d_bias[l];
    }
    for (std::size_t l = 0; l < params.bn.size(); ++l) {
        if (grads.d_gamma[l].size() != params.bn[l].gamma.size()) {
            throw StateError("gradient shape mismatch");
        }
        params.bn[l].gamma -= lr * grads.d_gamma[l];
        params.bn[l].beta -= lr * grads.d_beta[l];
    }
}

namespace {

constexpr const char* kMagic = "pcdn-params v1";

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_tensor(std::ofstream& out, const std::string& name, const Matrix& m) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) out << ' ';
            out << num(m(r, c));
        }
        out << '\n';
    }
}

}  // namespace

void save_params(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << kMagic << '\n';
    out << "patch_size " << params.patch_size << '\n';
    out << "radius_fraction " << num(params.radius_fraction) << '\n';
    out << "encoder";
    for (int w : params.arch.encoder_widths) out << ' ' << w;
    out << "\ndecoder";
    for (int w : params.arch.decoder_widths) out << ' ' << w;
    out << '\n';

    for (std::size_t l = 0; l < params.linear.size(); ++l) {
        const std::string base = "layer" + std::to_string(l);
        write_tensor(out, base + ".weight", params.linear[l].weight);
        write_tensor(out, base + ".bias", params.linear[l].bias.transpose());
        if (l < params.bn.size()) {
            write_tensor(out, base + ".bn.gamma", params.bn[l].gamma.transpose());
            write_tensor(out, base + ".bn.beta", params.bn[l].beta.transpose());
            write_tensor(out, base + ".bn.running_mean", params.bn[l].running_mean.transpose());
            write_tensor(out, base + ".bn.running_var", params.bn[l].running_var.transpose());
        }
    }
    out << "end\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw FormatError(path + ": not a parameter file (bad version line)");
    }

    NetworkParams params;
    params.arch.encoder_widths.clear();
    params.arch.decoder_widths.clear();

    // Header: key/value lines until the decoder widths appear.
    bool have_encoder = false, have_decoder = false;
    while (!have_decoder && std::getline(in, line)) {
        std::istringstream row(line);
        std::string key;
        row >> key;
        if (key == "patch_size") {
            if (!(row >> params.patch_size)) throw FormatError(path + ": bad patch_size");
        } else if (key == "radius_fraction") {
            if (!(row >> params.radius_fraction)) throw FormatError(path + ": bad radius_fraction");
        } else if (key == "encoder") {
            int w;
            while (row >> w) params.arch.encoder_widths.push_back(w);
            have_encoder = true;
        } else if (key == "decoder") {
            int w;
            while (row >> w) params.arch.decoder_widths.push_back(w);
            have_decoder = true;
        } else {
            throw FormatError(path + ": unexpected header line '" + line + "'");
        }
    }
    if (!have_encoder || !have_decoder) throw FormatError(path + ": missing architecture");
    validate_architecture(params.arch);

    // Expected tensor sequence from the architecture.
    const NetworkParams skeleton = init_params(params.arch, 0);
    params.linear = skeleton.linear;
    params.bn = skeleton.bn;

    auto read_tensor = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols,
                           auto&& assign) {
        if (!std::getline(in, line)) throw FormatError(path + ": truncated before " + name);
        std::istringstream head(line);
        std::string tag, got_name;
        Eigen::Index got_rows = -1, got_cols = -1;
        head >> tag >> got_name >> got_rows >> got_cols;
        if (tag != "tensor" || got_name != name) {
            throw FormatError(path + ": expected tensor " + name + ", got '" + line + "'");
        }
        if (got_rows != rows || got_cols != cols) {
            throw FormatError(path + ": shape mismatch for " + name);
        }
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (!std::getline(in, line)) throw FormatError(path + ": truncated inside " + name);
            std::istringstream row(line);
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (!(row >> m(r, c))) throw FormatError(path + ": bad value in " + name);
            }
        }
        if (!m.allFinite()) throw FormatError(path + ": non-finite value in " + name);
        assign(std::move(m));
    };

    for (std::size_t l = 0; l < params.linear.size(); ++l) {
        const std::string base = "layer" + std::to_string(l);
        read_tensor(base + ".weight", params.linear[l].weight.rows(),
                    params.linear[l].weight.cols(),
                    [&](Matrix m) { params.linear[l].weight = std::move(m); });
        read_tensor(base + ".bias", 1, params.linear[l].bias.size(),
                    [&](Matrix m) { params.linear[l].bias = m.row(0).transpose(); });
        if (l < params.bn.size()) {
            read_tensor(base + ".bn.gamma", 1, params.bn[l].gamma.size(),
                        [&](Matrix m) { params.bn[l].gamma = m.row(0).transpose(); });
            read_tensor(base + ".bn.beta", 1, params.bn[l].beta.size(),
                        [&](Matrix m) { params.bn[l].beta = m.row(0).transpose(); });
            read_tensor(base + ".bn.running_mean", 1, params.bn[l].running_mean.size(),
                        [&](Matrix m) { params.bn[l].running_mean = m.row(0).transpose(); });
            read_tensor(base + ".bn.running_var", 1, params.bn[l].running_var.size(), [&](Matrix m) {
                if ((m.array() < 0.0).any()) {
                    throw FormatError(path + ": negative running variance");
                }
                params.bn[l].running_var = m.row(0).transpose();
            });
        }
    }
    if (!std::getline(in, line) || line != "end") {
        throw FormatError(path + ": missing end marker");
    }
    return params;
}

}  // namespace pcdn
