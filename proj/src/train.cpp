#include "pcdn/train.hpp"

#include "pcdn/cloud_io.hpp"
#include "pcdn/patch.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace pcdn {

void validate_train_config(const TrainConfig& config) {
    if (config.epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (config.batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (config.eta < 0.0 || config.eta > 1.0) throw ArgumentError("eta must lie in [0, 1]");
    if (!(config.lr_end > 0.0) || config.lr_start < config.lr_end) {
        throw ArgumentError("learning rates must satisfy lr_start >= lr_end > 0");
    }
    if (!(config.sigma_n_degrees > 0.0) || config.sigma_n_degrees >= 90.0) {
        throw ArgumentError("sigma_n must lie in (0, 90) degrees");
    }
    if (config.patch_size < 1) throw ArgumentError("patch_size must be >= 1");
    if (!(config.radius_fraction > 0.0)) throw ArgumentError("radius_fraction must be positive");
    if (config.patches_per_model < 1) throw ArgumentError("patches_per_model must be >= 1");
    validate_architecture(config.arch);
}

std::string format_log_line(const EpochStats& row) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d, %.17g, %.17g, %d", row.epoch, row.lr, row.mean_loss,
                  row.skipped_patches);
    return buf;
}

std::string format_train_log(const std::vector<EpochStats>& log) {
    std::ostringstream out;
    out << "epoch, lr, mean_loss, skipped_patches\n";
    for (const EpochStats& row : log) out << format_log_line(row) << '\n';
    return out.str();
}

namespace {

struct TrainModel {
    PointCloud noisy;
    PointCloud clean;
    std::unique_ptr<NeighborIndex> noisy_index;
    std::unique_ptr<NeighborIndex> clean_index;
    double radius = 0.0;
};

struct Sample {
    CanonicalPatchPair patch;
    double sigma_p = 0.0;
};

}  // namespace

TrainResult train(const DatasetManifest& manifest, const std::string& manifest_dir,
                  const TrainConfig& config, std::ostream* progress) {
    validate_train_config(config);
    if (manifest.entries.empty()) throw ArgumentError("manifest has no entries");

    std::vector<TrainModel> models;
    models.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
        TrainModel model;
        model.clean = load_cloud(resolve_manifest_path(manifest_dir, entry.clean_path));
        model.noisy = load_cloud(resolve_manifest_path(manifest_dir, entry.noisy_path));
        if (!model.clean.has_normals()) {
            throw ArgumentError("clean cloud '" + entry.clean_path + "' has no normals");
        }
        // Patch radius from the noisy cloud's extent, matching what inference
        // can compute without clean data.
        model.radius = config.radius_fraction * bbox_diagonal(model.noisy);
        model.noisy_index = std::make_unique<NeighborIndex>(model.noisy);
        model.clean_index = std::make_unique<NeighborIndex>(model.clean);
        models.push_back(std::move(model));
    }

    TrainResult result;
    result.params = init_params(config.arch, config.seed);
    result.params.patch_size = config.patch_size;
    result.params.radius_fraction = config.radius_fraction;

    LossParams loss_params;
    loss_params.eta = config.eta;
    loss_params.sigma_n_degrees = config.sigma_n_degrees;
    const Rng base(mix_seed(config.seed, 0x7261696e));
    const int n = config.patch_size;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, config.epochs, config.lr_start, config.lr_end);
        const Rng epoch_rng = base.stream(static_cast<std::uint64_t>(epoch));

        std::vector<Sample> samples;
        int skipped = 0;
        for (std::size_t t = 0; t < models.size(); ++t) {
            const TrainModel& model = models[t];
            Rng entry_rng = epoch_rng.stream(t);
            const auto cloud_size = static_cast<std::uint32_t>(model.noisy.size());
            const auto want = static_cast<std::uint32_t>(config.patches_per_model);
            const std::vector<std::uint32_t> centers =
                entry_rng.sample_without_replacement(cloud_size, std::min(want, cloud_size));
            for (std::size_t c = 0; c < centers.size(); ++c) {
                Rng patch_rng = entry_rng.stream(1000 + c);
                try {
                    RawPatchPair raw = extract_patch_pair(model.noisy, model.clean,
                                                          static_cast<int>(centers[c]),
                                                          model.radius, *model.noisy_index,
                                                          *model.clean_index);
                    CanonicalPatchPair patch = canonicalize(raw, n, patch_rng);
                    if (patch.degenerate_alignment) {
                        ++skipped;
                        continue;
                    }
                    const double kernel = sigma_p(patch, n);
                    samples.push_back({std::move(patch), kernel});
                } catch (const DegeneratePatchError&) {
                    ++skipped;
                }
            }
        }
        if (samples.empty()) {
            throw TrainingError("epoch " + std::to_string(epoch) + ": no usable patches");
        }

        std::vector<std::uint32_t> order(samples.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
        Rng shuffle_rng = epoch_rng.stream(0xffff);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const int batch = static_cast<int>(stop - start);

            Matrix input(static_cast<Eigen::Index>(batch) * n, 3);
            for (int b = 0; b < batch; ++b) {
                const Sample& sample = samples[order[start + static_cast<std::size_t>(b)]];
                for (int p = 0; p < n; ++p) {
                    input.row(static_cast<Eigen::Index>(b) * n + p) =
                        sample.patch.noisy_points[static_cast<std::size_t>(p)].transpose();
                }
            }

            ForwardCache cache = forward_train(result.params, input, batch);

            Matrix d_out(batch, 3);
            for (int b = 0; b < batch; ++b) {
                const Sample& sample = samples[order[start + static_cast<std::size_t>(b)]];
                const Vec3 d(cache.output(b, 0), cache.output(b, 1), cache.output(b, 2));
                LossParams per_patch = loss_params;
                per_patch.sigma_p = sample.sigma_p;
                const LossTerms terms = total_loss(d, sample.patch, per_patch, config.loss);
                loss_sum += terms.total;
                d_out.row(b) = (terms.grad / static_cast<double>(batch)).transpose();
            }
            seen += static_cast<std::size_t>(batch);

            const NetworkGrads grads = backward(result.params, cache, d_out);
            sgd_step(result.params, grads, lr);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr;
        stats.mean_loss = loss_sum / static_cast<double>(seen);
        stats.skipped_patches = skipped;
        result.log.push_back(stats);
        if (progress) (*progress) << format_log_line(stats) << '\n' << std::flush;
    }
    return result;
}

}  // namespace pcdn
