#pragma once

#include "pcdn/loss.hpp"
#include "pcdn/manifest.hpp"
#include "pcdn/network.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcdn {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 64;
    double lr_start = 1e-4;
    double lr_end = 1e-8;
    double eta = 0.97;
    double sigma_n_degrees = 15.0;
    int patch_size = 500;
    double radius_fraction = 0.05;
    int patches_per_model = 8000;
    LossKind loss = LossKind::proj_b;
    Architecture arch;
    std::uint64_t seed = 0;
    bool deterministic = true;
};

/// Throws ArgumentError on invariant violations (eta range, lr ordering, ...).
void validate_train_config(const TrainConfig& config);

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    int skipped_patches = 0;
};

struct TrainResult {
    NetworkParams params;
    std::vector<EpochStats> log;
};

/// Per epoch: draw patches_per_model random centers from each manifest
/// entry, canonicalize, batch, average the configured loss over the batch,
/// backpropagate, apply SGD at the scheduled rate. Degenerate patches are
/// skipped and counted; an epoch with no usable patches raises TrainingError.
/// `manifest_dir` resolves relative entry paths. If `progress` is non-null,
/// one log line per epoch is streamed to it.
TrainResult train(const DatasetManifest& manifest, const std::string& manifest_dir,
                  const TrainConfig& config, std::ostream* progress = nullptr);

/// Line-oriented log: header then `epoch, lr, mean_loss, skipped_patches` rows.
std::string format_train_log(const std::vector<EpochStats>& log);
std::string format_log_line(const EpochStats& row);

}  // namespace pcdn
