// Point-wise filtering: build the canonical patch around each noisy point,
// run the network in inference mode, map the displacement back to world
// space. Whole passes can be repeated to progressively filter.

#pragma once

#include "pcdn/kdtree.hpp"
#include "pcdn/network.hpp"
#include "pcdn/rng.hpp"
#include "pcdn/types.hpp"

#include <cstdint>

namespace pcdn {

struct FilterConfig {
    int iterations = 2;
    int patch_size = 500;
    double radius_fraction = 0.05;
    std::uint64_t seed = 0;
    bool deterministic = true;
    int threads = 1;
};

struct FilterSummary {
    int isolated_points = 0;      // patches with no neighbor beyond the point itself
    int identity_alignments = 0;  // degenerate PCA handled with identity rotation
};

/// Filters noisy.positions[i]. `r` is the patch radius in model units and
/// `rng` the per-point downsampling stream.
Vec3 filter_point(const NetworkParams& params, const PointCloud& noisy,
                  const NeighborIndex& index, int i, double r, int patch_size,
                  Rng rng, FilterSummary* summary = nullptr);

/// Runs config.iterations whole-cloud passes. The patch radius is
/// radius_fraction x the original input's bbox diagonal, fixed across
/// iterations; each iteration reads a frozen snapshot of the previous one.
/// Point count and order are preserved.
PointCloud filter_cloud(const NetworkParams& params, const PointCloud& noisy,
                        const FilterConfig& config, FilterSummary* summary = nullptr);

}  // namespace pcdn
