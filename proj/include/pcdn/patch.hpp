// Patch construction: world-space patch pairs around a noisy point, their
// normalized PCA-aligned canonical form, and the inverse transform for
// mapping network output back to world space.

#pragma once

#include "pcdn/kdtree.hpp"
#include "pcdn/rng.hpp"
#include "pcdn/types.hpp"

#include <span>
#include <vector>

namespace pcdn {

/// World-space patch pair around the noisy point `center`.
/// Every member point lies strictly within `radius` of `center`.
struct RawPatchPair {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    std::vector<Vec3> noisy_points;
    std::vector<Vec3> clean_points;
    std::vector<Vec3> clean_normals;
};

/// Fixed-size patch pair in the canonical frame (translated to the origin,
/// scaled by 1/radius, rotated by `rotation`). Non-padded noisy points have
/// norm < 1; padded entries are exactly the origin.
struct CanonicalPatchPair {
    std::vector<Vec3> noisy_points;  // exactly the configured patch size
    int pad_count = 0;
    std::vector<Vec3> clean_points;  // at most patch size, never padded
    std::vector<Vec3> clean_normals;
    Mat3 rotation = Mat3::Identity();
    double radius = 0.0;
    Vec3 center = Vec3::Zero();
    bool degenerate_alignment = false;  // PCA fell back to identity
};

struct PcaResult {
    Mat3 rotation = Mat3::Identity();
    bool degenerate = false;
};

/// Gathers all noisy and clean points within r of noisy.positions[center_index].
/// The clean cloud must carry normals. An empty clean patch raises
/// DegeneratePatchError (callers skip the sample).
RawPatchPair extract_patch_pair(const PointCloud& noisy, const PointCloud& clean,
                                int center_index, double r,
                                const NeighborIndex& noisy_index,
                                const NeighborIndex& clean_index);

/// Rotation aligning the smallest-variance principal axis with z and the
/// middle axis with x. Covariance is the second moment about the origin
/// (the patch frame is anchored at the query point, not the patch mean).
/// Eigenvector signs are fixed from the data: each axis is flipped so the
/// largest-magnitude point projection along it is positive, which keeps the
/// canonical frame covariant under rigid motion. Near-tied smallest
/// eigenvalues or fewer than 3 points set `degenerate` and return identity.
PcaResult pca_rotation(std::span<const Vec3> points);

/// Translate/scale/rotate both patches into the canonical frame and resample
/// the noisy patch to exactly `patch_size` points (random downsample without
/// replacement, origin padding). The clean patch is downsampled to at most
/// `patch_size`, never padded. `rng` drives all randomized choices.
CanonicalPatchPair canonicalize(const RawPatchPair& raw, int patch_size, Rng& rng);

/// World-space displacement r * R^-1 * d.
Vec3 decanonicalize_displacement(const Vec3& d, const CanonicalPatchPair& patch);

}  // namespace pcdn
