#include "pcdn/patch.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace pcdn {

namespace {

// Two near-equal smallest eigenvalues leave the aligned frame underdetermined.
constexpr double kEigenvalueTie = 1e-12;

// Fixes the sign of an axis from the data: the point projection with the
// largest magnitude is made positive. Projections are invariant under a
// common rotation of points and axis, so the canonical frame is too.
// When every projection is below floating-point noise (points exactly in
// the orthogonal plane, e.g. a rank-2 moment), the data carries no sign;
// fall back to the largest vector component so the choice is at least
// stable under reordering.
Vec3 orient_axis(const Vec3& axis, std::span<const Vec3> points) {
    constexpr double kSignal = 1e-9;  // points are unit-scale canonical
    double best = 0.0;
    double best_signed = 0.0;
    for (const Vec3& q : points) {
        const double t = axis.dot(q);
        if (std::abs(t) > best) {
            best = std::abs(t);
            best_signed = t;
        }
    }
    if (best > kSignal) {
        return best_signed < 0.0 ? Vec3(-axis) : axis;
    }
    int max_component = 0;
    if (std::abs(axis[1]) > std::abs(axis[max_component])) max_component = 1;
    if (std::abs(axis[2]) > std::abs(axis[max_component])) max_component = 2;
    return axis[max_component] < 0.0 ? Vec3(-axis) : axis;
}

}  // namespace

RawPatchPair extract_patch_pair(const PointCloud& noisy, const PointCloud& clean,
                                int center_index, double r,
                                const NeighborIndex& noisy_index,
                                const NeighborIndex& clean_index) {
    if (center_index < 0 || center_index >= static_cast<int>(noisy.size())) {
        throw ArgumentError("patch center index out of range");
    }
    if (!(r > 0.0)) throw ArgumentError("patch radius must be positive");
    if (!clean.has_normals()) throw ArgumentError("clean cloud is missing normals");

    RawPatchPair raw;
    raw.center = noisy.positions[static_cast<std::size_t>(center_index)];
    raw.radius = r;

    for (int i : noisy_index.radius_neighbors(raw.center, r)) {
        raw.noisy_points.push_back(noisy.positions[static_cast<std::size_t>(i)]);
    }
    const std::vector<int> clean_ids = clean_index.radius_neighbors(raw.center, r);
    if (clean_ids.empty()) {
        throw DegeneratePatchError("no clean points within the patch radius");
    }
    for (int i : clean_ids) {
        raw.clean_points.push_back(clean.positions[static_cast<std::size_t>(i)]);
        raw.clean_normals.push_back(clean.normals[static_cast<std::size_t>(i)]);
    }
    return raw;
}

PcaResult pca_rotation(std::span<const Vec3> points) {
    PcaResult result;
    if (points.size() < 3) {
        result.degenerate = true;
        return result;
    }

    // Second moment about the origin: the frame is anchored at the query
    // point, which the canonical translation places there.
    Mat3 moment = Mat3::Zero();
    for (const Vec3& q : points) moment += q * q.transpose();
    moment /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Mat3> solver(moment);
    const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
    if (evals[1] - evals[0] <= kEigenvalueTie) {
        result.degenerate = true;
        return result;
    }

    const Vec3 z_axis = orient_axis(solver.eigenvectors().col(0), points);  // least variance
    const Vec3 x_axis = orient_axis(solver.eigenvectors().col(1), points);  // middle
    const Vec3 y_axis = z_axis.cross(x_axis);

    result.rotation.row(0) = x_axis;
    result.rotation.row(1) = y_axis;
    result.rotation.row(2) = z_axis;
    return result;
}

CanonicalPatchPair canonicalize(const RawPatchPair& raw, int patch_size, Rng& rng) {
    if (patch_size < 1) throw ArgumentError("patch size must be >= 1");
    if (raw.clean_points.empty()) throw DegeneratePatchError("empty clean patch");
    if (raw.clean_normals.size() != raw.clean_points.size()) {
        throw ArgumentError("clean normals do not match clean points");
    }
    if (!(raw.radius > 0.0)) throw ArgumentError("patch radius must be positive");

    const double inv_r = 1.0 / raw.radius;
    std::vector<Vec3> noisy(raw.noisy_points.size());
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        noisy[i] = (raw.noisy_points[i] - raw.center) * inv_r;
    }

    const PcaResult pca = pca_rotation(noisy);

    CanonicalPatchPair out;
    out.rotation = pca.rotation;
    out.degenerate_alignment = pca.degenerate;
    out.radius = raw.radius;
    out.center = raw.center;

    for (Vec3& q : noisy) q = pca.rotation * q;

    const int m = static_cast<int>(noisy.size());
    if (m > patch_size) {
        std::vector<std::uint32_t> keep = rng.sample_without_replacement(
            static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(patch_size));
        std::sort(keep.begin(), keep.end());
        out.noisy_points.reserve(static_cast<std::size_t>(patch_size));
        for (std::uint32_t i : keep) out.noisy_points.push_back(noisy[i]);
    } else {
        out.noisy_points = std::move(noisy);
        out.pad_count = patch_size - m;
        out.noisy_points.resize(static_cast<std::size_t>(patch_size), Vec3::Zero());
    }

    const int clean_count = static_cast<int>(raw.clean_points.size());
    std::vector<std::uint32_t> clean_keep;
    if (clean_count > patch_size) {
        clean_keep = rng.sample_without_replacement(static_cast<std::uint32_t>(clean_count),
                                                    static_cast<std::uint32_t>(patch_size));
        std::sort(clean_keep.begin(), clean_keep.end());
    } else {
        clean_keep.resize(static_cast<std::size_t>(clean_count));
        for (int i = 0; i < clean_count; ++i) clean_keep[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
    }
    out.clean_points.reserve(clean_keep.size());
    out.clean_normals.reserve(clean_keep.size());
    for (std::uint32_t i : clean_keep) {
        out.clean_points.push_back(pca.rotation * ((raw.clean_points[i] - raw.center) * inv_r));
        out.clean_normals.push_back(pca.rotation * raw.clean_normals[i]);
    }
    return out;
}

Vec3 decanonicalize_displacement(const Vec3& d, const CanonicalPatchPair& patch) {
    return patch.radius * (patch.rotation.transpose() * d);
}

}  // namespace pcdn
