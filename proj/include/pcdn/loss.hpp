// Training objectives evaluated in the canonical patch frame, where the
// filtered point equals the predicted displacement d. Each loss returns its
// exact gradient with respect to d.

#pragma once

#include "pcdn/patch.hpp"
#include "pcdn/types.hpp"

namespace pcdn {

enum class LossKind { l2, proj_a, proj_b };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

struct LossParams {
    double eta = 0.97;             // projection/repulsion trade-off
    double sigma_n_degrees = 15.0; // bilateral support angle
    double sigma_p = 0.0;          // spatial kernel width, computed per patch
};

struct LossTerms {
    double projection = 0.0;
    double repulsion = 0.0;
    double total = 0.0;
    Vec3 grad = Vec3::Zero();  // d(total)/d(displacement)
};

struct ValueGrad {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
};

/// Spatial kernel width 4 * sqrt(diag / m), diag taken over the clean patch
/// in the canonical frame, m the (padded) noisy patch size.
double sigma_p(const CanonicalPatchPair& patch, int noisy_patch_size);

/// exp(-d^2 / sigma^2); requires sigma > 0.
double spatial_weight(double distance, double sigma);

/// exp(-(1 - nf . ng) / (1 - cos(sigma_n))); both normals unit length.
double normal_weight(const Vec3& n_filtered, const Vec3& n_gt, double sigma_n_degrees);

/// Normal of the clean patch point nearest to p (tie-break lowest index).
/// Constant with respect to p for gradient purposes.
Vec3 assign_filtered_normal(const Vec3& p_filtered, const CanonicalPatchPair& patch);

/// If sigma_p collapses (below this), the spatial kernel degenerates to
/// uniform weights.
inline constexpr double kDegenerateKernel = 1e-12;

/// LossParams with sigma_p filled in for this patch.
LossParams params_for_patch(LossParams params, const CanonicalPatchPair& patch);

/// Weighted average of |(d - p_j) . n_j| with spatial weights params.sigma_p.
ValueGrad loss_proj_a(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params);

/// As loss_proj_a with bilateral weights phi * theta; the nearest-normal
/// assignment is frozen per evaluation.
ValueGrad loss_proj_b(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params);

/// Maximum distance from d to any clean patch point.
ValueGrad loss_rep(const Vec3& d, const CanonicalPatchPair& patch);

/// Squared distance from d to the nearest clean patch point.
ValueGrad loss_l2(const Vec3& d, const CanonicalPatchPair& patch);

/// eta * projection + (1 - eta) * repulsion, with the kind's projection term.
LossTerms total_loss(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params,
                     LossKind kind);

}  // namespace pcdn
