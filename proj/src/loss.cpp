#include "pcdn/loss.hpp"

#include <cmath>

namespace pcdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clean_bbox_diagonal(const CanonicalPatchPair& patch) {
    Vec3 lo = patch.clean_points.front();
    Vec3 hi = lo;
    for (const Vec3& p : patch.clean_points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

// Shared core of the two projection losses. theta weights are 1 for the
// plain variant; they are constants w.r.t. the displacement either way.
ValueGrad projection_loss(const Vec3& d, const CanonicalPatchPair& patch,
                          const std::vector<double>& theta, double sigma) {
    const bool uniform = sigma <= kDegenerateKernel;
    const double inv_s2 = uniform ? 0.0 : 1.0 / (sigma * sigma);

    double num = 0.0, den = 0.0;
    Vec3 d_num = Vec3::Zero(), d_den = Vec3::Zero();
    for (std::size_t j = 0; j < patch.clean_points.size(); ++j) {
        const Vec3 u = d - patch.clean_points[j];
        const Vec3& n = patch.clean_normals[j];
        const double along = u.dot(n);
        const double sign = along > 0.0 ? 1.0 : (along < 0.0 ? -1.0 : 0.0);
        const double phi = uniform ? 1.0 : std::exp(-u.squaredNorm() * inv_s2);
        const double w = phi * theta[j];
        const Vec3 dw = w * (-2.0 * inv_s2) * u;  // dw/dd

        num += std::abs(along) * w;
        den += w;
        d_num += sign * w * n + std::abs(along) * dw;
        d_den += dw;
    }

    ValueGrad out;
    out.value = num / den;
    out.grad = d_num / den - (num / (den * den)) * d_den;
    return out;
}

}  // namespace

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "l2") return LossKind::l2;
    if (name == "proj_a") return LossKind::proj_a;
    if (name == "proj_b") return LossKind::proj_b;
    throw ArgumentError("unknown loss kind '" + name + "'");
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::l2: return "l2";
        case LossKind::proj_a: return "proj_a";
        case LossKind::proj_b: return "proj_b";
    }
    throw ArgumentError("unknown loss kind");
}

double sigma_p(const CanonicalPatchPair& patch, int noisy_patch_size) {
    if (patch.clean_points.empty()) throw ArgumentError("sigma_p of empty clean patch");
    if (noisy_patch_size < 1) throw ArgumentError("noisy patch size must be >= 1");
    return 4.0 * std::sqrt(clean_bbox_diagonal(patch) / noisy_patch_size);
}

double spatial_weight(double distance, double sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("sigma_p must be positive");
    return std::exp(-(distance * distance) / (sigma * sigma));
}

double normal_weight(const Vec3& n_filtered, const Vec3& n_gt, double sigma_n_degrees) {
    if (std::abs(n_filtered.norm() - 1.0) > 1e-6 || std::abs(n_gt.norm() - 1.0) > 1e-6) {
        throw ArgumentError("normal_weight requires unit normals");
    }
    const double denom = 1.0 - std::cos(sigma_n_degrees * kPi / 180.0);
    return std::exp(-(1.0 - n_filtered.dot(n_gt)) / denom);
}

Vec3 assign_filtered_normal(const Vec3& p_filtered, const CanonicalPatchPair& patch) {
    if (patch.clean_points.empty()) throw ArgumentError("empty clean patch");
    std::size_t best = 0;
    double best_d2 = (p_filtered - patch.clean_points[0]).squaredNorm();
    for (std::size_t j = 1; j < patch.clean_points.size(); ++j) {
        const double d2 = (p_filtered - patch.clean_points[j]).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = j;
        }
    }
    return patch.clean_normals[best];
}

LossParams params_for_patch(LossParams params, const CanonicalPatchPair& patch) {
    params.sigma_p = sigma_p(patch, static_cast<int>(patch.noisy_points.size()));
    return params;
}

ValueGrad loss_proj_a(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params) {
    if (patch.clean_points.empty()) throw ArgumentError("empty clean patch");
    const std::vector<double> theta(patch.clean_points.size(), 1.0);
    return projection_loss(d, patch, theta, params.sigma_p);
}

ValueGrad loss_proj_b(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params) {
    if (patch.clean_points.empty()) throw ArgumentError("empty clean patch");
    const Vec3 n_filtered = assign_filtered_normal(d, patch);
    std::vector<double> theta(patch.clean_points.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        theta[j] = normal_weight(n_filtered, patch.clean_normals[j], params.sigma_n_degrees);
    }
    return projection_loss(d, patch, theta, params.sigma_p);
}

ValueGrad loss_rep(const Vec3& d, const CanonicalPatchPair& patch) {
    if (patch.clean_points.empty()) throw ArgumentError("empty clean patch");
    std::size_t farthest = 0;
    double max_d2 = (d - patch.clean_points[0]).squaredNorm();
    for (std::size_t j = 1; j < patch.clean_points.size(); ++j) {
        const double d2 = (d - patch.clean_points[j]).squaredNorm();
        if (d2 > max_d2) {
            max_d2 = d2;
            farthest = j;
        }
    }
    ValueGrad out;
    out.value = std::sqrt(max_d2);
    if (out.value > 0.0) out.grad = (d - patch.clean_points[farthest]) / out.value;
    return out;
}

ValueGrad loss_l2(const Vec3& d, const CanonicalPatchPair& patch) {
    if (patch.clean_points.empty()) throw ArgumentError("empty clean patch");
    std::size_t nearest = 0;
    double min_d2 = (d - patch.clean_points[0]).squaredNorm();
    for (std::size_t j = 1; j < patch.clean_points.size(); ++j) {
        const double d2 = (d - patch.clean_points[j]).squaredNorm();
        if (d2 < min_d2) {
            min_d2 = d2;
            nearest = j;
        }
    }
    ValueGrad out;
    out.value = min_d2;
    out.grad = 2.0 * (d - patch.clean_points[nearest]);
    return out;
}

LossTerms total_loss(const Vec3& d, const CanonicalPatchPair& patch, const LossParams& params,
                     LossKind kind) {
    if (params.eta < 0.0 || params.eta > 1.0) throw ArgumentError("eta must lie in [0, 1]");

    ValueGrad proj;
    switch (kind) {
        case LossKind::l2: proj = loss_l2(d, patch); break;
        case LossKind::proj_a: proj = loss_proj_a(d, patch, params); break;
        case LossKind::proj_b: proj = loss_proj_b(d, patch, params); break;
    }
    const ValueGrad rep = loss_rep(d, patch);

    LossTerms terms;
    terms.projection = proj.value;
    terms.repulsion = rep.value;
    terms.total = params.eta * proj.value + (1.0 - params.eta) * rep.value;
    terms.grad = params.eta * proj.grad + (1.0 - params.eta) * rep.grad;
    return terms;
}

}  // namespace pcdn
