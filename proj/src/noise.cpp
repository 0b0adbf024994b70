#include "pcdn/noise.hpp"

#include "pcdn/cloud_io.hpp"
#include "pcdn/rng.hpp"

#include <algorithm>
#include <cmath>

namespace pcdn {

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "gaussian") return NoiseKind::gaussian;
    if (name == "impulsive") return NoiseKind::impulsive;
    if (name == "uniform") return NoiseKind::uniform;
    throw ArgumentError("unknown noise kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::impulsive: return "impulsive";
        case NoiseKind::uniform: return "uniform";
    }
    throw ArgumentError("unknown noise kind");
}

PointCloud add_noise(const PointCloud& clean, const NoiseSpec& spec) {
    if (clean.empty()) throw EmptyInputError("add_noise on empty cloud");
    if (spec.level < 0.0) throw ArgumentError("noise level must be >= 0");

    PointCloud out;
    out.positions = clean.positions;  // normals intentionally dropped
    if (spec.level == 0.0) return out;

    const double sigma = spec.level * bbox_diagonal(clean);
    Rng rng(spec.seed);
    const std::size_t n = out.positions.size();

    switch (spec.kind) {
        case NoiseKind::gaussian:
            for (Vec3& p : out.positions) {
                for (int a = 0; a < 3; ++a) p[a] += rng.normal(0.0, sigma);
            }
            break;
        case NoiseKind::impulsive: {
            const auto count = static_cast<std::uint32_t>(
                std::ceil(kImpulsiveFraction * static_cast<double>(n)));
            std::vector<std::uint32_t> hit =
                rng.sample_without_replacement(static_cast<std::uint32_t>(n), count);
            std::sort(hit.begin(), hit.end());
            const double sigma_imp = kImpulsiveSigmaScale * sigma;
            for (std::uint32_t i : hit) {
                for (int a = 0; a < 3; ++a) out.positions[i][a] += rng.normal(0.0, sigma_imp);
            }
            break;
        }
        case NoiseKind::uniform:
            for (Vec3& p : out.positions) {
                for (int a = 0; a < 3; ++a) p[a] += rng.uniform(-sigma, sigma);
            }
            break;
    }
    return out;
}

}  // namespace pcdn
