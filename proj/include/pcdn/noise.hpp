#pragma once

#include "pcdn/types.hpp"

#include <cstdint>
#include <string>

namespace pcdn {

enum class NoiseKind { gaussian, impulsive, uniform };

NoiseKind noise_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

/// Noise magnitude is `level` as a fraction of the clean cloud's bounding
/// box diagonal.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double level = 0.01;
    std::uint64_t seed = 0;
};

/// Fraction of points hit by impulsive noise; those points get Gaussian
/// perturbations with 5x the nominal sigma.
inline constexpr double kImpulsiveFraction = 0.1;
inline constexpr double kImpulsiveSigmaScale = 5.0;

/// Perturbs positions per the noise spec. Point count and order are
/// preserved; the output carries no normals.
PointCloud add_noise(const PointCloud& clean, const NoiseSpec& spec);

}  // namespace pcdn
