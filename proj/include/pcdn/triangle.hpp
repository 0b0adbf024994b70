#pragma once

#include "pcdn/types.hpp"

namespace pcdn {

/// Exact minimum Euclidean distance from p to the closed triangle (a, b, c).
/// Degenerate triangles (zero area) raise ArgumentError.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Validates index ranges and per-triangle vertex distinctness / area.
void validate_mesh(const TriangleMesh& mesh);

}  // namespace pcdn
