// Procedural clean shapes with exact analytic normals, sampled uniformly by
// surface area, plus a triangle tessellation of the same surface.

#pragma once

#include "pcdn/types.hpp"

#include <cstdint>
#include <string>

namespace pcdn {

enum class ShapeKind { plane, cube, sphere, cylinder, wedge, torus };

ShapeKind shape_kind_from_string(const std::string& name);
std::string to_string(ShapeKind kind);

struct ShapeSpec {
    ShapeKind kind = ShapeKind::cube;
    // Per-kind dimensions (model units):
    //   plane: extent x extent square
    //   cube: edge = extent
    //   sphere: radius
    //   cylinder: radius, height = extent (closed, with caps)
    //   wedge: two extent x extent rectangles meeting at dihedral_deg
    //   torus: major radius = extent, minor radius = radius
    double extent = 2.0;
    double radius = 1.0;
    double dihedral_deg = 90.0;
    int point_count = 100000;
    std::uint64_t seed = 0;
    // Tessellation density for curved kinds; flat kinds emit exact meshes.
    int mesh_segments = 96;
};

struct SampledShape {
    PointCloud cloud;  // with exact analytic normals
    TriangleMesh mesh;
};

SampledShape sample_shape(const ShapeSpec& spec);

/// Upper bound on the distance from an analytically sampled point to the
/// emitted mesh. Zero for flat kinds; the tessellation chord error otherwise.
double mesh_chord_tolerance(const ShapeSpec& spec);

}  // namespace pcdn
