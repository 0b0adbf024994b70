// Text cloud format: one point per line, 3 columns (x y z) or 6 columns
// (x y z nx ny nz), '#' lines ignored. Mesh format: ASCII OFF.

#pragma once

#include "pcdn/types.hpp"

#include <string>

namespace pcdn {

/// Returns a cloud with normals iff every record has 6 numeric columns.
/// Malformed lines raise ParseError with the 1-based line number;
/// a file with no data lines raises EmptyInputError.
PointCloud load_cloud(const std::string& path);

/// Full-precision text dump; 6 columns per line when normals are present.
void save_cloud(const PointCloud& cloud, const std::string& path);

TriangleMesh load_mesh_off(const std::string& path);
void save_mesh_off(const TriangleMesh& mesh, const std::string& path);

/// Euclidean length of the axis-aligned bounding box diagonal.
double bbox_diagonal(const PointCloud& cloud);

}  // namespace pcdn
