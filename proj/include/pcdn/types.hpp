// Core data types shared across the point-cloud denoising toolkit.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcdn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Positions plus optional unit normals, in model units.
/// If normals are present the list has the same length as positions.
struct PointCloud {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;

    bool has_normals() const { return !normals.empty(); }
    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
};

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

// Error taxonomy. Each class maps to one stable diagnostic prefix in the CLI.

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Patch construction found no usable clean geometry; callers skip the sample.
struct DegeneratePatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Throws ArgumentError/NumericError if the cloud violates its invariants
/// (finite coordinates, unit normals matching positions in length).
void validate_cloud(const PointCloud& cloud);

}  // namespace pcdn
