#pragma once

#include "pcdn/types.hpp"

#include <string>
#include <vector>

namespace pcdn {

struct MetricReport {
    double cd = 0.0;
    double mse = 0.0;
    double p2f = -1.0;  // negative when not evaluated
    std::vector<double> per_point_mse;

    bool has_p2f() const { return p2f >= 0.0; }
};

/// Per clean point: mean squared distance to its M nearest filtered points;
/// result is the mean over clean points plus the per-point list.
struct MseResult {
    double value = 0.0;
    std::vector<double> per_point;
};
MseResult mse_metric(const PointCloud& clean, const PointCloud& filtered, int m = 10);

/// Symmetric Chamfer distance: mean squared nearest-neighbor distance in
/// both directions.
double chamfer(const PointCloud& clean, const PointCloud& filtered);

/// Mean distance from filtered points to the mesh surface.
double p2f(const PointCloud& filtered, const TriangleMesh& mesh);

/// 4-column text file `x y z error` for external heat-map rendering.
void save_per_point_errors(const PointCloud& cloud, const std::vector<double>& errors,
                           const std::string& path);

/// Single-line `cd=<v> mse=<v> [p2f=<v>]` record.
std::string format_report(const MetricReport& report);

}  // namespace pcdn
