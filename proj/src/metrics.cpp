#include "pcdn/metrics.hpp"

#include "pcdn/kdtree.hpp"
#include "pcdn/triangle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pcdn {

MseResult mse_metric(const PointCloud& clean, const PointCloud& filtered, int m) {
    if (clean.empty() || filtered.empty()) throw ArgumentError("mse_metric on empty cloud");
    if (m < 1 || m > static_cast<int>(filtered.size())) {
        throw ArgumentError("neighbor count out of range");
    }

    const NeighborIndex index(filtered);
    MseResult result;
    result.per_point.reserve(clean.size());
    double sum = 0.0;
    for (const Vec3& p : clean.positions) {
        double acc = 0.0;
        for (int idx : index.k_nearest(p, m)) {
            acc += (p - filtered.positions[static_cast<std::size_t>(idx)]).squaredNorm();
        }
        const double value = acc / m;
        result.per_point.push_back(value);
        sum += value;
    }
    result.value = sum / static_cast<double>(clean.size());
    return result;
}

double chamfer(const PointCloud& clean, const PointCloud& filtered) {
    if (clean.empty() || filtered.empty()) throw ArgumentError("chamfer on empty cloud");

    const NeighborIndex filtered_index(filtered);
    double forward = 0.0;
    for (const Vec3& p : clean.positions) {
        const int j = filtered_index.k_nearest(p, 1)[0];
        forward += (p - filtered.positions[static_cast<std::size_t>(j)]).squaredNorm();
    }
    forward /= static_cast<double>(clean.size());

    const NeighborIndex clean_index(clean);
    double backward = 0.0;
    for (const Vec3& q : filtered.positions) {
        const int j = clean_index.k_nearest(q, 1)[0];
        backward += (q - clean.positions[static_cast<std::size_t>(j)]).squaredNorm();
    }
    backward /= static_cast<double>(filtered.size());

    return forward + backward;
}

double p2f(const PointCloud& filtered, const TriangleMesh& mesh) {
    if (filtered.empty()) throw ArgumentError("p2f on empty cloud");
    if (mesh.triangles.empty()) throw ArgumentError("p2f on empty mesh");
    validate_mesh(mesh);

    // Centroid/bounding-radius pruning; the exact kernel decides, so the
    // result is identical to the all-triangles scan.
    struct TriBound {
        Vec3 a, b, c, centroid;
        double radius;
    };
    std::vector<TriBound> tris;
    tris.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        TriBound tb;
        tb.a = mesh.vertices[static_cast<std::size_t>(t[0])];
        tb.b = mesh.vertices[static_cast<std::size_t>(t[1])];
        tb.c = mesh.vertices[static_cast<std::size_t>(t[2])];
        tb.centroid = (tb.a + tb.b + tb.c) / 3.0;
        tb.radius = std::sqrt(std::max({(tb.a - tb.centroid).squaredNorm(),
                                        (tb.b - tb.centroid).squaredNorm(),
                                        (tb.c - tb.centroid).squaredNorm()}));
        tris.push_back(tb);
    }

    double sum = 0.0;
    for (const Vec3& p : filtered.positions) {
        double best = std::numeric_limits<double>::infinity();
        for (const TriBound& tb : tris) {
            const double lower = (p - tb.centroid).norm() - tb.radius;
            if (lower >= best) continue;
            best = std::min(best, point_triangle_distance(p, tb.a, tb.b, tb.c));
        }
        sum += best;
    }
    return sum / static_cast<double>(filtered.size());
}

void save_per_point_errors(const PointCloud& cloud, const std::vector<double>& errors,
                           const std::string& path) {
    if (cloud.size() != errors.size()) {
        throw ArgumentError("error list does not match the cloud");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    char buf[160];
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const Vec3& p = cloud.positions[i];
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", p.x(), p.y(), p.z(),
                      errors[i]);
        out << buf;
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::string format_report(const MetricReport& report) {
    char buf[160];
    if (report.has_p2f()) {
        std::snprintf(buf, sizeof(buf), "cd=%.12g mse=%.12g p2f=%.12g", report.cd, report.mse,
                      report.p2f);
    } else {
        std::snprintf(buf, sizeof(buf), "cd=%.12g mse=%.12g", report.cd, report.mse);
    }
    return buf;
}

}  // namespace pcdn
