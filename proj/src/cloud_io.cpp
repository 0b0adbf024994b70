#include "pcdn/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace pcdn {

namespace {

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

// Splits on whitespace and parses every token as a double; any failure
// reports the offending token.
bool parse_columns(const std::string& line, std::vector<double>& out, std::string& bad_token) {
    out.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p != end) {
        while (p != end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        if (p == end) break;
        const char* tok_begin = p;
        while (p != end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
        double value = 0.0;
        const auto result = std::from_chars(tok_begin, p, value);
        if (result.ec != std::errc() || result.ptr != p || !std::isfinite(value)) {
            bad_token.assign(tok_begin, p);
            return false;
        }
        out.push_back(value);
    }
    return true;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void validate_cloud(const PointCloud& cloud) {
    for (const Vec3& p : cloud.positions) {
        if (!p.allFinite()) throw NumericError("point cloud has a non-finite coordinate");
    }
    if (cloud.has_normals()) {
        if (cloud.normals.size() != cloud.positions.size()) {
            throw ArgumentError("normal count does not match position count");
        }
        for (const Vec3& n : cloud.normals) {
            if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-6) {
                throw ArgumentError("normal is not unit length");
            }
        }
    }
}

PointCloud load_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    PointCloud cloud;
    std::string line;
    std::vector<double> cols;
    std::string bad_token;
    int line_number = 0;
    int column_count = 0;  // 0 until the first data line fixes it

    while (std::getline(in, line)) {
        ++line_number;
        if (is_blank(line) || line[0] == '#') continue;
        if (!parse_columns(line, cols, bad_token)) {
            throw ParseError(path + ":" + std::to_string(line_number) +
                             ": non-numeric token '" + bad_token + "'");
        }
        if (column_count == 0) {
            if (cols.size() != 3 && cols.size() != 6) {
                throw ParseError(path + ":" + std::to_string(line_number) + ": expected 3 or 6 columns, got " +
                                 std::to_string(cols.size()));
            }
            column_count = static_cast<int>(cols.size());
        } else if (static_cast<int>(cols.size()) != column_count) {
            throw ParseError(path + ":" + std::to_string(line_number) + ": expected " +
                             std::to_string(column_count) + " columns, got " +
                             std::to_string(cols.size()));
        }
        cloud.positions.emplace_back(cols[0], cols[1], cols[2]);
        if (column_count == 6) {
            Vec3 n(cols[3], cols[4], cols[5]);
            if (std::abs(n.norm() - 1.0) > 1e-6) {
                throw ParseError(path + ":" + std::to_string(line_number) + ": normal is not unit length");
            }
            cloud.normals.push_back(n);
        }
    }
    if (cloud.positions.empty()) throw EmptyInputError("no points in '" + path + "'");
    return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    const bool with_normals = cloud.has_normals();
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
        const Vec3& p = cloud.positions[i];
        out << format_value(p.x()) << ' ' << format_value(p.y()) << ' ' << format_value(p.z());
        if (with_normals) {
            const Vec3& n = cloud.normals[i];
            out << ' ' << format_value(n.x()) << ' ' << format_value(n.y()) << ' '
                << format_value(n.z());
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

TriangleMesh load_mesh_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::string line;
    int line_number = 0;
    auto next_line = [&](const char* what) -> std::string {
        while (std::getline(in, line)) {
            ++line_number;
            if (!is_blank(line) && line[0] != '#') return line;
        }
        throw ParseError(path + ": truncated OFF file, expected " + std::string(what));
    };

    if (next_line("header") != "OFF") throw ParseError(path + ": missing OFF header");
    std::istringstream counts(next_line("counts"));
    long vertex_count = -1, face_count = -1, edge_count = 0;
    counts >> vertex_count >> face_count >> edge_count;
    if (vertex_count < 0 || face_count < 0) {
        throw ParseError(path + ":" + std::to_string(line_number) + ": bad count line");
    }

    TriangleMesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(vertex_count));
    std::vector<double> cols;
    std::string bad_token;
    for (long i = 0; i < vertex_count; ++i) {
        if (!parse_columns(next_line("vertex"), cols, bad_token) || cols.size() != 3) {
            throw ParseError(path + ":" + std::to_string(line_number) + ": bad vertex line");
        }
        mesh.vertices.emplace_back(cols[0], cols[1], cols[2]);
    }
    for (long i = 0; i < face_count; ++i) {
        if (!parse_columns(next_line("face"), cols, bad_token) || cols.size() != 4 ||
            cols[0] != 3.0) {
            throw ParseError(path + ":" + std::to_string(line_number) +
                             ": only triangular faces are supported");
        }
        std::array<int, 3> tri{static_cast<int>(cols[1]), static_cast<int>(cols[2]),
                               static_cast<int>(cols[3])};
        for (int v : tri) {
            if (v < 0 || v >= vertex_count) {
                throw ParseError(path + ":" + std::to_string(line_number) +
                                 ": vertex index out of range");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw ParseError(path + ":" + std::to_string(line_number) +
                             ": triangle has repeated vertices");
        }
        mesh.triangles.push_back(tri);
    }
    return mesh;
}

void save_mesh_off(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
    for (const Vec3& v : mesh.vertices) {
        out << format_value(v.x()) << ' ' << format_value(v.y()) << ' ' << format_value(v.z())
            << '\n';
    }
    for (const auto& t : mesh.triangles) {
        out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

double bbox_diagonal(const PointCloud& cloud) {
    if (cloud.empty()) throw EmptyInputError("bbox_diagonal of empty cloud");
    Vec3 lo = cloud.positions.front();
    Vec3 hi = lo;
    for (const Vec3& p : cloud.positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

}  // namespace pcdn
