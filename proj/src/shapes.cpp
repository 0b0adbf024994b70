#include "pcdn/shapes.hpp"

#include "pcdn/rng.hpp"

#include <cmath>

namespace pcdn {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw ArgumentError(std::string(what) + " must be positive");
}

void add_quad(TriangleMesh& mesh, int a, int b, int c, int d) {
    mesh.triangles.push_back({a, b, c});
    mesh.triangles.push_back({a, c, d});
}

SampledShape make_plane(const ShapeSpec& spec, Rng& rng) {
    const double h = spec.extent / 2.0;
    SampledShape out;
    out.mesh.vertices = {{-h, -h, 0}, {h, -h, 0}, {h, h, 0}, {-h, h, 0}};
    add_quad(out.mesh, 0, 1, 2, 3);
    for (int i = 0; i < spec.point_count; ++i) {
        out.cloud.positions.emplace_back(rng.uniform(-h, h), rng.uniform(-h, h), 0.0);
        out.cloud.normals.emplace_back(0.0, 0.0, 1.0);
    }
    return out;
}

SampledShape make_cube(const ShapeSpec& spec, Rng& rng) {
    const double h = spec.extent / 2.0;
    SampledShape out;
    out.mesh.vertices = {{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h},
                         {-h, -h, h},  {h, -h, h},  {h, h, h},  {-h, h, h}};
    add_quad(out.mesh, 0, 3, 2, 1);  // -z
    add_quad(out.mesh, 4, 5, 6, 7);  // +z
    add_quad(out.mesh, 0, 1, 5, 4);  // -y
    add_quad(out.mesh, 2, 3, 7, 6);  // +y
    add_quad(out.mesh, 0, 4, 7, 3);  // -x
    add_quad(out.mesh, 1, 2, 6, 5);  // +x

    for (int i = 0; i < spec.point_count; ++i) {
        const int face = static_cast<int>(rng.uniform_index(6));  // faces have equal area
        const int axis = face / 2;
        const double sign = (face % 2 == 0) ? -1.0 : 1.0;
        const double u = rng.uniform(-h, h);
        const double v = rng.uniform(-h, h);
        Vec3 p = Vec3::Zero(), n = Vec3::Zero();
        p[axis] = sign * h;
        n[axis] = sign;
        p[(axis + 1) % 3] = u;
        p[(axis + 2) % 3] = v;
        out.cloud.positions.push_back(p);
        out.cloud.normals.push_back(n);
    }
    return out;
}

SampledShape make_sphere(const ShapeSpec& spec, Rng& rng) {
    const double rho = spec.radius;
    SampledShape out;

    for (int i = 0; i < spec.point_count; ++i) {
        const double z = rng.uniform(-1.0, 1.0);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 n(s * std::cos(phi), s * std::sin(phi), z);
        out.cloud.positions.push_back(rho * n);
        out.cloud.normals.push_back(n);
    }

    // UV tessellation, vertices exactly on the sphere.
    const int rings = std::max(4, spec.mesh_segments / 2);
    const int segs = std::max(8, spec.mesh_segments);
    auto& mesh = out.mesh;
    mesh.vertices.emplace_back(0, 0, rho);   // north pole
    for (int i = 1; i < rings; ++i) {
        const double theta = kPi * i / rings;
        for (int j = 0; j < segs; ++j) {
            const double phi = 2.0 * kPi * j / segs;
            mesh.vertices.emplace_back(rho * std::sin(theta) * std::cos(phi),
                                       rho * std::sin(theta) * std::sin(phi),
                                       rho * std::cos(theta));
        }
    }
    mesh.vertices.emplace_back(0, 0, -rho);  // south pole
    const int south = static_cast<int>(mesh.vertices.size()) - 1;
    auto ring_vertex = [&](int ring, int j) { return 1 + (ring - 1) * segs + (j % segs); };
    for (int j = 0; j < segs; ++j) {
        mesh.triangles.push_back({0, ring_vertex(1, j), ring_vertex(1, j + 1)});
        mesh.triangles.push_back({south, ring_vertex(rings - 1, j + 1), ring_vertex(rings - 1, j)});
    }
    for (int i = 1; i < rings - 1; ++i) {
        for (int j = 0; j < segs; ++j) {
            add_quad(mesh, ring_vertex(i, j), ring_vertex(i + 1, j), ring_vertex(i + 1, j + 1),
                     ring_vertex(i, j + 1));
        }
    }
    return out;
}

SampledShape make_cylinder(const ShapeSpec& spec, Rng& rng) {
    const double rho = spec.radius;
    const double h = spec.extent;
    SampledShape out;

    const double side_area = 2.0 * kPi * rho * h;
    const double cap_area = kPi * rho * rho;
    const double total = side_area + 2.0 * cap_area;
    for (int i = 0; i < spec.point_count; ++i) {
        const double pick = rng.uniform(0.0, total);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        if (pick < side_area) {
            const double z = rng.uniform(-h / 2.0, h / 2.0);
            out.cloud.positions.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
            out.cloud.normals.emplace_back(std::cos(phi), std::sin(phi), 0.0);
        } else {
            const double sign = pick < side_area + cap_area ? 1.0 : -1.0;
            const double rr = rho * std::sqrt(rng.uniform());
            out.cloud.positions.emplace_back(rr * std::cos(phi), rr * std::sin(phi),
                                             sign * h / 2.0);
            out.cloud.normals.emplace_back(0.0, 0.0, sign);
        }
    }

    const int segs = std::max(8, spec.mesh_segments);
    auto& mesh = out.mesh;
    for (int j = 0; j < segs; ++j) {
        const double phi = 2.0 * kPi * j / segs;
        mesh.vertices.emplace_back(rho * std::cos(phi), rho * std::sin(phi), h / 2.0);
        mesh.vertices.emplace_back(rho * std::cos(phi), rho * std::sin(phi), -h / 2.0);
    }
    const int top_center = static_cast<int>(mesh.vertices.size());
    mesh.vertices.emplace_back(0, 0, h / 2.0);
    const int bottom_center = top_center + 1;
    mesh.vertices.emplace_back(0, 0, -h / 2.0);
    for (int j = 0; j < segs; ++j) {
        const int t0 = 2 * j, b0 = 2 * j + 1;
        const int t1 = 2 * ((j + 1) % segs), b1 = 2 * ((j + 1) % segs) + 1;
        add_quad(mesh, t0, b0, b1, t1);
        mesh.triangles.push_back({top_center, t0, t1});
        mesh.triangles.push_back({bottom_center, b1, b0});
    }
    return out;
}

SampledShape make_wedge(const ShapeSpec& spec, Rng& rng) {
    // Two rectangles meeting along the ridge x = z = 0, like a tent roof.
    const double half_angle = spec.dihedral_deg * kPi / 180.0 / 2.0;
    const double w = spec.extent;
    const double hy = spec.extent / 2.0;
    const Vec3 dir[2] = {Vec3(std::sin(half_angle), 0, -std::cos(half_angle)),
                         Vec3(-std::sin(half_angle), 0, -std::cos(half_angle))};
    const Vec3 nrm[2] = {Vec3(std::cos(half_angle), 0, std::sin(half_angle)),
                         Vec3(-std::cos(half_angle), 0, std::sin(half_angle))};

    SampledShape out;
    for (int i = 0; i < spec.point_count; ++i) {
        const int face = static_cast<int>(rng.uniform_index(2));  // equal areas
        const double t = rng.uniform(0.0, w);
        const double y = rng.uniform(-hy, hy);
        out.cloud.positions.push_back(t * dir[face] + Vec3(0, y, 0));
        out.cloud.normals.push_back(nrm[face]);
    }

    auto& mesh = out.mesh;
    for (int f = 0; f < 2; ++f) {
        const int base = static_cast<int>(mesh.vertices.size());
        mesh.vertices.emplace_back(0, -hy, 0);
        mesh.vertices.emplace_back(0, hy, 0);
        mesh.vertices.push_back(w * dir[f] + Vec3(0, -hy, 0));
        mesh.vertices.push_back(w * dir[f] + Vec3(0, hy, 0));
        add_quad(mesh, base, base + 1, base + 3, base + 2);
    }
    return out;
}

SampledShape make_torus(const ShapeSpec& spec, Rng& rng) {
    const double major = spec.extent;
    const double minor = spec.radius;
    if (!(major > minor)) throw ArgumentError("torus major radius must exceed minor radius");

    SampledShape out;
    for (int i = 0; i < spec.point_count; ++i) {
        const double u = rng.uniform(0.0, 2.0 * kPi);
        double v;
        // Area element is proportional to (major + minor*cos v): rejection sample.
        for (;;) {
            v = rng.uniform(0.0, 2.0 * kPi);
            if (rng.uniform() * (major + minor) <= major + minor * std::cos(v)) break;
        }
        const double ring = major + minor * std::cos(v);
        out.cloud.positions.emplace_back(ring * std::cos(u), ring * std::sin(u),
                                         minor * std::sin(v));
        out.cloud.normals.emplace_back(std::cos(v) * std::cos(u), std::cos(v) * std::sin(u),
                                       std::sin(v));
    }

    const int segs_u = std::max(8, spec.mesh_segments);
    const int segs_v = std::max(8, spec.mesh_segments / 2);
    auto& mesh = out.mesh;
    for (int i = 0; i < segs_u; ++i) {
        const double u = 2.0 * kPi * i / segs_u;
        for (int j = 0; j < segs_v; ++j) {
            const double v = 2.0 * kPi * j / segs_v;
            const double ring = major + minor * std::cos(v);
            mesh.vertices.emplace_back(ring * std::cos(u), ring * std::sin(u),
                                       minor * std::sin(v));
        }
    }
    auto grid = [&](int i, int j) { return (i % segs_u) * segs_v + (j % segs_v); };
    for (int i = 0; i < segs_u; ++i) {
        for (int j = 0; j < segs_v; ++j) {
            add_quad(mesh, grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
        }
    }
    return out;
}

}  // namespace

ShapeKind shape_kind_from_string(const std::string& name) {
    if (name == "plane") return ShapeKind::plane;
    if (name == "cube") return ShapeKind::cube;
    if (name == "sphere") return ShapeKind::sphere;
    if (name == "cylinder") return ShapeKind::cylinder;
    if (name == "wedge") return ShapeKind::wedge;
    if (name == "torus") return ShapeKind::torus;
    throw ArgumentError("unknown shape kind '" + name + "'");
}

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::plane: return "plane";
        case ShapeKind::cube: return "cube";
        case ShapeKind::sphere: return "sphere";
        case ShapeKind::cylinder: return "cylinder";
        case ShapeKind::wedge: return "wedge";
        case ShapeKind::torus: return "torus";
    }
    throw ArgumentError("unknown shape kind");
}

SampledShape sample_shape(const ShapeSpec& spec) {
    if (spec.point_count < 1) throw ArgumentError("point_count must be >= 1");
    require_positive(spec.extent, "shape extent");
    require_positive(spec.radius, "shape radius");
    if (spec.kind == ShapeKind::wedge &&
        (!(spec.dihedral_deg > 0.0) || spec.dihedral_deg > 180.0)) {
        throw ArgumentError("wedge dihedral angle must lie in (0, 180] degrees");
    }

    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(spec.kind)));
    switch (spec.kind) {
        case ShapeKind::plane: return make_plane(spec, rng);
        case ShapeKind::cube: return make_cube(spec, rng);
        case ShapeKind::sphere: return make_sphere(spec, rng);
        case ShapeKind::cylinder: return make_cylinder(spec, rng);
        case ShapeKind::wedge: return make_wedge(spec, rng);
        case ShapeKind::torus: return make_torus(spec, rng);
    }
    throw ArgumentError("unknown shape kind");
}

double mesh_chord_tolerance(const ShapeSpec& spec) {
    const int segs = std::max(8, spec.mesh_segments);
    switch (spec.kind) {
        case ShapeKind::plane:
        case ShapeKind::cube:
        case ShapeKind::wedge:
            return 0.0;
        case ShapeKind::sphere: {
            const int rings = std::max(4, spec.mesh_segments / 2);
            const double step = kPi / std::min(rings, segs);
            return spec.radius * (1.0 - std::cos(step));
        }
        case ShapeKind::cylinder:
            return spec.radius * (1.0 - std::cos(kPi / segs));
        case ShapeKind::torus: {
            const int segs_v = std::max(8, spec.mesh_segments / 2);
            const double step = 2.0 * kPi / std::min(segs, segs_v);
            return (spec.extent + spec.radius) * (1.0 - std::cos(step / 2.0)) * 2.0;
        }
    }
    return 0.0;
}

}  // namespace pcdn
