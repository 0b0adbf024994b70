#include "pcdn/manifest.hpp"
#include "pcdn/noise.hpp"
#include "pcdn/shapes.hpp"

#include "pcdn/cloud_io.hpp"
#include "pcdn/triangle.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace pcdn;
namespace fs = std::filesystem;

namespace {

double distance_to_mesh(const Vec3& p, const TriangleMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : mesh.triangles) {
        best = std::min(best, point_triangle_distance(p, mesh.vertices[static_cast<std::size_t>(t[0])],
                                                      mesh.vertices[static_cast<std::size_t>(t[1])],
                                                      mesh.vertices[static_cast<std::size_t>(t[2])]));
    }
    return best;
}

}  // namespace

TEST_SUITE("synthetic") {

TEST_CASE("unit sphere samples sit on the sphere with radial normals") {
    ShapeSpec spec;
    spec.kind = ShapeKind::sphere;
    spec.radius = 1.0;
    spec.point_count = 2000;
    spec.seed = 3;
    const SampledShape shape = sample_shape(spec);
    for (std::size_t i = 0; i < shape.cloud.size(); ++i) {
        CHECK(std::abs(shape.cloud.positions[i].norm() - 1.0) < 1e-9);
        CHECK((shape.cloud.positions[i] - shape.cloud.normals[i]).norm() < 1e-9);
    }
}

TEST_CASE("cube normals are axis unit vectors") {
    ShapeSpec spec;
    spec.kind = ShapeKind::cube;
    spec.point_count = 1000;
    const SampledShape shape = sample_shape(spec);
    for (const Vec3& n : shape.cloud.normals) {
        int axis_hits = 0;
        for (int a = 0; a < 3; ++a) {
            if (std::abs(std::abs(n[a]) - 1.0) < 1e-15) ++axis_hits;
        }
        CHECK(axis_hits == 1);
        CHECK(std::abs(n.norm() - 1.0) < 1e-15);
    }
}

TEST_CASE("plane sampling is area-uniform: quadrant counts within 5 sigma") {
    const int n = 4000;
    const double expect = n / 4.0;
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ShapeSpec spec;
        spec.kind = ShapeKind::plane;
        spec.point_count = n;
        spec.seed = seed;
        const SampledShape shape = sample_shape(spec);
        int quadrant[4] = {0, 0, 0, 0};
        for (const Vec3& p : shape.cloud.positions) {
            quadrant[(p.x() >= 0 ? 1 : 0) + (p.y() >= 0 ? 2 : 0)]++;
        }
        for (int q = 0; q < 4; ++q) {
            CHECK(std::abs(quadrant[q] - expect) < 5.0 * sigma);
        }
    }
}

TEST_CASE("every shape kind emits points on (or chord-close to) its mesh") {
    for (ShapeKind kind : {ShapeKind::plane, ShapeKind::cube, ShapeKind::sphere,
                           ShapeKind::cylinder, ShapeKind::wedge, ShapeKind::torus}) {
        ShapeSpec spec;
        spec.kind = kind;
        spec.point_count = 200;
        spec.seed = 11;
        const SampledShape shape = sample_shape(spec);
        CHECK_NOTHROW(validate_mesh(shape.mesh));
        const double tol = std::max(1e-6, mesh_chord_tolerance(spec));
        for (const Vec3& p : shape.cloud.positions) {
            CHECK(distance_to_mesh(p, shape.mesh) < tol);
        }
    }
}

TEST_CASE("shape sampling is deterministic per seed and distinct across seeds") {
    ShapeSpec spec;
    spec.kind = ShapeKind::torus;
    spec.point_count = 500;
    spec.seed = 21;
    const SampledShape a = sample_shape(spec);
    const SampledShape b = sample_shape(spec);
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.positions[i] == b.cloud.positions[i]);
    }
    spec.seed = 22;
    const SampledShape c = sample_shape(spec);
    bool any_different = false;
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        if (a.cloud.positions[i] != c.cloud.positions[i]) any_different = true;
    }
    CHECK(any_different);
}

TEST_CASE("sample_shape validates its spec") {
    ShapeSpec spec;
    spec.point_count = 0;
    CHECK_THROWS_AS(sample_shape(spec), ArgumentError);
    CHECK_THROWS_AS(shape_kind_from_string("spline"), ArgumentError);
}

TEST_CASE("level-0 noise is the identity and drops normals") {
    ShapeSpec spec;
    spec.kind = ShapeKind::cube;
    spec.point_count = 500;
    const SampledShape shape = sample_shape(spec);

    NoiseSpec noise;
    noise.level = 0.0;
    const PointCloud noisy = add_noise(shape.cloud, noise);
    REQUIRE(noisy.size() == shape.cloud.size());
    CHECK_FALSE(noisy.has_normals());
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        CHECK(noisy.positions[i] == shape.cloud.positions[i]);
    }
}

TEST_CASE("gaussian noise magnitude follows the requested level") {
    ShapeSpec spec;
    spec.kind = ShapeKind::plane;
    spec.point_count = 100000;
    const SampledShape shape = sample_shape(spec);
    const double diag = bbox_diagonal(shape.cloud);

    NoiseSpec noise;
    noise.level = 0.01;
    noise.seed = 5;
    const PointCloud noisy = add_noise(shape.cloud, noise);

    for (int a = 0; a < 3; ++a) {
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < noisy.size(); ++i) {
            const double d = noisy.positions[i][a] - shape.cloud.positions[i][a];
            sum_sq += d * d;
        }
        const double sample_sigma = std::sqrt(sum_sq / static_cast<double>(noisy.size()));
        CHECK(sample_sigma == doctest::Approx(0.01 * diag).epsilon(0.05));
    }
}

TEST_CASE("impulsive noise perturbs exactly the configured fraction") {
    ShapeSpec spec;
    spec.kind = ShapeKind::sphere;
    spec.point_count = 997;  // force the ceil
    const SampledShape shape = sample_shape(spec);

    NoiseSpec noise;
    noise.kind = NoiseKind::impulsive;
    noise.level = 0.01;
    noise.seed = 9;
    const PointCloud noisy = add_noise(shape.cloud, noise);
    REQUIRE(noisy.size() == shape.cloud.size());

    int moved = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        if (noisy.positions[i] != shape.cloud.positions[i]) ++moved;
    }
    CHECK(moved == static_cast<int>(std::ceil(kImpulsiveFraction * 997)));
}

TEST_CASE("uniform noise stays within its bound") {
    ShapeSpec spec;
    spec.kind = ShapeKind::plane;
    spec.point_count = 5000;
    const SampledShape shape = sample_shape(spec);
    const double bound = 0.02 * bbox_diagonal(shape.cloud);

    NoiseSpec noise;
    noise.kind = NoiseKind::uniform;
    noise.level = 0.02;
    const PointCloud noisy = add_noise(shape.cloud, noise);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            CHECK(std::abs(noisy.positions[i][a] - shape.cloud.positions[i][a]) <= bound);
        }
    }
}

TEST_CASE("same noise seed reproduces the same cloud") {
    ShapeSpec spec;
    spec.kind = ShapeKind::wedge;
    spec.point_count = 300;
    const SampledShape shape = sample_shape(spec);
    NoiseSpec noise;
    noise.level = 0.015;
    noise.seed = 77;
    const PointCloud a = add_noise(shape.cloud, noise);
    const PointCloud b = add_noise(shape.cloud, noise);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.positions[i] == b.positions[i]);
}

TEST_CASE("build_manifest writes the shapes x levels product") {
    ManifestBuildConfig config;
    config.out_dir = (fs::temp_directory_path() / "pcdn_manifest_test").string();
    config.levels = {0.0, 0.005, 0.01};
    config.seed = 1;
    config.write_meshes = false;
    for (ShapeKind kind : {ShapeKind::cube, ShapeKind::sphere}) {
        ShapeSpec spec;
        spec.kind = kind;
        spec.point_count = 60;
        config.shapes.push_back(spec);
    }
    const DatasetManifest manifest = build_manifest(config);
    CHECK(manifest.entries.size() == 6);

    // round trip reproduces entries exactly
    const DatasetManifest loaded =
        load_manifest((fs::path(config.out_dir) / "manifest.txt").string());
    REQUIRE(loaded.entries.size() == manifest.entries.size());
    CHECK(loaded.patch_size == manifest.patch_size);
    CHECK(loaded.radius_fraction == manifest.radius_fraction);
    CHECK(loaded.patches_per_model == manifest.patches_per_model);
    for (std::size_t i = 0; i < loaded.entries.size(); ++i) {
        CHECK(loaded.entries[i].clean_path == manifest.entries[i].clean_path);
        CHECK(loaded.entries[i].noisy_path == manifest.entries[i].noisy_path);
        CHECK(loaded.entries[i].level == manifest.entries[i].level);
    }

    // every referenced file exists and resolves
    for (const ManifestEntry& e : loaded.entries) {
        CHECK(fs::exists(resolve_manifest_path(config.out_dir, e.clean_path)));
        CHECK(fs::exists(resolve_manifest_path(config.out_dir, e.noisy_path)));
    }
}

TEST_CASE("paper-scale configuration yields 132 models") {
    ManifestBuildConfig config;
    config.out_dir = (fs::temp_directory_path() / "pcdn_manifest_132").string();
    config.levels = {0.0, 0.0025, 0.005, 0.01, 0.015, 0.025};
    config.write_meshes = false;
    const ShapeKind kinds[] = {ShapeKind::plane, ShapeKind::cube, ShapeKind::sphere,
                               ShapeKind::cylinder, ShapeKind::wedge, ShapeKind::torus};
    for (int i = 0; i < 22; ++i) {
        ShapeSpec spec;
        spec.kind = kinds[i % 6];
        spec.point_count = 40;
        spec.seed = static_cast<std::uint64_t>(i);
        config.shapes.push_back(spec);
    }
    const DatasetManifest manifest = build_manifest(config);
    CHECK(manifest.entries.size() == 132);
}

}  // TEST_SUITE
