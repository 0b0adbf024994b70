#include "pcdn/patch.hpp"

#include "pcdn/cloud_io.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace pcdn;

namespace {

Mat3 random_rotation(Rng& rng) {
    const double a = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    return Eigen::AngleAxisd(a, axis).toRotationMatrix();
}

// Anisotropic scatter gives well-separated covariance spectra.
std::vector<Vec3> generic_points(Rng& rng, int n) {
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) {
        pts.emplace_back(rng.uniform(-1.3, 1.3), rng.uniform(-0.9, 0.9), rng.uniform(-0.5, 0.5));
    }
    return pts;
}

RawPatchPair random_raw_patch(Rng& rng, int noisy_count, int clean_count) {
    RawPatchPair raw;
    raw.center = Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    raw.radius = rng.uniform(0.5, 2.0);
    auto inside = [&](double shrink) {
        Vec3 q;
        do {
            q = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        } while (q.norm() >= shrink);
        return Vec3(raw.center + raw.radius * q);
    };
    raw.noisy_points.push_back(raw.center);
    for (int i = 1; i < noisy_count; ++i) raw.noisy_points.push_back(inside(0.95));
    for (int i = 0; i < clean_count; ++i) {
        raw.clean_points.push_back(inside(0.9));
        raw.clean_normals.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()).normalized());
    }
    return raw;
}

}  // namespace

TEST_SUITE("patch") {

TEST_CASE("extract_patch_pair gathers everything within the radius") {
    PointCloud noisy, clean;
    noisy.positions = {{0, 0, 0}};
    clean.positions = {{0, 0, 0}};
    clean.normals = {{0, 0, 1}};
    const NeighborIndex ni(noisy), ci(clean);

    const RawPatchPair raw = extract_patch_pair(noisy, clean, 0, 0.5, ni, ci);
    CHECK(raw.noisy_points.size() == 1);
    CHECK(raw.clean_points.size() == 1);
}

TEST_CASE("extract_patch_pair with no clean point in range is degenerate") {
    PointCloud noisy, clean;
    noisy.positions = {{0, 0, 0}};
    clean.positions = {{10, 0, 0}};
    clean.normals = {{0, 0, 1}};
    const NeighborIndex ni(noisy), ci(clean);
    CHECK_THROWS_AS(extract_patch_pair(noisy, clean, 0, 0.5, ni, ci), DegeneratePatchError);
}

TEST_CASE("extract_patch_pair validates arguments") {
    PointCloud noisy, clean;
    noisy.positions = {{0, 0, 0}};
    clean.positions = {{0, 0, 0}};
    const NeighborIndex ni(noisy), ci(clean);
    CHECK_THROWS_AS(extract_patch_pair(noisy, clean, 0, 0.5, ni, ci), ArgumentError);
    clean.normals = {{0, 0, 1}};
    CHECK_THROWS_AS(extract_patch_pair(noisy, clean, 5, 0.5, ni, ci), ArgumentError);
    CHECK_THROWS_AS(extract_patch_pair(noisy, clean, 0, -1.0, ni, ci), ArgumentError);
}

TEST_CASE("patch membership matches the brute-force radius test") {
    Rng rng(17);
    PointCloud noisy, clean;
    for (int i = 0; i < 300; ++i) {
        noisy.positions.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        clean.positions.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        clean.normals.emplace_back(0, 0, 1);
    }
    const NeighborIndex ni(noisy), ci(clean);
    for (int center : {0, 57, 123, 299}) {
        const double r = 0.4;
        const RawPatchPair raw = extract_patch_pair(noisy, clean, center, r, ni, ci);
        const auto want_noisy = oracle::radius_scan(noisy.positions, noisy.positions[static_cast<std::size_t>(center)], r);
        REQUIRE(raw.noisy_points.size() == want_noisy.size());
        for (std::size_t k = 0; k < want_noisy.size(); ++k) {
            CHECK(raw.noisy_points[k] ==
                  noisy.positions[static_cast<std::size_t>(want_noisy[k])]);
        }
        const auto want_clean = oracle::radius_scan(clean.positions, noisy.positions[static_cast<std::size_t>(center)], r);
        CHECK(raw.clean_points.size() == want_clean.size());
    }
}

TEST_CASE("pca_rotation maps the flattest direction to the z-axis") {
    Rng rng(23);
    std::vector<Vec3> pts;
    for (int i = 0; i < 200; ++i) {
        pts.emplace_back(rng.uniform(-1, 1), rng.uniform(-0.7, 0.7), 0.0);
    }
    const PcaResult pca = pca_rotation(pts);
    REQUIRE_FALSE(pca.degenerate);
    for (const Vec3& p : pts) {
        CHECK(std::abs((pca.rotation * p).z()) < 1e-9);
    }
}

TEST_CASE("already-aligned anisotropic sets rotate by identity up to the sign rule") {
    Rng rng(29);
    std::vector<Vec3> pts;
    for (int i = 0; i < 4000; ++i) {
        // variance order: y > x > z, the aligned configuration
        pts.emplace_back(0.5 * rng.normal(), 1.0 * rng.normal(), 0.1 * rng.normal());
    }
    const PcaResult pca = pca_rotation(pts);
    REQUIRE_FALSE(pca.degenerate);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (r == c) CHECK(std::abs(pca.rotation(r, c)) > 0.99);
            else CHECK(std::abs(pca.rotation(r, c)) < 0.12);
        }
    }
}

TEST_CASE("pca_rotation is proper orthonormal") {
    Rng rng(31);
    for (int t = 0; t < 20; ++t) {
        const std::vector<Vec3> pts = generic_points(rng, 50);
        const PcaResult pca = pca_rotation(pts);
        REQUIRE_FALSE(pca.degenerate);
        CHECK((pca.rotation * pca.rotation.transpose() - Mat3::Identity()).norm() < 1e-9);
        CHECK(pca.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("pca_rotation flags rank-deficient inputs") {
    CHECK(pca_rotation(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}).degenerate);
    // collinear points: two zero eigenvalues tie
    std::vector<Vec3> line;
    for (int i = 0; i < 10; ++i) line.emplace_back(0.1 * i, 0.2 * i, 0.3 * i);
    const PcaResult pca = pca_rotation(line);
    CHECK(pca.degenerate);
    CHECK(pca.rotation == Mat3::Identity());
}

TEST_CASE("canonical frames agree for rotated copies of the same points") {
    Rng rng(37);
    for (int t = 0; t < 100; ++t) {
        const std::vector<Vec3> pts = generic_points(rng, 40);
        const Mat3 q = random_rotation(rng);
        std::vector<Vec3> rotated(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) rotated[i] = q * pts[i];

        const PcaResult base = pca_rotation(pts);
        const PcaResult moved = pca_rotation(rotated);
        REQUIRE_FALSE(base.degenerate);
        REQUIRE_FALSE(moved.degenerate);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK((moved.rotation * rotated[i] - base.rotation * pts[i]).norm() < 1e-6);
        }
    }
}

TEST_CASE("canonicalize places the center at the origin and pads short patches") {
    Rng rng(41);
    RawPatchPair raw;
    raw.center = Vec3(1, 2, 3);
    raw.radius = 2.0;
    raw.noisy_points = {raw.center, raw.center + Vec3(0.5, 0, 0), raw.center + Vec3(0, 0.5, 0)};
    raw.clean_points = {raw.center + Vec3(0.1, 0.1, 0)};
    raw.clean_normals = {Vec3(0, 0, 1)};

    const CanonicalPatchPair patch = canonicalize(raw, 5, rng);
    CHECK(patch.pad_count == 2);
    REQUIRE(patch.noisy_points.size() == 5);
    CHECK(patch.noisy_points[3] == Vec3::Zero());
    CHECK(patch.noisy_points[4] == Vec3::Zero());
    // the center itself becomes the origin
    CHECK(patch.noisy_points[0].norm() < 1e-15);
    for (std::size_t i = 0; i < 3; ++i) CHECK(patch.noisy_points[i].norm() < 1.0);
}

TEST_CASE("canonicalize downsamples to a subset when oversized") {
    Rng rng(43);
    const int n = 16;
    RawPatchPair raw = random_raw_patch(rng, 2 * n, 8);
    const CanonicalPatchPair patch = canonicalize(raw, n, rng);
    CHECK(patch.pad_count == 0);
    REQUIRE(patch.noisy_points.size() == static_cast<std::size_t>(n));

    // every output point is one of the canonicalized inputs
    for (const Vec3& q : patch.noisy_points) {
        bool found = false;
        for (const Vec3& p : raw.noisy_points) {
            const Vec3 expect = patch.rotation * ((p - raw.center) / raw.radius);
            if ((expect - q).norm() < 1e-12) found = true;
        }
        CHECK(found);
        CHECK(q.norm() < 1.0);
    }
}

TEST_CASE("clean patches are downsampled but never padded") {
    Rng rng(47);
    RawPatchPair raw = random_raw_patch(rng, 10, 30);
    const CanonicalPatchPair patch = canonicalize(raw, 16, rng);
    CHECK(patch.clean_points.size() == 16);
    CHECK(patch.clean_normals.size() == 16);

    RawPatchPair small = random_raw_patch(rng, 10, 4);
    const CanonicalPatchPair patch2 = canonicalize(small, 16, rng);
    CHECK(patch2.clean_points.size() == 4);
}

TEST_CASE("resampling is deterministic for a fixed stream") {
    Rng rng_a(53), rng_b(53);
    RawPatchPair raw = random_raw_patch(rng_a, 64, 40);
    Rng s1 = rng_a.stream(9), s2 = rng_b.stream(9);
    Rng fill(1);
    raw = random_raw_patch(fill, 64, 40);
    const CanonicalPatchPair p1 = canonicalize(raw, 16, s1);
    const CanonicalPatchPair p2 = canonicalize(raw, 16, s2);
    REQUIRE(p1.noisy_points.size() == p2.noisy_points.size());
    for (std::size_t i = 0; i < p1.noisy_points.size(); ++i) {
        CHECK(p1.noisy_points[i] == p2.noisy_points[i]);
    }
}

TEST_CASE("canonicalize is equivariant under rigid motion") {
    Rng rng(59);
    for (int t = 0; t < 100; ++t) {
        RawPatchPair raw = random_raw_patch(rng, 48, 24);
        const Mat3 q = random_rotation(rng);
        const Vec3 shift(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));

        RawPatchPair moved;
        moved.center = q * raw.center + shift;
        moved.radius = raw.radius;
        for (const Vec3& p : raw.noisy_points) moved.noisy_points.push_back(q * p + shift);
        for (const Vec3& p : raw.clean_points) moved.clean_points.push_back(q * p + shift);
        for (const Vec3& n : raw.clean_normals) moved.clean_normals.push_back(q * n);

        Rng s1 = Rng(1000 + static_cast<std::uint64_t>(t));
        Rng s2 = Rng(1000 + static_cast<std::uint64_t>(t));
        const CanonicalPatchPair base = canonicalize(raw, 32, s1);
        const CanonicalPatchPair rotated = canonicalize(moved, 32, s2);
        REQUIRE_FALSE(base.degenerate_alignment);
        REQUIRE_FALSE(rotated.degenerate_alignment);

        for (std::size_t i = 0; i < base.noisy_points.size(); ++i) {
            CHECK((base.noisy_points[i] - rotated.noisy_points[i]).norm() < 1e-6);
        }
        for (std::size_t i = 0; i < base.clean_points.size(); ++i) {
            CHECK((base.clean_points[i] - rotated.clean_points[i]).norm() < 1e-6);
            CHECK((base.clean_normals[i] - rotated.clean_normals[i]).norm() < 1e-6);
        }
    }
}

TEST_CASE("decanonicalize_displacement analytic cases") {
    Rng rng(61);
    RawPatchPair raw = random_raw_patch(rng, 12, 6);
    CanonicalPatchPair patch = canonicalize(raw, 12, rng);

    CHECK(decanonicalize_displacement(Vec3::Zero(), patch) == Vec3::Zero());

    patch.rotation = Mat3::Identity();
    patch.radius = 2.0;
    CHECK((decanonicalize_displacement(Vec3(0.5, 0, 0), patch) - Vec3(1, 0, 0)).norm() < 1e-15);

    for (int t = 0; t < 20; ++t) {
        patch.rotation = random_rotation(rng);
        patch.radius = rng.uniform(0.1, 4.0);
        const Vec3 d(rng.normal(), rng.normal(), rng.normal());
        CHECK(std::abs(decanonicalize_displacement(d, patch).norm() - patch.radius * d.norm()) <
              1e-9);
    }
}

TEST_CASE("canonical clean points map back to their world positions") {
    Rng rng(67);
    for (int t = 0; t < 20; ++t) {
        RawPatchPair raw = random_raw_patch(rng, 20, 10);
        Rng stream(static_cast<std::uint64_t>(t));
        const CanonicalPatchPair patch = canonicalize(raw, 32, stream);
        // patch_size >= clean count, so clean points keep their order
        REQUIRE(patch.clean_points.size() == raw.clean_points.size());
        for (std::size_t i = 0; i < patch.clean_points.size(); ++i) {
            const Vec3 world =
                decanonicalize_displacement(patch.clean_points[i], patch) + patch.center;
            CHECK((world - raw.clean_points[i]).norm() < 1e-9);
        }
    }
}

}  // TEST_SUITE
