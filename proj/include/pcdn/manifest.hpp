// Dataset manifest: the clean/noisy file pairs a training run consumes.
// Format: one header line `patch_size=<N> radius_fraction=<f>
// patches_per_model=<k>`, then one entry per line
// `<clean path> <noisy path> <level>`. '#' lines ignored.

#pragma once

#include "pcdn/noise.hpp"
#include "pcdn/shapes.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcdn {

struct ManifestEntry {
    std::string clean_path;
    std::string noisy_path;
    double level = 0.0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    int patches_per_model = 8000;
    int patch_size = 500;
    double radius_fraction = 0.05;
};

struct ManifestBuildConfig {
    std::vector<ShapeSpec> shapes;
    std::vector<double> levels;
    NoiseKind noise = NoiseKind::gaussian;
    std::string out_dir;
    int patches_per_model = 8000;
    int patch_size = 500;
    double radius_fraction = 0.05;
    std::uint64_t seed = 0;
    bool write_meshes = true;
};

/// Writes one clean cloud (and mesh) per shape, one noisy cloud per
/// shape x level, and the manifest file `manifest.txt` in out_dir.
/// Entry paths are stored relative to the manifest location.
DatasetManifest build_manifest(const ManifestBuildConfig& config);

DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

/// Entry paths are relative to the manifest's directory unless absolute.
std::string resolve_manifest_path(const std::string& manifest_dir, const std::string& entry_path);

}  // namespace pcdn
