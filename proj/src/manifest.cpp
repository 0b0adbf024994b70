#include "pcdn/manifest.hpp"

#include "pcdn/cloud_io.hpp"
#include "pcdn/rng.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pcdn {

namespace fs = std::filesystem;

namespace {
std::string format_level(double level) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", level);
    return buf;
}

std::string format_level_short(double level) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", level);
    return buf;
}
}  // namespace

DatasetManifest build_manifest(const ManifestBuildConfig& config) {
    if (config.shapes.empty()) throw ArgumentError("no shapes given");
    if (config.levels.empty()) throw ArgumentError("no noise levels given");
    for (double level : config.levels) {
        if (level < 0.0) throw ArgumentError("noise level must be >= 0");
    }
    if (config.patches_per_model < 1) throw ArgumentError("patches_per_model must be >= 1");
    if (config.patch_size < 1) throw ArgumentError("patch_size must be >= 1");
    if (!(config.radius_fraction > 0.0)) throw ArgumentError("radius_fraction must be positive");

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (!fs::is_directory(config.out_dir)) {
        throw IoError("cannot create output directory '" + config.out_dir + "'");
    }

    DatasetManifest manifest;
    manifest.patches_per_model = config.patches_per_model;
    manifest.patch_size = config.patch_size;
    manifest.radius_fraction = config.radius_fraction;

    std::uint64_t entry_index = 0;
    for (std::size_t s = 0; s < config.shapes.size(); ++s) {
        ShapeSpec shape = config.shapes[s];
        shape.seed = mix_seed(config.seed, 1000 + s);
        const SampledShape sampled = sample_shape(shape);

        const std::string stem = to_string(shape.kind) + std::to_string(s);
        const std::string clean_name = stem + "_clean.xyz";
        save_cloud(sampled.cloud, (fs::path(config.out_dir) / clean_name).string());
        if (config.write_meshes) {
            save_mesh_off(sampled.mesh, (fs::path(config.out_dir) / (stem + ".off")).string());
        }

        for (double level : config.levels) {
            NoiseSpec noise;
            noise.kind = config.noise;
            noise.level = level;
            noise.seed = mix_seed(config.seed, 2000 + entry_index);
            const PointCloud noisy = add_noise(sampled.cloud, noise);

            std::ostringstream name;
            name << stem << "_" << to_string(config.noise) << "_" << format_level_short(level)
                 << ".xyz";
            save_cloud(noisy, (fs::path(config.out_dir) / name.str()).string());
            manifest.entries.push_back({clean_name, name.str(), level});
            ++entry_index;
        }
    }

    save_manifest(manifest, (fs::path(config.out_dir) / "manifest.txt").string());
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "patch_size=" << manifest.patch_size
        << " radius_fraction=" << format_level(manifest.radius_fraction)
        << " patches_per_model=" << manifest.patches_per_model << "\n";
    for (const ManifestEntry& e : manifest.entries) {
        out << e.clean_path << ' ' << e.noisy_path << ' ' << format_level(e.level) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    DatasetManifest manifest;
    std::string line;
    int line_number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        if (!have_header) {
            std::string token;
            while (row >> token) {
                const auto eq = token.find('=');
                if (eq == std::string::npos) {
                    throw ParseError(path + ":" + std::to_string(line_number) +
                                     ": expected key=value header");
                }
                const std::string key = token.substr(0, eq);
                const std::string value = token.substr(eq + 1);
                try {
                    if (key == "patch_size") manifest.patch_size = std::stoi(value);
                    else if (key == "radius_fraction") manifest.radius_fraction = std::stod(value);
                    else if (key == "patches_per_model") manifest.patches_per_model = std::stoi(value);
                    else throw ParseError(path + ": unknown header key '" + key + "'");
                } catch (const std::invalid_argument&) {
                    throw ParseError(path + ":" + std::to_string(line_number) +
                                     ": bad header value '" + value + "'");
                }
            }
            have_header = true;
            continue;
        }
        ManifestEntry entry;
        if (!(row >> entry.clean_path >> entry.noisy_path >> entry.level)) {
            throw ParseError(path + ":" + std::to_string(line_number) + ": bad manifest entry");
        }
        manifest.entries.push_back(entry);
    }
    if (!have_header) throw ParseError(path + ": missing manifest header");
    return manifest;
}

std::string resolve_manifest_path(const std::string& manifest_dir, const std::string& entry_path) {
    const fs::path p(entry_path);
    if (p.is_absolute() || manifest_dir.empty()) return entry_path;
    return (fs::path(manifest_dir) / p).string();
}

}  // namespace pcdn
