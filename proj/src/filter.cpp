#include "pcdn/filter.hpp"

#include "pcdn/cloud_io.hpp"
#include "pcdn/patch.hpp"

#include <algorithm>
#include <thread>

namespace pcdn {

Vec3 filter_point(const NetworkParams& params, const PointCloud& noisy,
                  const NeighborIndex& index, int i, double r, int patch_size,
                  Rng rng, FilterSummary* summary) {
    const Vec3 center = noisy.positions[static_cast<std::size_t>(i)];
    const std::vector<int> neighbor_ids = index.radius_neighbors(center, r);
    if (neighbor_ids.size() < 2) {
        // Only the point itself: nothing to infer from.
        if (summary) ++summary->isolated_points;
        return center;
    }

    const double inv_r = 1.0 / r;
    std::vector<Vec3> canonical(neighbor_ids.size());
    for (std::size_t k = 0; k < neighbor_ids.size(); ++k) {
        canonical[k] =
            (noisy.positions[static_cast<std::size_t>(neighbor_ids[k])] - center) * inv_r;
    }

    const PcaResult pca = pca_rotation(canonical);
    if (pca.degenerate && summary) ++summary->identity_alignments;
    for (Vec3& q : canonical) q = pca.rotation * q;

    const int m = static_cast<int>(canonical.size());
    std::vector<Vec3> patch;
    patch.reserve(static_cast<std::size_t>(patch_size));
    if (m > patch_size) {
        std::vector<std::uint32_t> keep = rng.sample_without_replacement(
            static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(patch_size));
        std::sort(keep.begin(), keep.end());
        for (std::uint32_t k : keep) patch.push_back(canonical[k]);
    } else {
        patch = std::move(canonical);
        patch.resize(static_cast<std::size_t>(patch_size), Vec3::Zero());
    }

    const Vec3 displacement = forward_point_infer(params, patch);
    return center + r * (pca.rotation.transpose() * displacement);
}

PointCloud filter_cloud(const NetworkParams& params, const PointCloud& noisy,
                        const FilterConfig& config, FilterSummary* summary) {
    if (noisy.empty()) throw EmptyInputError("filter_cloud on empty cloud");
    if (config.iterations < 1) throw ArgumentError("iterations must be >= 1");
    if (config.patch_size < 1) throw ArgumentError("patch_size must be >= 1");
    if (!(config.radius_fraction > 0.0)) throw ArgumentError("radius_fraction must be positive");
    validate_cloud(noisy);

    // The receptive field stays fixed: radius from the original input extent.
    const double r = config.radius_fraction * bbox_diagonal(noisy);
    const Rng base(config.seed);
    const int thread_count = std::max(1, config.threads);

    PointCloud current;
    current.positions = noisy.positions;
    const int n = static_cast<int>(current.positions.size());

    for (int iter = 0; iter < config.iterations; ++iter) {
        const NeighborIndex index(current);
        const Rng iter_rng = base.stream(static_cast<std::uint64_t>(iter));
        std::vector<Vec3> next(static_cast<std::size_t>(n));
        std::vector<FilterSummary> partials(static_cast<std::size_t>(thread_count));

        auto worker = [&](int tid, int begin, int end) {
            for (int i = begin; i < end; ++i) {
                next[static_cast<std::size_t>(i)] =
                    filter_point(params, current, index, i, r, config.patch_size,
                                 iter_rng.stream(static_cast<std::uint64_t>(i)),
                                 &partials[static_cast<std::size_t>(tid)]);
            }
        };

        if (thread_count == 1) {
            worker(0, 0, n);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (n + thread_count - 1) / thread_count;
            for (int t = 0; t < thread_count; ++t) {
                const int begin = t * chunk;
                const int end = std::min(n, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(worker, t, begin, end);
            }
            for (std::thread& t : pool) t.join();
        }

        current.positions = std::move(next);
        if (summary) {
            for (const FilterSummary& p : partials) {
                summary->isolated_points += p.isolated_points;
                summary->identity_alignments += p.identity_alignments;
            }
        }
    }
    return current;
}

}  // namespace pcdn
