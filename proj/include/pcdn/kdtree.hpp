// Immutable kd-tree over one cloud's positions. Safe for concurrent
// read-only queries.

#pragma once

#include "pcdn/types.hpp"

#include <vector>

namespace pcdn {

class NeighborIndex {
public:
    /// Copies the positions; the index does not reference the source cloud.
    explicit NeighborIndex(const PointCloud& cloud);
    explicit NeighborIndex(const std::vector<Vec3>& points);

    /// Indices i with ||p_i - center|| strictly less than r, ascending order.
    std::vector<int> radius_neighbors(const Vec3& center, double r) const;

    /// The k closest indices, sorted by distance then index.
    std::vector<int> k_nearest(const Vec3& query, int k) const;

    int size() const { return static_cast<int>(points_.size()); }
    const Vec3& point(int i) const { return points_[static_cast<std::size_t>(i)]; }

private:
    struct Node {
        Vec3 box_min, box_max;
        int begin = 0, end = 0;   // leaf range into order_
        int left = -1, right = -1;
        int axis = 0;
        double split = 0.0;
    };

    int build(int begin, int end);
    void collect_radius(int node, const Vec3& center, double r2, std::vector<int>& out) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace pcdn
