#include "pcdn/kdtree.hpp"

#include <algorithm>
#include <queue>

namespace pcdn {

namespace {
constexpr int kLeafSize = 12;

double box_min_sq_dist(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        double d = 0.0;
        if (q[a] < lo[a]) d = lo[a] - q[a];
        else if (q[a] > hi[a]) d = q[a] - hi[a];
        d2 += d * d;
    }
    return d2;
}
}  // namespace

NeighborIndex::NeighborIndex(const PointCloud& cloud) : NeighborIndex(cloud.positions) {}

NeighborIndex::NeighborIndex(const std::vector<Vec3>& points) : points_(points) {
    if (points_.empty()) throw EmptyInputError("cannot index an empty cloud");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) order_[i] = static_cast<int>(i);
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(points_.size()));
}

int NeighborIndex::build(int begin, int end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.box_min = points_[static_cast<std::size_t>(order_[begin])];
    node.box_max = node.box_min;
    for (int i = begin + 1; i < end; ++i) {
        const Vec3& p = points_[static_cast<std::size_t>(order_[i])];
        node.box_min = node.box_min.cwiseMin(p);
        node.box_max = node.box_max.cwiseMax(p);
    }

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    if (end - begin > kLeafSize) {
        int axis = 0;
        const Vec3 extent = node.box_max - node.box_min;
        if (extent[1] > extent[axis]) axis = 1;
        if (extent[2] > extent[axis]) axis = 2;
        if (extent[axis] > 0.0) {
            const int mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](int a, int b) {
                                 const double pa = points_[static_cast<std::size_t>(a)][axis];
                                 const double pb = points_[static_cast<std::size_t>(b)][axis];
                                 return pa < pb || (pa == pb && a < b);
                             });
            const double split = points_[static_cast<std::size_t>(order_[mid])][axis];
            const int left = build(begin, mid);
            const int right = build(mid, end);
            nodes_[static_cast<std::size_t>(node_id)].axis = axis;
            nodes_[static_cast<std::size_t>(node_id)].split = split;
            nodes_[static_cast<std::size_t>(node_id)].left = left;
            nodes_[static_cast<std::size_t>(node_id)].right = right;
        }
        // zero extent: all points coincide, keep as leaf
    }
    return node_id;
}

void NeighborIndex::collect_radius(int node_id, const Vec3& center, double r2,
                                   std::vector<int>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (box_min_sq_dist(center, node.box_min, node.box_max) >= r2) return;
    if (node.left < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[static_cast<std::size_t>(i)];
            if ((points_[static_cast<std::size_t>(idx)] - center).squaredNorm() < r2) {
                out.push_back(idx);
            }
        }
        return;
    }
    collect_radius(node.left, center, r2, out);
    collect_radius(node.right, center, r2, out);
}

std::vector<int> NeighborIndex::radius_neighbors(const Vec3& center, double r) const {
    if (!(r > 0.0)) throw ArgumentError("radius must be positive");
    std::vector<int> out;
    collect_radius(root_, center, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> NeighborIndex::k_nearest(const Vec3& query, int k) const {
    if (k < 1 || k > size()) throw ArgumentError("k out of range");

    // Max-heap of the current best k, worst candidate on top.
    // Ties in distance break toward the lower index.
    using Entry = std::pair<double, int>;
    auto worse = [](const Entry& a, const Entry& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);

    // Iterative traversal, nearer child first.
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int node_id = stack.back();
        stack.pop_back();
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        if (static_cast<int>(heap.size()) == k &&
            box_min_sq_dist(query, node.box_min, node.box_max) > heap.top().first) {
            continue;
        }
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[static_cast<std::size_t>(i)];
                const double d2 = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
                const Entry candidate{d2, idx};
                if (static_cast<int>(heap.size()) < k) {
                    heap.push(candidate);
                } else if (worse(candidate, heap.top())) {
                    heap.pop();
                    heap.push(candidate);
                }
            }
            continue;
        }
        if (query[node.axis] < node.split) {
            stack.push_back(node.right);
            stack.push_back(node.left);
        } else {
            stack.push_back(node.left);
            stack.push_back(node.right);
        }
    }

    std::vector<Entry> entries;
    entries.reserve(heap.size());
    while (!heap.empty()) {
        entries.push_back(heap.top());
        heap.pop();
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    });
    std::vector<int> out;
    out.reserve(entries.size());
    for (const Entry& e : entries) out.push_back(e.second);
    return out;
}

}  // namespace pcdn
