#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "infodyn/point_cloud.hpp"

namespace infodyn {

struct Neighbour {
    double distance = 0.0;
    std::size_t index = 0;
};

/// Max-norm (Chebyshev) spatial index over a PointCloud.
///
/// A kd-tree with bucketed leaves; one-dimensional clouds use a sorted axis with
/// binary search instead, and clouds below `brute_force_below` points are scanned
/// exhaustively. Read-only after construction, so concurrent queries are safe.
class KdTree {
public:
    static constexpr std::size_t brute_force_below = 64;

    explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 16);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] std::size_t dims() const { return d_; }

    /// The K nearest neighbours of stored point `query_index`, excluding that point,
    /// ordered by (distance, index). Equal distances are broken toward the lower index.
    void knn(std::size_t query_index, int K, std::vector<Neighbour>& out) const;

    /// Distance to the K-th nearest neighbour of stored point `query_index` (self excluded).
    [[nodiscard]] double kth_distance(std::size_t query_index, int K) const;

    /// Number of stored points within `radius` of stored point `query_index`, the point itself
    /// excluded. strict: distance < radius; otherwise distance <= radius.
    [[nodiscard]] std::size_t count_within(std::size_t query_index, double radius, bool strict) const;

    /// Number of stored points within `radius` of an arbitrary location.
    [[nodiscard]] std::size_t count_around(std::span<const double> query, double radius, bool strict) const;

    /// kth_distance for every stored point, indexed by original index.
    [[nodiscard]] std::vector<double> all_kth_distances(int K) const;

    /// count_within(i, radii[i], strict) for every stored point i.
    [[nodiscard]] std::vector<std::size_t> all_counts_within(std::span<const double> radii, bool strict) const;

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        int left = -1;
        int right = -1;
        int parent = -1;
    };

    int build(std::size_t begin, std::size_t end);
    void knn_node(int node, const double* q, std::size_t exclude, int K, std::vector<Neighbour>& best) const;
    std::size_t count_node(int node, const double* q, double radius, bool strict) const;
    void knn_sorted_axis(std::size_t query_index, int K, std::vector<Neighbour>& out) const;
    void knn_brute(std::size_t query_index, int K, std::vector<Neighbour>& out) const;
    template <std::size_t D>
    friend struct TreeKernels;

    [[nodiscard]] const double* point(std::size_t pos) const { return points_.data() + pos * d_; }
    [[nodiscard]] const double* lo(int node) const { return box_lo_.data() + static_cast<std::size_t>(node) * d_; }
    [[nodiscard]] const double* hi(int node) const { return box_hi_.data() + static_cast<std::size_t>(node) * d_; }

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::size_t leaf_size_ = 16;
    std::vector<double> points_;           // tree order, row-major
    std::vector<std::size_t> order_;       // tree position -> original index
    std::vector<std::size_t> position_;    // original index -> tree position
    std::vector<Node> nodes_;
    std::vector<int> leaves_;  // leaf node ids in position order
    std::vector<double> box_lo_;
    std::vector<double> box_hi_;
    enum class Mode { Brute, SortedAxis, Tree } mode_ = Mode::Brute;
};

/// Distance from point `query_index` to its K-th nearest neighbour under the max-norm.
/// Throws std::invalid_argument when K >= n or K < 1.
[[nodiscard]] double knn_radius(const PointCloud& cloud, std::size_t query_index, int K);

/// Number of other points within max-norm distance `eps` of point `query_index`.
[[nodiscard]] std::size_t count_within(const PointCloud& cloud, std::size_t query_index, double eps, bool strict);

/// One coordinate of a cloud in ascending order, for exact interval queries in rank space.
class SortedColumn {
public:
    explicit SortedColumn(const PointCloud& cloud, std::size_t dim);

    [[nodiscard]] std::size_t size() const { return values_.size(); }

    /// Per point i, the half-open range [lo[i], hi[i]) of sorted positions whose values lie within
    /// radii[i] of point i's value (strictly or not). Includes the point itself when radii[i] > 0.
    void intervals(std::span<const double> radii, bool strict, std::vector<std::uint32_t>& lo,
                   std::vector<std::uint32_t>& hi) const;

    [[nodiscard]] std::uint32_t rank(std::size_t i) const { return rank_[i]; }
    [[nodiscard]] std::uint32_t index_at(std::size_t pos) const { return index_[pos]; }

private:
    std::vector<double> values_;
    std::vector<std::uint32_t> rank_;
    std::vector<std::uint32_t> index_;
};

struct ColumnIntervals {
    const SortedColumn* column = nullptr;
    std::vector<std::uint32_t> lo;
    std::vector<std::uint32_t> hi;
};

/// Neighbour counts (self excluded) in the product of one or two columns, from their intervals:
/// the number of j != i lying inside both intervals of i.
[[nodiscard]] std::vector<std::size_t> rank_space_counts(const ColumnIntervals& a, const ColumnIntervals* b);

/// For every point i, the number of other points within max-norm distance radii[i].
/// One- and two-dimensional clouds are counted exactly in rank space (sorted axes plus an
/// offline Fenwick sweep); higher dimensions use a KdTree.
[[nodiscard]] std::vector<std::size_t> count_all_within(const PointCloud& cloud, std::span<const double> radii,
                                                        bool strict);

}  // namespace infodyn
