#include "infodyn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <type_traits>

namespace infodyn {

namespace {

inline bool closer(const Neighbour& a, const Neighbour& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

// Keeps `best` sorted by (distance, index) with at most K entries.
inline void offer(std::vector<Neighbour>& best, int K, double d, std::size_t idx) {
    const Neighbour cand{d, idx};
    if (static_cast<int>(best.size()) == K) {
        if (!closer(cand, best.back())) return;
        best.pop_back();
    }
    auto it = std::upper_bound(best.begin(), best.end(), cand, closer);
    best.insert(it, cand);
}

inline double max_norm(const double* a, const double* b, std::size_t d) {
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) m = std::max(m, std::fabs(a[j] - b[j]));
    return m;
}

inline bool within(double dist, double radius, bool strict) { return strict ? dist < radius : dist <= radius; }

}  // namespace

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size)
    : n_(cloud.size()), d_(cloud.dims()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (n_ == 0 || d_ == 0) throw std::invalid_argument("KdTree: empty point cloud");
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    const auto src = cloud.data();
    if (n_ < brute_force_below) {
        mode_ = Mode::Brute;
    } else if (d_ == 1) {
        mode_ = Mode::SortedAxis;
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return src[a] < src[b]; });
    } else {
        mode_ = Mode::Tree;
        // The build permutes order_ using the source coordinates, then copies into tree order.
        points_.assign(src.begin(), src.end());
        nodes_.reserve(2 * n_ / leaf_size_ + 2);
        build(0, n_);
    }
    std::vector<double> ordered(n_ * d_);
    for (std::size_t pos = 0; pos < n_; ++pos) {
        std::copy_n(src.data() + order_[pos] * d_, d_, ordered.data() + pos * d_);
    }
    points_ = std::move(ordered);
    position_.resize(n_);
    for (std::size_t pos = 0; pos < n_; ++pos) position_[order_[pos]] = pos;
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end, -1, -1, -1});
    box_lo_.resize(nodes_.size() * d_);
    box_hi_.resize(nodes_.size() * d_);
    // points_ still holds the caller's layout here, indexed by original index.
    double* lo_ptr = box_lo_.data() + static_cast<std::size_t>(id) * d_;
    double* hi_ptr = box_hi_.data() + static_cast<std::size_t>(id) * d_;
    for (std::size_t j = 0; j < d_; ++j) {
        lo_ptr[j] = points_[order_[begin] * d_ + j];
        hi_ptr[j] = lo_ptr[j];
    }
    for (std::size_t pos = begin + 1; pos < end; ++pos) {
        const double* p = points_.data() + order_[pos] * d_;
        for (std::size_t j = 0; j < d_; ++j) {
            lo_ptr[j] = std::min(lo_ptr[j], p[j]);
            hi_ptr[j] = std::max(hi_ptr[j], p[j]);
        }
    }
    if (end - begin <= leaf_size_) {
        leaves_.push_back(id);
        return id;
    }
    std::size_t split_dim = 0;
    double widest = -1.0;
    for (std::size_t j = 0; j < d_; ++j) {
        const double w = hi_ptr[j] - lo_ptr[j];
        if (w > widest) {
            widest = w;
            split_dim = j;
        }
    }
    if (!(widest > 0.0)) {  // all points identical: keep as one leaf
        leaves_.push_back(id);
        return id;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         return points_[a * d_ + split_dim] < points_[b * d_ + split_dim];
                     });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    nodes_[static_cast<std::size_t>(left)].parent = id;
    nodes_[static_cast<std::size_t>(right)].parent = id;
    return id;
}

void KdTree::knn_node(int node, const double* q, std::size_t exclude, int K, std::vector<Neighbour>& best) const {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    if (nd.left < 0) {
        for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
            const std::size_t idx = order_[pos];
            if (idx == exclude) continue;
            const double* p = point(pos);
            const bool full = static_cast<int>(best.size()) == K;
            const double bound = full ? best.back().distance : INFINITY;
            double dist = 0.0;
            bool pruned = false;
            for (std::size_t j = 0; j < d_; ++j) {
                dist = std::max(dist, std::fabs(p[j] - q[j]));
                if (dist > bound) {
                    pruned = true;
                    break;
                }
            }
            if (!pruned) offer(best, K, dist, idx);
        }
        return;
    }
    auto gap = [&](int child) {
        const double* l = lo(child);
        const double* h = hi(child);
        double g = 0.0;
        for (std::size_t j = 0; j < d_; ++j) g = std::max(g, std::max(l[j] - q[j], q[j] - h[j]));
        return g;
    };
    const double gl = gap(nd.left);
    const double gr = gap(nd.right);
    const int first = gl <= gr ? nd.left : nd.right;
    const int second = gl <= gr ? nd.right : nd.left;
    const double g2 = gl <= gr ? gr : gl;
    knn_node(first, q, exclude, K, best);
    if (static_cast<int>(best.size()) < K || g2 <= best.back().distance) knn_node(second, q, exclude, K, best);
}

void KdTree::knn_sorted_axis(std::size_t query_index, int K, std::vector<Neighbour>& out) const {
    const std::size_t pos = position_[query_index];
    const double q = points_[pos];
    std::size_t left = pos;   // next candidate on the left is left - 1
    std::size_t right = pos + 1;
    double kth = 0.0;
    int taken = 0;
    while (taken < K) {
        const bool has_l = left > 0;
        const bool has_r = right < n_;
        const double dl = has_l ? q - points_[left - 1] : INFINITY;
        const double dr = has_r ? points_[right] - q : INFINITY;
        if (dl <= dr) {
            kth = dl;
            --left;
        } else {
            kth = dr;
            ++right;
        }
        ++taken;
    }
    // Widen to every point tied with the K-th distance, then order by (distance, index).
    while (left > 0 && q - points_[left - 1] <= kth) --left;
    while (right < n_ && points_[right] - q <= kth) ++right;
    out.clear();
    for (std::size_t p = left; p < right; ++p) {
        if (p == pos) continue;
        out.push_back(Neighbour{std::fabs(points_[p] - q), order_[p]});
    }
    std::sort(out.begin(), out.end(), closer);
    out.resize(static_cast<std::size_t>(K));
}

void KdTree::knn_brute(std::size_t query_index, int K, std::vector<Neighbour>& out) const {
    const double* q = point(position_[query_index]);
    out.clear();
    for (std::size_t pos = 0; pos < n_; ++pos) {
        const std::size_t idx = order_[pos];
        if (idx == query_index) continue;
        offer(out, K, max_norm(q, point(pos), d_), idx);
    }
}

void KdTree::knn(std::size_t query_index, int K, std::vector<Neighbour>& out) const {
    if (K < 1 || static_cast<std::size_t>(K) >= n_) throw std::invalid_argument("knn: need 1 <= K < n");
    if (query_index >= n_) throw std::out_of_range("knn: query index out of range");
    switch (mode_) {
        case Mode::Brute:
            knn_brute(query_index, K, out);
            return;
        case Mode::SortedAxis:
            knn_sorted_axis(query_index, K, out);
            return;
        case Mode::Tree:
            out.clear();
            out.reserve(static_cast<std::size_t>(K) + 1);
            knn_node(0, point(position_[query_index]), query_index, K, out);
            return;
    }
}

double KdTree::kth_distance(std::size_t query_index, int K) const {
    thread_local std::vector<Neighbour> scratch;
    knn(query_index, K, scratch);
    return scratch.back().distance;
}

std::size_t KdTree::count_node(int node, const double* q, double radius, bool strict) const {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    const double* l = lo(node);
    const double* h = hi(node);
    double gap = 0.0;
    double far = 0.0;
    for (std::size_t j = 0; j < d_; ++j) {
        gap = std::max(gap, std::max(l[j] - q[j], q[j] - h[j]));
        far = std::max(far, std::max(q[j] - l[j], h[j] - q[j]));
    }
    if (!within(gap, radius, strict)) return 0;
    if (within(far, radius, strict)) return nd.end - nd.begin;
    if (nd.left < 0) {
        std::size_t c = 0;
        for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
            if (within(max_norm(q, point(pos), d_), radius, strict)) ++c;
        }
        return c;
    }
    return count_node(nd.left, q, radius, strict) + count_node(nd.right, q, radius, strict);
}

std::size_t KdTree::count_around(std::span<const double> query, double radius, bool strict) const {
    if (query.size() != d_) throw std::invalid_argument("count_around: dimension mismatch");
    const double* q = query.data();
    switch (mode_) {
        case Mode::Brute: {
            std::size_t c = 0;
            for (std::size_t pos = 0; pos < n_; ++pos) {
                if (within(max_norm(q, point(pos), d_), radius, strict)) ++c;
            }
            return c;
        }
        case Mode::SortedAxis: {
            const double x = q[0];
            // fl(p - x) is monotone in p, so both boundaries are exact partition points.
            auto first = std::partition_point(points_.begin(), points_.end(),
                                              [&](double p) { return p < x && !within(x - p, radius, strict); });
            auto last = std::partition_point(first, points_.end(),
                                             [&](double p) { return p <= x || within(p - x, radius, strict); });
            return static_cast<std::size_t>(last - first);
        }
        case Mode::Tree:
            return count_node(0, q, radius, strict);
    }
    return 0;
}

std::size_t KdTree::count_within(std::size_t query_index, double radius, bool strict) const {
    if (query_index >= n_) throw std::out_of_range("count_within: query index out of range");
    if (strict && !(radius > 0.0)) return 0;
    const std::size_t c = count_around({point(position_[query_index]), d_}, radius, strict);
    return c - 1;  // the query point itself is always within range
}

double knn_radius(const PointCloud& cloud, std::size_t query_index, int K) {
    if (K < 1 || static_cast<std::size_t>(K) >= cloud.size()) throw std::invalid_argument("knn_radius: need 1 <= K < n");
    if (query_index >= cloud.size()) throw std::out_of_range("knn_radius: query index out of range");
    return KdTree(cloud).kth_distance(query_index, K);
}

std::size_t count_within(const PointCloud& cloud, std::size_t query_index, double eps, bool strict) {
    if (!(eps > 0.0)) throw std::invalid_argument("count_within: eps must be positive");
    if (query_index >= cloud.size()) throw std::out_of_range("count_within: query index out of range");
    return KdTree(cloud).count_within(query_index, eps, strict);
}

}  // namespace infodyn

namespace infodyn {

// Batch searches over the stored points. The query loop runs in tree order for locality and the
// dimension is a template parameter where it is small (D == 0 means runtime d_).
template <std::size_t D>
struct TreeKernels {
    const KdTree& t;
    std::size_t d;

    [[nodiscard]] std::size_t dims() const { return D == 0 ? d : D; }

    [[nodiscard]] double gap(int node, const double* q) const {
        const double* l = t.lo(node);
        const double* h = t.hi(node);
        double g = 0.0;
        for (std::size_t j = 0; j < dims(); ++j) g = std::max(g, std::max(l[j] - q[j], q[j] - h[j]));
        return g;
    }

    // best[0..K) holds the K smallest distances seen so far in ascending order.
    void kth(int node, const double* q, std::size_t self_pos, int K, double* best, int& filled) const {
        const KdTree::Node& nd = t.nodes_[static_cast<std::size_t>(node)];
        if (nd.left < 0) {
            scan_leaf(nd, q, self_pos, K, best, filled);
            return;
        }
        const double gl = gap(nd.left, q);
        const double gr = gap(nd.right, q);
        const bool left_first = gl <= gr;
        kth(left_first ? nd.left : nd.right, q, self_pos, K, best, filled);
        const double g2 = left_first ? gr : gl;
        if (filled < K || g2 < best[K - 1]) kth(left_first ? nd.right : nd.left, q, self_pos, K, best, filled);
    }

    void scan_leaf(const KdTree::Node& nd, const double* q, std::size_t self_pos, int K, double* best,
                   int& filled) const {
        for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
            const double* p = t.point(pos);
            double dist = 0.0;
            for (std::size_t j = 0; j < dims(); ++j) dist = std::max(dist, std::fabs(p[j] - q[j]));
            const double bound = filled == K ? best[K - 1] : INFINITY;
            if (!(dist < bound) || pos == self_pos) continue;
            int at = filled == K ? K - 1 : filled++;
            while (at > 0 && best[at - 1] > dist) {
                best[at] = best[at - 1];
                --at;
            }
            best[at] = dist;
        }
    }

    // Self query starting from the point's own leaf and climbing toward the root.
    void kth_from_leaf(int leaf, std::size_t self_pos, int K, double* best) const {
        const double* q = t.point(self_pos);
        int filled = 0;
        scan_leaf(t.nodes_[static_cast<std::size_t>(leaf)], q, self_pos, K, best, filled);
        int node = leaf;
        while (true) {
            const int parent = t.nodes_[static_cast<std::size_t>(node)].parent;
            if (parent < 0) break;
            const KdTree::Node& pn = t.nodes_[static_cast<std::size_t>(parent)];
            const int sibling = pn.left == node ? pn.right : pn.left;
            if (filled < K || gap(sibling, q) < best[K - 1]) kth(sibling, q, self_pos, K, best, filled);
            node = parent;
        }
    }

    [[nodiscard]] std::size_t count(int node, const double* q, double radius, bool strict) const {
        const KdTree::Node& nd = t.nodes_[static_cast<std::size_t>(node)];
        const double* l = t.lo(node);
        const double* h = t.hi(node);
        double g = 0.0;
        double far = 0.0;
        for (std::size_t j = 0; j < dims(); ++j) {
            g = std::max(g, std::max(l[j] - q[j], q[j] - h[j]));
            far = std::max(far, std::max(q[j] - l[j], h[j] - q[j]));
        }
        if (!within(g, radius, strict)) return 0;
        if (within(far, radius, strict)) return nd.end - nd.begin;
        if (nd.left < 0) {
            std::size_t c = 0;
            for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
                const double* p = t.point(pos);
                double dist = 0.0;
                for (std::size_t j = 0; j < dims(); ++j) dist = std::max(dist, std::fabs(p[j] - q[j]));
                c += within(dist, radius, strict) ? 1 : 0;
            }
            return c;
        }
        return count(nd.left, q, radius, strict) + count(nd.right, q, radius, strict);
    }
};

namespace {

template <typename F>
void dispatch_dims(std::size_t d, F&& f) {
    switch (d) {
        case 2: f(std::integral_constant<std::size_t, 2>{}); return;
        case 3: f(std::integral_constant<std::size_t, 3>{}); return;
        case 4: f(std::integral_constant<std::size_t, 4>{}); return;
        case 5: f(std::integral_constant<std::size_t, 5>{}); return;
        case 6: f(std::integral_constant<std::size_t, 6>{}); return;
        default: f(std::integral_constant<std::size_t, 0>{}); return;
    }
}

}  // namespace

std::vector<double> KdTree::all_kth_distances(int K) const {
    if (K < 1 || static_cast<std::size_t>(K) >= n_) throw std::invalid_argument("knn: need 1 <= K < n");
    std::vector<double> out(n_);
    if (mode_ != Mode::Tree) {
        for (std::size_t i = 0; i < n_; ++i) out[i] = kth_distance(i, K);
        return out;
    }
    std::vector<double> best(static_cast<std::size_t>(K));
    dispatch_dims(d_, [&](auto dim) {
        const TreeKernels<decltype(dim)::value> kern{*this, d_};
        for (const int leaf : leaves_) {
            const Node& nd = nodes_[static_cast<std::size_t>(leaf)];
            for (std::size_t pos = nd.begin; pos < nd.end; ++pos) {
                kern.kth_from_leaf(leaf, pos, K, best.data());
                out[order_[pos]] = best[static_cast<std::size_t>(K) - 1];
            }
        }
    });
    return out;
}

std::vector<std::size_t> KdTree::all_counts_within(std::span<const double> radii, bool strict) const {
    if (radii.size() != n_) throw std::invalid_argument("all_counts_within: one radius per point required");
    std::vector<std::size_t> out(n_, 0);
    if (mode_ != Mode::Tree) {
        for (std::size_t i = 0; i < n_; ++i) out[i] = count_within(i, radii[i], strict);
        return out;
    }
    dispatch_dims(d_, [&](auto dim) {
        const TreeKernels<decltype(dim)::value> kern{*this, d_};
        for (std::size_t pos = 0; pos < n_; ++pos) {
            const std::size_t idx = order_[pos];
            const double r = radii[idx];
            if (strict && !(r > 0.0)) continue;
            out[idx] = kern.count(0, point(pos), r, strict) - 1;
        }
    });
    return out;
}

}  // namespace infodyn
