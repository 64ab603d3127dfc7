#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "infodyn/knn.hpp"

namespace infodyn {

namespace {

// First position in [first, first + len) whose value is not rejected by `outside`, given that
// `outside` is true on a prefix of the range.
template <typename Pred>
std::size_t partition_branchless(const double* values, std::size_t first, std::size_t len, Pred outside) {
    const double* base = values + first;
    if (len == 0) return first;
    while (len > 1) {
        const std::size_t half = len / 2;
        base = outside(base[half]) ? base + half : base;
        len -= half;
    }
    return static_cast<std::size_t>(base - values) + (outside(*base) ? 1 : 0);
}

}  // namespace

SortedColumn::SortedColumn(const PointCloud& cloud, std::size_t dim) {
    const std::size_t n = cloud.size();
    if (n >= (std::size_t{1} << 30)) throw std::invalid_argument("SortedColumn: cloud too large");
    std::vector<std::pair<double, std::uint32_t>> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = {cloud(i, dim), static_cast<std::uint32_t>(i)};
    std::sort(v.begin(), v.end());
    values_.resize(n);
    rank_.resize(n);
    index_.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        values_[p] = v[p].first;
        index_[p] = v[p].second;
        rank_[v[p].second] = static_cast<std::uint32_t>(p);
    }
}

// fl(x - p) is monotone in p, so these boundaries agree with the direct distance test exactly.
void SortedColumn::intervals(std::span<const double> radii, bool strict, std::vector<std::uint32_t>& lo,
                             std::vector<std::uint32_t>& hi) const {
    const std::size_t n = values_.size();
    if (radii.size() != n) throw std::invalid_argument("SortedColumn::intervals: one radius per point required");
    const double* v = values_.data();
    lo.resize(n);
    hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t q = rank_[i];
        const double x = v[q];
        const double r = radii[i];
        std::size_t l;
        std::size_t h;
        if (strict) {
            l = partition_branchless(v, 0, q + 1, [x, r](double p) { return !(x - p < r); });
            h = partition_branchless(v, q, n - q, [x, r](double p) { return p - x < r; });
        } else {
            l = partition_branchless(v, 0, q + 1, [x, r](double p) { return !(x - p <= r); });
            h = partition_branchless(v, q, n - q, [x, r](double p) { return p - x <= r; });
        }
        lo[i] = static_cast<std::uint32_t>(l);
        hi[i] = static_cast<std::uint32_t>(std::max(h, l));
    }
}

// Two columns: rectangle counting as a sweep over a-rank inserting b-ranks into a Fenwick tree,
// each query answered as prefix(a_hi) - prefix(a_lo) over its b-rank interval.
std::vector<std::size_t> rank_space_counts(const ColumnIntervals& a, const ColumnIntervals* b) {
    const std::size_t n = a.lo.size();
    std::vector<std::size_t> out(n, 0);
    if (b == nullptr) {
        for (std::size_t i = 0; i < n; ++i) out[i] = a.hi[i] > a.lo[i] ? a.hi[i] - a.lo[i] - 1 : 0;
        return out;
    }
    if (b->lo.size() != n) throw std::invalid_argument("rank_space_counts: interval sizes differ");
    std::vector<std::uint32_t> start(n + 2, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++start[a.lo[i] + 1];
        ++start[a.hi[i] + 1];
    }
    for (std::size_t r = 1; r < start.size(); ++r) start[r] += start[r - 1];
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    std::vector<std::uint32_t> queries(2 * n);  // (query << 1) | upper
    for (std::size_t i = 0; i < n; ++i) {
        queries[fill[a.lo[i]]++] = static_cast<std::uint32_t>(i << 1);
        queries[fill[a.hi[i]]++] = static_cast<std::uint32_t>((i << 1) | 1U);
    }
    std::vector<std::int32_t> fenwick(n + 1, 0);
    auto prefix = [&](std::uint32_t k) {
        std::int32_t c = 0;
        for (; k > 0; k &= k - 1) c += fenwick[k];
        return c;
    };
    std::vector<std::int32_t> acc(n, 0);
    for (std::size_t X = 0; X <= n; ++X) {
        for (std::uint32_t q = start[X]; q < start[X + 1]; ++q) {
            const std::uint32_t id = queries[q] >> 1;
            const std::int32_t c = prefix(b->hi[id]) - prefix(b->lo[id]);
            acc[id] += (queries[q] & 1U) ? c : -c;
        }
        if (X < n) {
            for (std::uint32_t k = b->column->rank(a.column->index_at(X)) + 1; k <= n; k += k & (~k + 1)) ++fenwick[k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = acc[i] > 0 ? static_cast<std::size_t>(acc[i] - 1) : 0;
    return out;
}

std::vector<std::size_t> count_all_within(const PointCloud& cloud, std::span<const double> radii, bool strict) {
    if (radii.size() != cloud.size()) throw std::invalid_argument("count_all_within: one radius per point required");
    if (cloud.empty()) return {};
    if (cloud.dims() > 2) return KdTree(cloud).all_counts_within(radii, strict);
    const SortedColumn c0(cloud, 0);
    ColumnIntervals a{&c0, {}, {}};
    c0.intervals(radii, strict, a.lo, a.hi);
    std::vector<std::size_t> out;
    if (cloud.dims() == 1) {
        out = rank_space_counts(a, nullptr);
    } else {
        const SortedColumn c1(cloud, 1);
        ColumnIntervals b{&c1, {}, {}};
        c1.intervals(radii, strict, b.lo, b.hi);
        out = rank_space_counts(a, &b);
    }
    if (strict) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!(radii[i] > 0.0)) out[i] = 0;
        }
    }
    return out;
}

}  // namespace infodyn
