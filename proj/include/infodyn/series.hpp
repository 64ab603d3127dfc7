#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infodyn/point_cloud.hpp"

namespace infodyn {

/// Uniformly sampled scalar series. Index i maps to start_time + i * period (epoch ms).
///
/// Storage is shared and immutable, so slices are cheap views onto the parent's
/// values rather than copies.
class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(std::vector<double> values, std::int64_t start_time = 0, std::int64_t period = 1,
               std::string label = {});

    [[nodiscard]] std::size_t size() const { return length_; }
    [[nodiscard]] std::span<const double> values() const { return {storage_->data() + offset_, length_}; }
    double operator[](std::size_t i) const { return (*storage_)[offset_ + i]; }

    [[nodiscard]] std::int64_t start_time() const { return start_time_; }
    [[nodiscard]] std::int64_t period() const { return period_; }
    [[nodiscard]] std::int64_t timestamp(std::size_t i) const {
        return start_time_ + static_cast<std::int64_t>(i) * period_;
    }
    [[nodiscard]] const std::string& label() const { return label_; }

    /// View of [begin, begin + length) sharing this series' storage.
    [[nodiscard]] TimeSeries slice(std::size_t begin, std::size_t length) const;
    [[nodiscard]] TimeSeries with_label(std::string label) const;
    [[nodiscard]] bool same_grid(const TimeSeries& other) const;
    /// True when this series is a view into the same storage as `other`.
    [[nodiscard]] bool shares_storage(const TimeSeries& other) const { return storage_ == other.storage_; }

private:
    std::shared_ptr<const std::vector<double>> storage_ = std::make_shared<const std::vector<double>>();
    std::size_t offset_ = 0;
    std::size_t length_ = 0;
    std::int64_t start_time_ = 0;
    std::int64_t period_ = 1;
    std::string label_;
};

/// Joint samples for conditional-MI estimation of X_t against past vectors.
///
/// Row r corresponds to target time t = first_time + r. Past rows hold the most
/// recent value first: target_past(r) = [x_{t-1}, ..., x_{t-k}],
/// source_past(r) = [y_{t-delay}, ..., y_{t-delay-l+1}], cond_past(r) = [z_{t-1}, ..., z_{t-m}]
/// (one block of m columns per conditional series).
struct EmbeddedDataset {
    std::vector<double> target;
    PointCloud target_past;
    PointCloud source_past;
    PointCloud cond_past;
    std::size_t n = 0;
    std::size_t first_time = 0;
};

struct EmbeddingParams {
    int k = 1;      ///< target history length
    int l = 1;      ///< source history length
    int m = 1;      ///< history length of each conditional series
    int delay = 1;  ///< source delay
};

/// Index of the first usable target sample: max(k, l + delay, m) over the series present.
[[nodiscard]] std::size_t embedding_offset(bool has_source, bool has_cond, const EmbeddingParams& p);

/// Materializes the delay embedding. Throws DataError on length/grid mismatch or when no sample remains.
[[nodiscard]] EmbeddedDataset build_embedding(const TimeSeries& x, const TimeSeries* y,
                                              std::span<const TimeSeries> z, const EmbeddingParams& p);

/// First difference; label gets a "d(...)" annotation.
[[nodiscard]] TimeSeries difference(const TimeSeries& x);
/// Running sum anchored at `anchor`: out[0] = anchor, out[i] = anchor + sum_{j<i} dx[j].
[[nodiscard]] TimeSeries cumulative_sum(const TimeSeries& dx, double anchor);

struct WindowSpec {
    std::size_t width = 2;
    std::size_t step = 1;
};

/// Sliding windows covering [j*step, j*step + width); the trailing partial window is dropped.
[[nodiscard]] std::vector<TimeSeries> rolling_windows(const TimeSeries& x, const WindowSpec& spec);
[[nodiscard]] std::size_t window_count(std::size_t length, const WindowSpec& spec);

/// Reads a `timestamp_ms,value` CSV. Lines starting with '#' are ignored. The grid must be uniform.
[[nodiscard]] TimeSeries read_series_csv(const std::string& path, std::optional<std::string> label = {});
/// Writes `timestamp_ms,value` preceded by optional '#' comment lines.
void write_series_csv(const std::string& path, const TimeSeries& x, std::span<const std::string> comments = {});

}  // namespace infodyn
