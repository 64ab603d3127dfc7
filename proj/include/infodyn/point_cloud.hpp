#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace infodyn {

/// Row-major n x d sample matrix. Each row is one point.
class PointCloud {
public:
    PointCloud() = default;
    PointCloud(std::size_t rows, std::size_t dims) : rows_(rows), dims_(dims), data_(rows * dims, 0.0) {}
    PointCloud(std::size_t rows, std::size_t dims, std::vector<double> data);

    /// Single-column cloud from a vector of scalars.
    static PointCloud column(std::span<const double> values);
    /// Concatenates the columns of several clouds with equal row counts. Empty clouds are skipped.
    static PointCloud hstack(std::span<const PointCloud* const> parts);

    [[nodiscard]] std::size_t size() const { return rows_; }
    [[nodiscard]] std::size_t dims() const { return dims_; }
    [[nodiscard]] bool empty() const { return rows_ == 0 || dims_ == 0; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * dims_, dims_}; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * dims_, dims_}; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dims_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dims_ + j]; }

    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::vector<double> column_values(std::size_t j) const;

    /// Each column shifted to zero mean and scaled to unit (population) variance.
    /// Throws NumericError when a column has zero variance.
    [[nodiscard]] PointCloud standardized() const;

private:
    std::size_t rows_ = 0;
    std::size_t dims_ = 0;
    std::vector<double> data_;
};

}  // namespace infodyn
