#include "infodyn/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

#include "infodyn/error.hpp"

namespace infodyn {

PointCloud::PointCloud(std::size_t rows, std::size_t dims, std::vector<double> data)
    : rows_(rows), dims_(dims), data_(std::move(data)) {
    if (data_.size() != rows_ * dims_) {
        throw std::invalid_argument("PointCloud: data size does not match rows x dims");
    }
}

PointCloud PointCloud::column(std::span<const double> values) {
    return PointCloud(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

PointCloud PointCloud::hstack(std::span<const PointCloud* const> parts) {
    std::size_t rows = 0;
    std::size_t dims = 0;
    bool have_rows = false;
    for (const PointCloud* p : parts) {
        if (p == nullptr || p->empty()) continue;
        if (have_rows && p->size() != rows) throw DataError("hstack: row counts differ");
        rows = p->size();
        have_rows = true;
        dims += p->dims();
    }
    PointCloud out(rows, dims);
    std::size_t col = 0;
    for (const PointCloud* p : parts) {
        if (p == nullptr || p->empty()) continue;
        for (std::size_t i = 0; i < rows; ++i) {
            auto src = p->row(i);
            for (std::size_t j = 0; j < src.size(); ++j) out(i, col + j) = src[j];
        }
        col += p->dims();
    }
    return out;
}

std::vector<double> PointCloud::column_values(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

PointCloud PointCloud::standardized() const {
    PointCloud out = *this;
    const double n = static_cast<double>(rows_);
    for (std::size_t j = 0; j < dims_; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) mean += (*this)(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double d = (*this)(i, j) - mean;
            var += d * d;
        }
        var /= n;
        if (!(var > 0.0) || !std::isfinite(var)) {
            throw NumericError("zero-variance input column; enable jitter for discretized data");
        }
        const double inv_sd = 1.0 / std::sqrt(var);
        for (std::size_t i = 0; i < rows_; ++i) out(i, j) = ((*this)(i, j) - mean) * inv_sd;
    }
    return out;
}

}  // namespace infodyn
