#include "infodyn/series.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "infodyn/error.hpp"
#include "infodyn/csv.hpp"

namespace infodyn {

TimeSeries::TimeSeries(std::vector<double> values, std::int64_t start_time, std::int64_t period, std::string label)
    : storage_(std::make_shared<const std::vector<double>>(std::move(values))),
      offset_(0),
      length_(storage_->size()),
      start_time_(start_time),
      period_(period),
      label_(std::move(label)) {
    if (length_ == 0) throw DataError("TimeSeries: empty series");
    if (period_ <= 0) throw DataError("TimeSeries: period must be positive");
}

TimeSeries TimeSeries::slice(std::size_t begin, std::size_t length) const {
    if (length == 0 || begin + length > length_) throw DataError("TimeSeries::slice out of range");
    TimeSeries out = *this;
    out.offset_ = offset_ + begin;
    out.length_ = length;
    out.start_time_ = timestamp(begin);
    return out;
}

TimeSeries TimeSeries::with_label(std::string label) const {
    TimeSeries out = *this;
    out.label_ = std::move(label);
    return out;
}

bool TimeSeries::same_grid(const TimeSeries& other) const {
    return length_ == other.length_ && start_time_ == other.start_time_ && period_ == other.period_;
}

std::size_t embedding_offset(bool has_source, bool has_cond, const EmbeddingParams& p) {
    std::size_t first = static_cast<std::size_t>(p.k);
    if (has_source) first = std::max(first, static_cast<std::size_t>(p.l + p.delay));
    if (has_cond) first = std::max(first, static_cast<std::size_t>(p.m));
    return first;
}

namespace {

void fill_past(PointCloud& out, std::size_t col0, const TimeSeries& s, std::size_t first, int lag0, int len) {
    for (std::size_t r = 0; r < out.size(); ++r) {
        const std::size_t t = first + r;
        for (int j = 0; j < len; ++j) out(r, col0 + j) = s[t - lag0 - j];
    }
}

}  // namespace

EmbeddedDataset build_embedding(const TimeSeries& x, const TimeSeries* y, std::span<const TimeSeries> z,
                                const EmbeddingParams& p) {
    if (p.k < 1) throw std::invalid_argument("embedding: k must be >= 1");
    if (y != nullptr && (p.l < 1 || p.delay < 1)) throw std::invalid_argument("embedding: l and delay must be >= 1");
    if (!z.empty() && p.m < 1) throw std::invalid_argument("embedding: m must be >= 1");
    if (y != nullptr && !x.same_grid(*y)) throw DataError("embedding: source and target lengths/grids differ");
    for (const TimeSeries& c : z) {
        if (!x.same_grid(c)) throw DataError("embedding: conditional series length/grid differs from target");
    }
    const std::size_t q = x.size();
    const std::size_t first = embedding_offset(y != nullptr, !z.empty(), p);
    if (first >= q) {
        throw DataError(fmt::format("embedding: series of length {} too short for history offset {}", q, first));
    }
    EmbeddedDataset ds;
    ds.n = q - first;
    ds.first_time = first;
    ds.target.resize(ds.n);
    for (std::size_t r = 0; r < ds.n; ++r) ds.target[r] = x[first + r];
    ds.target_past = PointCloud(ds.n, static_cast<std::size_t>(p.k));
    fill_past(ds.target_past, 0, x, first, 1, p.k);
    if (y != nullptr) {
        ds.source_past = PointCloud(ds.n, static_cast<std::size_t>(p.l));
        fill_past(ds.source_past, 0, *y, first, p.delay, p.l);
    }
    if (!z.empty()) {
        ds.cond_past = PointCloud(ds.n, z.size() * static_cast<std::size_t>(p.m));
        for (std::size_t c = 0; c < z.size(); ++c) fill_past(ds.cond_past, c * p.m, z[c], first, 1, p.m);
    }
    return ds;
}

TimeSeries difference(const TimeSeries& x) {
    if (x.size() < 2) throw DataError("difference: series needs at least 2 values");
    std::vector<double> out(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) out[i] = x[i + 1] - x[i];
    return TimeSeries(std::move(out), x.timestamp(1), x.period(), "d(" + x.label() + ")");
}

TimeSeries cumulative_sum(const TimeSeries& dx, double anchor) {
    std::vector<double> out(dx.size() + 1);
    out[0] = anchor;
    for (std::size_t i = 0; i < dx.size(); ++i) out[i + 1] = out[i] + dx[i];
    return TimeSeries(std::move(out), dx.start_time() - dx.period(), dx.period(), dx.label());
}

std::size_t window_count(std::size_t length, const WindowSpec& spec) {
    if (spec.width > length) return 0;
    return (length - spec.width) / spec.step + 1;
}

std::vector<TimeSeries> rolling_windows(const TimeSeries& x, const WindowSpec& spec) {
    if (spec.width < 2 || spec.step < 1 || spec.step > spec.width) {
        throw std::invalid_argument("WindowSpec requires width >= 2 and 1 <= step <= width");
    }
    if (spec.width > x.size()) {
        throw DataError(fmt::format("rolling_windows: width {} exceeds series length {}", spec.width, x.size()));
    }
    const std::size_t count = window_count(x.size(), spec);
    std::vector<TimeSeries> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) out.push_back(x.slice(j * spec.step, spec.width));
    return out;
}

TimeSeries read_series_csv(const std::string& path, std::optional<std::string> label) {
    CsvTable table = read_csv(path, {"timestamp_ms", "value"});
    if (table.rows.empty()) throw DataError(path + ": no data rows");
    std::vector<std::int64_t> ts;
    std::vector<double> values;
    ts.reserve(table.rows.size());
    values.reserve(table.rows.size());
    for (const CsvRow& row : table.rows) {
        ts.push_back(parse_int64(row, 0, path));
        values.push_back(parse_double(row, 1, path));
    }
    std::int64_t period = 1;
    if (ts.size() > 1) {
        period = ts[1] - ts[0];
        if (period <= 0) throw DataError(fmt::format("{}:{}: timestamps must increase", path, table.rows[1].line));
        for (std::size_t i = 1; i < ts.size(); ++i) {
            if (ts[i] - ts[i - 1] != period) {
                throw DataError(fmt::format("{}:{}: non-uniform grid (gaps must be resolved before loading)", path,
                                            table.rows[i].line));
            }
        }
    }
    std::string name = label ? *label : default_label_from_path(path);
    return TimeSeries(std::move(values), ts.front(), period, std::move(name));
}

void write_series_csv(const std::string& path, const TimeSeries& x, std::span<const std::string> comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (const std::string& c : comments) out << "# " << c << '\n';
    out << "timestamp_ms,value\n";
    for (std::size_t i = 0; i < x.size(); ++i) out << fmt::format("{},{}\n", x.timestamp(i), x[i]);
}

}  // namespace infodyn
