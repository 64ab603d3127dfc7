#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "infodyn/error.hpp"
#include "infodyn/random.hpp"
#include "infodyn/series.hpp"

using namespace infodyn;

namespace {

std::vector<double> iota_values(std::size_t n, double first = 1.0) {
    std::vector<double> v(n);
    std::iota(v.begin(), v.end(), first);
    return v;
}

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "infodyn_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("embedding of a target without source") {
    const TimeSeries x({1, 2, 3, 4, 5});
    EmbeddingParams p;
    p.k = 2;
    const auto e = build_embedding(x, nullptr, {}, p);
    CHECK(e.n == 3);
    CHECK(e.first_time == 2);
    CHECK(e.target == std::vector<double>{3, 4, 5});
    const std::vector<std::vector<double>> past{{2, 1}, {3, 2}, {4, 3}};
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(e.target_past(r, 0) == past[r][0]);
        CHECK(e.target_past(r, 1) == past[r][1]);
    }
}

TEST_CASE("embedding row count with a delayed source") {
    const TimeSeries x(iota_values(100));
    const TimeSeries y(iota_values(100, 1000.0));
    EmbeddingParams p;
    p.delay = 3;
    const auto e = build_embedding(x, &y, {}, p);
    CHECK(e.n == 96);
    CHECK(e.first_time == 4);
    // source row r holds y_{t - delay}
    for (std::size_t r = 0; r < e.n; ++r) CHECK(e.source_past(r, 0) == y[e.first_time + r - 3]);
}

TEST_CASE("embedding round trip and conditional block layout") {
    RngHandle rng(11);
    std::vector<double> xs(60), zs(60);
    for (auto& v : xs) v = rng.normal();
    for (auto& v : zs) v = rng.normal();
    const TimeSeries x(xs), z(zs);
    EmbeddingParams p;
    p.k = 3;
    p.m = 2;
    const TimeSeries zz[] = {z};
    const auto e = build_embedding(x, nullptr, zz, p);
    REQUIRE(e.cond_past.dims() == 2);
    for (std::size_t r = 0; r < e.n; ++r) {
        const std::size_t t = e.first_time + r;
        CHECK(e.target[r] == xs[t]);
        for (int j = 0; j < 3; ++j) CHECK(e.target_past(r, j) == xs[t - 1 - j]);
        for (int j = 0; j < 2; ++j) CHECK(e.cond_past(r, j) == zs[t - 1 - j]);
    }
}

TEST_CASE("embedding of a constant series") {
    const TimeSeries x(std::vector<double>(20, 2.5));
    EmbeddingParams p;
    p.k = 4;
    const auto e = build_embedding(x, &x, {}, p);
    for (double v : e.target) CHECK(v == 2.5);
    for (double v : e.target_past.data()) CHECK(v == 2.5);
    for (double v : e.source_past.data()) CHECK(v == 2.5);
}

TEST_CASE("embedding errors") {
    const TimeSeries x(iota_values(10));
    const TimeSeries shorter(iota_values(9));
    const TimeSeries shifted(iota_values(10), 5);
    EmbeddingParams p;
    CHECK_THROWS_AS((void)build_embedding(x, &shorter, {}, p), DataError);
    CHECK_THROWS_AS((void)build_embedding(x, &shifted, {}, p), DataError);
    p.k = 10;
    CHECK_THROWS_AS((void)build_embedding(x, nullptr, {}, p), DataError);
}

TEST_CASE("difference") {
    const auto d = difference(TimeSeries({1, 3, 6}, 0, 60000, "p"));
    REQUIRE(d.size() == 2);
    CHECK(d[0] == 2);
    CHECK(d[1] == 3);
    CHECK(d.start_time() == 60000);
    CHECK(d.label() != "p");

    const auto flat = difference(TimeSeries(std::vector<double>(8, 4.0)));
    for (double v : flat.values()) CHECK(v == 0.0);

    CHECK_THROWS((void)difference(TimeSeries({1.0})));
}

TEST_CASE("difference inverts the cumulative sum") {
    RngHandle rng(3);
    std::vector<double> w(200);
    for (auto& v : w) v = rng.normal();
    const auto x = cumulative_sum(TimeSeries(w), 7.0);
    const auto back = difference(x);
    REQUIRE(back.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(back[i] == doctest::Approx(w[i]).epsilon(1e-12));

    const auto again = cumulative_sum(difference(x), x[0]);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(again[i] == doctest::Approx(x[i]).epsilon(1e-12));
}

TEST_CASE("rolling windows") {
    const TimeSeries x(iota_values(10, 0.0), 0, 60000);
    const auto w = rolling_windows(x, {4, 2});
    REQUIRE(w.size() == 4);
    CHECK(window_count(10, {4, 2}) == 4);
    for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(w[j].size() == 4);
        CHECK(w[j].start_time() == static_cast<std::int64_t>(j * 2) * 60000);
        CHECK(w[j].shares_storage(x));
        for (std::size_t i = 0; i < 4; ++i) CHECK(w[j][i] == x[j * 2 + i]);
    }
    CHECK(rolling_windows(x, {10, 3}).size() == 1);
    CHECK_THROWS((void)rolling_windows(x, {11, 1}));

    // a week of minutes moved by three days
    CHECK(window_count(4 * 7 * 1440, {7 * 1440, 3 * 1440}) == 8);
}

TEST_CASE("series csv round trip") {
    const auto path = temp_file("roundtrip.csv").string();
    const TimeSeries x({0.5, -1.25, 3.0, 1e-17}, 1'600'000'000'000, 60000, "kraken_returns");
    const std::string header[] = {"infodyn test"};
    write_series_csv(path, x, header);
    const auto y = read_series_csv(path);
    CHECK(y.label() == "roundtrip");
    CHECK(y.same_grid(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("series csv rejects an irregular grid") {
    const auto path = temp_file("irregular.csv");
    std::ofstream(path) << "timestamp_ms,value\n0,1\n60000,2\n180000,3\n";
    CHECK_THROWS_AS((void)read_series_csv(path.string()), DataError);
    CHECK_THROWS_AS((void)read_series_csv(temp_file("missing.csv").string()), DataError);
}
