#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "infodyn/error.hpp"
#include "infodyn/estimators.hpp"
#include "infodyn/point_cloud.hpp"
#include "infodyn/random.hpp"
#include "infodyn/series.hpp"

using namespace infodyn;

namespace {

double gaussian_mi(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

// -1/2 ln det R for an equicorrelated N x N correlation matrix.
double equicorrelated_multi_information(int N, double rho) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Constant(N, N, rho);
    R.diagonal().setOnes();
    return -0.5 * std::log(R.determinant());
}

std::pair<std::vector<double>, std::vector<double>> correlated_pair(RngHandle& rng, std::size_t n, double rho) {
    std::vector<double> x(n), y(n);
    const double c = std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        y[i] = rho * x[i] + c * rng.normal();
    }
    return {x, y};
}

TimeSeries ar1(RngHandle& rng, std::size_t n, double a) {
    std::vector<double> x(n);
    double v = rng.normal() / std::sqrt(1.0 - a * a);
    for (auto& e : x) {
        v = a * v + rng.normal();
        e = v;
    }
    return TimeSeries(std::move(x));
}

TimeSeries noise(RngHandle& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& e : x) e = rng.normal();
    return TimeSeries(std::move(x));
}

// Y_t = a Y_{t-1} + c X_{t-lag} + eta_t with X white noise.
std::pair<TimeSeries, TimeSeries> driven_pair(RngHandle& rng, std::size_t n, double a, double c, int lag = 1) {
    const std::size_t burn = 100;
    std::vector<double> x(n + burn), y(n + burn, 0.0);
    for (auto& v : x) v = rng.normal();
    for (std::size_t t = 1; t < n + burn; ++t) {
        const double drive = t >= static_cast<std::size_t>(lag) ? x[t - static_cast<std::size_t>(lag)] : 0.0;
        y[t] = a * y[t - 1] + c * drive + rng.normal();
    }
    return {TimeSeries(std::vector<double>(x.begin() + burn, x.end()), 0, 1, "x"),
            TimeSeries(std::vector<double>(y.begin() + burn, y.end()), 0, 1, "y")};
}

// Granger oracle for driven_pair: the residual variance grows from 1 to 1 + c^2 when X is
// dropped, since X_{t-1} is independent of the target's own past.
double driven_pair_te(double c) { return 0.5 * std::log(1.0 + c * c); }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST_CASE("ksg mutual information of independent and correlated Gaussians") {
    RngHandle rng(1);
    auto [x, y] = correlated_pair(rng, 4096, 0.0);
    const auto cx = PointCloud::column(x), cy = PointCloud::column(y);
    CHECK(std::fabs(ksg_cmi(cx, cy, nullptr, 4).value) < 0.01);

    auto [u, v] = correlated_pair(rng, 10000, 0.6);
    const double mi = ksg_cmi(PointCloud::column(u), PointCloud::column(v), nullptr, 4).value;
    CHECK(std::fabs(mi - gaussian_mi(0.6)) < 0.02);
}

TEST_CASE("ksg conditional MI vanishes when conditioning on the source") {
    RngHandle rng(2);
    auto [x, y] = correlated_pair(rng, 4000, 0.8);
    const auto cx = PointCloud::column(x), cy = PointCloud::column(y);
    CHECK(std::fabs(ksg_cmi(cx, cy, &cy, 4).value) < 0.02);
}

TEST_CASE("ksg estimates are invariant under monotone rescaling") {
    RngHandle rng(3);
    auto [x, y] = correlated_pair(rng, 10000, 0.6);
    std::vector<double> ex(x.size()), cy(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ex[i] = std::exp(x[i]);
        cy[i] = y[i] * y[i] * y[i] + 2.0 * y[i];
    }
    const double a = ksg_cmi(PointCloud::column(x), PointCloud::column(y), nullptr, 4).value;
    const double b = ksg_cmi(PointCloud::column(ex), PointCloud::column(cy), nullptr, 4).value;
    CHECK(std::fabs(a - b) <= 0.02);
}

TEST_CASE("gaussian estimator") {
    RngHandle rng(4);
    auto [x, y] = correlated_pair(rng, 100000, 0.6);
    CHECK(std::fabs(gaussian_cmi(PointCloud::column(x), PointCloud::column(y), nullptr).value - gaussian_mi(0.6)) <
          0.005);

    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = x[i] * x[i];
    CHECK(std::fabs(gaussian_cmi(PointCloud::column(x), PointCloud::column(sq), nullptr).value) < 0.001);

    auto [u, v] = correlated_pair(rng, 20000, 0.0);
    CHECK(std::fabs(gaussian_cmi(PointCloud::column(u), PointCloud::column(v), nullptr).value) < 0.001);

    CHECK_THROWS_AS((void)gaussian_cmi(PointCloud::column(x), PointCloud::column(x), nullptr), NumericError);
}

TEST_CASE("transfer entropy of a linear driven pair matches the Granger value") {
    RngHandle rng(5);
    auto [x, y] = driven_pair(rng, 10000, 0.2, 0.5);
    EstimatorConfig cfg;
    const double oracle = driven_pair_te(0.5);
    CHECK(std::fabs(transfer_entropy(x, y, cfg).value - oracle) < 0.02);
    cfg.kind = EstimatorKind::Gaussian;
    CHECK(std::fabs(transfer_entropy(x, y, cfg).value - oracle) < 0.01);
    CHECK(std::fabs(transfer_entropy(y, x, cfg).value) < 0.01);
}

TEST_CASE("conditional transfer entropy") {
    RngHandle rng(6);
    auto [x, y] = driven_pair(rng, 3000, 0.3, 0.6);
    EstimatorConfig cfg;
    const double te = transfer_entropy(x, y, cfg).value;
    CHECK(conditional_te(x, y, {}, cfg).value == te);

    const TimeSeries copy[] = {x};
    CHECK(std::fabs(conditional_te(x, y, copy, cfg).value) < 0.02);

    // two independent drivers: conditioning on the other one barely moves the estimate
    const std::size_t n = 4000;
    std::vector<double> a(n), b(n), t(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    for (std::size_t i = 1; i < n; ++i) t[i] = 0.2 * t[i - 1] + 0.5 * a[i - 1] + 0.5 * b[i - 1] + rng.normal();
    const TimeSeries A(a), B(b), T(t);
    const TimeSeries cond_b[] = {B};
    CHECK(std::fabs(conditional_te(A, T, cond_b, cfg).value - transfer_entropy(A, T, cfg).value) < 0.04);
}

TEST_CASE("collective transfer entropy") {
    RngHandle rng(7);
    const std::size_t n = 4000;
    std::vector<double> a(n), b(n), t(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    for (std::size_t i = 1; i < n; ++i) t[i] = 0.2 * t[i - 1] + 0.6 * a[i - 1] + 0.6 * b[i - 1] + rng.normal();
    const TimeSeries A(a, 0, 1, "a"), B(b, 0, 1, "b"), T(t, 0, 1, "t");
    EstimatorConfig cfg;

    const TimeSeries one[] = {A};
    const auto single = collective_te(T, one, cfg);
    CHECK(single.value == transfer_entropy(A, T, cfg).value);
    REQUIRE(single.terms.size() == 1);

    const TimeSeries both[] = {A, B};
    const auto pair = collective_te(T, both, cfg);
    REQUIRE(pair.terms.size() == 2);
    CHECK(pair.value == doctest::Approx(pair.terms[0] + pair.terms[1]).epsilon(1e-12));
    // Granger oracle for the joint drive
    CHECK(std::fabs(pair.value - 0.5 * std::log(1.0 + 2.0 * 0.36)) < 0.05);

    const TimeSeries dup[] = {A, A};
    CHECK(std::fabs(collective_te(T, dup, cfg).terms[1]) < 0.02);

    const TimeSeries unordered[] = {B, A};
    const auto ordered = lexicographic_order(unordered);
    CHECK(ordered[0].label() == "a");
    CHECK(ordered[1].label() == "b");
}

TEST_CASE("active information storage") {
    RngHandle rng(8);
    EstimatorConfig cfg;
    const auto x = ar1(rng, 10000, 0.6);
    CHECK(std::fabs(active_information_storage(x, cfg).value - gaussian_mi(0.6)) < 0.02);

    cfg.k = 2;
    CHECK(active_information_storage(x, cfg).value >= gaussian_mi(0.6) - 0.02);

    cfg.k = 1;
    CHECK(std::fabs(active_information_storage(noise(rng, 8192), cfg).value) < 0.01);

    CHECK(history_information(x, x, cfg).value == active_information_storage(x, cfg).value);
}

TEST_CASE("multi-information") {
    RngHandle rng(9);
    EstimatorConfig cfg;
    auto [x, y] = correlated_pair(rng, 10000, 0.6);
    const TimeSeries pair[] = {TimeSeries(x), TimeSeries(y)};
    const double mi2 = multi_information(pair, cfg).value;
    const double ksg = ksg_cmi(PointCloud::column(x), PointCloud::column(y), nullptr, 4).value;
    CHECK(std::fabs(mi2 - ksg) < 0.02);

    const TimeSeries indep[] = {noise(rng, 20000), noise(rng, 20000), noise(rng, 20000)};
    CHECK(std::fabs(multi_information(indep, cfg).value) < 0.02);

    const double rho = 0.5;
    const double oracle = equicorrelated_multi_information(3, rho);
    std::vector<std::vector<double>> cols(3, std::vector<double>(10000));
    for (std::size_t i = 0; i < 10000; ++i) {
        const double common = rng.normal();
        for (auto& c : cols) c[i] = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * rng.normal();
    }
    const TimeSeries three[] = {TimeSeries(cols[0]), TimeSeries(cols[1]), TimeSeries(cols[2])};
    CHECK(std::fabs(multi_information(three, cfg).value - oracle) < 0.05);
    cfg.kind = EstimatorKind::Gaussian;
    CHECK(std::fabs(multi_information(three, cfg).value - oracle) < 0.02);
}

TEST_CASE("local values average to the global estimate") {
    RngHandle rng(10);
    int checked = 0;
    for (int f = 0; f < 50; ++f) {
        auto [x, y] = driven_pair(rng, 300 + static_cast<std::size_t>(f) * 7, 0.3, 0.4 + 0.01 * f);
        EstimatorConfig cfg;
        cfg.k = 1 + f % 3;
        cfg.delay = 1 + f % 2;
        cfg.kind = f % 5 == 4 ? EstimatorKind::Gaussian : EstimatorKind::Ksg;
        const TimeSeries te_in[] = {x, y};
        const TimeSeries ais_in[] = {y};
        CHECK(std::fabs(mean(local_values(LocalMeasure::TransferEntropy, te_in, cfg)) -
                        transfer_entropy(x, y, cfg).value) < 1e-9);
        CHECK(std::fabs(mean(local_values(LocalMeasure::ActiveInformationStorage, ais_in, cfg)) -
                        active_information_storage(y, cfg).value) < 1e-9);
        CHECK(std::fabs(mean(local_values(LocalMeasure::MultiInformation, te_in, cfg)) -
                        multi_information(te_in, cfg).value) < 1e-9);
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("kept locals and translation invariance") {
    RngHandle rng(11);
    auto [x, y] = driven_pair(rng, 800, 0.3, 0.5);
    EstimatorConfig cfg;
    cfg.keep_locals = true;
    const auto r = transfer_entropy(x, y, cfg);
    REQUIRE(r.locals);
    CHECK(r.locals->size() == r.n);
    CHECK(std::fabs(mean(*r.locals) - r.value) < 1e-12);

    std::vector<double> xs(x.values().begin(), x.values().end()), ys(y.values().begin(), y.values().end());
    for (auto& v : xs) v += 100.0;
    for (auto& v : ys) v -= 3.0;
    const TimeSeries a[] = {x, y};
    const TimeSeries b[] = {TimeSeries(xs), TimeSeries(ys)};
    const auto la = local_values(LocalMeasure::TransferEntropy, a, cfg);
    const auto lb = local_values(LocalMeasure::TransferEntropy, b, cfg);
    REQUIRE(la.size() == lb.size());
    for (std::size_t i = 0; i < la.size(); ++i) CHECK(lb[i] == doctest::Approx(la[i]).epsilon(1e-9));
}

TEST_CASE("history selection") {
    RngHandle rng(12);
    EstimatorConfig cfg;
    CHECK(select_history(noise(rng, 2000), 10, cfg) == 1);
    const int k = select_history(ar1(rng, 4000, 0.6), 10, cfg);
    CHECK(k >= 1);
    CHECK(k <= 2);
    CHECK(default_history_tolerance(10000) == doctest::Approx(0.01));
}

TEST_CASE("delay selection recovers the coupling lag") {
    RngHandle rng(13);
    EstimatorConfig cfg;
    int hits = 0;
    const int runs = 20;
    for (int r = 0; r < runs; ++r) {
        RngHandle sub = rng.substream(static_cast<std::uint64_t>(r));
        auto [x, y] = driven_pair(sub, 8192, 0.2, 0.5, 3);
        hits += select_delay(x, y, 1, 5, cfg).first == 3 ? 1 : 0;
    }
    CHECK(hits >= 19);

    auto [x, y] = driven_pair(rng, 1000, 0.2, 0.5, 1);
    const auto [d, est] = select_delay(x, y, 1, 1, cfg);
    CHECK(d == 1);
    CHECK(est.value == transfer_entropy(x, y, cfg).value);
}

TEST_CASE("estimator config strings") {
    CHECK(estimator_kind_from_string("ksg") == EstimatorKind::Ksg);
    CHECK(estimator_kind_from_string("gaussian") == EstimatorKind::Gaussian);
    CHECK_THROWS_AS((void)estimator_kind_from_string("kernel"), ConfigError);
}
