#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "infodyn/error.hpp"
#include "infodyn/estimators.hpp"
#include "infodyn/inference.hpp"
#include "infodyn/models.hpp"
#include "infodyn/quadrature.hpp"
#include "infodyn/random.hpp"

using namespace infodyn;

namespace {

struct MomentOracle {
    double sigma2, s2, sigma4, s4, cross;
};

// Stationary moments by taking expectations of the squared recursions:
//   sigma2' = w + (alpha e^2 + beta) sigma2 + gamma s2,   s2' = a s2 + b sigma2 + c u^2.
MomentOracle moment_oracle(const GarchParams& p) {
    const double ab = p.alpha + p.beta;
    const double S = (p.w * (1.0 - p.a) + p.gamma * p.c) / ((1.0 - ab) * (1.0 - p.a) - p.gamma * p.b);
    const double Q = (p.b * S + p.c) / (1.0 - p.a);
    const double m2 = 3.0 * p.alpha * p.alpha + 2.0 * p.alpha * p.beta + p.beta * p.beta;
    Eigen::Matrix3d M;
    Eigen::Vector3d rhs;
    // unknowns (E sigma^4, E s^4, E sigma^2 s^2)
    M << 1.0 - m2, -p.gamma * p.gamma, -2.0 * p.gamma * ab,  //
        -p.b * p.b, 1.0 - p.a * p.a, -2.0 * p.a * p.b,       //
        -ab * p.b, -p.gamma * p.a, 1.0 - ab * p.a - p.gamma * p.b;
    rhs << p.w * p.w + 2.0 * p.w * ab * S + 2.0 * p.w * p.gamma * Q,
        3.0 * p.c * p.c + 2.0 * p.a * p.c * Q + 2.0 * p.b * p.c * S,
        p.w * (p.a * Q + p.b * S + p.c) + ab * p.c * S + p.gamma * p.c * Q;
    const Eigen::Vector3d v = M.fullPivLu().solve(rhs);
    return {S, Q, v[0], v[1], v[2]};
}

double mean_sq(const TimeSeries& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return s / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("sigmoid schedule") {
    const SigmoidSpec s{2.0, 0.3, 100.0, 0.5};
    CHECK(sigmoid(100.0, s) == doctest::Approx(1.5));
    CHECK(sigmoid(-1e6, s) == doctest::Approx(0.5));
    CHECK(sigmoid(1e6, s) == doctest::Approx(2.5));
    const SigmoidSpec flat{2.0, 0.0, 100.0, 0.5};
    CHECK(sigmoid(-40.0, flat) == doctest::Approx(1.5));
    CHECK(sigmoid(4000.0, flat) == doctest::Approx(1.5));
    const Coefficient c(s);
    CHECK(c.at(100.0) == doctest::Approx(1.5));
    CHECK(Coefficient(0.7).at(123.0) == 0.7);
}

TEST_CASE("decoupled VAR has no transfer") {
    RngHandle rng(1);
    VarParams p;
    p.T = 2000;
    const auto v = simulate_var(p, rng);
    CHECK(v.x.size() == 2000);
    CHECK(v.y.same_grid(v.x));
    EstimatorConfig cfg;
    SignificanceSpec spec;
    spec.n_surrogates = 99;
    auto te_to = [&](const TimeSeries& tgt) {
        return [&cfg, tgt](const TimeSeries& s) { return transfer_entropy(s, tgt, cfg).value; };
    };
    CHECK(!surrogate_test(te_to(v.y), v.x, spec, RngHandle(2)).significant);
    CHECK(!surrogate_test(te_to(v.x), v.y, spec, RngHandle(3)).significant);
}

TEST_CASE("VAR simulation replays from the seed") {
    VarParams p;
    p.C_drive = SigmoidSpec{1.0, 0.1, 50.0, 0.0};
    p.K_drive = 0.3;
    p.T = 100;
    RngHandle a(9), b(9);
    const auto u = simulate_var(p, a), v = simulate_var(p, b);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(u.x[i] == v.x[i]);
        CHECK(u.y[i] == v.y[i]);
    }
}

TEST_CASE("linear and nonlinear coupling in the VAR model") {
    RngHandle rng(4);
    VarParams p;
    p.T = 8000;
    p.C_drive = 0.5;
    p.d = 1.0;
    p.plain_power = true;
    const auto lin = simulate_var(p, rng);
    EstimatorConfig ksg, gauss;
    gauss.kind = EstimatorKind::Gaussian;
    const double k1 = transfer_entropy(lin.x, lin.y, ksg).value;
    const double g1 = transfer_entropy(lin.x, lin.y, gauss).value;
    CHECK(std::fabs(k1 - g1) < 0.02);

    p.d = 2.0;
    p.plain_power = false;
    const auto sq = simulate_var(p, rng);
    const double k2 = transfer_entropy(sq.x, sq.y, ksg).value;
    const double g2 = transfer_entropy(sq.x, sq.y, gauss).value;
    CHECK(k2 > 0.05);
    CHECK(k2 > 5.0 * std::max(g2, 0.0));
}

TEST_CASE("GARCH moments in closed form") {
    const auto m3 = garch_moments(garch_set3());
    CHECK(m3.sigma2 == doctest::Approx(0.14 / 0.11).epsilon(1e-12));
    CHECK(m3.s2 == doctest::Approx((0.5 * 0.14 / 0.11 + 0.1) / 0.9).epsilon(1e-12));
    CHECK(std::round(m3.sigma2 * 100) / 100 == doctest::Approx(1.27));
    CHECK(std::round(m3.s2 * 100) / 100 == doctest::Approx(0.82));

    const auto m1 = garch_moments(garch_set1());
    CHECK(m1.sigma2 == doctest::Approx(1.1));
    CHECK(m1.s2 == doctest::Approx(0.5));

    const auto m2 = garch_moments(garch_set2());
    CHECK(m2.sigma2 == doctest::Approx(0.125));
    CHECK(m2.s2 == doctest::Approx(0.2361).epsilon(1e-3));

    for (const auto& p : {garch_set1(), garch_set2(), garch_set3()}) {
        const auto m = garch_moments(p);
        const auto o = moment_oracle(p);
        CHECK(m.stationary);
        CHECK(m.sigma4 == doctest::Approx(o.sigma4).epsilon(1e-9));
        CHECK(m.s4 == doctest::Approx(o.s4).epsilon(1e-9));
        CHECK(m.sigma2_s2 == doctest::Approx(o.cross).epsilon(1e-9));
    }
    GarchParams bad = garch_set3();
    bad.gamma = 2.0;
    CHECK(!garch_moments(bad).stationary);
}

TEST_CASE("decoupled GARCH reduces to GARCH(1,1) plus i.i.d. spread") {
    GarchParams p;
    p.gamma = 0.0;
    p.b = 0.0;
    p.a = 0.0;
    p.alpha = 0.1;
    p.beta = 0.5;
    RngHandle rng(5);
    const auto g = simulate_garch_spread(p, 200000, rng);
    const double sigma2 = p.w / (1.0 - p.alpha - p.beta);
    CHECK(mean_sq(g.sigma) == doctest::Approx(sigma2).epsilon(0.02));
    CHECK(mean_sq(g.s) == doctest::Approx(p.c).epsilon(0.02));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(g.s[i] >= 0.0);
}

TEST_CASE("GARCH stationarity guard") {
    GarchParams p = garch_set3();
    p.alpha = 0.5;
    p.beta = 0.6;
    RngHandle rng(6);
    CHECK_THROWS_AS((void)simulate_garch_spread(p, 100, rng), ConfigError);
    const auto g = simulate_garch_spread(p, 4000, rng, true, 0);
    double first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < 2000; ++i) first += g.sigma[i] * g.sigma[i];
    for (std::size_t i = 2000; i < 4000; ++i) second += g.sigma[i] * g.sigma[i];
    CHECK(second > 10.0 * first);
}

TEST_CASE("spread density normalization and support") {
    for (double cstar : {0.0, 0.05, 0.4, 2.0}) {
        for (double c : {0.1, 0.5}) {
            const double lo = std::sqrt(cstar);
            CHECK(spread_density(lo * 0.999, cstar, c) == 0.0);
            CHECK(spread_density(lo - 0.1, cstar, c) == 0.0);
            const double total = integrate_1d([&](double y) { return spread_density(y, cstar, c); }, lo,
                                              std::numeric_limits<double>::infinity(), 1e-7);
            CHECK(std::fabs(total - 1.0) < 1e-6);
        }
    }
    const GarchParams p = garch_set3();
    const double cstar = p.a * 0.8 + p.b * (p.w + p.alpha * 0.3 + p.beta * 1.1 + p.gamma * 0.5);
    CHECK(spread_conditional_density(1.2, std::sqrt(0.8), std::sqrt(0.5), std::sqrt(0.3), std::sqrt(1.1), p) ==
          doctest::Approx(spread_density(1.2, cstar, p.c)));
}

TEST_CASE("simulated spreads follow the conditional density") {
    const GarchParams p = garch_set3();
    RngHandle rng(7);
    const auto g = simulate_garch_spread(p, 2002, rng);
    std::vector<double> u;
    for (std::size_t t = 2; t < g.s.size(); ++t) {
        const double cstar = p.a * g.s[t - 1] * g.s[t - 1] +
                             p.b * (p.w + p.alpha * g.r[t - 2] * g.r[t - 2] +
                                    p.beta * g.sigma[t - 2] * g.sigma[t - 2] + p.gamma * g.s[t - 2] * g.s[t - 2]);
        // y = sqrt(c* + v^2) removes the inverse square-root singularity at the support edge
        const auto integrand = [&](double v) {
            const double y = std::sqrt(cstar + v * v);
            return spread_density(y, cstar, p.c) * v / y;
        };
        const double F = integrate_1d(integrand, 0.0, std::sqrt(g.s[t] * g.s[t] - cstar), 1e-4);
        u.push_back(F);
    }
    std::vector<double> uniform(20000);
    RngHandle ur(8);
    for (auto& v : uniform) v = ur.uniform();
    CHECK(ks_2sample(u, uniform).p_value > 0.01);
}

TEST_CASE("TE oracles vanish without a channel") {
    GarchParams no_gamma = garch_set1();
    no_gamma.gamma = 0.0;
    RngHandle rng(9);
    const auto a = theoretical_te_s_to_r(no_gamma, 4000, 128, rng);
    CHECK(std::fabs(a.value) <= std::max(a.ci95, 1e-3));
    CHECK(a.rejected == 0);

    GarchParams no_b = garch_set2();
    no_b.b = 0.0;
    const auto b = theoretical_te_r_to_s(no_b, 4000, 128, rng);
    CHECK(std::fabs(b.value) <= std::max(b.ci95, 1e-3));
    CHECK(b.rejected == 0);
}

TEST_CASE("TE oracles on the reference sets") {
    RngHandle rng(10);
    const auto s1 = theoretical_te_s_to_r(garch_set1(), 4000, 128, rng);
    CHECK(s1.value > 3.0 * s1.ci95);
    CHECK(s1.rejected == 0);
    const auto s1b = theoretical_te_s_to_r(garch_set1(), 4000, 256, rng);
    CHECK(std::fabs(s1.value - s1b.value) < s1.ci95 + s1b.ci95);

    const auto r2 = theoretical_te_r_to_s(garch_set2(), 4000, 128, rng);
    CHECK(r2.value > 3.0 * r2.ci95);
    CHECK(r2.rejected == 0);

    CHECK_THROWS((void)theoretical_te_s_to_r(garch_set2(), 100, 10, rng));
    CHECK_THROWS((void)theoretical_te_r_to_s(garch_set1(), 100, 10, rng));
}

TEST_CASE("model parameter JSON") {
    const auto p = garch_params_from_json(to_json(garch_set1()));
    CHECK(p.gamma == 0.9);
    CHECK(p.a == 0.8);
    CHECK_THROWS_AS((void)garch_params_from_json(nlohmann::json{{"w", -1.0}}), ConfigError);
    CHECK_THROWS_AS((void)garch_params_from_json(nlohmann::json::array()), ConfigError);

    VarParams v;
    v.C_drive = SigmoidSpec{2.0, 0.05, 1000.0, 0.0};
    const auto back = var_params_from_json(to_json(v));
    REQUIRE(back.C_drive.schedule);
    CHECK(back.C_drive.schedule->s == 2.0);
    CHECK(back.K_drive.at(5.0) == 0.0);
    CHECK_THROWS_AS((void)var_params_from_json(nlohmann::json{{"C", {{"s", 1.0}}}}), ConfigError);
    CHECK(hidden_sampling_from_string("posterior") == HiddenSampling::Posterior);
    CHECK_THROWS_AS((void)hidden_sampling_from_string("exact"), ConfigError);
}
