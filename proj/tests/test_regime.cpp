#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "infodyn/error.hpp"
#include "infodyn/regime.hpp"

using namespace infodyn;

namespace {

// Student t with 3 degrees of freedom has a closed-form CDF.
double t3_two_sided(double t) {
    const double a = std::fabs(t) / std::sqrt(3.0);
    const double cdf = 0.5 + (a / (1.0 + a * a) + std::atan(a)) / std::numbers::pi;
    return 2.0 * (1.0 - cdf);
}

RegimeMeasure measure(const char* name, double diff, double p) {
    RegimeMeasure m;
    m.measure = name;
    m.before = {0.0, 0.0};
    m.after = {diff, diff};
    m.test.mean_diff = diff;
    m.test.p_value = p;
    return m;
}

RegimeEnsemble ensemble(double te, double pte, double ais, double pais, double mi, double pmi) {
    RegimeEnsemble e;
    e.runs = 2;
    e.measures = {measure("te", te, pte), measure("ais", ais, pais), measure("mi", mi, pmi)};
    return e;
}

}  // namespace

TEST_CASE("paired t test") {
    const std::vector<double> before{1, 2, 3, 4}, after{2, 4, 5, 4};
    // differences 1 2 2 0: mean 1.25, sample variance 11/12
    const double t_oracle = 1.25 / std::sqrt(11.0 / 12.0 / 4.0);
    const auto r = paired_t_test(before, after);
    CHECK(r.mean_diff == doctest::Approx(1.25));
    CHECK(r.t == doctest::Approx(t_oracle).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(t3_two_sided(t_oracle)).epsilon(1e-9));

    const auto flipped = paired_t_test(after, before);
    CHECK(flipped.t == doctest::Approx(-t_oracle));
    CHECK(flipped.p_value == doctest::Approx(r.p_value));

    const std::vector<double> shifted{2, 3, 4, 5};
    const auto exact = paired_t_test(before, shifted);
    CHECK(exact.p_value == 0.0);
    CHECK(std::isinf(exact.t));
    CHECK(paired_t_test(before, before).p_value == 1.0);

    const std::vector<double> one{1.0}, three{1, 2, 3};
    CHECK_THROWS_AS((void)paired_t_test(one, one), std::invalid_argument);
    CHECK_THROWS_AS((void)paired_t_test(before, three), std::invalid_argument);
}

TEST_CASE("scenario construction") {
    const auto c = make_regime_scenario(RegimeKind::CausalDriver, 4.0, 0.5, 0.01);
    CHECK(c.kind == RegimeKind::CausalDriver);
    REQUIRE(c.params.C_drive.schedule);
    CHECK(c.params.C_drive.schedule->s == 4.0);
    CHECK(!c.params.K_drive.schedule);
    CHECK(c.params.K_drive.constant == 0.01);
    CHECK(c.params.T == 2000);
    CHECK(c.before_end <= c.t_C);
    CHECK(c.after_begin >= c.t_C);

    const auto h = make_regime_scenario(RegimeKind::HiddenDriver, 2.0, 0.05, 0.5);
    REQUIRE(h.params.K_drive.schedule);
    CHECK(h.params.C_drive.constant == 0.5);

    const auto u = make_regime_scenario(RegimeKind::Uncertainty, 1.0, 0.01, 0.3);
    REQUIRE(u.params.beta1.schedule);
    CHECK(u.params.beta1.at(0.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(u.params.beta1.at(4000.0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(u.params.beta2.at(1000.0) == doctest::Approx(1.5));

    CHECK_THROWS_AS((void)make_regime_scenario(RegimeKind::Custom, 1, 1, 1), ConfigError);
}

TEST_CASE("expected ordering signatures") {
    const auto causal = causal_driver_step();
    CHECK(check_expected_ordering(causal, ensemble(0.1, 1e-5, 0.05, 1e-4, 0.001, 0.4)).holds);
    auto bad = check_expected_ordering(causal, ensemble(0.1, 1e-5, 0.05, 0.2, 0.02, 1e-6));
    CHECK(!bad.holds);
    CHECK(bad.failures.size() == 2);
    CHECK(!check_expected_ordering(causal, ensemble(-0.1, 1e-5, 0.05, 1e-4, 0.0, 0.5)).holds);

    const auto hidden = hidden_driver_step();
    CHECK(check_expected_ordering(hidden, ensemble(0.0, 0.9, -0.2, 1e-3, 0.3, 1e-8)).holds);
    CHECK(!check_expected_ordering(hidden, ensemble(0.0, 0.9, 0.0, 0.9, 0.3, 0.02)).holds);

    const auto unc = uncertainty_step();
    const auto down = check_expected_ordering(unc, ensemble(-0.1, 1e-4, -0.1, 1e-4, -0.1, 1e-4));
    CHECK(down.holds);
    CHECK(down.direction == -1);
    CHECK(check_expected_ordering(unc, ensemble(0.1, 1e-4, 0.1, 1e-4, 0.1, 1e-4)).direction == 1);
    const auto mixed = check_expected_ordering(unc, ensemble(0.1, 1e-4, -0.1, 1e-4, 0.1, 1e-4));
    CHECK(!mixed.holds);
    CHECK(mixed.direction == 0);
    CHECK(!check_expected_ordering(unc, ensemble(0.1, 1e-4, 0.1, 1e-4, 0.1, 0.5)).holds);

    CHECK_THROWS_AS((void)ensemble(0, 1, 0, 1, 0, 1).get("cte"), std::invalid_argument);
}

TEST_CASE("ensemble is reproducible and independent of workers") {
    RegimeScenario sc = causal_driver_step(2.0, 0.05, 0.01);
    sc.params.T = 700;
    sc.t_C = 350;
    sc.params.C_drive = SigmoidSpec{2.0, 0.05, 350.0, 0.0};
    sc.before_begin = 50;
    sc.before_end = 300;
    sc.after_begin = 400;
    sc.after_end = 650;
    EstimatorConfig cfg;
    const RngHandle rng(11);
    for (const RegimeMode mode : {RegimeMode::PooledLocals, RegimeMode::WindowEstimates}) {
        const auto a = run_regime_ensemble(sc, cfg, 4, rng, mode, 1);
        const auto b = run_regime_ensemble(sc, cfg, 4, rng, mode, 3);
        CHECK(a.runs == 4);
        for (const char* m : {"te", "ais", "mi"}) {
            CHECK(a.get(m).before == b.get(m).before);
            CHECK(a.get(m).after == b.get(m).after);
            CHECK(a.get(m).test.p_value == b.get(m).test.p_value);
        }
        CHECK(to_json(a).dump() == to_json(b).dump());
    }

    CHECK_THROWS_AS((void)run_regime_ensemble(sc, cfg, 1, rng), ConfigError);
    RegimeScenario outside = sc;
    outside.after_end = 800;
    CHECK_THROWS_AS((void)run_regime_ensemble(outside, cfg, 3, rng), ConfigError);
}

TEST_CASE("scenario json and names") {
    const nlohmann::json j = {{"name", "mine"},
                              {"kind", "hidden_driver"},
                              {"params", {{"alpha1", 0.2}, {"alpha2", 0.2}, {"beta1", 1.0}, {"beta2", 1.0},
                                          {"K", {{"s", 2.0}, {"b", 0.05}, {"t_C", 1000}, {"C", 0.0}}},
                                          {"C", 0.5}, {"d", 0.5}, {"T", 2000}}},
                              {"before_begin", 300}};
    const auto sc = regime_scenario_from_json(j);
    CHECK(sc.name == "mine");
    CHECK(sc.kind == RegimeKind::HiddenDriver);
    CHECK(sc.before_begin == 300);
    CHECK(sc.after_end == 1600);
    CHECK_THROWS_AS((void)regime_scenario_from_json(nlohmann::json::array()), ConfigError);
    CHECK_THROWS_AS((void)regime_scenario_from_json({{"kind", "causal_driver"}}), ConfigError);

    for (auto k : {RegimeKind::CausalDriver, RegimeKind::HiddenDriver, RegimeKind::Uncertainty, RegimeKind::Custom}) {
        CHECK(regime_kind_from_string(to_string(k)) == k);
    }
    for (auto m : {RegimeMode::PooledLocals, RegimeMode::WindowEstimates}) {
        CHECK(regime_mode_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS((void)regime_kind_from_string("steady"), ConfigError);
    CHECK_THROWS_AS((void)regime_mode_from_string("pooled"), ConfigError);
}
