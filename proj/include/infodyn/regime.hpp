#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infodyn/estimators.hpp"
#include "infodyn/models.hpp"
#include "infodyn/random.hpp"

namespace infodyn {

/// How each run is reduced to before/after values.
enum class RegimeMode {
    PooledLocals,     ///< local values from one estimate over the whole run, averaged per side
    WindowEstimates,  ///< separate estimates on the before and after windows
};

enum class RegimeKind { CausalDriver, HiddenDriver, Uncertainty, Custom };

/// A VAR regime-shift experiment: the model, the transition step and the two comparison windows
/// [before_begin, before_end) and [after_begin, after_end) in simulation steps.
struct RegimeScenario {
    std::string name;
    RegimeKind kind = RegimeKind::Custom;
    VarParams params;
    std::size_t t_C = 1000;
    std::size_t before_begin = 400;
    std::size_t before_end = 900;
    std::size_t after_begin = 1100;
    std::size_t after_end = 1600;
};

/// Causal driver C(t) stepping from 0 to `s`, hidden driver K = 0.01.
[[nodiscard]] RegimeScenario causal_driver_step(double s = 2.0, double b = 0.05, double K = 0.01);
/// Hidden driver K(t) stepping from 0 to `s`, causal coupling C = 0.5.
[[nodiscard]] RegimeScenario hidden_driver_step(double s = 2.0, double b = 0.05, double C = 0.5);
/// Noise scales beta1 = beta2 stepping from 1 to 1 + s, with C = K = `coupling`.
[[nodiscard]] RegimeScenario uncertainty_step(double s = 2.0, double b = 0.05, double coupling = 0.3);

/// One of the three step scenarios with amplitude s, steepness b and constant coupling c.
[[nodiscard]] RegimeScenario make_regime_scenario(RegimeKind kind, double s, double b, double c);

struct PairedTest {
    double mean_diff = 0.0;  ///< mean of after - before
    double t = 0.0;
    double p_value = 1.0;  ///< two-sided
};

/// Paired two-sided t-test on after[i] - before[i]. A zero-variance difference gives p = 1 when
/// the mean difference is zero and p = 0 otherwise.
[[nodiscard]] PairedTest paired_t_test(std::span<const double> before, std::span<const double> after);

struct RegimeMeasure {
    std::string measure;  ///< "te" (X -> Y), "ais" (of Y) or "mi" (X, Y)
    std::vector<double> before;
    std::vector<double> after;
    PairedTest test;
    [[nodiscard]] double mean_before() const;
    [[nodiscard]] double mean_after() const;
};

struct RegimeEnsemble {
    std::string scenario;
    RegimeMode mode = RegimeMode::PooledLocals;
    int runs = 0;
    std::vector<RegimeMeasure> measures;  ///< te, ais, mi
    [[nodiscard]] const RegimeMeasure& get(const std::string& measure) const;
};

/// Simulates `runs` independent trajectories (run i uses rng.substream(i)) and compares the
/// before/after windows for TE, AIS and MI.
[[nodiscard]] RegimeEnsemble run_regime_ensemble(const RegimeScenario& scenario, const EstimatorConfig& cfg, int runs,
                                                 const RngHandle& rng, RegimeMode mode = RegimeMode::PooledLocals,
                                                 int workers = 1);

/// Expected signatures: causal driver, TE and AIS rise with MI flat; hidden driver, MI rises;
/// uncertainty, TE, AIS and MI all move the same way (direction reported, not prescribed).
/// Every asserted change must be significant at `alpha`; "flat" means not significant.
struct OrderingCheck {
    bool holds = false;
    int direction = 0;  ///< uncertainty scenario: common sign of the changes, 0 if mixed
    std::vector<std::string> failures;
};
[[nodiscard]] OrderingCheck check_expected_ordering(const RegimeScenario& scenario, const RegimeEnsemble& e,
                                                    double alpha = 0.01);

[[nodiscard]] RegimeScenario regime_scenario_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const RegimeEnsemble& e);
[[nodiscard]] std::string to_string(RegimeMode m);
[[nodiscard]] std::string to_string(RegimeKind k);
[[nodiscard]] RegimeKind regime_kind_from_string(const std::string& s);
[[nodiscard]] RegimeMode regime_mode_from_string(const std::string& s);

}  // namespace infodyn
