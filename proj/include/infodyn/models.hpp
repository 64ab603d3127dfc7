#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "infodyn/random.hpp"
#include "infodyn/series.hpp"

namespace infodyn {

/// Logistic transition s / (1 + exp(-b (t - t_C))) + C.
struct SigmoidSpec {
    double s = 0.0;
    double b = 0.0;
    double t_C = 0.0;
    double C = 0.0;
};

[[nodiscard]] double sigmoid(double t, const SigmoidSpec& spec);

/// A model coefficient that is either constant or follows a sigmoid schedule in time.
struct Coefficient {
    double constant = 0.0;
    std::optional<SigmoidSpec> schedule;

    Coefficient() = default;
    Coefficient(double c) : constant(c) {}  // NOLINT: implicit on purpose
    Coefficient(const SigmoidSpec& s) : schedule(s) {}  // NOLINT

    [[nodiscard]] double at(double t) const { return schedule ? sigmoid(t, *schedule) : constant; }
};

struct VarParams {
    double alpha1 = 0.2;
    double alpha2 = 0.2;
    Coefficient beta1 = 1.0;
    Coefficient beta2 = 1.0;
    Coefficient K_drive = 0.0;
    Coefficient C_drive = 0.0;
    double d = 0.5;
    std::size_t T = 1000;
    /// Use X^d instead of |X|^d in the coupling term.
    bool plain_power = false;
    std::size_t burn_in = 1000;
};

struct VarSeries {
    TimeSeries x;
    TimeSeries y;
};

/// X_t = a1 X_{t-1} + b1(t) e1 + K(t) e;  Y_t = a2 Y_{t-1} + b2(t) e2 + K(t) e + C(t) |X_{t-1}|^d.
/// Time t = 0 is the first returned sample; the burn-in runs at t < 0 from X = Y = 0.
[[nodiscard]] VarSeries simulate_var(const VarParams& p, RngHandle& rng);

struct GarchParams {
    double w = 0.1;
    double alpha = 0.1;
    double beta = 0.5;
    double gamma = 0.5;
    double a = 0.1;
    double b = 0.5;
    double c = 0.1;

    /// (1 - alpha - beta)(1 - a) - gamma b
    [[nodiscard]] double stationarity_margin() const { return (1.0 - alpha - beta) * (1.0 - a) - gamma * b; }
    [[nodiscard]] bool stationary() const { return a < 1.0 && stationarity_margin() > 0.0; }
};

/// The three reference parameter sets: spread drives returns, returns drive spread, bidirectional.
[[nodiscard]] GarchParams garch_set1();
[[nodiscard]] GarchParams garch_set2();
[[nodiscard]] GarchParams garch_set3();

struct GarchSeries {
    TimeSeries r;
    TimeSeries s;
    TimeSeries sigma;  ///< volatility sigma_t (square root of the conditional variance)
};

/// r_t = sigma_t e1;  sigma_t^2 = w + alpha r_{t-1}^2 + beta sigma_{t-1}^2 + gamma s_{t-1}^2;
/// s_t = sqrt(a s_{t-1}^2 + b sigma_{t-1}^2 + c e2^2). Starts at the unconditional means and
/// discards `burn_in` steps. Throws ConfigError on non-stationary parameters unless allowed.
[[nodiscard]] GarchSeries simulate_garch_spread(const GarchParams& p, std::size_t T, RngHandle& rng,
                                                bool allow_nonstationary = false, std::size_t burn_in = 1000);

struct GarchMoments {
    double sigma2 = 0.0;
    double s2 = 0.0;
    double sigma4 = 0.0;
    double s4 = 0.0;
    double sigma2_s2 = 0.0;
    bool stationary = false;
    bool moments_finite = false;
};

/// Unconditional second moments in closed form and fourth moments from the linear 3x3 system.
/// Throws NumericError when that system is singular.
[[nodiscard]] GarchMoments garch_moments(const GarchParams& p);

/// Density of s_t = sqrt(c* + c e^2) at y, e standard normal. Zero for y <= sqrt(c*).
[[nodiscard]] double spread_density(double y, double c_star, double c);

/// Conditional density of s_t given s_{t-1}, s_{t-2}, r_{t-2}, sigma_{t-2}.
[[nodiscard]] double spread_conditional_density(double y, double s_prev1, double s_prev2, double r_prev2,
                                                double sigma_prev2, const GarchParams& p);

struct OracleResult {
    double value = 0.0;  ///< nats
    double std_error = 0.0;
    double ci95 = 0.0;  ///< half-width of the 95% interval
    std::size_t n_outer = 0;
    std::size_t n_inner = 0;
    std::size_t rejected = 0;  ///< outer samples with a non-finite log ratio
};

/// How the TE oracles draw the hidden volatility (and spread) they marginalize over.
///  Marginal:  independent draws from the stationary marginals, ignoring what the conditioning
///             values reveal about the hidden state.
///  Posterior: draws from a long stationary run, self-normalized by the likelihood of the
///             conditioning values, which targets the conditional density itself.
enum class HiddenSampling { Marginal, Posterior };

/// Model-based T_{s->r} (target and source history 1) for b = 0 by Monte-Carlo marginalization of
/// the hidden volatility sigma_{t-1}, and of s_{t-1} for the reduced density.
[[nodiscard]] OracleResult theoretical_te_s_to_r(const GarchParams& p, std::size_t n_outer, std::size_t n_inner,
                                                 RngHandle& rng,
                                                 HiddenSampling sampling = HiddenSampling::Marginal);

/// Model-based T_{r->s} with target history 2 and source history 2 at delay 1, for gamma = 0,
/// marginalizing sigma_{t-2} (and r_{t-2} for the reduced density).
[[nodiscard]] OracleResult theoretical_te_r_to_s(const GarchParams& p, std::size_t n_outer, std::size_t n_inner,
                                                 RngHandle& rng,
                                                 HiddenSampling sampling = HiddenSampling::Marginal);

[[nodiscard]] std::string to_string(HiddenSampling s);
[[nodiscard]] HiddenSampling hidden_sampling_from_string(const std::string& s);

[[nodiscard]] GarchParams garch_params_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const GarchParams& p);
[[nodiscard]] VarParams var_params_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const VarParams& p);
[[nodiscard]] nlohmann::json to_json(const GarchMoments& m);
[[nodiscard]] nlohmann::json to_json(const OracleResult& r);

}  // namespace infodyn
