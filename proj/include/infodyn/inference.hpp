#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infodyn/estimators.hpp"
#include "infodyn/random.hpp"
#include "infodyn/series.hpp"

namespace infodyn {

enum class SurrogateKind { CircularShift, Shuffle };

struct SignificanceSpec {
    int n_surrogates = 100;
    double alpha = 0.05;
    SurrogateKind kind = SurrogateKind::CircularShift;
    /// Sequential stopping after this many surrogates reach the observed value (0 = off). A test
    /// stopped after L surrogates reports p = h / L; one that runs to n_surrogates uses the usual
    /// formula.
    int stop_after_exceedances = 0;
};

struct SurrogateOutcome {
    double observed = 0.0;
    double p_value = 1.0;
    bool significant = false;
    int n_surrogates = 0;  ///< surrogates actually evaluated
    bool stopped_early = false;
    std::vector<double> null_values;  ///< estimates on surrogate sources, in surrogate order
};

/// Coupling-destroyed copy of `source`: a circular shift by a uniform offset in [n/4, 3n/4], or a
/// random permutation. Timestamps and label are kept.
[[nodiscard]] TimeSeries make_surrogate(const TimeSeries& source, SurrogateKind kind, RngHandle& rng);

/// Core of every surrogate test: null_value(j) evaluates surrogate j. Results do not depend on
/// `workers`.
[[nodiscard]] SurrogateOutcome run_surrogates(double observed, const SignificanceSpec& spec,
                                              const std::function<double(std::size_t)>& null_value, int workers = 1);

/// Re-evaluates `estimate` on surrogate copies of `source`; surrogate j draws from rng.substream(j).
/// p = (1 + #{surrogate >= observed}) / (1 + n); significant when p <= alpha. `observed` is computed
/// from the unmodified source when not supplied.
[[nodiscard]] SurrogateOutcome surrogate_test(const std::function<double(const TimeSeries&)>& estimate,
                                              const TimeSeries& source, const SignificanceSpec& spec,
                                              const RngHandle& rng, std::optional<double> observed = std::nullopt,
                                              int workers = 1);

/// Benjamini-Yekutieli step-up at FDR level q with the harmonic correction sum_{i<=m} 1/i.
[[nodiscard]] std::vector<bool> benjamini_yekutieli(std::span<const double> p_values, double q);

struct BiasRow {
    int K = 0;
    int n_slice = 0;
    double mean_te = 0.0;
    double std_te = 0.0;
    bool std_defined = false;  ///< false for a single slice (std reported as 0)
};

/// TE(source -> target) on n equal disjoint slices for n = 1..max_slices and each K.
[[nodiscard]] std::vector<BiasRow> subsample_bias_profile(const TimeSeries& source, const TimeSeries& target,
                                                          const EstimatorConfig& cfg, std::span<const int> K_list,
                                                          int max_slices, int workers = 1);
void write_bias_profile_csv(const std::string& path, std::span<const BiasRow> rows,
                            std::span<const std::string> comments = {});

struct AdfResult {
    double statistic = 0.0;
    double critical_5pct = 0.0;
    int lags = 0;
    std::size_t n_obs = 0;
    bool reject_at_5pct = false;
};

/// Default ADF lag order floor((n - 1)^(1/3)).
[[nodiscard]] int default_adf_lags(std::size_t n);
/// 5% critical value of the constant-only Dickey-Fuller t statistic for a regression on T observations.
[[nodiscard]] double adf_critical_value_5pct(std::size_t T);
/// Augmented Dickey-Fuller test with constant: dx_t = c + g x_{t-1} + sum_i phi_i dx_{t-i} + e.
/// max_lag < 0 selects default_adf_lags. Rejecting means no unit root at 5%.
[[nodiscard]] AdfResult adf_test(const TimeSeries& x, int max_lag = -1);

struct KsResult {
    double D = 0.0;
    double p_value = 1.0;
};

/// Two-sided two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
[[nodiscard]] KsResult ks_2sample(std::span<const double> a, std::span<const double> b);

[[nodiscard]] std::string to_string(SurrogateKind kind);
[[nodiscard]] SurrogateKind surrogate_kind_from_string(const std::string& s);

}  // namespace infodyn
