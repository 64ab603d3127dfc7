#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "infodyn/point_cloud.hpp"
#include "infodyn/series.hpp"

namespace infodyn {

enum class EstimatorKind { Ksg, Gaussian };

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Ksg;
    int K = 4;      ///< nearest neighbours (KSG only)
    int k = 1;      ///< target history length
    int l = 1;      ///< source history length
    int m = 1;      ///< conditional history length
    int delay = 1;  ///< source delay
    /// Adds uniform noise of amplitude 1e-8 * std to every sample column before estimation.
    /// Off by default: it changes estimates and is meant only for heavily discretized data.
    bool jitter = false;
    std::uint64_t jitter_seed = 0;
    /// Keep per-sample local values in the result.
    bool keep_locals = false;

    [[nodiscard]] EmbeddingParams embedding() const { return {k, l, m, delay}; }
};

struct SignificanceRecord {
    double p_value = 1.0;
    int n_surrogates = 0;
    bool significant = false;
};

struct EstimateResult {
    std::string measure;
    double value = 0.0;  ///< nats
    EstimatorConfig config;
    std::size_t n = 0;
    std::optional<std::vector<double>> locals;
    std::optional<SignificanceRecord> significance;
    /// Per-source increments for collective TE, in summation order.
    std::vector<double> terms;
    std::vector<std::string> term_labels;
};

/// KSG estimate of I(X;Y|Z) in nats (Frenzel-Pompe form of the first KSG algorithm):
///   psi(K) - < psi(n_xz + 1) + psi(n_yz + 1) - psi(n_z + 1) >
/// with neighbour counts strictly inside the max-norm K-th neighbour distance of the joint
/// space. Without Z this is the plain KSG mutual information
///   psi(K) + psi(n) - < psi(n_x + 1) + psi(n_y + 1) >.
/// Columns are standardized first. Estimates are not clamped and may be slightly negative.
[[nodiscard]] EstimateResult ksg_cmi(const PointCloud& x, const PointCloud& y, const PointCloud* z, int K,
                                     bool keep_locals = false);

/// I(X;Y|Z) under a joint-Gaussian model from log-determinants of ML covariance blocks.
/// Throws NumericError on singular covariance.
[[nodiscard]] EstimateResult gaussian_cmi(const PointCloud& x, const PointCloud& y, const PointCloud* z,
                                          bool keep_locals = false);

/// Dispatches on cfg.kind and applies cfg.jitter.
[[nodiscard]] EstimateResult conditional_mutual_information(const PointCloud& x, const PointCloud& y,
                                                            const PointCloud* z, const EstimatorConfig& cfg);

/// Kozachenko-Leonenko differential entropy (nats) of the given samples under the max-norm.
double kl_entropy(const PointCloud& cloud, int K, std::vector<double>* locals = nullptr);

/// T_{Y->X} = I(Y^(l)_{t-delay}; X_t | X^(k)_{t-1}).
[[nodiscard]] EstimateResult transfer_entropy(const TimeSeries& source, const TimeSeries& target,
                                              const EstimatorConfig& cfg);

/// T_{Y->X|Z} = I(Y^(l)_{t-delay}; X_t | X^(k)_{t-1}, Z^(m)_{t-1}). Empty conditionals reduce to
/// transfer_entropy exactly.
[[nodiscard]] EstimateResult conditional_te(const TimeSeries& source, const TimeSeries& target,
                                            std::span<const TimeSeries> conditionals, const EstimatorConfig& cfg);

/// Collective TE as the incremental sum of conditional TE terms over `sources` in the given order.
/// The per-source breakdown is always attached.
[[nodiscard]] EstimateResult collective_te(const TimeSeries& target, std::span<const TimeSeries> sources,
                                           const EstimatorConfig& cfg);
/// Sources sorted by label, the default summation order.
[[nodiscard]] std::vector<TimeSeries> lexicographic_order(std::span<const TimeSeries> sources);

/// A_X = I(X^(k)_{t-1}; X_t).
[[nodiscard]] EstimateResult active_information_storage(const TimeSeries& x, const EstimatorConfig& cfg);

/// AIS-like quantity I(P^(k)_{t-1}; X_t) where the history comes from `past` (X itself for AIS).
/// Used for AIS surrogates, where `past` is a resampled copy of X.
[[nodiscard]] EstimateResult history_information(const TimeSeries& past, const TimeSeries& x,
                                                 const EstimatorConfig& cfg);

/// Multi-information: sum of marginal entropies minus joint entropy over N aligned series,
/// all Kozachenko-Leonenko estimates sharing K. The Gaussian kind uses -1/2 ln det(correlation).
[[nodiscard]] EstimateResult multi_information(std::span<const TimeSeries> series, const EstimatorConfig& cfg);

enum class LocalMeasure { TransferEntropy, ActiveInformationStorage, MultiInformation };

/// Per-sample local values. TE expects inputs = {source, target}; AIS expects {x}; MI expects the N series.
[[nodiscard]] std::vector<double> local_values(LocalMeasure measure, std::span<const TimeSeries> inputs,
                                               const EstimatorConfig& cfg);

/// History length k = argmax over kappa in [1, k_max] of AIS(kappa). A larger kappa replaces the
/// current best only when it improves AIS by more than `tie_tolerance` nats, so estimator noise
/// resolves toward the smaller history.
[[nodiscard]] int select_history(const TimeSeries& x, int k_max, const EstimatorConfig& cfg,
                                 double tie_tolerance = -1.0);
/// Default tie tolerance for select_history: 1/sqrt(n) nats.
[[nodiscard]] double default_history_tolerance(std::size_t n);

/// Delay in [delay_min, delay_max] maximizing TE (ties toward the smaller delay), with its estimate.
[[nodiscard]] std::pair<int, EstimateResult> select_delay(const TimeSeries& source, const TimeSeries& target,
                                                          int delay_min, int delay_max, const EstimatorConfig& cfg);

[[nodiscard]] std::string to_string(EstimatorKind kind);
[[nodiscard]] EstimatorKind estimator_kind_from_string(const std::string& s);
[[nodiscard]] nlohmann::json to_json(const EstimatorConfig& cfg);
/// {measure, value_nats, n, config, p_value?, significant?, n_surrogates?, locals?, terms?}
[[nodiscard]] nlohmann::json to_json(const EstimateResult& r);

}  // namespace infodyn
