#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infodyn/estimators.hpp"
#include "infodyn/inference.hpp"
#include "infodyn/metrics.hpp"
#include "infodyn/microstructure.hpp"
#include "infodyn/series.hpp"

namespace infodyn {

/// A market's inputs: either raw LOB snapshots and trades, or ready-made observable series.
struct MarketInput {
    std::string name;
    std::string lob_path;
    std::string trades_path;
    std::map<std::string, std::string> series_paths;  ///< observable -> `timestamp_ms,value` CSV
};

enum class ByScope {
    Window,  ///< one family per window and measure type
    Global,  ///< one family per measure type across all windows
};

struct PipelineConfig {
    std::vector<MarketInput> markets;
    std::vector<std::string> observables = {"returns", "imbalance", "spread"};
    WindowSpec window{10080, 4320};
    EstimatorConfig estimator;  ///< K and l are used; k and delay are selected per window
    int ais_k_max = 60;
    int te_k_max = 10;
    int delay_min = 1;
    int delay_max = 10;
    SignificanceSpec significance;
    bool by = true;
    ByScope by_scope = ByScope::Window;
    bool adf_screening = true;
    int adf_max_lag = -1;
    bool cross_observable = true;
    bool compute_ais = true;
    bool compute_collective = true;
    bool compute_multi_information = true;
    ObservableOptions observable_options;
    std::optional<std::int64_t> split_time;
    std::string output_dir;
    std::uint64_t seed = 0;
    int workers = 1;
};

/// Parses the JSON config. Relative paths resolve against `base_dir`. Throws ConfigError on a
/// malformed config, an empty range or a missing input file.
[[nodiscard]] PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                                       const std::filesystem::path& base_dir = {});
[[nodiscard]] PipelineConfig load_pipeline_config(const std::string& path);
/// Canonical JSON of the effective configuration (what the config hash covers).
[[nodiscard]] nlohmann::json to_json(const PipelineConfig& cfg);
[[nodiscard]] std::string config_hash(const PipelineConfig& cfg);

struct NodeScreening {
    std::string market;
    std::string observable;
    double adf_statistic = 0.0;
    bool differenced = false;
    int k = 1;
};

struct PipelineWindow {
    WindowResult result;
    std::vector<NodeScreening> screening;
};

struct PipelineResult {
    std::vector<std::string> markets;
    std::vector<std::string> observables;
    std::vector<PipelineWindow> windows;
    std::vector<RegimeAverage> regime_averages;
    std::vector<RegimeImbalanceRow> imbalance_summary;
    InfoGraph graph;  ///< averaged over all windows
    std::string config_hash;
};

/// Loads inputs, then per window: ADF screening (a series with a unit root is differenced and
/// the window's other series drop their first sample to stay aligned), history and delay
/// selection, AIS, pairwise and collective TE, multi-information, surrogate tests and
/// Benjamini-Yekutieli correction, then aggregation. Writes outputs when output_dir is set.
/// A failing stage rethrows its error with the stage named.
[[nodiscard]] PipelineResult run_pipeline(const PipelineConfig& cfg);

/// The header line carried by every output file.
[[nodiscard]] std::string output_header(const std::string& config_hash, std::uint64_t seed);

[[nodiscard]] std::string to_string(ByScope s);
[[nodiscard]] ByScope by_scope_from_string(const std::string& s);

}  // namespace infodyn
