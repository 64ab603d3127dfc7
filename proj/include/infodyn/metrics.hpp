#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace infodyn {

/// One tested TE link. `accepted` is the significance decision after any multiple-testing step.
struct TeLink {
    std::string src_market;
    std::string dst_market;
    std::string src_obs;
    std::string dst_obs;
    double value = 0.0;
    int delay = 1;
    int k = 1;
    double p_value = 1.0;
    bool significant = false;
    bool accepted = false;
};

/// A per-market (AIS, collective TE) or per-observable (multi-information) value.
struct NodeValue {
    std::string market;  ///< empty for system-level values
    std::string observable;
    double value = 0.0;
    double p_value = 1.0;
    bool significant = false;
    bool accepted = false;
};

struct WindowResult {
    std::size_t index = 0;
    std::int64_t start_time = 0;
    std::int64_t end_time = 0;  ///< timestamp of the last sample
    std::vector<TeLink> links;
    std::vector<NodeValue> ais;
    std::vector<NodeValue> collective_te;
    std::vector<NodeValue> multi_information;
};

/// Sum over ordered market pairs of accepted same-observable TE.
[[nodiscard]] double total_apparent_te(const WindowResult& w, const std::string& observable);
/// Sum over markets of accepted collective TE.
[[nodiscard]] double total_collective_te(const WindowResult& w, const std::string& observable);
/// The accepted multi-information of the observable across markets (0 when not accepted or absent).
[[nodiscard]] double system_multi_information(const WindowResult& w, const std::string& observable);
/// Mean over markets of AIS, non-accepted values counting as 0.
[[nodiscard]] double average_ais(const WindowResult& w, const std::string& observable);

struct RegimeAverage {
    std::string market;
    std::string observable;
    std::optional<double> ais_before;
    std::optional<double> ais_after;
    std::optional<double> collective_before;
    std::optional<double> collective_after;
    std::size_t windows_before = 0;
    std::size_t windows_after = 0;
};

/// Per-market window averages of AIS and collective TE before and after split_time. A window is
/// "before" when it ends before the split and "after" when it starts at or after it; windows that
/// straddle the split are left out. Throws std::invalid_argument on an empty window set.
[[nodiscard]] std::vector<RegimeAverage> market_averages(std::span<const WindowResult> windows,
                                                         std::int64_t split_time);

struct InfoEdge {
    std::string src_market;
    std::string dst_market;
    std::string src_obs;
    std::string dst_obs;
    double value = 0.0;
};

struct InfoGraph {
    std::vector<std::string> markets;
    std::vector<std::string> observables;
    std::vector<InfoEdge> edges;
};

/// Accepted links, averaged over the given windows (a link missing or rejected in a window
/// contributes 0). Same-observable edges join distinct markets; cross-observable edges stay
/// within one market. Throws DataError on a link that breaks either rule.
[[nodiscard]] InfoGraph build_info_graph(std::span<const WindowResult> windows, std::span<const std::string> markets,
                                         std::span<const std::string> observables);

struct Omega {
    double self = 0.0;
    double in = 0.0;
    double out = 0.0;
};

/// Link strengths per observable, each averaged over its possible links: N(N-1) market pairs for
/// self, N markets times the other observables for in and out.
/// Throws std::invalid_argument for fewer than two markets.
[[nodiscard]] std::map<std::string, Omega> omega(const InfoGraph& graph);

void write_edge_list_csv(const std::string& path, const InfoGraph& graph, std::span<const std::string> comments = {});
/// Totals and omega per observable for one window.
[[nodiscard]] nlohmann::json window_summary(const WindowResult& w, std::span<const std::string> markets,
                                            std::span<const std::string> observables);
[[nodiscard]] nlohmann::json to_json(const RegimeAverage& r);

}  // namespace infodyn
