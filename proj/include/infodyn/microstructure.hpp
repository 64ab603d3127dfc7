#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "infodyn/series.hpp"

namespace infodyn {

inline constexpr std::int64_t minute_ms = 60'000;
inline constexpr std::int64_t day_ms = 86'400'000;

struct TradeRecord {
    std::int64_t timestamp = 0;  ///< epoch ms
    double price = 0.0;
    double volume = 0.0;  ///< base currency
    int sign = 1;         ///< +1 buyer-initiated, -1 seller-initiated
};

struct LobSnapshot {
    std::int64_t timestamp = 0;
    double best_bid = 0.0;
    double best_ask = 0.0;
};

/// `timestamp_ms,price,volume,side` with side in {buy, sell}. Rows must be time-ordered.
[[nodiscard]] std::vector<TradeRecord> read_trades_csv(const std::string& path);
/// `timestamp_ms,best_bid,best_ask[,...]`; deeper book columns are ignored. Crossed books are
/// kept here and rejected later by observables().
[[nodiscard]] std::vector<LobSnapshot> read_lob_csv(const std::string& path);

[[nodiscard]] constexpr std::int64_t floor_minute(std::int64_t t) {
    const std::int64_t q = t / minute_ms;
    return (t % minute_ms < 0 ? q - 1 : q) * minute_ms;
}

/// Snapshots on a one-minute grid. Minute i is start + i * minute_ms.
struct AlignedBook {
    std::int64_t start = 0;
    std::vector<double> bid;
    std::vector<double> ask;
    std::vector<std::int64_t> source_time;  ///< exact timestamp of the snapshot used
    std::vector<bool> gap;                  ///< forward-filled minute
    std::size_t collisions = 0;             ///< later snapshots dropped within an occupied minute

    [[nodiscard]] std::size_t size() const { return bid.size(); }
    [[nodiscard]] std::int64_t minute(std::size_t i) const {
        return start + static_cast<std::int64_t>(i) * minute_ms;
    }
};

/// Floors each snapshot to its minute, keeping the earliest snapshot of each minute and
/// forward-filling empty minutes. Throws DataError unless timestamps strictly increase.
[[nodiscard]] AlignedBook floor_align(std::span<const LobSnapshot> snapshots);

struct Imbalance {
    std::vector<double> base;   ///< sum of sign * volume
    std::vector<double> quote;  ///< sum of sign * volume * price
};

/// Signed volume over (t - agg_window, t] for each grid time t.
[[nodiscard]] Imbalance order_imbalance(std::span<const TradeRecord> trades, std::span<const std::int64_t> grid,
                                        std::int64_t agg_window = minute_ms);
/// Signed volume over (bounds[i], bounds[i+1]] for consecutive boundaries.
[[nodiscard]] Imbalance order_imbalance_between(std::span<const TradeRecord> trades,
                                                std::span<const std::int64_t> bounds);

enum class ImbalanceWindows {
    Grid,           ///< (tau - agg_window, tau] on the minute grid
    SnapshotTimes,  ///< (t_{i-1}, t_i] between the exact times of consecutive snapshots
};

struct ObservableOptions {
    ImbalanceWindows windows = ImbalanceWindows::SnapshotTimes;
    std::int64_t agg_window = minute_ms;
};

struct ObservableSet {
    TimeSeries mid_price;
    TimeSeries returns;
    TimeSeries spread;
    TimeSeries imbalance_base;
    TimeSeries imbalance_quote;
    std::size_t crossed_rejected = 0;
    std::size_t gap_minutes = 0;
    std::size_t collisions = 0;
};

/// Mid-price, returns, spread and order imbalances on the shared minute grid. The first aligned
/// minute only seeds the first return, so every series starts one minute after it. Snapshots
/// with ask < bid are dropped (and counted) before alignment.
[[nodiscard]] ObservableSet observables(std::span<const LobSnapshot> snapshots, std::span<const TradeRecord> trades,
                                        const ObservableOptions& options = {}, const std::string& market = {});

struct OffsetDiagnostics {
    std::array<std::size_t, 60> capture_second_a{};
    std::array<std::size_t, 60> capture_second_b{};
    std::vector<double> offsets_s;  ///< t_a - t_b for each shared minute
    double mean_s = 0.0;
    double skewness = 0.0;
    bool systematic_lag = false;  ///< |mean| > 5 s
};

/// Capture-second histograms of two markets' snapshots and their same-minute time offsets.
/// Throws DataError when no minute is shared.
[[nodiscard]] OffsetDiagnostics snapshot_offset_diagnostics(std::span<const LobSnapshot> a,
                                                            std::span<const LobSnapshot> b);

struct RegimeImbalanceRow {
    std::string market;
    double mean_quote_before = 0.0;
    double mean_quote_after = 0.0;
    double mean_base_before = 0.0;
    double mean_base_after = 0.0;
    std::size_t days_before = 0;
    std::size_t days_after = 0;
    bool ks_tested = false;
    double ks_p_quote = 1.0;
    double ks_p_base = 1.0;
    bool ks_reject_quote = false;
    bool ks_reject_base = false;
    std::string warning;
};

/// Daily sums of realised imbalance averaged per regime, with two-sided KS tests of the
/// before/after daily sums. A trade at or after split_time belongs to the later regime.
[[nodiscard]] std::vector<RegimeImbalanceRow> imbalance_regime_summary(
    std::span<const std::pair<std::string, std::vector<TradeRecord>>> markets, std::int64_t split_time,
    double alpha = 0.01);

void write_offset_diagnostics_csv(const std::string& path, const OffsetDiagnostics& d,
                                  std::span<const std::string> comments = {});
[[nodiscard]] nlohmann::json to_json(const OffsetDiagnostics& d);
[[nodiscard]] nlohmann::json to_json(const RegimeImbalanceRow& r);

}  // namespace infodyn
