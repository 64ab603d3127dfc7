#include "infodyn/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "infodyn/csv.hpp"
#include "infodyn/error.hpp"
#include "infodyn/inference.hpp"

namespace infodyn {

std::vector<TradeRecord> read_trades_csv(const std::string& path) {
    const CsvTable table = read_csv(path, {"timestamp_ms", "price", "volume", "side"});
    std::vector<TradeRecord> out;
    out.reserve(table.rows.size());
    for (const CsvRow& row : table.rows) {
        TradeRecord t;
        t.timestamp = parse_int64(row, 0, path);
        t.price = parse_double(row, 1, path);
        t.volume = parse_double(row, 2, path);
        const std::string& side = row.fields[3];
        if (side == "buy") {
            t.sign = 1;
        } else if (side == "sell") {
            t.sign = -1;
        } else {
            throw DataError(fmt::format("{}:{}: side must be buy or sell, got '{}'", path, row.line, side));
        }
        if (!(t.price > 0.0)) throw DataError(fmt::format("{}:{}: price must be positive", path, row.line));
        if (!(t.volume > 0.0)) throw DataError(fmt::format("{}:{}: volume must be positive", path, row.line));
        if (!out.empty() && t.timestamp < out.back().timestamp) {
            throw DataError(fmt::format("{}:{}: trades are not sorted by timestamp", path, row.line));
        }
        out.push_back(t);
    }
    return out;
}

std::vector<LobSnapshot> read_lob_csv(const std::string& path) {
    const CsvTable table = read_csv(path, {"timestamp_ms", "best_bid", "best_ask"});
    std::vector<LobSnapshot> out;
    out.reserve(table.rows.size());
    for (const CsvRow& row : table.rows) {
        LobSnapshot s;
        s.timestamp = parse_int64(row, 0, path);
        s.best_bid = parse_double(row, 1, path);
        s.best_ask = parse_double(row, 2, path);
        if (!(s.best_bid > 0.0) || !(s.best_ask > 0.0)) {
            throw DataError(fmt::format("{}:{}: quotes must be positive", path, row.line));
        }
        if (!out.empty() && s.timestamp <= out.back().timestamp) {
            throw DataError(fmt::format("{}:{}: snapshot timestamps must strictly increase", path, row.line));
        }
        out.push_back(s);
    }
    return out;
}

AlignedBook floor_align(std::span<const LobSnapshot> snapshots) {
    if (snapshots.empty()) throw DataError("floor_align: no snapshots");
    for (std::size_t i = 1; i < snapshots.size(); ++i) {
        if (snapshots[i].timestamp <= snapshots[i - 1].timestamp) {
            throw DataError(fmt::format("floor_align: timestamps not strictly increasing at snapshot {}", i));
        }
    }
    AlignedBook out;
    out.start = floor_minute(snapshots.front().timestamp);
    const std::int64_t last = floor_minute(snapshots.back().timestamp);
    const auto minutes = static_cast<std::size_t>((last - out.start) / minute_ms + 1);
    out.bid.resize(minutes);
    out.ask.resize(minutes);
    out.source_time.resize(minutes);
    out.gap.assign(minutes, true);
    std::size_t prev = 0;
    bool first = true;
    for (const LobSnapshot& s : snapshots) {
        const auto i = static_cast<std::size_t>((floor_minute(s.timestamp) - out.start) / minute_ms);
        if (!first && i == prev) {
            ++out.collisions;
            continue;
        }
        for (std::size_t j = first ? i : prev + 1; j < i; ++j) {
            out.bid[j] = out.bid[prev];
            out.ask[j] = out.ask[prev];
            out.source_time[j] = out.source_time[prev];
        }
        out.bid[i] = s.best_bid;
        out.ask[i] = s.best_ask;
        out.source_time[i] = s.timestamp;
        out.gap[i] = false;
        prev = i;
        first = false;
    }
    return out;
}

namespace {

void check_sorted(std::span<const TradeRecord> trades) {
    for (std::size_t i = 1; i < trades.size(); ++i) {
        if (trades[i].timestamp < trades[i - 1].timestamp) {
            throw DataError(fmt::format("order_imbalance: trades not sorted at record {}", i));
        }
    }
}

// Sum over trades with lo < timestamp <= hi; trades sorted.
void add_interval(std::span<const TradeRecord> trades, std::int64_t lo, std::int64_t hi, double& base,
                  double& quote) {
    auto first = std::upper_bound(trades.begin(), trades.end(), lo,
                                  [](std::int64_t t, const TradeRecord& r) { return t < r.timestamp; });
    for (auto it = first; it != trades.end() && it->timestamp <= hi; ++it) {
        const double sv = it->sign * it->volume;
        base += sv;
        quote += sv * it->price;
    }
}

}  // namespace

Imbalance order_imbalance(std::span<const TradeRecord> trades, std::span<const std::int64_t> grid,
                          std::int64_t agg_window) {
    if (agg_window <= 0) throw std::invalid_argument("order_imbalance: agg_window must be positive");
    check_sorted(trades);
    Imbalance out;
    out.base.assign(grid.size(), 0.0);
    out.quote.assign(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) add_interval(trades, grid[i] - agg_window, grid[i], out.base[i], out.quote[i]);
    return out;
}

Imbalance order_imbalance_between(std::span<const TradeRecord> trades, std::span<const std::int64_t> bounds) {
    check_sorted(trades);
    Imbalance out;
    const std::size_t n = bounds.empty() ? 0 : bounds.size() - 1;
    out.base.assign(n, 0.0);
    out.quote.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (bounds[i + 1] < bounds[i]) throw DataError("order_imbalance: interval bounds decrease");
        add_interval(trades, bounds[i], bounds[i + 1], out.base[i], out.quote[i]);
    }
    return out;
}

ObservableSet observables(std::span<const LobSnapshot> snapshots, std::span<const TradeRecord> trades,
                          const ObservableOptions& options, const std::string& market) {
    ObservableSet out;
    std::vector<LobSnapshot> valid;
    valid.reserve(snapshots.size());
    for (const LobSnapshot& s : snapshots) {
        if (s.best_ask < s.best_bid) {
            ++out.crossed_rejected;
        } else {
            valid.push_back(s);
        }
    }
    const AlignedBook book = floor_align(valid);
    if (book.size() < 2) throw DataError("observables: fewer than two aligned minutes");
    const std::size_t n = book.size() - 1;
    std::vector<double> mid(n), ret(n), spread(n);
    double prev_mid = 0.5 * (book.ask[0] + book.bid[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = 0.5 * (book.ask[i + 1] + book.bid[i + 1]);
        mid[i] = p;
        ret[i] = p - prev_mid;
        spread[i] = book.ask[i + 1] - book.bid[i + 1];
        prev_mid = p;
        if (book.gap[i + 1]) ++out.gap_minutes;
    }
    Imbalance imb;
    if (options.windows == ImbalanceWindows::SnapshotTimes) {
        imb = order_imbalance_between(trades, book.source_time);
    } else {
        std::vector<std::int64_t> grid(n);
        for (std::size_t i = 0; i < n; ++i) grid[i] = book.minute(i + 1);
        imb = order_imbalance(trades, grid, options.agg_window);
    }
    const std::int64_t start = book.minute(1);
    const std::string prefix = market.empty() ? std::string{} : market + ":";
    out.mid_price = TimeSeries(std::move(mid), start, minute_ms, prefix + "mid_price");
    out.returns = TimeSeries(std::move(ret), start, minute_ms, prefix + "returns");
    out.spread = TimeSeries(std::move(spread), start, minute_ms, prefix + "spread");
    out.imbalance_base = TimeSeries(std::move(imb.base), start, minute_ms, prefix + "imbalance");
    out.imbalance_quote = TimeSeries(std::move(imb.quote), start, minute_ms, prefix + "imbalance_quote");
    out.collisions = book.collisions;
    return out;
}

OffsetDiagnostics snapshot_offset_diagnostics(std::span<const LobSnapshot> a, std::span<const LobSnapshot> b) {
    OffsetDiagnostics d;
    std::map<std::int64_t, std::int64_t> first_a;
    for (const LobSnapshot& s : a) {
        const std::int64_t m = floor_minute(s.timestamp);
        first_a.emplace(m, s.timestamp);
        d.capture_second_a[static_cast<std::size_t>((s.timestamp - m) / 1000)]++;
    }
    std::map<std::int64_t, std::int64_t> first_b;
    for (const LobSnapshot& s : b) {
        const std::int64_t m = floor_minute(s.timestamp);
        first_b.emplace(m, s.timestamp);
        d.capture_second_b[static_cast<std::size_t>((s.timestamp - m) / 1000)]++;
    }
    for (const auto& [minute, ta] : first_a) {
        auto it = first_b.find(minute);
        if (it != first_b.end()) d.offsets_s.push_back(static_cast<double>(ta - it->second) / 1000.0);
    }
    if (d.offsets_s.empty()) throw DataError("snapshot_offset_diagnostics: no overlapping minutes");
    const double n = static_cast<double>(d.offsets_s.size());
    double mean = 0.0;
    for (double v : d.offsets_s) mean += v;
    mean /= n;
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : d.offsets_s) {
        const double c = v - mean;
        m2 += c * c;
        m3 += c * c * c;
    }
    m2 /= n;
    m3 /= n;
    d.mean_s = mean;
    d.skewness = m2 > 1e-24 ? m3 / std::pow(m2, 1.5) : 0.0;
    d.systematic_lag = std::fabs(mean) > 5.0;
    return d;
}

namespace {

std::int64_t floor_day(std::int64_t t) {
    const std::int64_t q = t / day_ms;
    return (t % day_ms < 0 ? q - 1 : q) * day_ms;
}

struct DailySums {
    std::vector<double> base;
    std::vector<double> quote;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<RegimeImbalanceRow> imbalance_regime_summary(
    std::span<const std::pair<std::string, std::vector<TradeRecord>>> markets, std::int64_t split_time,
    double alpha) {
    std::vector<RegimeImbalanceRow> rows;
    for (const auto& [name, trades] : markets) {
        check_sorted(trades);
        std::map<std::int64_t, std::pair<double, double>> before, after;
        for (const TradeRecord& t : trades) {
            auto& bucket = (t.timestamp < split_time ? before : after)[floor_day(t.timestamp)];
            const double sv = t.sign * t.volume;
            bucket.first += sv;
            bucket.second += sv * t.price;
        }
        if (before.empty() || after.empty()) {
            throw DataError(fmt::format("imbalance_regime_summary: market '{}' has an empty regime", name));
        }
        DailySums b, a;
        for (const auto& [day, v] : before) {
            b.base.push_back(v.first);
            b.quote.push_back(v.second);
        }
        for (const auto& [day, v] : after) {
            a.base.push_back(v.first);
            a.quote.push_back(v.second);
        }
        RegimeImbalanceRow row;
        row.market = name;
        row.mean_base_before = mean_of(b.base);
        row.mean_base_after = mean_of(a.base);
        row.mean_quote_before = mean_of(b.quote);
        row.mean_quote_after = mean_of(a.quote);
        row.days_before = b.base.size();
        row.days_after = a.base.size();
        if (row.days_before < 2 || row.days_after < 2) {
            row.warning = "KS test skipped: a regime has a single day";
        } else {
            row.ks_tested = true;
            row.ks_p_base = ks_2sample(b.base, a.base).p_value;
            row.ks_p_quote = ks_2sample(b.quote, a.quote).p_value;
            row.ks_reject_base = row.ks_p_base < alpha;
            row.ks_reject_quote = row.ks_p_quote < alpha;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_offset_diagnostics_csv(const std::string& path, const OffsetDiagnostics& d,
                                  std::span<const std::string> comments) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& c : comments) out << "# " << c << '\n';
    out << fmt::format("# mean_offset_s={} skewness={} systematic_lag={}\n", d.mean_s, d.skewness,
                       d.systematic_lag ? "true" : "false");
    out << "kind,bin,value\n";
    for (std::size_t s = 0; s < 60; ++s) out << fmt::format("capture_second_a,{},{}\n", s, d.capture_second_a[s]);
    for (std::size_t s = 0; s < 60; ++s) out << fmt::format("capture_second_b,{},{}\n", s, d.capture_second_b[s]);
    for (std::size_t i = 0; i < d.offsets_s.size(); ++i) out << fmt::format("offset_s,{},{}\n", i, d.offsets_s[i]);
    if (!out) throw DataError("write failed: " + path);
}

nlohmann::json to_json(const OffsetDiagnostics& d) {
    return {{"mean_offset_s", d.mean_s},
            {"skewness", d.skewness},
            {"systematic_lag", d.systematic_lag},
            {"shared_minutes", d.offsets_s.size()},
            {"capture_second_a", d.capture_second_a},
            {"capture_second_b", d.capture_second_b}};
}

nlohmann::json to_json(const RegimeImbalanceRow& r) {
    nlohmann::json j = {{"market", r.market},
                        {"mean_imbalance_quote_before", r.mean_quote_before},
                        {"mean_imbalance_quote_after", r.mean_quote_after},
                        {"mean_imbalance_before", r.mean_base_before},
                        {"mean_imbalance_after", r.mean_base_after},
                        {"days_before", r.days_before},
                        {"days_after", r.days_after},
                        {"ks_tested", r.ks_tested}};
    if (r.ks_tested) {
        j["ks_p_quote"] = r.ks_p_quote;
        j["ks_p"] = r.ks_p_base;
        j["ks_reject_quote"] = r.ks_reject_quote;
        j["ks_reject"] = r.ks_reject_base;
    }
    if (!r.warning.empty()) j["warning"] = r.warning;
    return j;
}

}  // namespace infodyn
