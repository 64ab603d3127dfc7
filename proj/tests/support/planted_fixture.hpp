#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "infodyn/random.hpp"
#include "infodyn/series.hpp"

namespace fixtures {

// (src_market, dst_market, src_obs, dst_obs)
using Link = std::tuple<std::string, std::string, std::string, std::string>;

inline const std::array<std::string, 3> planted_markets{"A", "B", "C"};
inline const std::array<std::string, 3> planted_observables{"returns", "imbalance", "spread"};

inline std::set<Link> planted_links() {
    return {{"A", "B", "returns", "returns"},
            {"B", "C", "spread", "spread"},
            {"A", "A", "imbalance", "returns"},
            {"C", "C", "returns", "spread"}};
}

// Nine AR(1) nodes (coefficient 0.3, unit Gaussian noise); each planted link adds
// `coupling` times the source's previous value to the target. Writes one CSV per node and
// returns the pipeline "markets" block pointing at them.
inline nlohmann::json write_planted_fixture(const std::filesystem::path& dir, std::uint64_t seed, std::size_t n,
                                            double coupling = 0.6) {
    std::filesystem::create_directories(dir);
    infodyn::RngHandle rng(seed);
    const std::size_t burn = 200;
    const auto links = planted_links();
    auto index = [](const std::string& m, const std::string& o) {
        std::size_t mi = 0, oi = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            if (planted_markets[i] == m) mi = i;
            if (planted_observables[i] == o) oi = i;
        }
        return mi * 3 + oi;
    };
    std::vector<std::array<double, 9>> v(n + burn);
    v[0].fill(0.0);
    for (std::size_t t = 1; t < n + burn; ++t) {
        for (std::size_t i = 0; i < 9; ++i) v[t][i] = 0.3 * v[t - 1][i] + rng.normal();
        for (const auto& [sm, dm, so, dobs] : links) v[t][index(dm, dobs)] += coupling * v[t - 1][index(sm, so)];
    }
    nlohmann::json markets = nlohmann::json::array();
    for (std::size_t m = 0; m < 3; ++m) {
        nlohmann::json entry{{"name", planted_markets[m]}};
        for (std::size_t o = 0; o < 3; ++o) {
            std::vector<double> values(n);
            for (std::size_t t = 0; t < n; ++t) values[t] = v[t + burn][m * 3 + o];
            const auto file = dir / fmt::format("{}_{}.csv", planted_markets[m], planted_observables[o]);
            infodyn::write_series_csv(file.string(), infodyn::TimeSeries(std::move(values), 0, 60000));
            entry["series"][planted_observables[o]] = file.string();
        }
        markets.push_back(entry);
    }
    return markets;
}

}  // namespace fixtures
