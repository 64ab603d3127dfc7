#include "infodyn/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "infodyn/error.hpp"

namespace infodyn {

double total_apparent_te(const WindowResult& w, const std::string& observable) {
    double sum = 0.0;
    for (const TeLink& l : w.links) {
        if (l.accepted && l.src_obs == observable && l.dst_obs == observable && l.src_market != l.dst_market) {
            sum += l.value;
        }
    }
    return sum;
}

double total_collective_te(const WindowResult& w, const std::string& observable) {
    double sum = 0.0;
    for (const NodeValue& v : w.collective_te) {
        if (v.accepted && v.observable == observable) sum += v.value;
    }
    return sum;
}

double system_multi_information(const WindowResult& w, const std::string& observable) {
    for (const NodeValue& v : w.multi_information) {
        if (v.observable == observable) return v.accepted ? v.value : 0.0;
    }
    return 0.0;
}

double average_ais(const WindowResult& w, const std::string& observable) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const NodeValue& v : w.ais) {
        if (v.observable != observable) continue;
        ++count;
        if (v.accepted) sum += v.value;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<RegimeAverage> market_averages(std::span<const WindowResult> windows, std::int64_t split_time) {
    if (windows.empty()) throw std::invalid_argument("market_averages: no windows");
    struct Acc {
        double ais_b = 0, ais_a = 0, coll_b = 0, coll_a = 0;
        std::size_t n_ais_b = 0, n_ais_a = 0, n_coll_b = 0, n_coll_a = 0;
        std::size_t win_b = 0, win_a = 0;
    };
    std::map<std::pair<std::string, std::string>, Acc> acc;
    for (const WindowResult& w : windows) {
        const bool before = w.end_time < split_time;
        const bool after = w.start_time >= split_time;
        for (const NodeValue& v : w.ais) {
            Acc& a = acc[{v.market, v.observable}];
            const double x = v.accepted ? v.value : 0.0;
            if (before) {
                a.ais_b += x;
                ++a.n_ais_b;
                ++a.win_b;
            } else if (after) {
                a.ais_a += x;
                ++a.n_ais_a;
                ++a.win_a;
            }
        }
        for (const NodeValue& v : w.collective_te) {
            Acc& a = acc[{v.market, v.observable}];
            const double x = v.accepted ? v.value : 0.0;
            if (before) {
                a.coll_b += x;
                ++a.n_coll_b;
            } else if (after) {
                a.coll_a += x;
                ++a.n_coll_a;
            }
        }
    }
    std::vector<RegimeAverage> out;
    for (const auto& [key, a] : acc) {
        RegimeAverage r;
        r.market = key.first;
        r.observable = key.second;
        if (a.n_ais_b) r.ais_before = a.ais_b / static_cast<double>(a.n_ais_b);
        if (a.n_ais_a) r.ais_after = a.ais_a / static_cast<double>(a.n_ais_a);
        if (a.n_coll_b) r.collective_before = a.coll_b / static_cast<double>(a.n_coll_b);
        if (a.n_coll_a) r.collective_after = a.coll_a / static_cast<double>(a.n_coll_a);
        r.windows_before = a.win_b;
        r.windows_after = a.win_a;
        out.push_back(std::move(r));
    }
    return out;
}

InfoGraph build_info_graph(std::span<const WindowResult> windows, std::span<const std::string> markets,
                           std::span<const std::string> observables) {
    InfoGraph g;
    g.markets.assign(markets.begin(), markets.end());
    g.observables.assign(observables.begin(), observables.end());
    if (windows.empty()) return g;
    using Key = std::tuple<std::string, std::string, std::string, std::string>;
    std::map<Key, double> sums;
    auto known = [](std::span<const std::string> set, const std::string& s) {
        return std::find(set.begin(), set.end(), s) != set.end();
    };
    for (const WindowResult& w : windows) {
        for (const TeLink& l : w.links) {
            if (!l.accepted) continue;
            if (!known(markets, l.src_market) || !known(markets, l.dst_market) || !known(observables, l.src_obs) ||
                !known(observables, l.dst_obs)) {
                continue;
            }
            const bool same_obs = l.src_obs == l.dst_obs;
            const bool same_market = l.src_market == l.dst_market;
            if (same_obs == same_market) {
                throw DataError(fmt::format("info graph: link {}:{} -> {}:{} is neither cross-market nor cross-observable",
                                            l.src_market, l.src_obs, l.dst_market, l.dst_obs));
            }
            sums[{l.src_market, l.dst_market, l.src_obs, l.dst_obs}] += l.value;
        }
    }
    const double nw = static_cast<double>(windows.size());
    for (const auto& [k, v] : sums) {
        g.edges.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), v / nw});
    }
    return g;
}

std::map<std::string, Omega> omega(const InfoGraph& graph) {
    const std::size_t N = graph.markets.size();
    if (N < 2) throw std::invalid_argument("omega: need at least two markets");
    const double norm = static_cast<double>(N * (N - 1));
    const std::size_t n_obs = graph.observables.size();
    const double cross_norm = n_obs > 1 ? static_cast<double>(N * (n_obs - 1)) : 1.0;
    std::map<std::string, Omega> out;
    for (const auto& o : graph.observables) out[o];
    for (const InfoEdge& e : graph.edges) {
        if (e.src_obs == e.dst_obs) {
            out[e.src_obs].self += e.value;
        } else {
            out[e.src_obs].out += e.value;
            out[e.dst_obs].in += e.value;
        }
    }
    for (auto& [name, w] : out) {
        w.self /= norm;
        w.in /= cross_norm;
        w.out /= cross_norm;
    }
    return out;
}

void write_edge_list_csv(const std::string& path, const InfoGraph& graph, std::span<const std::string> comments) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "src_market,dst_market,src_obs,dst_obs,te_nats\n";
    for (const InfoEdge& e : graph.edges) {
        out << fmt::format("{},{},{},{},{}\n", e.src_market, e.dst_market, e.src_obs, e.dst_obs, e.value);
    }
    if (!out) throw DataError("write failed: " + path);
}

nlohmann::json window_summary(const WindowResult& w, std::span<const std::string> markets,
                              std::span<const std::string> observables) {
    nlohmann::json j;
    j["window"] = w.index;
    j["start_ms"] = w.start_time;
    j["end_ms"] = w.end_time;
    const std::span<const WindowResult> one(&w, 1);
    const InfoGraph g = build_info_graph(one, markets, observables);
    std::map<std::string, Omega> om;
    if (markets.size() >= 2) om = omega(g);
    for (const auto& o : observables) {
        nlohmann::json t;
        t["total_apparent_te"] = total_apparent_te(w, o);
        t["total_collective_te"] = total_collective_te(w, o);
        t["multi_information"] = system_multi_information(w, o);
        t["average_ais"] = average_ais(w, o);
        if (auto it = om.find(o); it != om.end()) {
            t["omega_self"] = it->second.self;
            t["omega_in"] = it->second.in;
            t["omega_out"] = it->second.out;
        }
        j["observables"][o] = t;
    }
    std::size_t accepted = 0;
    for (const TeLink& l : w.links) accepted += l.accepted ? 1 : 0;
    j["links_tested"] = w.links.size();
    j["links_accepted"] = accepted;
    return j;
}

nlohmann::json to_json(const RegimeAverage& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"market", r.market},
            {"observable", r.observable},
            {"ais_before", opt(r.ais_before)},
            {"ais_after", opt(r.ais_after)},
            {"collective_te_before", opt(r.collective_before)},
            {"collective_te_after", opt(r.collective_after)},
            {"windows_before", r.windows_before},
            {"windows_after", r.windows_after}};
}

}  // namespace infodyn
