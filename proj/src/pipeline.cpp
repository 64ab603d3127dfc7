#include "infodyn/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "infodyn/error.hpp"
#include "infodyn/parallel.hpp"
#include "infodyn/version.hpp"

namespace infodyn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ByScope s) { return s == ByScope::Window ? "window" : "global"; }

ByScope by_scope_from_string(const std::string& s) {
    if (s == "window") return ByScope::Window;
    if (s == "global") return ByScope::Global;
    throw ConfigError("unknown BY scope: " + s);
}

namespace {

const std::set<std::string> lob_observables = {"returns", "imbalance", "spread", "imbalance_quote", "mid_price"};

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

std::pair<int, int> range_of(const json& j, const char* key, std::pair<int, int> fallback) {
    if (!j.contains(key)) return fallback;
    const json& r = j.at(key);
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
        throw ConfigError(fmt::format("config key '{}' must be [min, max]", key));
    }
    const int lo = r[0].get<int>();
    const int hi = r[1].get<int>();
    if (lo < 1 || hi < lo) throw ConfigError(fmt::format("config key '{}' is an empty or invalid range", key));
    return {lo, hi};
}

std::string resolve(const std::string& p, const fs::path& base) {
    fs::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal().string();
}

void require_file(const std::string& p) {
    if (!fs::is_regular_file(p)) throw ConfigError("input file not found: " + p);
}

}  // namespace

PipelineConfig pipeline_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    PipelineConfig cfg;
    if (!j.contains("markets") || !j.at("markets").is_array() || j.at("markets").empty()) {
        throw ConfigError("pipeline config needs a non-empty 'markets' list");
    }
    std::set<std::string> names;
    for (const json& m : j.at("markets")) {
        MarketInput in;
        in.name = get_or<std::string>(m, "name", "");
        if (in.name.empty()) throw ConfigError("every market needs a 'name'");
        if (in.name.find_first_of(",:/") != std::string::npos) {
            throw ConfigError("market names may not contain ',', ':' or '/': " + in.name);
        }
        if (!names.insert(in.name).second) throw ConfigError("duplicate market: " + in.name);
        if (m.contains("series")) {
            for (const auto& [obs, path] : m.at("series").items()) {
                in.series_paths[obs] = resolve(path.get<std::string>(), base_dir);
                require_file(in.series_paths[obs]);
            }
        }
        if (m.contains("lob")) {
            in.lob_path = resolve(m.at("lob").get<std::string>(), base_dir);
            require_file(in.lob_path);
        }
        if (m.contains("trades")) {
            in.trades_path = resolve(m.at("trades").get<std::string>(), base_dir);
            require_file(in.trades_path);
        }
        if (in.series_paths.empty() && (in.lob_path.empty() || in.trades_path.empty())) {
            throw ConfigError("market '" + in.name + "' needs either 'series' or both 'lob' and 'trades'");
        }
        cfg.markets.push_back(std::move(in));
    }
    if (j.contains("observables")) cfg.observables = j.at("observables").get<std::vector<std::string>>();
    if (cfg.observables.empty()) throw ConfigError("'observables' must not be empty");
    for (const auto& o : cfg.observables) {
        if (o.find_first_of(",:/") != std::string::npos) throw ConfigError("bad observable name: " + o);
        for (const auto& m : cfg.markets) {
            const bool from_series = m.series_paths.count(o) > 0;
            const bool from_lob = !m.lob_path.empty() && lob_observables.count(o) > 0;
            if (!from_series && !from_lob) {
                throw ConfigError(fmt::format("market '{}' provides no input for observable '{}'", m.name, o));
            }
        }
    }
    if (j.contains("window")) {
        const json& w = j.at("window");
        cfg.window.width = get_or<std::size_t>(w, "width", cfg.window.width);
        cfg.window.step = get_or<std::size_t>(w, "step", cfg.window.step);
    }
    if (cfg.window.width < 2 || cfg.window.step < 1 || cfg.window.step > cfg.window.width) {
        throw ConfigError("window needs width >= 2 and 1 <= step <= width");
    }
    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        cfg.estimator.kind = estimator_kind_from_string(get_or<std::string>(e, "kind", "ksg"));
        cfg.estimator.K = get_or<int>(e, "K", cfg.estimator.K);
        cfg.estimator.l = get_or<int>(e, "l", cfg.estimator.l);
        cfg.estimator.jitter = get_or<bool>(e, "jitter", cfg.estimator.jitter);
        const auto k = range_of(e, "k_range", {1, cfg.ais_k_max});
        const auto tk = range_of(e, "te_k_range", {1, cfg.te_k_max});
        if (k.first != 1 || tk.first != 1) throw ConfigError("history ranges must start at 1");
        cfg.ais_k_max = k.second;
        cfg.te_k_max = tk.second;
        const auto d = range_of(e, "delay_range", {cfg.delay_min, cfg.delay_max});
        cfg.delay_min = d.first;
        cfg.delay_max = d.second;
    }
    if (cfg.estimator.K < 1) throw ConfigError("estimator K must be >= 1");
    if (cfg.estimator.l < 1) throw ConfigError("estimator l must be >= 1");
    if (j.contains("significance")) {
        const json& s = j.at("significance");
        cfg.significance.n_surrogates = get_or<int>(s, "n_surrogates", cfg.significance.n_surrogates);
        cfg.significance.alpha = get_or<double>(s, "alpha", cfg.significance.alpha);
        cfg.significance.kind = surrogate_kind_from_string(get_or<std::string>(s, "kind", "circular_shift"));
        cfg.by = get_or<bool>(s, "by", cfg.by);
        cfg.by_scope = by_scope_from_string(get_or<std::string>(s, "by_scope", "window"));
        cfg.significance.stop_after_exceedances =
            get_or<int>(s, "stop_after_exceedances", cfg.significance.stop_after_exceedances);
    }
    if (cfg.significance.n_surrogates < 1) throw ConfigError("n_surrogates must be >= 1");
    if (cfg.significance.stop_after_exceedances < 0) throw ConfigError("stop_after_exceedances must be >= 0");
    if (!(cfg.significance.alpha > 0.0 && cfg.significance.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (j.contains("adf")) {
        cfg.adf_screening = get_or<bool>(j.at("adf"), "enabled", cfg.adf_screening);
        cfg.adf_max_lag = get_or<int>(j.at("adf"), "max_lag", cfg.adf_max_lag);
    }
    if (j.contains("measures")) {
        const json& m = j.at("measures");
        cfg.compute_ais = get_or<bool>(m, "ais", cfg.compute_ais);
        cfg.compute_collective = get_or<bool>(m, "collective_te", cfg.compute_collective);
        cfg.compute_multi_information = get_or<bool>(m, "multi_information", cfg.compute_multi_information);
        cfg.cross_observable = get_or<bool>(m, "cross_observable", cfg.cross_observable);
    }
    if (j.contains("imbalance")) {
        const json& im = j.at("imbalance");
        const auto w = get_or<std::string>(im, "windows", "snapshot_times");
        if (w == "snapshot_times") {
            cfg.observable_options.windows = ImbalanceWindows::SnapshotTimes;
        } else if (w == "grid") {
            cfg.observable_options.windows = ImbalanceWindows::Grid;
        } else {
            throw ConfigError("imbalance.windows must be 'snapshot_times' or 'grid'");
        }
        cfg.observable_options.agg_window = get_or<std::int64_t>(im, "agg_window_ms", minute_ms);
        if (cfg.observable_options.agg_window <= 0) throw ConfigError("imbalance.agg_window_ms must be positive");
    }
    if (j.contains("split_time")) cfg.split_time = j.at("split_time").get<std::int64_t>();
    cfg.output_dir = get_or<std::string>(j, "output_dir", "");
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.workers = get_or<int>(j, "workers", 1);
    if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
    return pipeline_config_from_json(j, fs::path(path).parent_path());
}

json to_json(const PipelineConfig& cfg) {
    json j;
    for (const auto& m : cfg.markets) {
        json mj = {{"name", m.name}};
        if (!m.series_paths.empty()) mj["series"] = m.series_paths;
        if (!m.lob_path.empty()) mj["lob"] = m.lob_path;
        if (!m.trades_path.empty()) mj["trades"] = m.trades_path;
        j["markets"].push_back(mj);
    }
    j["observables"] = cfg.observables;
    j["window"] = {{"width", cfg.window.width}, {"step", cfg.window.step}};
    j["estimator"] = {{"kind", to_string(cfg.estimator.kind)},
                      {"K", cfg.estimator.K},
                      {"l", cfg.estimator.l},
                      {"jitter", cfg.estimator.jitter},
                      {"k_range", {1, cfg.ais_k_max}},
                      {"te_k_range", {1, cfg.te_k_max}},
                      {"delay_range", {cfg.delay_min, cfg.delay_max}}};
    j["significance"] = {{"n_surrogates", cfg.significance.n_surrogates},
                         {"alpha", cfg.significance.alpha},
                         {"kind", to_string(cfg.significance.kind)},
                         {"by", cfg.by},
                         {"by_scope", to_string(cfg.by_scope)},
                         {"stop_after_exceedances", cfg.significance.stop_after_exceedances}};
    j["adf"] = {{"enabled", cfg.adf_screening}, {"max_lag", cfg.adf_max_lag}};
    j["measures"] = {{"ais", cfg.compute_ais},
                     {"collective_te", cfg.compute_collective},
                     {"multi_information", cfg.compute_multi_information},
                     {"cross_observable", cfg.cross_observable}};
    j["imbalance"] = {
        {"windows", cfg.observable_options.windows == ImbalanceWindows::Grid ? "grid" : "snapshot_times"},
        {"agg_window_ms", cfg.observable_options.agg_window}};
    if (cfg.split_time) j["split_time"] = *cfg.split_time;
    j["seed"] = cfg.seed;
    return j;
}

std::string config_hash(const PipelineConfig& cfg) { return fmt::format("{:016x}", fnv1a(to_json(cfg).dump())); }

std::string output_header(const std::string& hash, std::uint64_t seed) {
    return fmt::format("infodyn {} config_hash={} seed={}", version, hash, seed);
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("stage '{}': {}", name, e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("stage '{}': {}", name, e.what()));
    } catch (const NumericError& e) {
        throw NumericError(fmt::format("stage '{}': {}", name, e.what()));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(fmt::format("stage '{}': {}", name, e.what()));
    }
}

struct Loaded {
    std::vector<std::vector<TimeSeries>> series;  // [market][observable]
    std::vector<std::pair<std::string, std::vector<TradeRecord>>> trades;
    std::vector<std::pair<std::string, ObservableSet>> derived;
};

const TimeSeries& pick(const ObservableSet& s, const std::string& obs) {
    if (obs == "returns") return s.returns;
    if (obs == "imbalance") return s.imbalance_base;
    if (obs == "imbalance_quote") return s.imbalance_quote;
    if (obs == "spread") return s.spread;
    return s.mid_price;
}

Loaded load_inputs(const PipelineConfig& cfg) {
    Loaded out;
    for (const MarketInput& m : cfg.markets) {
        std::optional<ObservableSet> obs_set;
        if (!m.lob_path.empty() && !m.trades_path.empty()) {
            const auto lob = read_lob_csv(m.lob_path);
            auto trades = read_trades_csv(m.trades_path);
            obs_set = observables(lob, trades, cfg.observable_options, m.name);
            out.trades.emplace_back(m.name, std::move(trades));
            out.derived.emplace_back(m.name, *obs_set);
        }
        std::vector<TimeSeries> row;
        for (const auto& o : cfg.observables) {
            const std::string label = m.name + ":" + o;
            if (auto it = m.series_paths.find(o); it != m.series_paths.end()) {
                row.push_back(read_series_csv(it->second, label));
            } else {
                row.push_back(pick(*obs_set, o).with_label(label));
            }
        }
        out.series.push_back(std::move(row));
    }
    // Trim everything to the common time range.
    const std::int64_t period = out.series[0][0].period();
    std::int64_t start = out.series[0][0].start_time();
    std::int64_t end = out.series[0][0].timestamp(out.series[0][0].size() - 1);
    for (const auto& row : out.series) {
        for (const auto& s : row) {
            if (s.period() != period) throw DataError(s.label() + ": sampling period differs from the other inputs");
            if ((s.start_time() - out.series[0][0].start_time()) % period != 0) {
                throw DataError(s.label() + ": grid is offset from the other inputs");
            }
            start = std::max(start, s.start_time());
            end = std::min(end, s.timestamp(s.size() - 1));
        }
    }
    if (end < start) throw DataError("inputs share no common time range");
    const auto length = static_cast<std::size_t>((end - start) / period + 1);
    for (auto& row : out.series) {
        for (auto& s : row) s = s.slice(static_cast<std::size_t>((start - s.start_time()) / period), length);
    }
    return out;
}

struct Node {
    std::size_t market;
    std::size_t obs;
};

void apply_by(std::vector<std::pair<double*, bool*>>& family, double q, const std::vector<bool>& significant) {
    if (family.empty()) return;
    std::vector<double> p;
    p.reserve(family.size());
    for (const auto& f : family) p.push_back(*f.first);
    const auto mask = benjamini_yekutieli(p, q);
    for (std::size_t i = 0; i < family.size(); ++i) *family[i].second = mask[i] && significant[i];
}

struct Family {
    std::vector<std::pair<double*, bool*>> members;
    std::vector<bool> significant;
    void add(double* p, bool* accepted, bool sig) {
        members.emplace_back(p, accepted);
        significant.push_back(sig);
    }
};

PipelineWindow analyse_window(const PipelineConfig& cfg, const std::vector<std::vector<TimeSeries>>& all,
                              std::size_t w) {
    const std::size_t N = cfg.markets.size();
    const std::size_t O = cfg.observables.size();
    const std::size_t begin = w * cfg.window.step;
    std::vector<std::vector<TimeSeries>> x(N, std::vector<TimeSeries>(O));
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t o = 0; o < O; ++o) x[m][o] = all[m][o].slice(begin, cfg.window.width);
    }
    std::vector<Node> nodes;
    for (std::size_t m = 0; m < N; ++m) {
        for (std::size_t o = 0; o < O; ++o) nodes.push_back({m, o});
    }
    PipelineWindow out;
    out.screening.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        out.screening[i].market = cfg.markets[nodes[i].market].name;
        out.screening[i].observable = cfg.observables[nodes[i].obs];
    }
    const RngHandle root = RngHandle(cfg.seed).substream(w);

    stage("adf", [&] {
        if (!cfg.adf_screening) return;
        bool any = false;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const AdfResult r = adf_test(x[nodes[i].market][nodes[i].obs], cfg.adf_max_lag);
            out.screening[i].adf_statistic = r.statistic;
            out.screening[i].differenced = !r.reject_at_5pct;
            any = any || !r.reject_at_5pct;
        }
        if (!any) return;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            TimeSeries& s = x[nodes[i].market][nodes[i].obs];
            const std::string label = s.label();
            s = out.screening[i].differenced ? difference(s).with_label(label) : s.slice(1, s.size() - 1);
        }
    });
    out.result.index = w;
    out.result.start_time = x[0][0].start_time();
    out.result.end_time = x[0][0].timestamp(x[0][0].size() - 1);

    const EstimatorConfig base = [&] {
        EstimatorConfig c = cfg.estimator;
        c.keep_locals = false;
        c.jitter_seed = cfg.seed;
        return c;
    }();

    std::vector<int> ais_k(nodes.size(), 1);
    stage("history", [&] {
        parallel_for(nodes.size(), cfg.workers, [&](std::size_t i) {
            ais_k[i] = select_history(x[nodes[i].market][nodes[i].obs], cfg.ais_k_max, base);
            out.screening[i].k = ais_k[i];
        });
    });

    if (cfg.compute_ais) {
        stage("ais", [&] {
            out.result.ais.resize(nodes.size());
            parallel_for(nodes.size(), cfg.workers, [&](std::size_t i) {
                const TimeSeries& s = x[nodes[i].market][nodes[i].obs];
                EstimatorConfig c = base;
                c.k = ais_k[i];
                auto est = [&](const TimeSeries& past) { return history_information(past, s, c).value; };
                const double observed = active_information_storage(s, c).value;
                const auto t = surrogate_test(est, s, cfg.significance, root.substream(1).substream(i), observed);
                NodeValue& v = out.result.ais[i];
                v.market = cfg.markets[nodes[i].market].name;
                v.observable = cfg.observables[nodes[i].obs];
                v.value = t.observed;
                v.p_value = t.p_value;
                v.significant = t.significant;
                v.accepted = t.significant;
            });
        });
    }

    struct Pair {
        std::size_t src;
        std::size_t dst;
    };
    std::vector<Pair> pairs;
    for (std::size_t d = 0; d < nodes.size(); ++d) {
        for (std::size_t s = 0; s < nodes.size(); ++s) {
            if (s == d) continue;
            const bool same_obs = nodes[s].obs == nodes[d].obs;
            const bool same_market = nodes[s].market == nodes[d].market;
            if ((same_obs && !same_market) || (cfg.cross_observable && same_market && !same_obs)) {
                pairs.push_back({s, d});
            }
        }
    }
    stage("transfer_entropy", [&] {
        out.result.links.resize(pairs.size());
        parallel_for(pairs.size(), cfg.workers, [&](std::size_t i) {
            const Node& sn = nodes[pairs[i].src];
            const Node& dn = nodes[pairs[i].dst];
            const TimeSeries& source = x[sn.market][sn.obs];
            const TimeSeries& target = x[dn.market][dn.obs];
            EstimatorConfig c = base;
            c.k = std::min(ais_k[pairs[i].dst], cfg.te_k_max);
            auto [delay, first] = select_delay(source, target, cfg.delay_min, cfg.delay_max, c);
            c.delay = delay;
            auto est = [&](const TimeSeries& s) { return transfer_entropy(s, target, c).value; };
            const auto t = surrogate_test(est, source, cfg.significance, root.substream(2).substream(i), first.value);
            TeLink& l = out.result.links[i];
            l.src_market = cfg.markets[sn.market].name;
            l.dst_market = cfg.markets[dn.market].name;
            l.src_obs = cfg.observables[sn.obs];
            l.dst_obs = cfg.observables[dn.obs];
            l.value = t.observed;
            l.delay = delay;
            l.k = c.k;
            l.p_value = t.p_value;
            l.significant = t.significant;
            l.accepted = t.significant;
        });
    });

    if (cfg.compute_collective && N >= 2) {
        stage("collective_te", [&] {
            out.result.collective_te.resize(nodes.size());
            parallel_for(nodes.size(), cfg.workers, [&](std::size_t i) {
                const Node& dn = nodes[i];
                const TimeSeries& target = x[dn.market][dn.obs];
                std::vector<TimeSeries> raw;
                for (std::size_t m = 0; m < N; ++m) {
                    if (m != dn.market) raw.push_back(x[m][dn.obs]);
                }
                const std::vector<TimeSeries> sources = lexicographic_order(raw);
                EstimatorConfig c = base;
                c.k = std::min(ais_k[i], cfg.te_k_max);
                const double observed = collective_te(target, sources, c).value;
                const RngHandle rng = root.substream(3).substream(i);
                const auto t = run_surrogates(observed, cfg.significance, [&](std::size_t j) {
                    const RngHandle sub = rng.substream(j);
                    std::vector<TimeSeries> shifted;
                    for (std::size_t b = 0; b < sources.size(); ++b) {
                        RngHandle r = sub.substream(b);
                        shifted.push_back(make_surrogate(sources[b], cfg.significance.kind, r));
                    }
                    return collective_te(target, shifted, c).value;
                });
                NodeValue& v = out.result.collective_te[i];
                v.market = cfg.markets[dn.market].name;
                v.observable = cfg.observables[dn.obs];
                v.value = observed;
                v.p_value = t.p_value;
                v.significant = t.significant;
                v.accepted = t.significant;
            });
        });
    }

    if (cfg.compute_multi_information && N >= 2) {
        stage("multi_information", [&] {
            out.result.multi_information.resize(O);
            parallel_for(O, cfg.workers, [&](std::size_t o) {
                std::vector<TimeSeries> group;
                for (std::size_t m = 0; m < N; ++m) group.push_back(x[m][o]);
                const double observed = multi_information(group, base).value;
                const RngHandle rng = root.substream(4).substream(o);
                const auto t = run_surrogates(observed, cfg.significance, [&](std::size_t j) {
                    const RngHandle sub = rng.substream(j);
                    std::vector<TimeSeries> shifted{group[0]};
                    for (std::size_t m = 1; m < N; ++m) {
                        RngHandle r = sub.substream(m);
                        shifted.push_back(make_surrogate(group[m], cfg.significance.kind, r));
                    }
                    return multi_information(shifted, base).value;
                });
                NodeValue& v = out.result.multi_information[o];
                v.observable = cfg.observables[o];
                v.value = observed;
                v.p_value = t.p_value;
                v.significant = t.significant;
                v.accepted = t.significant;
            });
        });
    }
    return out;
}

void correct_by(const PipelineConfig& cfg, std::vector<PipelineWindow>& windows) {
    const double q = cfg.significance.alpha;
    auto run_families = [&](std::size_t first, std::size_t last) {
        Family links, ais, coll, mi;
        for (std::size_t w = first; w < last; ++w) {
            WindowResult& r = windows[w].result;
            for (auto& l : r.links) links.add(&l.p_value, &l.accepted, l.significant);
            for (auto& v : r.ais) ais.add(&v.p_value, &v.accepted, v.significant);
            for (auto& v : r.collective_te) coll.add(&v.p_value, &v.accepted, v.significant);
            for (auto& v : r.multi_information) mi.add(&v.p_value, &v.accepted, v.significant);
        }
        for (Family* f : {&links, &ais, &coll, &mi}) apply_by(f->members, q, f->significant);
    };
    if (cfg.by_scope == ByScope::Global) {
        run_families(0, windows.size());
    } else {
        for (std::size_t w = 0; w < windows.size(); ++w) run_families(w, w + 1);
    }
}

std::string b(bool v) { return v ? "1" : "0"; }

std::ofstream open_output(const fs::path& path, const std::string& header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "# " << header << '\n';
    return out;
}

void write_outputs(const PipelineConfig& cfg, const PipelineResult& res, const Loaded& loaded) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    const std::string header = output_header(res.config_hash, cfg.seed);
    const std::vector<std::string> comments{header};

    {
        auto out = open_output(dir / "links.csv", header);
        out << "window,src_market,dst_market,src_obs,dst_obs,k,delay,te_nats,p_value,significant,accepted\n";
        for (const auto& pw : res.windows) {
            for (const auto& l : pw.result.links) {
                out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", pw.result.index, l.src_market, l.dst_market,
                                   l.src_obs, l.dst_obs, l.k, l.delay, l.value, l.p_value, b(l.significant),
                                   b(l.accepted));
            }
        }
    }
    {
        auto out = open_output(dir / "nodes.csv", header);
        out << "window,market,observable,adf_stat,differenced,k,ais_nats,ais_p,ais_accepted,collective_te_nats,"
               "collective_p,collective_accepted\n";
        for (const auto& pw : res.windows) {
            for (std::size_t i = 0; i < pw.screening.size(); ++i) {
                const auto& s = pw.screening[i];
                std::string ais = ",,";
                std::string coll = ",,";
                if (i < pw.result.ais.size()) {
                    const auto& v = pw.result.ais[i];
                    ais = fmt::format("{},{},{}", v.value, v.p_value, b(v.accepted));
                }
                if (i < pw.result.collective_te.size()) {
                    const auto& v = pw.result.collective_te[i];
                    coll = fmt::format("{},{},{}", v.value, v.p_value, b(v.accepted));
                }
                out << fmt::format("{},{},{},{},{},{},{},{}\n", pw.result.index, s.market, s.observable,
                                   s.adf_statistic, b(s.differenced), s.k, ais, coll);
            }
        }
    }
    {
        auto out = open_output(dir / "multi_information.csv", header);
        out << "window,observable,mi_nats,p_value,accepted\n";
        for (const auto& pw : res.windows) {
            for (const auto& v : pw.result.multi_information) {
                out << fmt::format("{},{},{},{},{}\n", pw.result.index, v.observable, v.value, v.p_value,
                                   b(v.accepted));
            }
        }
    }
    for (const auto& pw : res.windows) {
        const std::span<const WindowResult> one(&pw.result, 1);
        write_edge_list_csv((dir / fmt::format("graph_window_{}.csv", pw.result.index)).string(),
                            build_info_graph(one, res.markets, res.observables), comments);
    }
    write_edge_list_csv((dir / "graph_all_windows.csv").string(), res.graph, comments);
    for (const auto& [market, set] : loaded.derived) {
        for (const auto& o : res.observables) {
            if (lob_observables.count(o)) {
                write_series_csv((dir / fmt::format("{}_{}.csv", market, o)).string(), pick(set, o), comments);
            }
        }
    }

    json summary;
    summary["meta"] = {{"tool", "infodyn"}, {"version", version}, {"config_hash", res.config_hash}, {"seed", cfg.seed}};
    summary["config"] = to_json(cfg);
    summary["windows"] = json::array();
    for (const auto& pw : res.windows) {
        json wj = window_summary(pw.result, res.markets, res.observables);
        for (const auto& s : pw.screening) {
            wj["screening"].push_back({{"market", s.market},
                                       {"observable", s.observable},
                                       {"adf_statistic", s.adf_statistic},
                                       {"differenced", s.differenced},
                                       {"k", s.k}});
        }
        summary["windows"].push_back(wj);
    }
    if (res.markets.size() >= 2) {
        for (const auto& [o, w] : omega(res.graph)) {
            summary["omega_all_windows"][o] = {{"self", w.self}, {"in", w.in}, {"out", w.out}};
        }
    }
    if (cfg.split_time) {
        json reg;
        reg["split_time"] = *cfg.split_time;
        for (const auto& r : res.regime_averages) reg["market_averages"].push_back(to_json(r));
        for (const auto& o : res.observables) {
            double sums[2][4] = {};
            std::size_t counts[2] = {};
            for (const auto& pw : res.windows) {
                const auto& w = pw.result;
                int side = -1;
                if (w.end_time < *cfg.split_time) side = 0;
                if (w.start_time >= *cfg.split_time) side = 1;
                if (side < 0) continue;
                sums[side][0] += total_apparent_te(w, o);
                sums[side][1] += total_collective_te(w, o);
                sums[side][2] += system_multi_information(w, o);
                sums[side][3] += average_ais(w, o);
                ++counts[side];
            }
            static const char* names[4] = {"total_apparent_te", "total_collective_te", "multi_information",
                                           "average_ais"};
            static const char* sides[2] = {"before", "after"};
            for (int s = 0; s < 2; ++s) {
                for (int k = 0; k < 4; ++k) {
                    reg["system"][o][sides[s]][names[k]] =
                        counts[s] ? json(sums[s][k] / static_cast<double>(counts[s])) : json(nullptr);
                }
                reg["system"][o][sides[s]]["windows"] = counts[s];
            }
        }
        for (const auto& r : res.imbalance_summary) reg["imbalance"].push_back(to_json(r));
        summary["regimes"] = reg;
    }
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw DataError("cannot write summary.json");
    out << summary.dump(2) << '\n';
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
    PipelineResult res;
    res.config_hash = config_hash(cfg);
    for (const auto& m : cfg.markets) res.markets.push_back(m.name);
    res.observables = cfg.observables;
    const Loaded loaded = stage("load", [&] { return load_inputs(cfg); });
    const std::size_t length = loaded.series[0][0].size();
    const std::size_t n_windows = window_count(length, cfg.window);
    if (n_windows == 0) {
        throw DataError(fmt::format("stage 'window': {} common samples are fewer than the window width {}", length,
                                    cfg.window.width));
    }
    for (std::size_t w = 0; w < n_windows; ++w) res.windows.push_back(analyse_window(cfg, loaded.series, w));
    if (cfg.by) stage("benjamini_yekutieli", [&] { correct_by(cfg, res.windows); });
    stage("aggregate", [&] {
        std::vector<WindowResult> results;
        for (const auto& pw : res.windows) results.push_back(pw.result);
        res.graph = build_info_graph(results, res.markets, res.observables);
        if (cfg.split_time) {
            res.regime_averages = market_averages(results, *cfg.split_time);
            if (loaded.trades.size() == cfg.markets.size()) {
                res.imbalance_summary = imbalance_regime_summary(loaded.trades, *cfg.split_time);
            }
        }
    });
    if (!cfg.output_dir.empty()) stage("output", [&] { write_outputs(cfg, res, loaded); });
    return res;
}

}  // namespace infodyn
