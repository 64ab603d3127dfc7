#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "infodyn/csv.hpp"
#include "infodyn/error.hpp"
#include "infodyn/estimators.hpp"
#include "infodyn/inference.hpp"
#include "infodyn/microstructure.hpp"
#include "infodyn/models.hpp"
#include "infodyn/pipeline.hpp"
#include "infodyn/regime.hpp"
#include "infodyn/series.hpp"
#include "infodyn/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace infodyn;

namespace {

std::string hash_of(const json& j) { return fmt::format("{:016x}", fnv1a(j.dump())); }

std::string header_line(const json& args, std::uint64_t seed) {
    return fmt::format("infodyn {} config_hash={} seed={}", version, hash_of(args), seed);
}

json meta(const json& args, std::uint64_t seed) {
    return {{"tool", "infodyn"}, {"version", version}, {"config_hash", hash_of(args)}, {"seed", seed}};
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
}

void emit_json(const json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw DataError("cannot write " + out);
    f << j.dump(2) << '\n';
}

GarchParams garch_from(const std::string& set, const std::string& params_file) {
    if (!params_file.empty()) return garch_params_from_json(read_json(params_file));
    if (set == "set1") return garch_set1();
    if (set == "set2") return garch_set2();
    if (set == "set3") return garch_set3();
    throw ConfigError("unknown GARCH parameter set: " + set + " (use set1, set2 or set3)");
}

struct Common {
    std::uint64_t seed = 0;
    int workers = 1;
};

// simulate ----------------------------------------------------------------------------------

struct SimulateArgs {
    std::string model;
    std::string params;
    std::string set = "set3";
    std::size_t T = 10000;
    std::string out = ".";
    bool allow_nonstationary = false;
};

void cmd_simulate(const SimulateArgs& a, const Common& c) {
    fs::create_directories(a.out);
    const fs::path dir(a.out);
    RngHandle rng(c.seed);
    json params;
    std::vector<std::pair<std::string, TimeSeries>> outputs;
    if (a.model == "garch") {
        const GarchParams p = garch_from(a.set, a.params);
        params = to_json(p);
        GarchSeries g = simulate_garch_spread(p, a.T, rng, a.allow_nonstationary);
        outputs = {{"r", g.r}, {"s", g.s}, {"sigma", g.sigma}};
    } else if (a.model == "var") {
        const json pj = a.params.empty() ? json::object() : read_json(a.params);
        VarParams p = var_params_from_json(pj);
        if (!pj.contains("T")) p.T = a.T;
        params = to_json(p);
        VarSeries v = simulate_var(p, rng);
        outputs = {{"x", v.x}, {"y", v.y}};
    } else {
        throw ConfigError("--model must be var or garch");
    }
    const json args = {{"command", "simulate"}, {"model", a.model}, {"params", params}, {"T", a.T}};
    const std::vector<std::string> comments{header_line(args, c.seed)};
    for (const auto& [name, s] : outputs) write_series_csv((dir / (name + ".csv")).string(), s, comments);
    emit_json({{"meta", meta(args, c.seed)}, {"model", a.model}, {"params", params}}, (dir / "params.json").string());
}

// estimate ----------------------------------------------------------------------------------

struct EstimateArgs {
    std::string measure;
    std::string source;
    std::string target;
    std::vector<std::string> conditionals;
    std::vector<std::string> series;
    std::string estimator = "ksg";
    int K = 4;
    int k = 1;
    int l = 1;
    int m = 1;
    int delay = 1;
    bool jitter = false;
    bool local = false;
    int surrogates = 0;
    std::string surrogate_kind = "circular_shift";
    double alpha = 0.05;
    std::string out;
};

void cmd_estimate(const EstimateArgs& a, const Common& c) {
    EstimatorConfig cfg;
    cfg.kind = estimator_kind_from_string(a.estimator);
    cfg.K = a.K;
    cfg.k = a.k;
    cfg.l = a.l;
    cfg.m = a.m;
    cfg.delay = a.delay;
    cfg.jitter = a.jitter;
    cfg.jitter_seed = c.seed;
    cfg.keep_locals = a.local;
    auto load = [](const std::string& p) { return read_series_csv(p); };
    auto need = [&](const std::string& v, const char* flag) {
        if (v.empty()) throw ConfigError(fmt::format("measure '{}' needs {}", a.measure, flag));
        return load(v);
    };
    std::vector<TimeSeries> conds;
    for (const auto& p : a.conditionals) conds.push_back(load(p));
    std::vector<TimeSeries> many;
    for (const auto& p : a.series) many.push_back(load(p));

    EstimateResult r;
    std::function<double(const TimeSeries&)> est;
    std::optional<TimeSeries> shuffled;
    EstimatorConfig quiet = cfg;
    quiet.keep_locals = false;
    if (a.measure == "te" || a.measure == "cte") {
        const TimeSeries src = need(a.source, "--source");
        const TimeSeries tgt = need(a.target, "--target");
        r = conditional_te(src, tgt, conds, cfg);
        est = [tgt, conds, quiet](const TimeSeries& s) { return conditional_te(s, tgt, conds, quiet).value; };
        shuffled = src;
    } else if (a.measure == "collective") {
        const TimeSeries tgt = need(a.target, "--target");
        if (many.empty()) throw ConfigError("measure 'collective' needs --series for the sources");
        r = collective_te(tgt, lexicographic_order(many), cfg);
    } else if (a.measure == "ais") {
        const TimeSeries x = many.size() == 1 ? many[0] : need(a.target, "--target or one --series");
        r = active_information_storage(x, cfg);
        est = [x, quiet](const TimeSeries& past) { return history_information(past, x, quiet).value; };
        shuffled = x;
    } else if (a.measure == "mi") {
        if (many.size() < 2) throw ConfigError("measure 'mi' needs at least two --series");
        r = multi_information(many, cfg);
    } else {
        throw ConfigError("--measure must be te, cte, collective, ais or mi");
    }
    if (a.surrogates > 0) {
        SignificanceSpec spec;
        spec.n_surrogates = a.surrogates;
        spec.alpha = a.alpha;
        spec.kind = surrogate_kind_from_string(a.surrogate_kind);
        const RngHandle rng(c.seed);
        SurrogateOutcome t;
        if (est) {
            t = surrogate_test(est, *shuffled, spec, rng, r.value, c.workers);
        } else if (a.measure == "collective") {
            const TimeSeries tgt = load(a.target);
            const auto sources = lexicographic_order(many);
            t = run_surrogates(
                r.value, spec,
                [&](std::size_t j) {
                    std::vector<TimeSeries> sh;
                    for (std::size_t b = 0; b < sources.size(); ++b) {
                        RngHandle sub = rng.substream(j).substream(b);
                        sh.push_back(make_surrogate(sources[b], spec.kind, sub));
                    }
                    return collective_te(tgt, sh, quiet).value;
                },
                c.workers);
        } else {
            t = run_surrogates(
                r.value, spec,
                [&](std::size_t j) {
                    std::vector<TimeSeries> sh{many[0]};
                    for (std::size_t b = 1; b < many.size(); ++b) {
                        RngHandle sub = rng.substream(j).substream(b);
                        sh.push_back(make_surrogate(many[b], spec.kind, sub));
                    }
                    return multi_information(sh, quiet).value;
                },
                c.workers);
        }
        r.significance = SignificanceRecord{t.p_value, t.n_surrogates, t.significant};
    }
    json args = {{"command", "estimate"}, {"measure", a.measure}, {"config", to_json(cfg)},
                 {"surrogates", a.surrogates}, {"alpha", a.alpha}};
    json j = to_json(r);
    j["meta"] = meta(args, c.seed);
    emit_json(j, a.out);
}

// pipeline ----------------------------------------------------------------------------------

struct PipelineArgs {
    std::string config;
    std::string out;
    std::optional<double> alpha;
    std::optional<int> surrogates;
    bool no_by = false;
};

void cmd_pipeline(const PipelineArgs& a, const Common& c, bool seed_given, bool workers_given) {
    PipelineConfig cfg = load_pipeline_config(a.config);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (cfg.output_dir.empty()) throw ConfigError("no output directory: set output_dir or pass --out");
    if (seed_given) cfg.seed = c.seed;
    if (workers_given) cfg.workers = c.workers;
    if (a.alpha) cfg.significance.alpha = *a.alpha;
    if (a.surrogates) cfg.significance.n_surrogates = *a.surrogates;
    if (a.no_by) cfg.by = false;
    if (!(cfg.significance.alpha > 0.0 && cfg.significance.alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
    if (cfg.significance.n_surrogates < 1) throw ConfigError("--surrogates must be >= 1");
    const PipelineResult res = run_pipeline(cfg);
    std::size_t accepted = 0;
    for (const auto& w : res.windows) {
        for (const auto& l : w.result.links) accepted += l.accepted ? 1 : 0;
    }
    std::cerr << fmt::format("{} window(s), {} accepted link(s), outputs in {}\n", res.windows.size(), accepted,
                             cfg.output_dir);
}

// diagnose ----------------------------------------------------------------------------------

struct DiagnoseArgs {
    std::string kind;
    std::string source;
    std::string target;
    std::vector<int> K_list{1, 2, 4, 8};
    int max_slices = 10;
    int k = 1;
    int l = 1;
    int delay = 1;
    std::string lob_a;
    std::string lob_b;
    std::vector<std::string> trades;
    std::int64_t split_time = 0;
    std::string series;
    int max_lag = -1;
    std::string out;
};

void cmd_diagnose(const DiagnoseArgs& a, const Common& c) {
    if (a.kind == "ksg_bias") {
        if (a.source.empty() || a.target.empty()) throw ConfigError("ksg_bias needs --source and --target");
        EstimatorConfig cfg;
        cfg.k = a.k;
        cfg.l = a.l;
        cfg.delay = a.delay;
        const auto rows =
            subsample_bias_profile(read_series_csv(a.source), read_series_csv(a.target), cfg, a.K_list, a.max_slices,
                                   c.workers);
        const json args = {{"command", "diagnose"}, {"kind", a.kind}, {"K_list", a.K_list},
                           {"max_slices", a.max_slices}, {"k", a.k}, {"l", a.l}, {"delay", a.delay}};
        const std::vector<std::string> comments{header_line(args, c.seed)};
        if (a.out.empty()) {
            std::cout << "# " << comments[0] << "\nK,n_slice,mean_te,std_te\n";
            for (const auto& r : rows) std::cout << fmt::format("{},{},{},{}\n", r.K, r.n_slice, r.mean_te, r.std_te);
        } else {
            write_bias_profile_csv(a.out, rows, comments);
        }
    } else if (a.kind == "alignment") {
        if (a.lob_a.empty() || a.lob_b.empty()) throw ConfigError("alignment needs --lob-a and --lob-b");
        const auto d = snapshot_offset_diagnostics(read_lob_csv(a.lob_a), read_lob_csv(a.lob_b));
        const json args = {{"command", "diagnose"}, {"kind", a.kind}};
        if (a.out.empty()) {
            json j = to_json(d);
            j["meta"] = meta(args, c.seed);
            emit_json(j, "");
        } else {
            const std::vector<std::string> comments{header_line(args, c.seed)};
            write_offset_diagnostics_csv(a.out, d, comments);
        }
        if (d.systematic_lag) std::cerr << fmt::format("warning: systematic offset of {:.2f} s\n", d.mean_s);
    } else if (a.kind == "imbalance") {
        if (a.trades.empty()) throw ConfigError("imbalance needs at least one --trades file");
        std::vector<std::pair<std::string, std::vector<TradeRecord>>> markets;
        for (const auto& p : a.trades) markets.emplace_back(default_label_from_path(p), read_trades_csv(p));
        const auto rows = imbalance_regime_summary(markets, a.split_time);
        const json args = {{"command", "diagnose"}, {"kind", a.kind}, {"split_time", a.split_time}};
        json j;
        j["meta"] = meta(args, c.seed);
        for (const auto& r : rows) {
            j["markets"].push_back(to_json(r));
            if (!r.warning.empty()) std::cerr << "warning: " << r.market << ": " << r.warning << '\n';
        }
        emit_json(j, a.out);
    } else if (a.kind == "adf") {
        if (a.series.empty()) throw ConfigError("adf needs --series");
        const auto r = adf_test(read_series_csv(a.series), a.max_lag);
        const json args = {{"command", "diagnose"}, {"kind", a.kind}, {"max_lag", a.max_lag}};
        emit_json({{"meta", meta(args, c.seed)},
                   {"statistic", r.statistic},
                   {"critical_5pct", r.critical_5pct},
                   {"lags", r.lags},
                   {"n_obs", r.n_obs},
                   {"reject_unit_root_5pct", r.reject_at_5pct}},
                  a.out);
    } else {
        throw ConfigError("--kind must be ksg_bias, alignment, imbalance or adf");
    }
}

// moments / oracle-te -----------------------------------------------------------------------

void cmd_moments(const std::string& set, const std::string& params, const std::string& out, const Common& c) {
    const GarchParams p = garch_from(set, params);
    const json args = {{"command", "moments"}, {"params", to_json(p)}};
    json j = to_json(garch_moments(p));
    j["params"] = to_json(p);
    j["stationarity_margin"] = p.stationarity_margin();
    j["meta"] = meta(args, c.seed);
    emit_json(j, out);
}

struct OracleArgs {
    std::string direction;
    std::string set;
    std::string params;
    std::size_t n_outer = 20000;
    std::size_t n_inner = 512;
    std::string sampling = "marginal";
    std::string out;
};

void cmd_oracle(const OracleArgs& a, const Common& c) {
    std::string set = a.set;
    if (set.empty()) set = a.direction == "r_to_s" ? "set2" : "set1";
    const GarchParams p = garch_from(set, a.params);
    const HiddenSampling sampling = hidden_sampling_from_string(a.sampling);
    RngHandle rng(c.seed);
    OracleResult r;
    if (a.direction == "s_to_r") {
        r = theoretical_te_s_to_r(p, a.n_outer, a.n_inner, rng, sampling);
    } else if (a.direction == "r_to_s") {
        r = theoretical_te_r_to_s(p, a.n_outer, a.n_inner, rng, sampling);
    } else {
        throw ConfigError("--direction must be s_to_r or r_to_s");
    }
    const json args = {{"command", "oracle-te"}, {"direction", a.direction}, {"params", to_json(p)},
                       {"n_outer", a.n_outer}, {"n_inner", a.n_inner}, {"sampling", a.sampling}};
    json j = to_json(r);
    j["direction"] = a.direction;
    j["sampling"] = a.sampling;
    j["params"] = to_json(p);
    j["meta"] = meta(args, c.seed);
    emit_json(j, a.out);
}

// sweep -------------------------------------------------------------------------------------

void cmd_sweep(const std::string& config, const std::string& out, const Common& c, bool seed_given) {
    const json j = read_json(config);
    const int runs = j.value("runs", 100);
    const std::uint64_t seed = seed_given ? c.seed : j.value("seed", std::uint64_t{0});
    const RegimeMode mode = regime_mode_from_string(j.value("mode", std::string("pooled_locals")));
    const double alpha = j.value("alpha", 0.01);
    EstimatorConfig cfg;
    if (j.contains("estimator")) {
        const json& e = j.at("estimator");
        cfg.kind = estimator_kind_from_string(e.value("kind", std::string("ksg")));
        cfg.K = e.value("K", cfg.K);
        cfg.k = e.value("k", cfg.k);
        cfg.l = e.value("l", cfg.l);
        cfg.delay = e.value("delay", cfg.delay);
    }
    std::vector<std::tuple<RegimeScenario, double, double, double>> scenarios;
    if (j.contains("grid")) {
        for (const json& g : j.at("grid")) {
            const RegimeKind kind = regime_kind_from_string(g.at("scenario").get<std::string>());
            for (double s : g.at("s").get<std::vector<double>>()) {
                for (double b : g.at("b").get<std::vector<double>>()) {
                    for (double cc : g.at("c").get<std::vector<double>>()) {
                        scenarios.emplace_back(make_regime_scenario(kind, s, b, cc), s, b, cc);
                    }
                }
            }
        }
    }
    if (j.contains("scenarios")) {
        for (const json& s : j.at("scenarios")) scenarios.emplace_back(regime_scenario_from_json(s), 0.0, 0.0, 0.0);
    }
    if (scenarios.empty()) throw ConfigError("sweep config needs 'grid' or 'scenarios'");
    const json args = {{"command", "sweep"}, {"config", j}, {"seed", seed}};
    std::ostringstream csv;
    csv << "# " << header_line(args, seed) << '\n';
    csv << "scenario,s,b,c,measure,mean_before,mean_after,mean_diff,t,p_value,expected_ordering,direction\n";
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const auto& [sc, s, b, cc] = scenarios[i];
        const RegimeEnsemble e = run_regime_ensemble(sc, cfg, runs, RngHandle(seed).substream(i), mode, c.workers);
        const OrderingCheck check = check_expected_ordering(sc, e, alpha);
        for (const auto& m : e.measures) {
            csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", sc.name, s, b, cc, m.measure, m.mean_before(),
                               m.mean_after(), m.test.mean_diff, m.test.t, m.test.p_value, check.holds ? 1 : 0,
                               check.direction);
        }
    }
    if (out.empty() || out == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw DataError("cannot write " + out);
        f << csv.str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Information-dynamics estimation for market microstructure series"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(version));
    Common common;
    auto* seed_opt = app.add_option("--seed", common.seed, "Master random seed")->capture_default_str();
    auto* workers_opt =
        app.add_option("--workers", common.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    seed_opt->configurable();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate the VAR regime-shift or GARCH-spread model");
    simulate->add_option("--model", sim.model, "var or garch")->required()->check(CLI::IsMember({"var", "garch"}));
    simulate->add_option("--params", sim.params, "Parameter JSON file");
    simulate->add_option("--set", sim.set, "GARCH reference set (set1, set2, set3)")->capture_default_str();
    simulate->add_option("-T,--steps", sim.T, "Number of returned steps")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
    simulate->add_flag("--allow-nonstationary", sim.allow_nonstationary);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate one measure, optionally with a surrogate test");
    estimate->add_option("--measure", est.measure, "te, cte, collective, ais or mi")->required();
    estimate->add_option("--source", est.source, "Source series CSV");
    estimate->add_option("--target", est.target, "Target series CSV");
    estimate->add_option("--cond", est.conditionals, "Conditioning series CSV (repeatable)");
    estimate->add_option("--series", est.series, "Series CSV for ais, mi or collective sources (repeatable)");
    estimate->add_option("--estimator", est.estimator, "ksg or gaussian")->capture_default_str();
    estimate->add_option("-K", est.K, "Nearest neighbours")->capture_default_str();
    estimate->add_option("-k", est.k, "Target history length")->capture_default_str();
    estimate->add_option("-l", est.l, "Source history length")->capture_default_str();
    estimate->add_option("-m", est.m, "Conditional history length")->capture_default_str();
    estimate->add_option("--delay", est.delay, "Source delay")->capture_default_str();
    estimate->add_flag("--jitter", est.jitter, "Add 1e-8 relative noise before estimation");
    estimate->add_flag("--local", est.local, "Include local values");
    estimate->add_option("--surrogates", est.surrogates, "Surrogate count (0 = no test)")->capture_default_str();
    estimate->add_option("--surrogate-kind", est.surrogate_kind, "circular_shift or shuffle");
    estimate->add_option("--alpha", est.alpha, "Significance level")->capture_default_str();
    estimate->add_option("--out", est.out, "Output JSON file (default stdout)");

    PipelineArgs pipe;
    auto* pipeline = app.add_subcommand("pipeline", "Run the windowed analysis from a config file");
    pipeline->add_option("config", pipe.config, "Pipeline JSON config")->required()->check(CLI::ExistingFile);
    pipeline->add_option("--out", pipe.out, "Output directory (overrides output_dir)");
    pipeline->add_option("--alpha", pipe.alpha, "Significance level");
    pipeline->add_option("--surrogates", pipe.surrogates, "Surrogates per test");
    pipeline->add_flag("--no-by", pipe.no_by, "Skip the Benjamini-Yekutieli correction");

    DiagnoseArgs diag;
    auto* diagnose = app.add_subcommand("diagnose", "KSG bias profile, snapshot alignment, imbalance regimes, ADF");
    diagnose->add_option("--kind", diag.kind, "ksg_bias, alignment, imbalance or adf")->required();
    diagnose->add_option("--source", diag.source);
    diagnose->add_option("--target", diag.target);
    diagnose->add_option("--K-list", diag.K_list)->delimiter(',')->capture_default_str();
    diagnose->add_option("--max-slices", diag.max_slices)->capture_default_str();
    diagnose->add_option("-k", diag.k)->capture_default_str();
    diagnose->add_option("-l", diag.l)->capture_default_str();
    diagnose->add_option("--delay", diag.delay)->capture_default_str();
    diagnose->add_option("--lob-a", diag.lob_a);
    diagnose->add_option("--lob-b", diag.lob_b);
    diagnose->add_option("--trades", diag.trades, "Trades CSV per market (repeatable)");
    diagnose->add_option("--split", diag.split_time, "Regime split, epoch ms");
    diagnose->add_option("--series", diag.series, "Series CSV for adf");
    diagnose->add_option("--max-lag", diag.max_lag, "ADF lags (-1 = default)");
    diagnose->add_option("--out", diag.out, "Output file (default stdout)");

    std::string mom_set = "set3", mom_params, mom_out;
    auto* moments = app.add_subcommand("moments", "GARCH-spread moments and stationarity");
    moments->add_option("--set", mom_set)->capture_default_str();
    moments->add_option("--params", mom_params, "Parameter JSON file");
    moments->add_option("--out", mom_out);

    OracleArgs orc;
    auto* oracle = app.add_subcommand("oracle-te", "Model-based transfer entropy of the GARCH-spread model");
    oracle->add_option("--direction", orc.direction, "s_to_r or r_to_s")->required();
    oracle->add_option("--set", orc.set, "set1 (default for s_to_r) or set2 (default for r_to_s)");
    oracle->add_option("--params", orc.params);
    oracle->add_option("--n-outer", orc.n_outer)->capture_default_str();
    oracle->add_option("--n-inner", orc.n_inner)->capture_default_str();
    oracle->add_option("--sampling", orc.sampling, "marginal or posterior")->capture_default_str();
    oracle->add_option("--out", orc.out);

    std::string sweep_config, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Regime-shift ensemble sweep");
    sweep->add_option("config", sweep_config, "Sweep JSON config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*simulate) cmd_simulate(sim, common);
        if (*estimate) cmd_estimate(est, common);
        if (*pipeline) cmd_pipeline(pipe, common, seed_opt->count() > 0, workers_opt->count() > 0);
        if (*diagnose) cmd_diagnose(diag, common);
        if (*moments) cmd_moments(mom_set, mom_params, mom_out, common);
        if (*oracle) cmd_oracle(orc, common);
        if (*sweep) cmd_sweep(sweep_config, sweep_out, common, seed_opt->count() > 0);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
