#include "infodyn/regime.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "infodyn/error.hpp"
#include "infodyn/parallel.hpp"

namespace infodyn {

namespace {

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

RegimeScenario base_scenario(std::string name) {
    RegimeScenario sc;
    sc.name = std::move(name);
    sc.params.alpha1 = 0.2;
    sc.params.alpha2 = 0.2;
    sc.params.d = 0.5;
    sc.params.T = 2000;
    return sc;
}

// Mean of locals[r] over rows whose time offset + r falls in [begin, end).
double window_mean(const std::vector<double>& locals, std::size_t offset, std::size_t begin, std::size_t end) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t t = std::max(begin, offset); t < end && t - offset < locals.size(); ++t) {
        s += locals[t - offset];
        ++n;
    }
    if (n == 0) throw ConfigError("regime window holds no local values");
    return s / static_cast<double>(n);
}

}  // namespace

RegimeScenario causal_driver_step(double s, double b, double K) {
    RegimeScenario sc = base_scenario("causal_driver");
    sc.kind = RegimeKind::CausalDriver;
    sc.params.C_drive = SigmoidSpec{s, b, static_cast<double>(sc.t_C), 0.0};
    sc.params.K_drive = K;
    return sc;
}

RegimeScenario hidden_driver_step(double s, double b, double C) {
    RegimeScenario sc = base_scenario("hidden_driver");
    sc.kind = RegimeKind::HiddenDriver;
    sc.params.K_drive = SigmoidSpec{s, b, static_cast<double>(sc.t_C), 0.0};
    sc.params.C_drive = C;
    return sc;
}

RegimeScenario uncertainty_step(double s, double b, double coupling) {
    RegimeScenario sc = base_scenario("uncertainty");
    sc.kind = RegimeKind::Uncertainty;
    const SigmoidSpec beta{s, b, static_cast<double>(sc.t_C), 1.0};
    sc.params.beta1 = beta;
    sc.params.beta2 = beta;
    sc.params.C_drive = coupling;
    sc.params.K_drive = coupling;
    return sc;
}

RegimeScenario make_regime_scenario(RegimeKind kind, double s, double b, double c) {
    switch (kind) {
        case RegimeKind::CausalDriver:
            return causal_driver_step(s, b, c);
        case RegimeKind::HiddenDriver:
            return hidden_driver_step(s, b, c);
        case RegimeKind::Uncertainty:
            return uncertainty_step(s, b, c);
        case RegimeKind::Custom:
            break;
    }
    throw ConfigError("a custom regime scenario needs explicit parameters");
}

PairedTest paired_t_test(std::span<const double> before, std::span<const double> after) {
    if (before.size() != after.size()) throw std::invalid_argument("paired_t_test: sample sizes differ");
    if (before.size() < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
    const std::size_t n = before.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = after[i] - before[i];
    PairedTest out;
    out.mean_diff = mean(d);
    double ss = 0.0;
    for (double x : d) ss += (x - out.mean_diff) * (x - out.mean_diff);
    const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    if (se == 0.0) {
        out.t = out.mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, out.mean_diff);
        out.p_value = out.mean_diff == 0.0 ? 1.0 : 0.0;
        return out;
    }
    out.t = out.mean_diff / se;
    const boost::math::students_t dist(static_cast<double>(n - 1));
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t)));
    return out;
}

double RegimeMeasure::mean_before() const { return mean(before); }
double RegimeMeasure::mean_after() const { return mean(after); }

const RegimeMeasure& RegimeEnsemble::get(const std::string& measure) const {
    for (const auto& m : measures) {
        if (m.measure == measure) return m;
    }
    throw std::invalid_argument("unknown regime measure: " + measure);
}

RegimeEnsemble run_regime_ensemble(const RegimeScenario& sc, const EstimatorConfig& cfg, int runs,
                                   const RngHandle& rng, RegimeMode mode, int workers) {
    if (runs < 2) throw ConfigError("regime ensemble needs at least two runs");
    if (!(sc.before_begin < sc.before_end && sc.after_begin < sc.after_end && sc.after_end <= sc.params.T &&
          sc.before_end <= sc.params.T)) {
        throw ConfigError("regime windows must be non-empty and inside the simulated range");
    }
    const auto n = static_cast<std::size_t>(runs);
    std::vector<double> te_b(n), te_a(n), ais_b(n), ais_a(n), mi_b(n), mi_a(n);
    EstimatorConfig c = cfg;
    const EmbeddingParams emb = c.embedding();
    const std::size_t te_offset = embedding_offset(true, false, emb);
    const std::size_t ais_offset = embedding_offset(false, false, emb);
    parallel_for(n, workers, [&](std::size_t i) {
        RngHandle r = rng.substream(i);
        const VarSeries s = simulate_var(sc.params, r);
        if (mode == RegimeMode::PooledLocals) {
            const TimeSeries te_in[] = {s.x, s.y};
            const TimeSeries ais_in[] = {s.y};
            const TimeSeries mi_in[] = {s.x, s.y};
            const auto te = local_values(LocalMeasure::TransferEntropy, te_in, c);
            const auto ais = local_values(LocalMeasure::ActiveInformationStorage, ais_in, c);
            const auto mi = local_values(LocalMeasure::MultiInformation, mi_in, c);
            te_b[i] = window_mean(te, te_offset, sc.before_begin, sc.before_end);
            te_a[i] = window_mean(te, te_offset, sc.after_begin, sc.after_end);
            ais_b[i] = window_mean(ais, ais_offset, sc.before_begin, sc.before_end);
            ais_a[i] = window_mean(ais, ais_offset, sc.after_begin, sc.after_end);
            mi_b[i] = window_mean(mi, 0, sc.before_begin, sc.before_end);
            mi_a[i] = window_mean(mi, 0, sc.after_begin, sc.after_end);
        } else {
            auto side = [&](std::size_t begin, std::size_t end, double& te, double& ais, double& mi) {
                const TimeSeries x = s.x.slice(begin, end - begin);
                const TimeSeries y = s.y.slice(begin, end - begin);
                te = transfer_entropy(x, y, c).value;
                ais = active_information_storage(y, c).value;
                const TimeSeries both[] = {x, y};
                mi = multi_information(both, c).value;
            };
            side(sc.before_begin, sc.before_end, te_b[i], ais_b[i], mi_b[i]);
            side(sc.after_begin, sc.after_end, te_a[i], ais_a[i], mi_a[i]);
        }
    });
    RegimeEnsemble out;
    out.scenario = sc.name;
    out.mode = mode;
    out.runs = runs;
    auto add = [&](const char* name, std::vector<double>& b, std::vector<double>& a) {
        RegimeMeasure m;
        m.measure = name;
        m.test = paired_t_test(b, a);
        m.before = std::move(b);
        m.after = std::move(a);
        out.measures.push_back(std::move(m));
    };
    add("te", te_b, te_a);
    add("ais", ais_b, ais_a);
    add("mi", mi_b, mi_a);
    return out;
}

OrderingCheck check_expected_ordering(const RegimeScenario& scenario, const RegimeEnsemble& e, double alpha) {
    OrderingCheck out;
    auto sign = [&](const std::string& m) {
        const PairedTest& t = e.get(m).test;
        if (t.p_value >= alpha) return 0;
        return t.mean_diff > 0 ? 1 : -1;
    };
    const int te = sign("te");
    const int ais = sign("ais");
    const int mi = sign("mi");
    switch (scenario.kind) {
        case RegimeKind::CausalDriver:
            if (te != 1) out.failures.push_back("TE not significantly higher after the transition");
            if (ais != 1) out.failures.push_back("AIS not significantly higher after the transition");
            if (mi != 0) out.failures.push_back("MI changed significantly");
            break;
        case RegimeKind::HiddenDriver:
            if (mi != 1) out.failures.push_back("MI not significantly higher in the strong-driver regime");
            break;
        case RegimeKind::Uncertainty:
            if (te == 0 || te != ais || te != mi) {
                out.failures.push_back("TE, AIS and MI do not move together significantly");
            } else {
                out.direction = te;
            }
            break;
        case RegimeKind::Custom:
            break;
    }
    out.holds = out.failures.empty();
    return out;
}

RegimeScenario regime_scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("regime scenario must be a JSON object");
    RegimeScenario sc;
    sc.name = j.value("name", std::string("scenario"));
    sc.kind = regime_kind_from_string(j.value("kind", std::string("custom")));
    if (!j.contains("params")) throw ConfigError("regime scenario needs 'params'");
    sc.params = var_params_from_json(j.at("params"));
    sc.t_C = j.value("t_C", sc.t_C);
    sc.before_begin = j.value("before_begin", sc.before_begin);
    sc.before_end = j.value("before_end", sc.before_end);
    sc.after_begin = j.value("after_begin", sc.after_begin);
    sc.after_end = j.value("after_end", sc.after_end);
    return sc;
}

nlohmann::json to_json(const RegimeEnsemble& e) {
    nlohmann::json j;
    j["scenario"] = e.scenario;
    j["mode"] = to_string(e.mode);
    j["runs"] = e.runs;
    for (const auto& m : e.measures) {
        j["measures"][m.measure] = {{"mean_before", m.mean_before()},
                                    {"mean_after", m.mean_after()},
                                    {"mean_diff", m.test.mean_diff},
                                    {"t", m.test.t},
                                    {"p_value", m.test.p_value}};
    }
    return j;
}

std::string to_string(RegimeMode m) { return m == RegimeMode::PooledLocals ? "pooled_locals" : "window_estimates"; }

std::string to_string(RegimeKind k) {
    switch (k) {
        case RegimeKind::CausalDriver:
            return "causal_driver";
        case RegimeKind::HiddenDriver:
            return "hidden_driver";
        case RegimeKind::Uncertainty:
            return "uncertainty";
        case RegimeKind::Custom:
            break;
    }
    return "custom";
}

RegimeKind regime_kind_from_string(const std::string& s) {
    if (s == "causal_driver") return RegimeKind::CausalDriver;
    if (s == "hidden_driver") return RegimeKind::HiddenDriver;
    if (s == "uncertainty") return RegimeKind::Uncertainty;
    if (s == "custom") return RegimeKind::Custom;
    throw ConfigError("unknown regime scenario kind: " + s);
}

RegimeMode regime_mode_from_string(const std::string& s) {
    if (s == "pooled_locals") return RegimeMode::PooledLocals;
    if (s == "window_estimates") return RegimeMode::WindowEstimates;
    throw ConfigError("unknown regime mode: " + s);
}

}  // namespace infodyn
