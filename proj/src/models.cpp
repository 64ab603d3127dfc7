#include "infodyn/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "infodyn/error.hpp"

namespace infodyn {

double sigmoid(double t, const SigmoidSpec& spec) { return spec.s / (1.0 + std::exp(-spec.b * (t - spec.t_C))) + spec.C; }

VarSeries simulate_var(const VarParams& p, RngHandle& rng) {
    if (!(std::fabs(p.alpha1) < 1.0) || !(std::fabs(p.alpha2) < 1.0)) {
        throw ConfigError("simulate_var: |alpha1| and |alpha2| must be below 1");
    }
    if (p.T < 2) throw ConfigError("simulate_var: T must be at least 2");
    std::vector<double> xs(p.T);
    std::vector<double> ys(p.T);
    double x = 0.0;
    double y = 0.0;
    const auto burn = static_cast<std::int64_t>(p.burn_in);
    for (std::int64_t t = -burn; t < static_cast<std::int64_t>(p.T); ++t) {
        const double tt = static_cast<double>(t);
        const double e1 = rng.normal();
        const double e2 = rng.normal();
        const double e = rng.normal();
        const double k = p.K_drive.at(tt);
        const double drive = p.plain_power ? std::pow(x, p.d) : std::pow(std::fabs(x), p.d);
        const double x_next = p.alpha1 * x + p.beta1.at(tt) * e1 + k * e;
        const double y_next = p.alpha2 * y + p.beta2.at(tt) * e2 + k * e + p.C_drive.at(tt) * drive;
        x = x_next;
        y = y_next;
        if (t >= 0) {
            xs[static_cast<std::size_t>(t)] = x;
            ys[static_cast<std::size_t>(t)] = y;
        }
    }
    if (p.plain_power) {
        for (double v : ys) {
            if (!std::isfinite(v)) throw NumericError("simulate_var: non-finite value (negative base with fractional d?)");
        }
    }
    return {TimeSeries(std::move(xs), 0, 1, "X"), TimeSeries(std::move(ys), 0, 1, "Y")};
}

GarchParams garch_set1() { return {0.1, 0.1, 0.4, 0.9, 0.8, 0.0, 0.1}; }
GarchParams garch_set2() { return {0.1, 0.1, 0.1, 0.0, 0.1, 0.9, 0.1}; }
GarchParams garch_set3() { return {0.1, 0.1, 0.5, 0.5, 0.1, 0.5, 0.1}; }

GarchSeries simulate_garch_spread(const GarchParams& p, std::size_t T, RngHandle& rng, bool allow_nonstationary,
                                  std::size_t burn_in) {
    if (T == 0) throw ConfigError("simulate_garch_spread: T must be positive");
    double sig2 = p.w;
    double s2 = p.c;
    if (p.stationary()) {
        const GarchMoments m = garch_moments(p);
        sig2 = m.sigma2;
        s2 = m.s2;
    } else if (!allow_nonstationary) {
        throw ConfigError(fmt::format("simulate_garch_spread: non-stationary parameters (margin {})",
                                      p.stationarity_margin()));
    }
    double r = std::sqrt(sig2) * rng.normal();
    std::vector<double> rs(T);
    std::vector<double> ss(T);
    std::vector<double> sigmas(T);
    for (std::size_t t = 0; t < T + burn_in; ++t) {
        const double e1 = rng.normal();
        const double e2 = rng.normal();
        const double sig2_next = p.w + p.alpha * r * r + p.beta * sig2 + p.gamma * s2;
        const double s2_next = p.a * s2 + p.b * sig2 + p.c * e2 * e2;
        sig2 = sig2_next;
        s2 = s2_next;
        r = std::sqrt(sig2) * e1;
        if (t >= burn_in) {
            rs[t - burn_in] = r;
            ss[t - burn_in] = std::sqrt(s2);
            sigmas[t - burn_in] = std::sqrt(sig2);
        }
    }
    return {TimeSeries(std::move(rs), 0, 1, "r"), TimeSeries(std::move(ss), 0, 1, "s"),
            TimeSeries(std::move(sigmas), 0, 1, "sigma")};
}

GarchMoments garch_moments(const GarchParams& p) {
    GarchMoments m;
    const double margin = p.stationarity_margin();
    m.stationary = p.stationary();
    if (margin == 0.0 || p.a == 1.0) throw NumericError("garch_moments: unconditional moments undefined at margin 0");
    m.sigma2 = (p.w * (1.0 - p.a) + p.gamma * p.c) / margin;
    m.s2 = (p.b * m.sigma2 + p.c) / (1.0 - p.a);

    const double al = p.alpha, be = p.beta, ga = p.gamma, a = p.a, b = p.b, c = p.c, w = p.w;
    const double S = m.sigma2, Q = m.s2;
    // Unknowns (E[sigma^4], E[s^4], E[sigma^2 s^2]).
    Eigen::Matrix3d A;
    Eigen::Vector3d rhs;
    A << 1.0 - 3.0 * al * al - be * be - 2.0 * al * be, -ga * ga, -2.0 * ga * (al + be),
        -b * b, 1.0 - a * a, -2.0 * a * b,
        -(al + be) * b, -ga * a, 1.0 - (al + be) * a - ga * b;
    rhs << w * w + 2.0 * w * (al + be) * S + 2.0 * w * ga * Q,
        3.0 * c * c + 2.0 * a * c * Q + 2.0 * b * c * S,
        w * a * Q + w * b * S + w * c + (al + be) * c * S + ga * c * Q;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    if (!lu.isInvertible()) throw NumericError("garch_moments: singular fourth-moment system");
    const Eigen::Vector3d x = lu.solve(rhs);
    m.sigma4 = x(0);
    m.s4 = x(1);
    m.sigma2_s2 = x(2);
    m.moments_finite = m.stationary && m.sigma4 > 0.0 && m.s4 > 0.0 && m.sigma2_s2 > 0.0;
    return m;
}

double spread_density(double y, double c_star, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("spread_density: c must be positive");
    if (c_star < 0.0) throw std::invalid_argument("spread_density: c* must be nonnegative");
    const double u = y * y - c_star;
    if (y <= 0.0 || u <= 0.0) return 0.0;
    return 2.0 * y / (std::sqrt(std::numbers::pi) * std::sqrt(2.0 * c * u)) * std::exp(-u / (2.0 * c));
}

double spread_conditional_density(double y, double s_prev1, double s_prev2, double r_prev2, double sigma_prev2,
                                  const GarchParams& p) {
    const double c_star = p.a * s_prev1 * s_prev1 +
                          p.b * (p.w + p.alpha * r_prev2 * r_prev2 + p.beta * sigma_prev2 * sigma_prev2 +
                                 p.gamma * s_prev2 * s_prev2);
    return spread_density(y, c_star, p.c);
}

namespace {

constexpr std::size_t kHiddenPool = 100000;

double normal_pdf(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

OracleResult summarize(const std::vector<double>& logs, std::size_t n_outer, std::size_t n_inner,
                       std::size_t rejected) {
    OracleResult r;
    r.n_outer = n_outer;
    r.n_inner = n_inner;
    r.rejected = rejected;
    if (logs.empty()) throw NumericError("TE oracle: every outer sample was rejected");
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    double var = 0.0;
    for (double v : logs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(logs.size() > 1 ? logs.size() - 1 : 1);
    r.value = mean;
    r.std_error = std::sqrt(var / static_cast<double>(logs.size()));
    r.ci95 = 1.96 * r.std_error;
    return r;
}

void check_oracle_args(const GarchParams& p, std::size_t n_outer, std::size_t n_inner) {
    if (!p.stationary()) throw ConfigError("TE oracle: parameters must be stationary");
    if (n_outer == 0 || n_inner == 0) throw std::invalid_argument("TE oracle: sample counts must be positive");
}

}  // namespace

OracleResult theoretical_te_s_to_r(const GarchParams& p, std::size_t n_outer, std::size_t n_inner, RngHandle& rng,
                                   HiddenSampling sampling) {
    check_oracle_args(p, n_outer, n_inner);
    if (p.b != 0.0) throw std::invalid_argument("theoretical_te_s_to_r: requires b = 0");
    RngHandle run_rng = rng.substream(1);
    RngHandle pool_rng = rng.substream(2);
    RngHandle pick = rng.substream(3);
    const GarchSeries run = simulate_garch_spread(p, n_outer + 1, run_rng);
    const GarchSeries pool = simulate_garch_spread(p, kHiddenPool, pool_rng);
    const auto last = static_cast<std::int64_t>(kHiddenPool - 1);

    std::vector<double> logs;
    logs.reserve(n_outer);
    std::size_t rejected = 0;
    for (std::size_t t = 1; t <= n_outer; ++t) {
        const double x = run.r[t];
        const double r1 = run.r[t - 1];
        const double s1 = run.s[t - 1];
        const double base = p.w + p.alpha * r1 * r1;
        double num = 0.0, num_w = 0.0;
        double den = 0.0, den_w = 0.0;
        for (std::size_t i = 0; i < n_inner; ++i) {
            if (sampling == HiddenSampling::Marginal) {
                const double sig = pool.sigma[static_cast<std::size_t>(pick.uniform_int(0, last))];
                const double s = pool.s[static_cast<std::size_t>(pick.uniform_int(0, last))];
                num += normal_pdf(x, base + p.beta * sig * sig + p.gamma * s1 * s1);
                den += normal_pdf(x, base + p.beta * sig * sig + p.gamma * s * s);
                num_w += 1.0;
                den_w += 1.0;
                continue;
            }
            // Pool step u plays t-1: (sigma_u, s_u, s_{u-1}) is a joint draw of (sigma_{t-1}, s_{t-1}, s_{t-2}).
            const auto u = static_cast<std::size_t>(pick.uniform_int(1, last));
            const double sig = pool.sigma[u];
            const double s_u = pool.s[u];
            const double s_back = pool.s[u - 1];
            const double w_r = normal_pdf(r1, sig * sig);
            const double w_s = spread_density(s1, p.a * s_back * s_back, p.c);
            num += w_r * w_s * normal_pdf(x, base + p.beta * sig * sig + p.gamma * s1 * s1);
            num_w += w_r * w_s;
            den += w_r * normal_pdf(x, base + p.beta * sig * sig + p.gamma * s_u * s_u);
            den_w += w_r;
        }
        const double lr = std::log((num / num_w) / (den / den_w));
        if (std::isfinite(lr)) {
            logs.push_back(lr);
        } else {
            ++rejected;
        }
    }
    return summarize(logs, n_outer, n_inner, rejected);
}

OracleResult theoretical_te_r_to_s(const GarchParams& p, std::size_t n_outer, std::size_t n_inner, RngHandle& rng,
                                   HiddenSampling sampling) {
    check_oracle_args(p, n_outer, n_inner);
    if (p.gamma != 0.0) throw std::invalid_argument("theoretical_te_r_to_s: requires gamma = 0");
    RngHandle run_rng = rng.substream(1);
    RngHandle pool_rng = rng.substream(2);
    RngHandle pick = rng.substream(3);
    const GarchSeries run = simulate_garch_spread(p, n_outer + 2, run_rng);
    const GarchSeries pool = simulate_garch_spread(p, kHiddenPool, pool_rng);
    const auto last = static_cast<std::int64_t>(kHiddenPool - 1);

    std::vector<double> logs;
    logs.reserve(n_outer);
    std::size_t rejected = 0;
    for (std::size_t t = 2; t < n_outer + 2; ++t) {
        const double y = run.s[t];
        const double s1 = run.s[t - 1];
        const double s2 = run.s[t - 2];
        const double r1 = run.r[t - 1];
        const double r2 = run.r[t - 2];
        // sigma_{t-1}^2 as a function of the hidden sigma_{t-2} and r_{t-2}
        auto vol1 = [&](double sig2, double r) { return p.w + p.alpha * r * r + p.beta * sig2 + p.gamma * s2 * s2; };
        double num = 0.0, num_w = 0.0;
        double den = 0.0, den_w = 0.0;
        for (std::size_t i = 0; i < n_inner; ++i) {
            if (sampling == HiddenSampling::Marginal) {
                const double sig = pool.sigma[static_cast<std::size_t>(pick.uniform_int(0, last))];
                const double rj = pool.r[static_cast<std::size_t>(pick.uniform_int(0, last))];
                num += spread_density(y, p.a * s1 * s1 + p.b * vol1(sig * sig, r2), p.c);
                den += spread_density(y, p.a * s1 * s1 + p.b * vol1(sig * sig, rj), p.c);
                num_w += 1.0;
                den_w += 1.0;
                continue;
            }
            // Pool step u plays t-2: (sigma_u, r_u, sigma_{u-1}, s_{u-1}) is a joint draw of
            // (sigma_{t-2}, r_{t-2}, sigma_{t-3}, s_{t-3}).
            const auto u = static_cast<std::size_t>(pick.uniform_int(1, last));
            const double sig2 = pool.sigma[u] * pool.sigma[u];
            const double sig2_back = pool.sigma[u - 1] * pool.sigma[u - 1];
            const double s_back = pool.s[u - 1];
            const double w_s2 = spread_density(s2, p.a * s_back * s_back + p.b * sig2_back, p.c);
            const double w_s1 = spread_density(s1, p.a * s2 * s2 + p.b * sig2, p.c);
            const double w_common = w_s2 * w_s1;
            if (w_common > 0.0) {
                const double w_num = w_common * normal_pdf(r2, sig2) * normal_pdf(r1, vol1(sig2, r2));
                num += w_num * spread_density(y, p.a * s1 * s1 + p.b * vol1(sig2, r2), p.c);
                num_w += w_num;
                den += w_common * spread_density(y, p.a * s1 * s1 + p.b * vol1(sig2, pool.r[u]), p.c);
                den_w += w_common;
            }
        }
        const double lr = std::log((num / num_w) / (den / den_w));
        if (std::isfinite(lr)) {
            logs.push_back(lr);
        } else {
            ++rejected;
        }
    }
    return summarize(logs, n_outer, n_inner, rejected);
}

std::string to_string(HiddenSampling s) { return s == HiddenSampling::Marginal ? "marginal" : "posterior"; }

HiddenSampling hidden_sampling_from_string(const std::string& s) {
    if (s == "marginal") return HiddenSampling::Marginal;
    if (s == "posterior") return HiddenSampling::Posterior;
    throw ConfigError("unknown hidden sampling mode: " + s);
}

namespace {

double number(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError(fmt::format("parameter '{}' must be a number", key));
    return j.at(key).get<double>();
}

Coefficient coefficient(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (!v.is_object()) throw ConfigError(fmt::format("parameter '{}' must be a number or a sigmoid object", key));
    for (const char* k : {"s", "b", "t_C", "C"}) {
        if (!v.contains(k)) throw ConfigError(fmt::format("sigmoid '{}' is missing '{}'", key, k));
    }
    return SigmoidSpec{v.at("s").get<double>(), v.at("b").get<double>(), v.at("t_C").get<double>(),
                       v.at("C").get<double>()};
}

nlohmann::json coefficient_json(const Coefficient& c) {
    if (!c.schedule) return c.constant;
    return {{"s", c.schedule->s}, {"b", c.schedule->b}, {"t_C", c.schedule->t_C}, {"C", c.schedule->C}};
}

}  // namespace

GarchParams garch_params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("GARCH parameters must be a JSON object");
    GarchParams p;
    p.w = number(j, "w", p.w);
    p.alpha = number(j, "alpha", p.alpha);
    p.beta = number(j, "beta", p.beta);
    p.gamma = number(j, "gamma", p.gamma);
    p.a = number(j, "a", p.a);
    p.b = number(j, "b", p.b);
    p.c = number(j, "c", p.c);
    for (double v : {p.w, p.alpha, p.beta, p.gamma, p.a, p.b, p.c}) {
        if (!(v >= 0.0)) throw ConfigError("GARCH parameters must be nonnegative");
    }
    return p;
}

nlohmann::json to_json(const GarchParams& p) {
    return {{"w", p.w}, {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
            {"a", p.a}, {"b", p.b},         {"c", p.c}};
}

VarParams var_params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("VAR parameters must be a JSON object");
    VarParams p;
    p.alpha1 = number(j, "alpha1", p.alpha1);
    p.alpha2 = number(j, "alpha2", p.alpha2);
    p.beta1 = coefficient(j, "beta1", 1.0);
    p.beta2 = coefficient(j, "beta2", 1.0);
    p.K_drive = coefficient(j, "K", 0.0);
    p.C_drive = coefficient(j, "C", 0.0);
    p.d = number(j, "d", p.d);
    const double T = number(j, "T", static_cast<double>(p.T));
    if (!(T >= 2.0)) throw ConfigError("VAR parameter T must be at least 2");
    p.T = static_cast<std::size_t>(T);
    if (j.contains("plain_power")) p.plain_power = j.at("plain_power").get<bool>();
    return p;
}

nlohmann::json to_json(const VarParams& p) {
    return {{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta1", coefficient_json(p.beta1)},
            {"beta2", coefficient_json(p.beta2)}, {"K", coefficient_json(p.K_drive)},
            {"C", coefficient_json(p.C_drive)}, {"d", p.d}, {"T", p.T}, {"plain_power", p.plain_power}};
}

nlohmann::json to_json(const GarchMoments& m) {
    return {{"sigma2", m.sigma2},       {"s2", m.s2},
            {"sigma4", m.sigma4},       {"s4", m.s4},
            {"sigma2_s2", m.sigma2_s2}, {"stationary", m.stationary},
            {"moments_finite", m.moments_finite}};
}

nlohmann::json to_json(const OracleResult& r) {
    return {{"te_nats", r.value}, {"std_error", r.std_error}, {"ci95", r.ci95},
            {"n_outer", r.n_outer}, {"n_inner", r.n_inner}, {"rejected", r.rejected}};
}

}  // namespace infodyn
