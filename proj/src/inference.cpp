#include "infodyn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "infodyn/error.hpp"
#include "infodyn/parallel.hpp"

namespace infodyn {

TimeSeries make_surrogate(const TimeSeries& source, SurrogateKind kind, RngHandle& rng) {
    const std::size_t n = source.size();
    std::vector<double> out(n);
    const auto v = source.values();
    if (kind == SurrogateKind::CircularShift) {
        const auto lo = static_cast<std::int64_t>(std::max<std::size_t>(1, n / 4));
        const auto hi = std::max(lo, static_cast<std::int64_t>(3 * n / 4));
        const auto shift = static_cast<std::size_t>(rng.uniform_int(lo, hi)) % std::max<std::size_t>(n, 1);
        for (std::size_t i = 0; i < n; ++i) out[(i + shift) % n] = v[i];
    } else {
        out.assign(v.begin(), v.end());
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(out[i - 1], out[j]);
        }
    }
    return TimeSeries(std::move(out), source.start_time(), source.period(), source.label());
}

SurrogateOutcome run_surrogates(double observed, const SignificanceSpec& spec,
                                const std::function<double(std::size_t)>& null_value, int workers) {
    if (spec.n_surrogates < 1) throw ConfigError("surrogate test: n_surrogates must be >= 1");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigError("surrogate test: alpha must lie in (0, 1)");
    if (spec.stop_after_exceedances < 0) throw ConfigError("surrogate test: stop_after_exceedances must be >= 0");
    SurrogateOutcome out;
    out.observed = observed;
    const auto total = static_cast<std::size_t>(spec.n_surrogates);
    const auto h = static_cast<std::size_t>(spec.stop_after_exceedances);
    const std::size_t batch = h == 0 ? total : std::max<std::size_t>(8, 4 * resolve_workers(workers));
    std::size_t exceed = 0;
    std::size_t done = 0;
    while (done < total) {
        const std::size_t count = std::min(batch, total - done);
        std::vector<double> values(count);
        parallel_for(count, workers, [&](std::size_t i) { values[i] = null_value(done + i); });
        for (double v : values) {
            out.null_values.push_back(v);
            ++done;
            if (v >= observed) ++exceed;
            if (h > 0 && exceed == h && done < total) {
                out.stopped_early = true;
                break;
            }
        }
        if (out.stopped_early) break;
    }
    out.n_surrogates = static_cast<int>(done);
    out.p_value = out.stopped_early ? static_cast<double>(h) / static_cast<double>(done)
                                    : static_cast<double>(1 + exceed) / static_cast<double>(1 + done);
    out.significant = out.p_value <= spec.alpha;
    return out;
}

SurrogateOutcome surrogate_test(const std::function<double(const TimeSeries&)>& estimate, const TimeSeries& source,
                                const SignificanceSpec& spec, const RngHandle& rng, std::optional<double> observed,
                                int workers) {
    const double obs = observed ? *observed : estimate(source);
    return run_surrogates(
        obs, spec,
        [&](std::size_t j) {
            RngHandle sub = rng.substream(j);
            return estimate(make_surrogate(source, spec.kind, sub));
        },
        workers);
}

std::vector<bool> benjamini_yekutieli(std::span<const double> p_values, double q) {
    if (p_values.empty()) throw std::invalid_argument("benjamini_yekutieli: empty p-value list");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("benjamini_yekutieli: q must lie in (0, 1)");
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("benjamini_yekutieli: p-values must lie in [0, 1]");
    }
    double c_m = 0.0;
    for (std::size_t i = 1; i <= m; ++i) c_m += 1.0 / static_cast<double>(i);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t k = 0;  // number of rejections
    for (std::size_t r = m; r >= 1; --r) {
        const double threshold = static_cast<double>(r) * q / (static_cast<double>(m) * c_m);
        if (p_values[order[r - 1]] <= threshold) {
            k = r;
            break;
        }
    }
    std::vector<bool> mask(m, false);
    for (std::size_t r = 0; r < k; ++r) mask[order[r]] = true;
    return mask;
}

std::vector<BiasRow> subsample_bias_profile(const TimeSeries& source, const TimeSeries& target,
                                            const EstimatorConfig& cfg, std::span<const int> K_list, int max_slices,
                                            int workers) {
    if (max_slices < 1) throw std::invalid_argument("subsample_bias_profile: max_slices must be >= 1");
    if (K_list.empty()) throw std::invalid_argument("subsample_bias_profile: empty K list");
    if (!source.same_grid(target)) throw DataError("subsample_bias_profile: series grids differ");
    const std::size_t Q = target.size();
    const std::size_t offset = embedding_offset(true, false, cfg.embedding());
    const int max_K = *std::max_element(K_list.begin(), K_list.end());
    const std::size_t shortest = Q / static_cast<std::size_t>(max_slices);
    if (shortest <= offset + static_cast<std::size_t>(max_K) + 2) {
        throw DataError(fmt::format("subsample_bias_profile: {} samples are too few for {} slices", Q, max_slices));
    }
    struct Task {
        std::size_t row;
        int K;
        int slices;
        int slice;
    };
    std::vector<Task> tasks;
    std::vector<BiasRow> rows;
    for (int K : K_list) {
        for (int s = 1; s <= max_slices; ++s) {
            for (int j = 0; j < s; ++j) tasks.push_back({rows.size(), K, s, j});
            rows.push_back({K, s, 0.0, 0.0, s > 1});
        }
    }
    std::vector<double> values(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t t) {
        const Task& task = tasks[t];
        const std::size_t len = Q / static_cast<std::size_t>(task.slices);
        const std::size_t begin = len * static_cast<std::size_t>(task.slice);
        EstimatorConfig c = cfg;
        c.K = task.K;
        c.keep_locals = false;
        values[t] = transfer_entropy(source.slice(begin, len), target.slice(begin, len), c).value;
    });
    std::size_t t = 0;
    for (BiasRow& row : rows) {
        double mean = 0.0;
        for (int j = 0; j < row.n_slice; ++j) mean += values[t + static_cast<std::size_t>(j)];
        mean /= row.n_slice;
        double var = 0.0;
        for (int j = 0; j < row.n_slice; ++j) {
            const double d = values[t + static_cast<std::size_t>(j)] - mean;
            var += d * d;
        }
        row.mean_te = mean;
        row.std_te = row.n_slice > 1 ? std::sqrt(var / (row.n_slice - 1)) : 0.0;
        t += static_cast<std::size_t>(row.n_slice);
    }
    return rows;
}

void write_bias_profile_csv(const std::string& path, std::span<const BiasRow> rows,
                            std::span<const std::string> comments) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "K,n_slice,mean_te,std_te\n";
    for (const auto& r : rows) out << fmt::format("{},{},{},{}\n", r.K, r.n_slice, r.mean_te, r.std_te);
    if (!out) throw DataError("write failed: " + path);
}

int default_adf_lags(std::size_t n) {
    if (n < 2) return 0;
    return static_cast<int>(std::floor(std::cbrt(static_cast<double>(n - 1))));
}

double adf_critical_value_5pct(std::size_t T) {
    const double t = static_cast<double>(T);
    return -2.86154 - 2.8903 / t - 4.234 / (t * t) - 40.040 / (t * t * t);
}

AdfResult adf_test(const TimeSeries& x, int max_lag) {
    const std::size_t n = x.size();
    const int p = max_lag < 0 ? default_adf_lags(n) : max_lag;
    if (n <= static_cast<std::size_t>(p) + 10) {
        throw DataError(fmt::format("adf_test: {} observations are too few for {} lags", n, p));
    }
    const auto v = x.values();
    // Rows t = p+1 .. n-1 of dx_t = x_t - x_{t-1}.
    const std::size_t T = n - 1 - static_cast<std::size_t>(p);
    const auto cols = static_cast<Eigen::Index>(2 + p);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(T), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(T));
    for (std::size_t r = 0; r < T; ++r) {
        const std::size_t t = r + 1 + static_cast<std::size_t>(p);
        const auto row = static_cast<Eigen::Index>(r);
        y(row) = v[t] - v[t - 1];
        X(row, 0) = 1.0;
        X(row, 1) = v[t - 1];
        for (int i = 1; i <= p; ++i) X(row, 1 + i) = v[t - static_cast<std::size_t>(i)] - v[t - static_cast<std::size_t>(i) - 1];
    }
    const Eigen::MatrixXd XtX = X.transpose() * X;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(XtX);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols || ldlt.info() != Eigen::Success) throw NumericError("adf_test: degenerate regression");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - X * beta;
    const double dof = static_cast<double>(T) - static_cast<double>(cols);
    if (dof <= 0.0) throw NumericError("adf_test: no residual degrees of freedom");
    const double s2 = resid.squaredNorm() / dof;
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(cols, 1);
    const double var_g = s2 * ldlt.solve(e1)(1);
    if (!(var_g > 0.0) || !std::isfinite(var_g)) throw NumericError("adf_test: degenerate regression");
    AdfResult r;
    r.statistic = beta(1) / std::sqrt(var_g);
    r.lags = p;
    r.n_obs = T;
    r.critical_5pct = adf_critical_value_5pct(T);
    r.reject_at_5pct = r.statistic < r.critical_5pct;
    return r;
}

namespace {

// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    const double a = -2.0 * lambda * lambda;
    double sum = 0.0;
    double sign = 1.0;
    double prev_term = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = sign * 2.0 * std::exp(a * j * j);
        sum += term;
        if (std::fabs(term) <= 1e-12 * std::fabs(prev_term) || std::fabs(term) <= 1e-300) return std::clamp(sum, 0.0, 1.0);
        sign = -sign;
        prev_term = term;
    }
    return 1.0;  // series failed to converge: lambda is tiny
}

}  // namespace

KsResult ks_2sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_2sample: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double D = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        D = std::max(D, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.D = D;
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * D);
    return r;
}

std::string to_string(SurrogateKind kind) { return kind == SurrogateKind::CircularShift ? "circular_shift" : "shuffle"; }

SurrogateKind surrogate_kind_from_string(const std::string& s) {
    if (s == "circular_shift") return SurrogateKind::CircularShift;
    if (s == "shuffle") return SurrogateKind::Shuffle;
    throw ConfigError("unknown surrogate kind: " + s);
}

}  // namespace infodyn
