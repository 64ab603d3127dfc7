#include "infodyn/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "infodyn/error.hpp"
#include "infodyn/knn.hpp"
#include "infodyn/random.hpp"
#include "infodyn/special.hpp"

namespace infodyn {

namespace {

void check_rows(const PointCloud& x, const PointCloud& y, const PointCloud* z) {
    if (x.size() != y.size() || (z != nullptr && z->size() != x.size())) {
        throw DataError("estimator: sample counts differ between variables");
    }
    if (x.empty() || y.empty()) throw DataError("estimator: empty variable");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

EstimateResult finish(std::string measure, std::vector<double> locals, bool keep) {
    EstimateResult r;
    r.measure = std::move(measure);
    r.n = locals.size();
    r.value = mean_of(locals);
    if (keep) r.locals = std::move(locals);
    return r;
}

PointCloud jittered(const PointCloud& c, RngHandle rng) {
    PointCloud out = c;
    const double n = static_cast<double>(c.size());
    for (std::size_t j = 0; j < c.dims(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) mean += c(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) var += (c(i, j) - mean) * (c(i, j) - mean);
        const double sd = std::sqrt(var / n);
        const double amp = 1e-8 * (sd > 0.0 ? sd : 1.0);
        for (std::size_t i = 0; i < c.size(); ++i) out(i, j) += amp * (2.0 * rng.uniform() - 1.0);
    }
    return out;
}

Eigen::MatrixXd to_eigen(const PointCloud& c) {
    Eigen::MatrixXd m(c.size(), c.dims());
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.dims(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c(i, j);
    return m;
}

struct GaussianBlock {
    double log_det = 0.0;
    Eigen::VectorXd quad;  // per-sample Mahalanobis form, filled on request
};

GaussianBlock gaussian_block(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& cov,
                             const std::vector<Eigen::Index>& cols, bool want_quad) {
    GaussianBlock b;
    if (cols.empty()) {
        if (want_quad) b.quad = Eigen::VectorXd::Zero(centered.rows());
        return b;
    }
    const auto d = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd sub(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index c = 0; c < d; ++c) sub(a, c) = cov(cols[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(c)]);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) throw NumericError("gaussian estimator: singular covariance");
    const Eigen::MatrixXd L = llt.matrixL();
    const double min_diag = L.diagonal().minCoeff();
    if (!(min_diag > 1e-12 * std::sqrt(sub.diagonal().maxCoeff()))) {
        throw NumericError("gaussian estimator: singular covariance");
    }
    b.log_det = 2.0 * L.diagonal().array().log().sum();
    if (want_quad) {
        Eigen::MatrixXd v(d, centered.rows());
        for (Eigen::Index a = 0; a < d; ++a) v.row(a) = centered.col(cols[static_cast<std::size_t>(a)]).transpose();
        const Eigen::MatrixXd w = L.triangularView<Eigen::Lower>().solve(v);
        b.quad = w.colwise().squaredNorm().transpose();
    }
    return b;
}

std::vector<Eigen::Index> range_cols(Eigen::Index begin, Eigen::Index count) {
    std::vector<Eigen::Index> c(static_cast<std::size_t>(count));
    for (Eigen::Index i = 0; i < count; ++i) c[static_cast<std::size_t>(i)] = begin + i;
    return c;
}

std::vector<Eigen::Index> concat(std::vector<Eigen::Index> a, const std::vector<Eigen::Index>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// Strict neighbour counts in subspaces of a joint cloud at per-point radii. Sorted columns and
// their intervals are shared between subspaces; three or more columns fall back to a KdTree.
class MarginalCounter {
public:
    MarginalCounter(const PointCloud& joint, std::span<const double> radii)
        : joint_(joint), radii_(radii), columns_(joint.dims()), intervals_(joint.dims()) {}

    std::vector<std::size_t> count(std::size_t first_col, std::size_t n_cols, std::size_t second_first = 0,
                                   std::size_t second_n = 0) {
        std::vector<std::size_t> cols;
        for (std::size_t c = 0; c < n_cols; ++c) cols.push_back(first_col + c);
        for (std::size_t c = 0; c < second_n; ++c) cols.push_back(second_first + c);
        if (cols.size() > 2) {
            PointCloud sub(joint_.size(), cols.size());
            for (std::size_t i = 0; i < joint_.size(); ++i)
                for (std::size_t c = 0; c < cols.size(); ++c) sub(i, c) = joint_(i, cols[c]);
            return KdTree(sub).all_counts_within(radii_, true);
        }
        const ColumnIntervals& a = intervals(cols[0]);
        return rank_space_counts(a, cols.size() == 2 ? &intervals(cols[1]) : nullptr);
    }

private:
    const ColumnIntervals& intervals(std::size_t col) {
        if (!intervals_[col]) {
            columns_[col].emplace(joint_, col);
            ColumnIntervals ci{&*columns_[col], {}, {}};
            columns_[col]->intervals(radii_, true, ci.lo, ci.hi);
            intervals_[col] = std::move(ci);
        }
        return *intervals_[col];
    }

    const PointCloud& joint_;
    std::span<const double> radii_;
    std::vector<std::optional<SortedColumn>> columns_;
    std::vector<std::optional<ColumnIntervals>> intervals_;
};

}  // namespace

EstimateResult ksg_cmi(const PointCloud& x, const PointCloud& y, const PointCloud* z, int K, bool keep_locals) {
    check_rows(x, y, z);
    if (z != nullptr && z->empty()) z = nullptr;
    const std::size_t n = x.size();
    if (K < 1) throw std::invalid_argument("ksg: K must be >= 1");
    if (n <= static_cast<std::size_t>(K)) {
        throw DataError(fmt::format("ksg: {} samples are not enough for K = {}", n, K));
    }
    const PointCloud xs = x.standardized();
    const PointCloud ys = y.standardized();
    const DigammaTable psi(n + 1);
    const double psi_k = psi(static_cast<std::size_t>(K));
    std::vector<double> locals(n);

    if (z == nullptr) {
        const PointCloud* joint_parts[] = {&xs, &ys};
        const PointCloud joint = PointCloud::hstack(joint_parts);
        const std::vector<double> eps = KdTree(joint).all_kth_distances(K);
        MarginalCounter counter(joint, eps);
        const std::vector<std::size_t> nx = counter.count(0, xs.dims());
        const std::vector<std::size_t> ny = counter.count(xs.dims(), ys.dims());
        const double base = psi_k + psi(n);
        for (std::size_t i = 0; i < n; ++i) locals[i] = base - psi(nx[i] + 1) - psi(ny[i] + 1);
        return finish("mutual_information", std::move(locals), keep_locals);
    }

    const PointCloud zs = z->standardized();
    const PointCloud* joint_parts[] = {&xs, &ys, &zs};
    const PointCloud joint = PointCloud::hstack(joint_parts);
    const std::vector<double> eps = KdTree(joint).all_kth_distances(K);
    MarginalCounter counter(joint, eps);
    const std::size_t dx = xs.dims(), dy = ys.dims(), dz = zs.dims();
    const std::vector<std::size_t> nz = counter.count(dx + dy, dz);
    const std::vector<std::size_t> nxz = counter.count(0, dx, dx + dy, dz);
    const std::vector<std::size_t> nyz = counter.count(dx, dy, dx + dy, dz);
    for (std::size_t i = 0; i < n; ++i) locals[i] = psi_k - psi(nxz[i] + 1) - psi(nyz[i] + 1) + psi(nz[i] + 1);
    return finish("conditional_mutual_information", std::move(locals), keep_locals);
}

EstimateResult gaussian_cmi(const PointCloud& x, const PointCloud& y, const PointCloud* z, bool keep_locals) {
    check_rows(x, y, z);
    if (z != nullptr && z->empty()) z = nullptr;
    const std::size_t n = x.size();
    const std::size_t dims = x.dims() + y.dims() + (z ? z->dims() : 0);
    if (n <= dims + 2) throw DataError(fmt::format("gaussian estimator: {} samples for {} dimensions", n, dims));
    const PointCloud* parts[] = {&x, &y, z};
    Eigen::MatrixXd data = to_eigen(PointCloud::hstack(parts));
    data.rowwise() -= data.colwise().mean();
    const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n);

    const auto dx = static_cast<Eigen::Index>(x.dims());
    const auto dy = static_cast<Eigen::Index>(y.dims());
    const auto dz = static_cast<Eigen::Index>(z ? z->dims() : 0);
    const auto cx = range_cols(0, dx);
    const auto cy = range_cols(dx, dy);
    const auto cz = range_cols(dx + dy, dz);

    const GaussianBlock bxz = gaussian_block(data, cov, concat(cx, cz), keep_locals);
    const GaussianBlock byz = gaussian_block(data, cov, concat(cy, cz), keep_locals);
    const GaussianBlock bz = gaussian_block(data, cov, cz, keep_locals);
    const GaussianBlock bxyz = gaussian_block(data, cov, concat(concat(cx, cy), cz), keep_locals);
    const double value = 0.5 * (bxz.log_det + byz.log_det - bz.log_det - bxyz.log_det);

    EstimateResult r;
    r.measure = z ? "conditional_mutual_information" : "mutual_information";
    r.n = n;
    r.value = value;
    if (keep_locals) {
        std::vector<double> locals(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto e = static_cast<Eigen::Index>(i);
            locals[i] = value - 0.5 * (bxyz.quad(e) + bz.quad(e) - bxz.quad(e) - byz.quad(e));
        }
        r.locals = std::move(locals);
    }
    return r;
}

EstimateResult conditional_mutual_information(const PointCloud& x, const PointCloud& y, const PointCloud* z,
                                              const EstimatorConfig& cfg) {
    if (cfg.jitter) {
        const RngHandle base(cfg.jitter_seed);
        const PointCloud xj = jittered(x, base.substream(1));
        const PointCloud yj = jittered(y, base.substream(2));
        std::optional<PointCloud> zj;
        if (z != nullptr) zj = jittered(*z, base.substream(3));
        EstimatorConfig plain = cfg;
        plain.jitter = false;
        return conditional_mutual_information(xj, yj, zj ? &*zj : nullptr, plain);
    }
    EstimateResult r = cfg.kind == EstimatorKind::Ksg ? ksg_cmi(x, y, z, cfg.K, cfg.keep_locals)
                                                      : gaussian_cmi(x, y, z, cfg.keep_locals);
    r.config = cfg;
    return r;
}

double kl_entropy(const PointCloud& cloud, int K, std::vector<double>* locals) {
    const std::size_t n = cloud.size();
    if (K < 1 || n <= static_cast<std::size_t>(K)) throw DataError("kl_entropy: need n > K >= 1");
    const KdTree tree(cloud);
    const double base = digamma(static_cast<double>(n)) - digamma(static_cast<double>(K));
    const double d = static_cast<double>(cloud.dims());
    double sum = 0.0;
    if (locals != nullptr) locals->resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = tree.kth_distance(i, K);
        if (!(rho > 0.0)) {
            throw NumericError("kl_entropy: duplicate samples give a zero neighbour distance; enable jitter");
        }
        const double h = base + d * std::log(2.0 * rho);
        sum += h;
        if (locals != nullptr) (*locals)[i] = h;
    }
    return sum / static_cast<double>(n);
}

EstimateResult conditional_te(const TimeSeries& source, const TimeSeries& target,
                              std::span<const TimeSeries> conditionals, const EstimatorConfig& cfg) {
    const EmbeddedDataset ds = build_embedding(target, &source, conditionals, cfg.embedding());
    const PointCloud x = PointCloud::column(ds.target);
    const PointCloud* z_parts[] = {&ds.target_past, &ds.cond_past};
    const PointCloud z = PointCloud::hstack(z_parts);
    EstimateResult r = conditional_mutual_information(x, ds.source_past, &z, cfg);
    r.measure = conditionals.empty() ? "transfer_entropy" : "conditional_transfer_entropy";
    return r;
}

EstimateResult transfer_entropy(const TimeSeries& source, const TimeSeries& target, const EstimatorConfig& cfg) {
    return conditional_te(source, target, {}, cfg);
}

std::vector<TimeSeries> lexicographic_order(std::span<const TimeSeries> sources) {
    std::vector<TimeSeries> out(sources.begin(), sources.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const TimeSeries& a, const TimeSeries& b) { return a.label() < b.label(); });
    return out;
}

EstimateResult collective_te(const TimeSeries& target, std::span<const TimeSeries> sources,
                             const EstimatorConfig& cfg) {
    if (sources.empty()) throw std::invalid_argument("collective_te: at least one source required");
    EstimateResult total;
    total.measure = "collective_transfer_entropy";
    total.config = cfg;
    total.config.keep_locals = false;
    EstimatorConfig term_cfg = cfg;
    term_cfg.keep_locals = false;
    for (std::size_t b = 0; b < sources.size(); ++b) {
        const EstimateResult term = conditional_te(sources[b], target, sources.first(b), term_cfg);
        total.terms.push_back(term.value);
        total.term_labels.push_back(sources[b].label());
        total.value += term.value;
        total.n = b == 0 ? term.n : std::min(total.n, term.n);
    }
    return total;
}

EstimateResult history_information(const TimeSeries& past, const TimeSeries& x, const EstimatorConfig& cfg) {
    if (!past.same_grid(x)) throw DataError("history_information: series grids differ");
    const EmbeddingParams p{cfg.k, 1, 1, 1};
    const EmbeddedDataset dx = build_embedding(x, nullptr, {}, p);
    const EmbeddedDataset dp = past.shares_storage(x) && past.size() == x.size() && past.start_time() == x.start_time()
                                   ? dx
                                   : build_embedding(past, nullptr, {}, p);
    const PointCloud target = PointCloud::column(dx.target);
    EstimateResult r = conditional_mutual_information(dp.target_past, target, nullptr, cfg);
    r.measure = "active_information_storage";
    return r;
}

EstimateResult active_information_storage(const TimeSeries& x, const EstimatorConfig& cfg) {
    return history_information(x, x, cfg);
}

EstimateResult multi_information(std::span<const TimeSeries> series, const EstimatorConfig& cfg) {
    if (series.size() < 2) throw std::invalid_argument("multi_information: at least two series required");
    for (const TimeSeries& s : series) {
        if (!s.same_grid(series[0])) throw DataError("multi_information: series grids differ");
    }
    const std::size_t n = series[0].size();
    PointCloud joint(n, series.size());
    for (std::size_t a = 0; a < series.size(); ++a)
        for (std::size_t i = 0; i < n; ++i) joint(i, a) = series[a][i];
    if (cfg.jitter) joint = jittered(joint, RngHandle(cfg.jitter_seed).substream(4));

    EstimateResult r;
    r.measure = "multi_information";
    r.config = cfg;
    r.n = n;
    if (cfg.kind == EstimatorKind::Gaussian) {
        if (n <= series.size() + 2) throw DataError("multi_information: too few samples");
        Eigen::MatrixXd data = to_eigen(joint);
        data.rowwise() -= data.colwise().mean();
        const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n);
        double sum_marg = 0.0;
        std::vector<Eigen::Index> all;
        for (Eigen::Index a = 0; a < cov.rows(); ++a) {
            sum_marg += gaussian_block(data, cov, {a}, false).log_det;
            all.push_back(a);
        }
        const GaussianBlock full = gaussian_block(data, cov, all, cfg.keep_locals);
        r.value = 0.5 * (sum_marg - full.log_det);
        if (cfg.keep_locals) {
            std::vector<double> locals(n);
            for (std::size_t i = 0; i < n; ++i) {
                double marg_q = 0.0;
                for (Eigen::Index a = 0; a < cov.rows(); ++a) {
                    const double v = data(static_cast<Eigen::Index>(i), a);
                    marg_q += v * v / cov(a, a);
                }
                locals[i] = r.value - 0.5 * (full.quad(static_cast<Eigen::Index>(i)) - marg_q);
            }
            r.locals = std::move(locals);
        }
        return r;
    }

    const PointCloud zs = joint.standardized();
    std::vector<double> joint_local;
    kl_entropy(zs, cfg.K, &joint_local);
    std::vector<double> locals(n);
    for (std::size_t i = 0; i < n; ++i) locals[i] = -joint_local[i];
    std::vector<double> marg_local;
    for (std::size_t a = 0; a < series.size(); ++a) {
        kl_entropy(PointCloud::column(zs.column_values(a)), cfg.K, &marg_local);
        for (std::size_t i = 0; i < n; ++i) locals[i] += marg_local[i];
    }
    r.value = mean_of(locals);
    if (cfg.keep_locals) r.locals = std::move(locals);
    return r;
}

std::vector<double> local_values(LocalMeasure measure, std::span<const TimeSeries> inputs,
                                 const EstimatorConfig& cfg) {
    EstimatorConfig c = cfg;
    c.keep_locals = true;
    EstimateResult r;
    switch (measure) {
        case LocalMeasure::TransferEntropy:
            if (inputs.size() != 2) throw std::invalid_argument("local TE expects {source, target}");
            r = transfer_entropy(inputs[0], inputs[1], c);
            break;
        case LocalMeasure::ActiveInformationStorage:
            if (inputs.size() != 1) throw std::invalid_argument("local AIS expects one series");
            r = active_information_storage(inputs[0], c);
            break;
        case LocalMeasure::MultiInformation:
            r = multi_information(inputs, c);
            break;
    }
    return std::move(*r.locals);
}

double default_history_tolerance(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))); }

int select_history(const TimeSeries& x, int k_max, const EstimatorConfig& cfg, double tie_tolerance) {
    if (k_max < 1) throw std::invalid_argument("select_history: k_max must be >= 1");
    if (tie_tolerance < 0.0) tie_tolerance = default_history_tolerance(x.size());
    EstimatorConfig c = cfg;
    c.keep_locals = false;
    int best_k = 1;
    double best = 0.0;
    for (int kappa = 1; kappa <= k_max; ++kappa) {
        if (static_cast<std::size_t>(kappa) + static_cast<std::size_t>(cfg.K) + 2 >= x.size()) break;
        c.k = kappa;
        const double a = active_information_storage(x, c).value;
        if (kappa == 1 || a > best + tie_tolerance) {
            best = a;
            best_k = kappa;
        }
    }
    return best_k;
}

std::pair<int, EstimateResult> select_delay(const TimeSeries& source, const TimeSeries& target, int delay_min,
                                            int delay_max, const EstimatorConfig& cfg) {
    if (delay_min < 1 || delay_max < delay_min) throw std::invalid_argument("select_delay: invalid delay range");
    EstimatorConfig c = cfg;
    std::optional<std::pair<int, EstimateResult>> best;
    for (int d = delay_min; d <= delay_max; ++d) {
        c.delay = d;
        EstimateResult r = transfer_entropy(source, target, c);
        if (!best || r.value > best->second.value) best.emplace(d, std::move(r));
    }
    return std::move(*best);
}

std::string to_string(EstimatorKind kind) { return kind == EstimatorKind::Ksg ? "ksg" : "gaussian"; }

EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "ksg" || s == "KSG") return EstimatorKind::Ksg;
    if (s == "gaussian" || s == "Gaussian") return EstimatorKind::Gaussian;
    throw ConfigError("unknown estimator kind: " + s);
}

nlohmann::json to_json(const EstimatorConfig& cfg) {
    nlohmann::json j;
    j["kind"] = to_string(cfg.kind);
    if (cfg.kind == EstimatorKind::Ksg) j["K"] = cfg.K;
    j["k"] = cfg.k;
    j["l"] = cfg.l;
    j["m"] = cfg.m;
    j["delay"] = cfg.delay;
    j["jitter"] = cfg.jitter;
    return j;
}

nlohmann::json to_json(const EstimateResult& r) {
    nlohmann::json j;
    j["measure"] = r.measure;
    j["value_nats"] = r.value;
    j["n"] = r.n;
    j["config"] = to_json(r.config);
    if (r.significance) {
        j["p_value"] = r.significance->p_value;
        j["significant"] = r.significance->significant;
        j["n_surrogates"] = r.significance->n_surrogates;
    }
    if (!r.terms.empty()) {
        nlohmann::json terms = nlohmann::json::array();
        for (std::size_t i = 0; i < r.terms.size(); ++i) {
            terms.push_back({{"source", i < r.term_labels.size() ? r.term_labels[i] : ""}, {"value_nats", r.terms[i]}});
        }
        j["terms"] = terms;
    }
    if (r.locals) j["locals"] = *r.locals;
    return j;
}

}  // namespace infodyn
