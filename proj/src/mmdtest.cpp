#include "topoadv/mmdtest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "topoadv/errors.hpp"
#include "topoadv/rng.hpp"

namespace topoadv {

namespace {

struct KernelValue {
    double k;
    double d_log_sigma_nu;
    double d_log_sigma_tc;
    double d_logit_eps0;
};

// Kernel and its derivatives in the optimization coordinates, from the two
// squared distances (embedding view b2, feature view a2).
KernelValue eval_kernel(double a2, double b2, const KernelParams& p) {
    const double nu = std::exp(-b2 / (2.0 * p.sigma_nu * p.sigma_nu));
    if (p.method == KernelMethod::GAUSSIAN) {
        return {nu, nu * b2 / (p.sigma_nu * p.sigma_nu), 0.0, 0.0};
    }
    const double tau = std::exp(-a2 / (2.0 * p.sigma_tc * p.sigma_tc));
    const double mix = (1.0 - p.eps0) * tau + p.eps0;
    const double k = mix * nu;
    return {k,
            k * b2 / (p.sigma_nu * p.sigma_nu),
            (1.0 - p.eps0) * tau * (a2 / (p.sigma_tc * p.sigma_tc)) * nu,
            (1.0 - tau) * nu * p.eps0 * (1.0 - p.eps0)};
}

void check_sets(const SampleSet& x, const SampleSet& y, const KernelParams& p) {
    p.validate();
    if (x.emb.n != y.emb.n) throw InputError("mmd: sample sets must have equal sizes");
    if (x.emb.n < 2) throw InputError("mmd: need at least 2 samples per set");
    if (x.emb.d != y.emb.d) throw InputError("mmd: embedding dimension mismatch");
    if (p.method != KernelMethod::GAUSSIAN) {
        if (x.feats.n != x.emb.n || y.feats.n != y.emb.n)
            throw InputError("mmd: feature rows must align with embedding rows");
        if (x.feats.d != y.feats.d) throw InputError("mmd: feature dimension mismatch");
    }
}

// Pooled squared-distance matrices for the embedding and feature views;
// theta-independent, shared across optimization steps and permutations.
struct PooledDistances {
    std::size_t n;      // per-set size; pool is 2n
    std::vector<double> emb2;
    std::vector<double> feat2;
    bool has_feats;

    double e2(std::size_t a, std::size_t b) const { return emb2[a * 2 * n + b]; }
    double f2(std::size_t a, std::size_t b) const { return has_feats ? feat2[a * 2 * n + b] : 0.0; }
};

PooledDistances pool_distances(const SampleSet& x, const SampleSet& y, bool has_feats) {
    const std::size_t n = x.emb.n;
    const std::size_t m = 2 * n;
    PooledDistances out{n, std::vector<double>(m * m, 0.0), {}, has_feats};
    if (has_feats) out.feat2.assign(m * m, 0.0);
    auto emb_row = [&](std::size_t a) { return a < n ? x.emb.row(a) : y.emb.row(a - n); };
    auto feat_row = [&](std::size_t a) { return a < n ? x.feats.row(a) : y.feats.row(a - n); };
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double e = squared_distance(emb_row(a), emb_row(b));
            out.emb2[a * m + b] = out.emb2[b * m + a] = e;
            if (has_feats) {
                const double f = squared_distance(feat_row(a), feat_row(b));
                out.feat2[a * m + b] = out.feat2[b * m + a] = f;
            }
        }
    }
    return out;
}

std::vector<double> pooled_gram(const PooledDistances& pd, const KernelParams& p) {
    const std::size_t m = 2 * pd.n;
    std::vector<double> gram(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        gram[a * m + a] = 1.0;
        for (std::size_t b = a + 1; b < m; ++b) {
            const double k = eval_kernel(pd.f2(a, b), pd.e2(a, b), p).k;
            gram[a * m + b] = gram[b * m + a] = k;
        }
    }
    return gram;
}

double statistic_from_gram(const std::vector<double>& gram, std::span<const std::uint32_t> idx,
                           std::size_t n) {
    const std::size_t m = 2 * n;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const std::size_t xi = idx[i], xj = idx[j], yi = idx[n + i], yj = idx[n + j];
            sum += gram[xi * m + xj] + gram[yi * m + yj] - gram[xi * m + yj] - gram[yi * m + xj];
        }
    }
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct CriterionValue {
    double j;
    double grad[3]; // d/d(log sigma_nu), d/d(log sigma_tc), d/d(logit eps0)
};

CriterionValue eval_criterion(const PooledDistances& pd, const KernelParams& p) {
    const std::size_t n = pd.n;
    const double dn = static_cast<double>(n);
    // H_ij and its theta-derivatives, i != j
    std::vector<double> row_sum(n, 0.0);
    std::vector<double> drow_sum(3 * n, 0.0);
    double total = 0.0, dtotal[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const KernelValue kxx = eval_kernel(pd.f2(i, j), pd.e2(i, j), p);
            const KernelValue kyy = eval_kernel(pd.f2(n + i, n + j), pd.e2(n + i, n + j), p);
            const KernelValue kxy = eval_kernel(pd.f2(i, n + j), pd.e2(i, n + j), p);
            const KernelValue kyx = eval_kernel(pd.f2(n + i, j), pd.e2(n + i, j), p);
            const double h = kxx.k + kyy.k - kxy.k - kyx.k;
            const double dh[3] = {
                kxx.d_log_sigma_nu + kyy.d_log_sigma_nu - kxy.d_log_sigma_nu - kyx.d_log_sigma_nu,
                kxx.d_log_sigma_tc + kyy.d_log_sigma_tc - kxy.d_log_sigma_tc - kyx.d_log_sigma_tc,
                kxx.d_logit_eps0 + kyy.d_logit_eps0 - kxy.d_logit_eps0 - kyx.d_logit_eps0};
            row_sum[i] += h;
            total += h;
            for (int t = 0; t < 3; ++t) {
                drow_sum[static_cast<std::size_t>(t) * n + i] += dh[t];
                dtotal[t] += dh[t];
            }
        }
    }
    const double pairs = dn * (dn - 1.0);
    const double mmd = total / pairs;
    double var = 0.0, dvar[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        var += row_sum[i] * row_sum[i];
        for (int t = 0; t < 3; ++t)
            dvar[t] += 2.0 * row_sum[i] * drow_sum[static_cast<std::size_t>(t) * n + i];
    }
    var = 4.0 * var / (dn * dn * dn) - 4.0 * total * total / (dn * dn * dn * dn);
    for (int t = 0; t < 3; ++t)
        dvar[t] = 4.0 * dvar[t] / (dn * dn * dn) - 8.0 * total * dtotal[t] / (dn * dn * dn * dn);

    // the empirical variance can come out slightly negative; clamp it (and
    // drop its derivative at the clamp) so the criterion stays finite
    const bool clamped = var < 0.0;
    const double s = (clamped ? 0.0 : var) + 1e-8;
    if (clamped)
        for (int t = 0; t < 3; ++t) dvar[t] = 0.0;
    const double denom = std::sqrt(s);
    CriterionValue out{};
    out.j = mmd / denom;
    if (!std::isfinite(out.j))
        throw NumericError("kernel optimization criterion is non-finite (mmd=" +
                           std::to_string(mmd) + ", var=" + std::to_string(var) + ")");
    for (int t = 0; t < 3; ++t)
        out.grad[t] = dtotal[t] / pairs / denom - mmd * dvar[t] / (2.0 * s * denom);
    return out;
}

double logit(double x) { return std::log(x / (1.0 - x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

KernelParams params_from_theta(const double theta[3], const KernelParams& base) {
    KernelParams p = base;
    p.sigma_nu = std::exp(theta[0]);
    p.sigma_tc = std::exp(theta[1]);
    p.eps0 = sigmoid(theta[2]);
    return p;
}

} // namespace

KernelMethod kernel_method_from_string(const std::string& name) {
    if (name == "tpsammd") return KernelMethod::TPSAMMD;
    if (name == "mksammd") return KernelMethod::MKSAMMD;
    if (name == "sammd-emb") return KernelMethod::SAMMD_EMB;
    if (name == "gaussian") return KernelMethod::GAUSSIAN;
    throw InputError("unknown kernel method: " + name);
}

std::string to_string(KernelMethod method) {
    switch (method) {
    case KernelMethod::TPSAMMD: return "tpsammd";
    case KernelMethod::MKSAMMD: return "mksammd";
    case KernelMethod::SAMMD_EMB: return "sammd-emb";
    case KernelMethod::GAUSSIAN: return "gaussian";
    }
    return "?";
}

void KernelParams::validate() const {
    if (!(eps0 > 0.0 && eps0 < 1.0)) throw InputError("kernel: eps0 must be in (0, 1)");
    if (!(sigma_nu > 0.0)) throw InputError("kernel: sigma_nu must be > 0");
    if (!(sigma_tc > 0.0)) throw InputError("kernel: sigma_tc must be > 0");
}

double tc_kernel(std::span<const double> emb_a, std::span<const double> emb_b,
                 std::span<const double> feat_a, std::span<const double> feat_b,
                 const KernelParams& params) {
    params.validate();
    if (emb_a.size() != emb_b.size()) throw InputError("tc_kernel: embedding dimension mismatch");
    if (params.method != KernelMethod::GAUSSIAN && feat_a.size() != feat_b.size())
        throw InputError("tc_kernel: feature dimension mismatch");
    const double a2 =
        params.method == KernelMethod::GAUSSIAN ? 0.0 : squared_distance(feat_a, feat_b);
    return eval_kernel(a2, squared_distance(emb_a, emb_b), params).k;
}

double sammd_emb_kernel(std::span<const double> emb_a, std::span<const double> emb_b,
                        std::span<const double> view_a, std::span<const double> view_b,
                        const KernelParams& params) {
    return tc_kernel(emb_a, emb_b, view_a, view_b, params);
}

double mmd_u_statistic(const SampleSet& set_x, const SampleSet& set_y,
                       const KernelParams& params) {
    check_sets(set_x, set_y, params);
    const PooledDistances pd =
        pool_distances(set_x, set_y, params.method != KernelMethod::GAUSSIAN);
    const std::vector<double> gram = pooled_gram(pd, params);
    std::vector<std::uint32_t> idx(2 * pd.n);
    std::iota(idx.begin(), idx.end(), 0u);
    return statistic_from_gram(gram, idx, pd.n);
}

TestOutcome permutation_test(const SampleSet& set_x, const SampleSet& set_y,
                             const KernelParams& params, int n_permutations, double alpha,
                             std::uint64_t seed) {
    check_sets(set_x, set_y, params);
    if (n_permutations < 100) throw InputError("permutation test: need >= 100 permutations");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("permutation test: alpha must be in (0,1)");

    const std::size_t n = set_x.emb.n;
    const PooledDistances pd =
        pool_distances(set_x, set_y, params.method != KernelMethod::GAUSSIAN);
    const std::vector<double> gram = pooled_gram(pd, params);

    std::vector<std::uint32_t> identity(2 * n);
    std::iota(identity.begin(), identity.end(), 0u);
    const double observed = statistic_from_gram(gram, identity, n);

    std::vector<double> perm_stats(static_cast<std::size_t>(n_permutations));
    std::vector<std::uint32_t> idx(2 * n);
    for (int t = 0; t < n_permutations; ++t) {
        idx = identity;
        auto rng = substream(seed, static_cast<std::uint64_t>(t));
        std::shuffle(idx.begin(), idx.end(), rng);
        perm_stats[static_cast<std::size_t>(t)] = statistic_from_gram(gram, idx, n);
    }

    std::vector<double> sorted = perm_stats;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const int k = static_cast<int>(std::floor(alpha * (n_permutations + 1)));
    const double threshold =
        k >= 1 ? sorted[static_cast<std::size_t>(k - 1)] : std::numeric_limits<double>::infinity();

    int ge = 0;
    for (double s : perm_stats)
        if (s >= observed) ++ge;

    TestOutcome out;
    out.statistic = observed;
    out.threshold = threshold;
    out.p_value = static_cast<double>(1 + ge) / static_cast<double>(n_permutations + 1);
    out.reject = observed > threshold;
    out.n_permutations = n_permutations;
    out.seed = seed;
    return out;
}

double mmd_criterion(const SampleSet& set_x, const SampleSet& set_y, const KernelParams& params) {
    check_sets(set_x, set_y, params);
    const PooledDistances pd =
        pool_distances(set_x, set_y, params.method != KernelMethod::GAUSSIAN);
    return eval_criterion(pd, params).j;
}

KernelParams optimize_kernel(const SampleSet& train_x, const SampleSet& train_y,
                             const KernelParams& params0, int steps, double lr) {
    check_sets(train_x, train_y, params0);
    if (steps < 0) throw InputError("optimize_kernel: steps must be >= 0");
    if (steps == 0) return params0;
    const PooledDistances pd =
        pool_distances(train_x, train_y, params0.method != KernelMethod::GAUSSIAN);

    double theta[3] = {std::log(params0.sigma_nu), std::log(params0.sigma_tc),
                       logit(params0.eps0)};
    CriterionValue cur = eval_criterion(pd, params0);
    double best_j = cur.j;
    double best_theta[3] = {theta[0], theta[1], theta[2]};

    for (int step = 0; step < steps; ++step) {
        for (int t = 0; t < 3; ++t) theta[t] += lr * cur.grad[t];
        const KernelParams p = params_from_theta(theta, params0);
        cur = eval_criterion(pd, p);
        if (cur.j > best_j) {
            best_j = cur.j;
            for (int t = 0; t < 3; ++t) best_theta[t] = theta[t];
        }
    }
    return params_from_theta(best_theta, params0);
}

double median_bandwidth(const PointCloud& a, const PointCloud& b) {
    const PointCloud pooled = vcat(a, b);
    std::vector<double> sq;
    sq.reserve(pooled.n * (pooled.n - 1) / 2);
    for (std::size_t i = 0; i < pooled.n; ++i)
        for (std::size_t j = i + 1; j < pooled.n; ++j)
            sq.push_back(squared_distance(pooled.row(i), pooled.row(j)));
    if (sq.empty()) return 1.0;
    const std::size_t mid = sq.size() / 2;
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid), sq.end());
    const double med = sq[mid];
    return med > 0.0 ? std::sqrt(med / 2.0) : 1.0;
}

} // namespace topoadv
