#include "topoadv/pcp.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "topoadv/errors.hpp"
#include "topoadv/persistence.hpp"
#include "topoadv/rng.hpp"

namespace topoadv {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

double inv_digamma(double y) {
    double x = y >= -2.22 ? std::exp(y) + 0.5 : -1.0 / (y + kEulerGamma);
    for (int it = 0; it < 20; ++it) {
        x -= (digamma(x) - y) / trigamma(x);
        if (x <= 0.0) x = 1e-12;
    }
    return x;
}

} // namespace

double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return result;
}

double trigamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += inv * (1.0 + 0.5 * inv +
                     inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
    return result;
}

void PcpParams::validate() const {
    if (K < 1) throw InputError("pcp: K must be >= 1");
    if (!(alpha_small > 0.0)) throw InputError("pcp: alpha_small must be > 0");
    if (!(ratio > 1.0)) throw InputError("pcp: ratio must be > 1");
    if (points_per_cluster.size() != static_cast<std::size_t>(K) + 1)
        throw InputError("pcp: need exactly K+1 cluster counts");
}

Simplex standard_simplex(int K) {
    if (K < 1) throw InputError("standard_simplex: K must be >= 1");
    Simplex s;
    s.vertices = PointCloud(static_cast<std::size_t>(K) + 1, static_cast<std::size_t>(K));
    const double c = (1.0 + std::sqrt(static_cast<double>(K) + 1.0)) /
                     (static_cast<double>(K) * std::sqrt(2.0));
    for (int j = 0; j < K; ++j) s.vertices.at(0, static_cast<std::size_t>(j)) = c;
    const double e = 1.0 / std::sqrt(2.0);
    for (int i = 1; i <= K; ++i)
        s.vertices.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i) - 1) = e;
    return s;
}

PcpSample sample_pcp(const PcpParams& params, const Simplex& simplex) {
    params.validate();
    if (simplex.K() != params.K) throw InputError("pcp: simplex dimension does not match K");
    if (!(params.ratio > static_cast<double>(params.K)))
        throw InputError("pcp: ratio must exceed K (alpha_large = alpha_small*(ratio-K) would "
                         "be <= 0); got ratio=" +
                         std::to_string(params.ratio) + ", K=" + std::to_string(params.K));

    const std::size_t clusters = static_cast<std::size_t>(params.K) + 1;
    const std::size_t total =
        std::accumulate(params.points_per_cluster.begin(), params.points_per_cluster.end(),
                        std::size_t{0});
    PcpSample out;
    out.points = PointCloud(total, static_cast<std::size_t>(params.K));
    out.barycentric = PointCloud(total, clusters);
    out.labels.resize(total);

    const double a_small = params.alpha_small;
    const double a_large = params.alpha_large();
    std::size_t row = 0;
    for (std::size_t cluster = 0; cluster < clusters; ++cluster) {
        auto rng = substream(params.seed, cluster);
        for (std::size_t t = 0; t < params.points_per_cluster[cluster]; ++t, ++row) {
            // Dirichlet via normalized Gamma draws
            double sum = 0.0;
            for (std::size_t j = 0; j < clusters; ++j) {
                std::gamma_distribution<double> gamma(j == cluster ? a_large : a_small, 1.0);
                const double g = gamma(rng);
                out.barycentric.at(row, j) = g;
                sum += g;
            }
            for (std::size_t j = 0; j < clusters; ++j) {
                const double lambda = out.barycentric.at(row, j) / sum;
                out.barycentric.at(row, j) = lambda;
                for (std::size_t k = 0; k < out.points.d; ++k)
                    out.points.at(row, k) += lambda * simplex.vertices.at(j, k);
            }
            out.labels[row] = static_cast<int>(cluster);
        }
    }
    return out;
}

std::vector<std::size_t> even_split(std::size_t n, int K) {
    const std::size_t clusters = static_cast<std::size_t>(K) + 1;
    std::vector<std::size_t> counts(clusters, n / clusters);
    for (std::size_t i = 0; i < n % clusters; ++i) ++counts[i];
    return counts;
}

std::vector<MstStudyRow> mst_length_study(const std::vector<double>& alpha_smalls,
                                          const std::vector<double>& ratios, std::size_t n_points,
                                          int K, int reps, std::uint64_t seed) {
    if (reps < 2) throw InputError("mst_length_study: reps must be >= 2");
    const Simplex simplex = standard_simplex(K);
    std::vector<MstStudyRow> table;
    std::size_t cell = 0;
    for (double a : alpha_smalls) {
        for (double r : ratios) {
            std::vector<double> lengths(static_cast<std::size_t>(reps));
            for (int t = 0; t < reps; ++t) {
                PcpParams params;
                params.K = K;
                params.alpha_small = a;
                params.ratio = r;
                params.points_per_cluster = even_split(n_points, K);
                params.seed = mix64(mix64(seed) ^ (cell * static_cast<std::size_t>(reps) +
                                                   static_cast<std::size_t>(t)));
                const PcpSample sample = sample_pcp(params, simplex);
                lengths[static_cast<std::size_t>(t)] =
                    mst_h0(pairwise_distances(sample.points)).total_length;
            }
            const double mean =
                std::accumulate(lengths.begin(), lengths.end(), 0.0) / lengths.size();
            double ss = 0.0;
            for (double v : lengths) ss += (v - mean) * (v - mean);
            table.push_back({a, r, mean, std::sqrt(ss / (lengths.size() - 1)),
                             reps});
            ++cell;
        }
    }
    return table;
}

DirichletFit dirichlet_mle(const PointCloud& samples) {
    const std::size_t n = samples.n;
    const std::size_t dim = samples.d;
    if (dim < 2) throw InputError("dirichlet_mle: need at least 2 components");
    if (n < dim + 1)
        throw InputError("dirichlet_mle: need at least K+2 rows (" + std::to_string(dim + 1) +
                         "), got " + std::to_string(n));

    // clip, validate the simplex constraint, renormalize
    PointCloud rows = samples;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            if (!std::isfinite(rows.at(i, j)) || rows.at(i, j) < 0.0)
                throw InputError("dirichlet_mle: row " + std::to_string(i) +
                                 " has a negative or non-finite entry");
            sum += rows.at(i, j);
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw InputError("dirichlet_mle: row " + std::to_string(i) +
                             " does not sum to 1 (sum=" + std::to_string(sum) + ")");
        double clipped = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            rows.at(i, j) = std::max(rows.at(i, j), 1e-10);
            clipped += rows.at(i, j);
        }
        for (std::size_t j = 0; j < dim; ++j) rows.at(i, j) /= clipped;
    }

    std::vector<double> mean_log(dim, 0.0), mean(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            mean_log[j] += std::log(rows.at(i, j));
            mean[j] += rows.at(i, j);
        }
    for (std::size_t j = 0; j < dim; ++j) {
        mean_log[j] /= static_cast<double>(n);
        mean[j] /= static_cast<double>(n);
    }

    // moment-matching initialization from the first component's variance
    double var0 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        var0 += (rows.at(i, 0) - mean[0]) * (rows.at(i, 0) - mean[0]);
    var0 /= static_cast<double>(n);
    double alpha_total = var0 > 0.0 ? mean[0] * (1.0 - mean[0]) / var0 - 1.0 : 0.0;
    if (!(alpha_total > 0.0)) alpha_total = static_cast<double>(dim);

    DirichletFit fit;
    fit.alpha.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
        fit.alpha[j] = std::max(mean[j] * alpha_total, 1e-6);

    auto log_likelihood = [&](const std::vector<double>& alpha) {
        double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
        double ll = std::lgamma(total);
        for (std::size_t j = 0; j < dim; ++j)
            ll += -std::lgamma(alpha[j]) + (alpha[j] - 1.0) * mean_log[j];
        return ll;
    };

    const int max_iters = 1000;
    for (int it = 0; it < max_iters; ++it) {
        const double total = std::accumulate(fit.alpha.begin(), fit.alpha.end(), 0.0);
        const double psi_total = digamma(total);
        for (std::size_t j = 0; j < dim; ++j)
            fit.alpha[j] = inv_digamma(psi_total + mean_log[j]);

        fit.iterations = it + 1;
        fit.log_likelihood = log_likelihood(fit.alpha);
        fit.log_likelihood_trace.push_back(fit.log_likelihood);

        const double new_total = std::accumulate(fit.alpha.begin(), fit.alpha.end(), 0.0);
        const double psi_new = digamma(new_total);
        double grad_norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = psi_new - digamma(fit.alpha[j]) + mean_log[j];
            grad_norm2 += g * g;
        }
        if (std::sqrt(grad_norm2) < 1e-8) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged)
        throw NumericError("dirichlet_mle: no convergence after " + std::to_string(max_iters) +
                           " iterations (last log-likelihood " +
                           std::to_string(fit.log_likelihood) + ")");
    return fit;
}

} // namespace topoadv
