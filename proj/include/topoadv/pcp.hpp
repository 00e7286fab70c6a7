#pragma once

#include <cstdint>
#include <vector>

#include "topoadv/pointcloud.hpp"

namespace topoadv {

// Cluster process on a K-simplex. Cluster i draws barycentric coordinates
// from Dirichlet(alpha_small, ..., alpha_large at index i, ..., alpha_small)
// with alpha_total = alpha_small * ratio and
// alpha_large = alpha_small * (ratio - K); ratio > K is required so that
// alpha_large stays positive. Larger ratio pulls clusters toward the
// vertices, larger alpha_small concentrates points around the cluster center.
struct PcpParams {
    int K = 2;
    double alpha_small = 1.0;
    double ratio = 10.0; // 1 / normalized alpha_small
    std::vector<std::size_t> points_per_cluster;
    std::uint64_t seed = 0;

    double alpha_total() const { return alpha_small * ratio; }
    double alpha_large() const { return alpha_small * (ratio - K); }
    void validate() const;
};

struct Simplex {
    PointCloud vertices; // (K+1) x K
    int K() const { return static_cast<int>(vertices.d); }
};

// Regular simplex with unit edge length and deterministic orientation.
Simplex standard_simplex(int K);

struct PcpSample {
    PointCloud points;
    std::vector<int> labels;        // generating cluster per point
    PointCloud barycentric;         // n x (K+1), rows sum to 1
};

PcpSample sample_pcp(const PcpParams& params, const Simplex& simplex);

// Splits n as evenly as possible over K+1 clusters (remainder to the first).
std::vector<std::size_t> even_split(std::size_t n, int K);

struct MstStudyRow {
    double alpha_small = 0.0;
    double ratio = 0.0;
    double mean_mst = 0.0;
    double std_mst = 0.0;
    int reps = 0;
};

// Monte Carlo of the MST length of PCP clouds over a parameter grid; each
// (cell, rep) draws from its own seeded substream.
std::vector<MstStudyRow> mst_length_study(const std::vector<double>& alpha_smalls,
                                          const std::vector<double>& ratios, std::size_t n_points,
                                          int K, int reps, std::uint64_t seed);

struct DirichletFit {
    std::vector<double> alpha;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> log_likelihood_trace; // one entry per iteration
};

// Maximum-likelihood Dirichlet fit: moment-matching start, then the standard
// fixed-point update alpha_j <- psi^{-1}(psi(sum alpha) + mean log lambda_j),
// which never decreases the likelihood. Rows must be strictly positive
// (clipped at 1e-10) and sum to 1 within 1e-6.
DirichletFit dirichlet_mle(const PointCloud& samples);

double digamma(double x);
double trigamma(double x);

} // namespace topoadv
