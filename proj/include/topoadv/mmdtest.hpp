#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "topoadv/pointcloud.hpp"

namespace topoadv {

enum class KernelMethod { TPSAMMD, MKSAMMD, SAMMD_EMB, GAUSSIAN };

KernelMethod kernel_method_from_string(const std::string& name);
std::string to_string(KernelMethod method);

// Parameters of the two-view deep kernel
//   k = [(1 - eps0) * exp(-|fa - fb|^2 / (2 sigma_tc^2)) + eps0]
//       * exp(-|ea - eb|^2 / (2 sigma_nu^2))
// For TPSAMMD/MKSAMMD the feature view holds topological features, for
// SAMMD_EMB a second embedding view; GAUSSIAN keeps only the embedding factor.
struct KernelParams {
    double eps0 = 0.1;
    double sigma_nu = 1.0;
    double sigma_tc = 1.0;
    KernelMethod method = KernelMethod::TPSAMMD;

    void validate() const;
};

// Embeddings plus the aligned per-sample feature view. `feats.n == 0` is
// allowed for GAUSSIAN only.
struct SampleSet {
    PointCloud emb;
    PointCloud feats;
};

double tc_kernel(std::span<const double> emb_a, std::span<const double> emb_b,
                 std::span<const double> feat_a, std::span<const double> feat_b,
                 const KernelParams& params);

// Identical functional form with a second embedding view in the feature slot.
double sammd_emb_kernel(std::span<const double> emb_a, std::span<const double> emb_b,
                        std::span<const double> view_a, std::span<const double> view_b,
                        const KernelParams& params);

// U-statistic MMD^2 with the symmetric kernel sum
//   H_ij = k(x_i,x_j) + k(y_i,y_j) - k(x_i,y_j) - k(y_i,x_j)
// over equal-size sets, i != j.
double mmd_u_statistic(const SampleSet& set_x, const SampleSet& set_y,
                       const KernelParams& params);

struct TestOutcome {
    double statistic = 0.0;
    double threshold = 0.0;
    double p_value = 1.0;
    bool reject = false;
    int n_permutations = 0;
    std::uint64_t seed = 0;
};

// Permutation-calibrated two-sample test: pools the 2n samples, recomputes the
// statistic over seeded random equal splits, thresholds at the k-th largest
// permuted value with k = floor(alpha * (n_permutations + 1)).
TestOutcome permutation_test(const SampleSet& set_x, const SampleSet& set_y,
                             const KernelParams& params, int n_permutations, double alpha,
                             std::uint64_t seed);

// Criterion maximized during kernel optimization: MMD^2 / sqrt(var(H) + 1e-8).
double mmd_criterion(const SampleSet& set_x, const SampleSet& set_y, const KernelParams& params);

// Gradient ascent on (log sigma_nu, log sigma_tc, logit eps0) with analytic
// gradients; returns the parameters with the best criterion seen (including
// the starting point).
KernelParams optimize_kernel(const SampleSet& train_x, const SampleSet& train_y,
                             const KernelParams& params0, int steps, double lr);

// sqrt(median squared pairwise distance / 2) over the pooled rows of two
// clouds; 1.0 when degenerate.
double median_bandwidth(const PointCloud& a, const PointCloud& b);

} // namespace topoadv
