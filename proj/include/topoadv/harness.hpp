#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topoadv/grad.hpp"
#include "topoadv/mmdtest.hpp"

namespace topoadv {

enum class Trend { UP, DOWN, NONMONOTONE };

std::string trend_symbol(Trend trend); // "↑" / "↓" / "-"

// Spearman rank correlation with average ranks for ties; 0 when either
// variable is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct MixtureCurve {
    std::vector<double> ratios;
    std::vector<double> raw_loss;
    std::vector<double> normalized_loss; // anchored at 1 for ratio 0
    TCMethod method = TCMethod::TP;
    Trend trend = Trend::NONMONOTONE;
};

Trend classify_trend(const std::vector<double>& ratios, const std::vector<double>& values);

// Replacement study: for each ratio r_k = k/(steps-1), the first
// floor(r_k * N) rows (in a per-seed random order) of the clean batch are
// replaced by their paired adversarial counterparts; the TC loss against the
// text cloud is normalized by the all-clean value and averaged over seeds.
MixtureCurve mixture_curve(const PointCloud& clean, const PointCloud& adv,
                           const PointCloud& text, int steps, const TCParams& params,
                           const std::vector<std::uint64_t>& seeds);

// CSV rows `label,method,trend` with the arrow symbols.
std::string monotonicity_table(const std::vector<std::pair<std::string, MixtureCurve>>& curves);

struct DetectionSettings {
    std::size_t batch = 50;
    int trials = 100;
    int permutations = 200;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    KernelMethod kernel = KernelMethod::TPSAMMD;
    TCParams tc;      // feature extraction parameters (method follows kernel)
    int opt_steps = 200;
    double opt_lr = 0.05;
};

struct TrialResult {
    int trial = 0;
    double statistic = 0.0;
    double threshold = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

// Power / Type-I study. The first `batch` rows of each pool calibrate the
// kernel (median-heuristic bandwidths, then gradient ascent); every trial
// then samples disjoint batches from the remaining rows, extracts features
// against the hold-out and text clouds, and runs the permutation test.
// The rejection fraction of the returned trials is the power (or the Type-I
// error when both pools are clean).
std::vector<TrialResult> detection_study(const PointCloud& clean_pool,
                                         const PointCloud& test_pool, const PointCloud& holdout,
                                         const PointCloud& text, const DetectionSettings& settings,
                                         KernelParams* optimized_params = nullptr);

std::string results_csv(const std::vector<TrialResult>& results);

// Per-sample feature view used by a kernel method: TC gradients for
// TPSAMMD/MKSAMMD, the embeddings themselves for SAMMD_EMB (single-view
// ingestion), empty for GAUSSIAN.
PointCloud detection_features(const PointCloud& batch, const PointCloud& holdout,
                              const PointCloud& text, KernelMethod kernel, const TCParams& tc);

PointCloud subcloud(const PointCloud& cloud, const std::vector<std::size_t>& rows);

} // namespace topoadv
