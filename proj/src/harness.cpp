#include "topoadv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "topoadv/errors.hpp"
#include "topoadv/io.hpp"
#include "topoadv/rng.hpp"

namespace topoadv {

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

TCMethod tc_method_for(KernelMethod kernel, TCMethod fallback) {
    switch (kernel) {
    case KernelMethod::TPSAMMD: return TCMethod::TP;
    case KernelMethod::MKSAMMD: return TCMethod::MK;
    default: return fallback;
    }
}

} // namespace

std::string trend_symbol(Trend trend) {
    switch (trend) {
    case Trend::UP: return "↑";
    case Trend::DOWN: return "↓";
    case Trend::NONMONOTONE: return "-";
    }
    return "?";
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw InputError("spearman: need two equal-length series of >= 2 points");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean) * (ra[i] - mean);
        vb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

Trend classify_trend(const std::vector<double>& ratios, const std::vector<double>& values) {
    const double rho = spearman(ratios, values);
    if (rho >= 0.95) return Trend::UP;
    if (rho <= -0.95) return Trend::DOWN;
    return Trend::NONMONOTONE;
}

MixtureCurve mixture_curve(const PointCloud& clean, const PointCloud& adv,
                           const PointCloud& text, int steps, const TCParams& params,
                           const std::vector<std::uint64_t>& seeds) {
    params.validate();
    if (clean.n != adv.n || clean.d != adv.d)
        throw InputError("mixture_curve: clean and adversarial clouds must pair by index "
                         "(equal shapes)");
    if (steps < 2) throw InputError("mixture_curve: need steps >= 2");
    if (seeds.empty()) throw InputError("mixture_curve: need at least one seed");

    const PersistenceDiagram diag_text =
        vr_persistence(pairwise_distances(text), params.max_dim);
    const double base =
        tc_loss(vr_persistence(pairwise_distances(clean), params.max_dim), diag_text, params);
    if (base == 0.0)
        throw NumericError("mixture_curve: all-clean loss is zero, cannot normalize");

    MixtureCurve curve;
    curve.method = params.method;
    curve.ratios.resize(static_cast<std::size_t>(steps));
    curve.raw_loss.assign(static_cast<std::size_t>(steps), 0.0);
    curve.normalized_loss.assign(static_cast<std::size_t>(steps), 0.0);
    for (int k = 0; k < steps; ++k)
        curve.ratios[static_cast<std::size_t>(k)] =
            static_cast<double>(k) / static_cast<double>(steps - 1);

    std::vector<std::size_t> order(clean.n);
    for (std::uint64_t s : seeds) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto rng = substream(s, 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int k = 0; k < steps; ++k) {
            const auto uk = static_cast<std::size_t>(k);
            const auto replaced =
                static_cast<std::size_t>(std::floor(curve.ratios[uk] * static_cast<double>(clean.n)));
            double loss;
            if (replaced == 0) {
                loss = base;
            } else {
                PointCloud mix = clean;
                for (std::size_t t = 0; t < replaced; ++t)
                    for (std::size_t c = 0; c < mix.d; ++c)
                        mix.at(order[t], c) = adv.at(order[t], c);
                loss = tc_loss(vr_persistence(pairwise_distances(mix), params.max_dim),
                               diag_text, params);
            }
            curve.raw_loss[uk] += loss / static_cast<double>(seeds.size());
            curve.normalized_loss[uk] += (loss / base) / static_cast<double>(seeds.size());
        }
    }
    curve.normalized_loss[0] = 1.0; // exact anchor
    curve.trend = classify_trend(curve.ratios, curve.normalized_loss);
    return curve;
}

std::string monotonicity_table(const std::vector<std::pair<std::string, MixtureCurve>>& curves) {
    std::ostringstream out;
    out << "label,method,trend\n";
    for (const auto& [label, curve] : curves)
        out << label << ',' << (curve.method == TCMethod::TP ? "tp" : "mk") << ','
            << trend_symbol(curve.trend) << '\n';
    return out.str();
}

PointCloud subcloud(const PointCloud& cloud, const std::vector<std::size_t>& rows) {
    PointCloud out(rows.size(), cloud.d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cloud.d; ++j) out.at(i, j) = cloud.at(rows[i], j);
    return out;
}

PointCloud detection_features(const PointCloud& batch, const PointCloud& holdout,
                              const PointCloud& text, KernelMethod kernel, const TCParams& tc) {
    switch (kernel) {
    case KernelMethod::TPSAMMD:
    case KernelMethod::MKSAMMD: {
        TCParams params = tc;
        params.method = tc_method_for(kernel, tc.method);
        return batch_features(batch, holdout, text, params).grads;
    }
    case KernelMethod::SAMMD_EMB:
        return batch; // single-view ingestion: both kernel factors share it
    case KernelMethod::GAUSSIAN:
        return PointCloud{};
    }
    return PointCloud{};
}

std::vector<TrialResult> detection_study(const PointCloud& clean_pool,
                                         const PointCloud& test_pool, const PointCloud& holdout,
                                         const PointCloud& text, const DetectionSettings& settings,
                                         KernelParams* optimized_params) {
    if (settings.batch < 2) throw InputError("detection_study: batch must be >= 2");
    if (settings.trials < 1) throw InputError("detection_study: trials must be >= 1");
    // calibration takes the first `batch` rows of each pool; trials sample
    // from the remainder, so the index sets stay pairwise disjoint.
    if (clean_pool.n < 2 * settings.batch || test_pool.n < 2 * settings.batch)
        throw InputError("detection_study: pools need at least 2*batch rows");

    std::vector<std::size_t> cal(settings.batch);
    std::iota(cal.begin(), cal.end(), std::size_t{0});
    const PointCloud cal_x = subcloud(clean_pool, cal);
    const PointCloud cal_y = subcloud(test_pool, cal);
    const PointCloud cal_fx = detection_features(cal_x, holdout, text, settings.kernel, settings.tc);
    const PointCloud cal_fy = detection_features(cal_y, holdout, text, settings.kernel, settings.tc);

    KernelParams params;
    params.method = settings.kernel;
    params.eps0 = 0.1;
    params.sigma_nu = median_bandwidth(cal_x, cal_y);
    params.sigma_tc =
        settings.kernel == KernelMethod::GAUSSIAN ? 1.0 : median_bandwidth(cal_fx, cal_fy);
    if (settings.opt_steps > 0)
        params = optimize_kernel({cal_x, cal_fx}, {cal_y, cal_fy}, params, settings.opt_steps,
                                 settings.opt_lr);
    if (optimized_params) *optimized_params = params;

    std::vector<std::size_t> clean_rest(clean_pool.n - settings.batch);
    std::iota(clean_rest.begin(), clean_rest.end(), settings.batch);
    std::vector<std::size_t> test_rest(test_pool.n - settings.batch);
    std::iota(test_rest.begin(), test_rest.end(), settings.batch);

    std::vector<TrialResult> results;
    results.reserve(static_cast<std::size_t>(settings.trials));
    for (int t = 0; t < settings.trials; ++t) {
        auto rng = substream(settings.seed, 10000 + static_cast<std::uint64_t>(t));
        std::vector<std::size_t> ci = clean_rest, ti = test_rest;
        std::shuffle(ci.begin(), ci.end(), rng);
        std::shuffle(ti.begin(), ti.end(), rng);
        ci.resize(settings.batch);
        ti.resize(settings.batch);
        const PointCloud bx = subcloud(clean_pool, ci);
        const PointCloud by = subcloud(test_pool, ti);
        const SampleSet sx{bx, detection_features(bx, holdout, text, settings.kernel, settings.tc)};
        const SampleSet sy{by, detection_features(by, holdout, text, settings.kernel, settings.tc)};
        const TestOutcome outcome =
            permutation_test(sx, sy, params, settings.permutations, settings.alpha,
                             mix64(settings.seed) + 20000 + static_cast<std::uint64_t>(t));
        results.push_back({t, outcome.statistic, outcome.threshold, outcome.p_value,
                           outcome.reject});
    }
    return results;
}

std::string results_csv(const std::vector<TrialResult>& results) {
    std::ostringstream out;
    out << "trial,statistic,threshold,p_value,reject\n";
    for (const TrialResult& r : results)
        out << r.trial << ',' << format_double(r.statistic) << ',' << format_double(r.threshold)
            << ',' << format_double(r.p_value) << ',' << (r.reject ? 1 : 0) << '\n';
    return out.str();
}

} // namespace topoadv
