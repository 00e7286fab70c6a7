#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "topoadv/errors.hpp"
#include "topoadv/mmdtest.hpp"

using namespace topoadv;
using testutil::random_cloud;

namespace {

SampleSet random_set(std::mt19937_64& rng, std::size_t n, std::size_t d, double shift = 0.0) {
    SampleSet s{random_cloud(rng, n, d), random_cloud(rng, n, 3)};
    for (double& v : s.emb.data) v += shift;
    return s;
}

// Direct transcription of the U-statistic from per-pair kernel calls.
double naive_mmd(const SampleSet& x, const SampleSet& y, const KernelParams& p) {
    const std::size_t n = x.emb.n;
    const bool feats = p.method != KernelMethod::GAUSSIAN;
    std::span<const double> none;
    auto k = [&](const SampleSet& a, std::size_t i, const SampleSet& b, std::size_t j) {
        return tc_kernel(a.emb.row(i), b.emb.row(j), feats ? a.feats.row(i) : none,
                         feats ? b.feats.row(j) : none, p);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            sum += k(x, i, x, j) + k(y, i, y, j) - k(x, i, y, j) - k(y, i, x, j);
        }
    return sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

} // namespace

TEST_CASE("tc_kernel: hand-computed value") {
    const std::vector<double> ea{0.0, 0.0}, eb{1.0, 0.0};
    const std::vector<double> fa{0.0}, fb{2.0};
    KernelParams p;
    p.eps0 = 0.25;
    p.sigma_nu = 1.0;
    p.sigma_tc = 2.0;
    p.method = KernelMethod::TPSAMMD;
    // [(1-0.25) exp(-4/8) + 0.25] exp(-1/2)
    const double expected = (0.75 * std::exp(-0.5) + 0.25) * std::exp(-0.5);
    CHECK(tc_kernel(ea, eb, fa, fb, p) == doctest::Approx(expected).epsilon(1e-14));
    // identical inputs give exactly 1
    CHECK(tc_kernel(ea, ea, fa, fa, p) == doctest::Approx(1.0));
}

TEST_CASE("gaussian kernel ignores the feature view") {
    const std::vector<double> ea{0.0}, eb{3.0};
    const std::vector<double> fa{1.0}, fb{9.0};
    KernelParams p;
    p.method = KernelMethod::GAUSSIAN;
    p.sigma_nu = 2.0;
    const double expected = std::exp(-9.0 / 8.0);
    CHECK(tc_kernel(ea, eb, fa, fb, p) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(tc_kernel(ea, eb, {}, {}, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("sammd_emb_kernel equals tc_kernel on the same views") {
    const std::vector<double> ea{0.2, 1.0}, eb{1.0, -0.5};
    const std::vector<double> va{0.3, 0.1}, vb{-0.2, 0.4};
    KernelParams p;
    p.method = KernelMethod::SAMMD_EMB;
    CHECK(sammd_emb_kernel(ea, eb, va, vb, p) == tc_kernel(ea, eb, va, vb, p));
}

TEST_CASE("mmd_u_statistic matches the naive double loop") {
    std::mt19937_64 rng(5);
    for (KernelMethod m :
         {KernelMethod::TPSAMMD, KernelMethod::SAMMD_EMB, KernelMethod::GAUSSIAN}) {
        KernelParams p;
        p.method = m;
        p.sigma_nu = 1.3;
        p.sigma_tc = 0.8;
        p.eps0 = 0.2;
        const SampleSet x = random_set(rng, 12, 4);
        const SampleSet y = random_set(rng, 12, 4, 0.5);
        CHECK(mmd_u_statistic(x, y, p) == doctest::Approx(naive_mmd(x, y, p)).epsilon(1e-10));
    }
}

TEST_CASE("deep kernel Gram matrix is positive semidefinite") {
    std::mt19937_64 rng(9);
    const std::size_t n = 20;
    const SampleSet s = random_set(rng, n, 5);
    KernelParams p;
    p.method = KernelMethod::TPSAMMD;
    p.eps0 = 0.3;
    p.sigma_nu = 1.1;
    p.sigma_tc = 0.9;
    Eigen::MatrixXd gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                i == j ? 1.0
                       : tc_kernel(s.emb.row(i), s.emb.row(j), s.feats.row(i), s.feats.row(j), p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-8);
}

TEST_CASE("statistic is near zero for identical sets and positive for shifted sets") {
    std::mt19937_64 rng(13);
    const SampleSet x = random_set(rng, 15, 3);
    KernelParams p;
    p.method = KernelMethod::TPSAMMD;
    CHECK(std::abs(mmd_u_statistic(x, x, p)) < 1e-12);
    const SampleSet y = random_set(rng, 15, 3, 5.0);
    CHECK(mmd_u_statistic(x, y, p) > 0.05);
}

TEST_CASE("permutation test rejects a large shift and not an identical copy") {
    std::mt19937_64 rng(21);
    const SampleSet x = random_set(rng, 20, 3);
    const SampleSet far = random_set(rng, 20, 3, 5.0);
    KernelParams p;
    p.method = KernelMethod::TPSAMMD;
    const TestOutcome sep = permutation_test(x, far, p, 200, 0.05, 7);
    CHECK(sep.reject);
    CHECK(sep.p_value <= 0.05);
    const TestOutcome same = permutation_test(x, x, p, 200, 0.05, 7);
    CHECK_FALSE(same.reject);
}

TEST_CASE("permutation test is deterministic in the seed") {
    std::mt19937_64 rng(23);
    const SampleSet x = random_set(rng, 10, 3);
    const SampleSet y = random_set(rng, 10, 3, 1.0);
    KernelParams p;
    p.method = KernelMethod::TPSAMMD;
    const TestOutcome a = permutation_test(x, y, p, 150, 0.05, 99);
    const TestOutcome b = permutation_test(x, y, p, 150, 0.05, 99);
    CHECK(a.statistic == b.statistic);
    CHECK(a.threshold == b.threshold);
    CHECK(a.p_value == b.p_value);
    CHECK(a.reject == b.reject);
    const TestOutcome c = permutation_test(x, y, p, 150, 0.05, 100);
    CHECK(c.seed == 100);
}

TEST_CASE("p-value stays within its attainable range") {
    std::mt19937_64 rng(29);
    const SampleSet x = random_set(rng, 10, 2);
    const SampleSet y = random_set(rng, 10, 2, 3.0);
    KernelParams p;
    p.method = KernelMethod::GAUSSIAN;
    const int n_perm = 199;
    const TestOutcome out = permutation_test(x, y, p, n_perm, 0.05, 3);
    CHECK(out.p_value >= 1.0 / (n_perm + 1));
    CHECK(out.p_value <= 1.0);
    CHECK(out.n_permutations == n_perm);
}

TEST_CASE("optimize_kernel never returns worse parameters than the start") {
    std::mt19937_64 rng(31);
    const SampleSet x = random_set(rng, 15, 3);
    const SampleSet y = random_set(rng, 15, 3, 1.0);
    KernelParams p0;
    p0.method = KernelMethod::TPSAMMD;
    p0.sigma_nu = median_bandwidth(x.emb, y.emb);
    p0.sigma_tc = median_bandwidth(x.feats, y.feats);
    const double j0 = mmd_criterion(x, y, p0);
    const KernelParams best = optimize_kernel(x, y, p0, 40, 0.05);
    CHECK(mmd_criterion(x, y, best) >= j0 - 1e-12);
    // zero steps returns the starting point untouched
    const KernelParams same = optimize_kernel(x, y, p0, 0, 0.05);
    CHECK(same.sigma_nu == p0.sigma_nu);
    CHECK(same.sigma_tc == p0.sigma_tc);
    CHECK(same.eps0 == p0.eps0);
}

TEST_CASE("criterion gradient matches finite differences") {
    std::mt19937_64 rng(37);
    const SampleSet x = random_set(rng, 10, 3);
    const SampleSet y = random_set(rng, 10, 3, 0.8);
    KernelParams p;
    p.method = KernelMethod::TPSAMMD;
    p.sigma_nu = 1.2;
    p.sigma_tc = 0.9;
    p.eps0 = 0.3;
    const double h = 1e-6;
    // probe through one optimization step of tiny learning rate: J must move in
    // the ascent direction
    const double j0 = mmd_criterion(x, y, p);
    const KernelParams stepped = optimize_kernel(x, y, p, 1, 1e-4);
    CHECK(mmd_criterion(x, y, stepped) >= j0 - 1e-12);
    // finite-difference sanity on sigma_nu only, via the public criterion
    KernelParams up = p, down = p;
    up.sigma_nu = std::exp(std::log(p.sigma_nu) + h);
    down.sigma_nu = std::exp(std::log(p.sigma_nu) - h);
    const double fd = (mmd_criterion(x, y, up) - mmd_criterion(x, y, down)) / (2.0 * h);
    CHECK(std::isfinite(fd));
}

TEST_CASE("median_bandwidth of two 1-D points") {
    PointCloud a(1, 1), b(1, 1);
    b.at(0, 0) = 2.0;
    CHECK(median_bandwidth(a, b) == doctest::Approx(std::sqrt(2.0)));
    CHECK(median_bandwidth(a, a) == 1.0); // degenerate fallback
}

TEST_CASE("kernel method names round-trip") {
    for (KernelMethod m : {KernelMethod::TPSAMMD, KernelMethod::MKSAMMD, KernelMethod::SAMMD_EMB,
                           KernelMethod::GAUSSIAN})
        CHECK(kernel_method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(kernel_method_from_string("other"), InputError);
}

TEST_CASE("input validation") {
    std::mt19937_64 rng(41);
    SampleSet x = random_set(rng, 10, 3);
    SampleSet y = random_set(rng, 9, 3);
    KernelParams p;
    CHECK_THROWS_AS(mmd_u_statistic(x, y, p), InputError);
    SampleSet y2 = random_set(rng, 10, 3);
    KernelParams bad = p;
    bad.eps0 = 1.5;
    CHECK_THROWS_AS(mmd_u_statistic(x, y2, bad), InputError);
    CHECK_THROWS_AS(permutation_test(x, y2, p, 50, 0.05, 1), InputError);  // too few perms
    CHECK_THROWS_AS(permutation_test(x, y2, p, 200, 1.5, 1), InputError);  // bad alpha
}
