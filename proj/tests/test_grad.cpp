#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "topoadv/errors.hpp"
#include "topoadv/grad.hpp"

using namespace topoadv;
using testutil::distance_gap;
using testutil::random_cloud;

namespace {

double loss_of(const PointCloud& cloud, const PersistenceDiagram& diag_t,
               const TCParams& params) {
    return tc_loss(vr_persistence(pairwise_distances(cloud), params.max_dim), diag_t, params);
}

// Central finite differences over every coordinate.
PointCloud fd_gradient(const PointCloud& cloud, const PersistenceDiagram& diag_t,
                       const TCParams& params, double h) {
    PointCloud grad(cloud.n, cloud.d);
    PointCloud work = cloud;
    for (std::size_t i = 0; i < cloud.n; ++i) {
        for (std::size_t k = 0; k < cloud.d; ++k) {
            const double keep = work.at(i, k);
            work.at(i, k) = keep + h;
            const double up = loss_of(work, diag_t, params);
            work.at(i, k) = keep - h;
            const double down = loss_of(work, diag_t, params);
            work.at(i, k) = keep;
            grad.at(i, k) = (up - down) / (2.0 * h);
        }
    }
    return grad;
}

// Draw a cloud whose pairwise distances are well separated (no filtration
// reordering within the finite-difference step) and, for TP, whose per-dim
// total persistence stays away from the |.| kink against the reference.
PointCloud generic_cloud(std::mt19937_64& rng, const PersistenceDiagram& diag_t,
                         const TCParams& params) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        PointCloud cloud = random_cloud(rng, 8, 3);
        const DistanceMatrix dist = pairwise_distances(cloud);
        if (distance_gap(dist) < 1e-3) continue;
        if (params.method == TCMethod::TP) {
            const PersistenceDiagram diag_x = vr_persistence(dist, params.max_dim);
            bool near_kink = false;
            for (int d = 0; d <= params.max_dim; ++d) {
                const double px = total_persistence(diag_x, d, params.alpha);
                const double pt = total_persistence(diag_t, d, params.alpha);
                if (std::abs(px - pt) < 1e-2) near_kink = true;
            }
            if (near_kink) continue;
        }
        return cloud;
    }
    FAIL("could not draw a generic cloud");
    return PointCloud(1, 1);
}

double max_rel_error(const PointCloud& analytic, const PointCloud& fd) {
    double max_abs = 1e-9, max_diff = 0.0;
    for (std::size_t idx = 0; idx < fd.data.size(); ++idx)
        max_abs = std::max(max_abs, std::abs(fd.data[idx]));
    for (std::size_t idx = 0; idx < fd.data.size(); ++idx)
        max_diff = std::max(max_diff, std::abs(analytic.data[idx] - fd.data[idx]));
    return max_diff / max_abs;
}

} // namespace

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(2024);
    struct Config {
        TCMethod method;
        double alpha;
    };
    const Config configs[] = {{TCMethod::TP, 1.0}, {TCMethod::TP, 2.0}, {TCMethod::MK, 1.0}};
    for (const Config& cfg : configs) {
        TCParams params;
        params.method = cfg.method;
        params.alpha = cfg.alpha;
        params.sigma = 1.0;
        params.max_dim = 1;
        for (int rep = 0; rep < 15; ++rep) {
            const PointCloud text = random_cloud(rng, 8, 3);
            const PersistenceDiagram diag_t =
                vr_persistence(pairwise_distances(text), params.max_dim);
            const PointCloud cloud = generic_cloud(rng, diag_t, params);
            const PointCloud analytic = tc_gradient(cloud, diag_t, params);
            const PointCloud fd = fd_gradient(cloud, diag_t, params, 1e-4);
            CHECK(max_rel_error(analytic, fd) < 1e-4);
        }
    }
}

TEST_CASE("gradient rows sum to zero (translation invariance of the loss)") {
    std::mt19937_64 rng(55);
    TCParams params;
    params.method = TCMethod::TP;
    params.max_dim = 1;
    const PointCloud text = random_cloud(rng, 7, 3);
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), 1);
    const PointCloud cloud = random_cloud(rng, 9, 3);
    const PointCloud grad = tc_gradient(cloud, diag_t, params);
    for (std::size_t k = 0; k < grad.d; ++k) {
        double column = 0.0;
        for (std::size_t i = 0; i < grad.n; ++i) column += grad.at(i, k);
        CHECK(std::abs(column) < 1e-9);
    }
}

TEST_CASE("coincident points on a critical edge are reported as degenerate") {
    // two duplicate rows create a zero-length death edge; with TP alpha=1 and a
    // reference whose total persistence differs, that edge must carry gradient
    PointCloud cloud(3, 2);
    cloud.at(2, 0) = 1.0; // rows 0 and 1 coincide at the origin
    TCParams params;
    params.method = TCMethod::TP;
    params.alpha = 1.0;
    params.max_dim = 0;
    PointCloud text(2, 2);
    text.at(1, 0) = 10.0;
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), 0);
    try {
        tc_gradient(cloud, diag_t, params);
        FAIL("expected DegenerateConfigError");
    } catch (const DegenerateConfigError& e) {
        CHECK(((e.vertex_i == 0 && e.vertex_j == 1) || (e.vertex_i == 1 && e.vertex_j == 0)));
    }
}

TEST_CASE("gradient is deterministic") {
    std::mt19937_64 rng(81);
    TCParams params;
    params.method = TCMethod::MK;
    params.max_dim = 1;
    const PointCloud text = random_cloud(rng, 8, 2);
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), 1);
    const PointCloud cloud = random_cloud(rng, 8, 2);
    const PointCloud a = tc_gradient(cloud, diag_t, params);
    const PointCloud b = tc_gradient(cloud, diag_t, params);
    CHECK(a.data == b.data); // bitwise
}

TEST_CASE("batch_features keeps only the batch rows of the joint gradient") {
    std::mt19937_64 rng(91);
    TCParams params;
    params.method = TCMethod::TP;
    params.max_dim = 0;
    const PointCloud batch = random_cloud(rng, 5, 3);
    const PointCloud holdout = random_cloud(rng, 12, 3);
    const PointCloud text = random_cloud(rng, 6, 3);
    const TopoFeatures feats = batch_features(batch, holdout, text, params);
    CHECK(feats.grads.n == batch.n);
    CHECK(feats.grads.d == batch.d);
    REQUIRE(feats.batch_rows.size() == batch.n);
    for (std::size_t i = 0; i < batch.n; ++i) CHECK(feats.batch_rows[i] == i);

    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), params.max_dim);
    const PointCloud joint_grad = tc_gradient(vcat(batch, holdout), diag_t, params);
    for (std::size_t i = 0; i < batch.n; ++i)
        for (std::size_t k = 0; k < batch.d; ++k)
            CHECK(feats.grads.at(i, k) == joint_grad.at(i, k));
}

TEST_CASE("exact_features row i matches a single-sample joint gradient") {
    std::mt19937_64 rng(93);
    TCParams params;
    params.method = TCMethod::TP;
    params.max_dim = 0;
    const PointCloud batch = random_cloud(rng, 4, 2);
    const PointCloud holdout = random_cloud(rng, 8, 2);
    const PointCloud text = random_cloud(rng, 5, 2);
    const TopoFeatures feats = exact_features(batch, holdout, text, params);
    REQUIRE(feats.grads.n == batch.n);
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), params.max_dim);
    for (std::size_t i = 0; i < batch.n; ++i) {
        PointCloud single(1, batch.d);
        for (std::size_t k = 0; k < batch.d; ++k) single.at(0, k) = batch.at(i, k);
        const PointCloud g = tc_gradient(vcat(single, holdout), diag_t, params);
        for (std::size_t k = 0; k < batch.d; ++k) CHECK(feats.grads.at(i, k) == g.at(0, k));
    }
}

TEST_CASE("reference diagram must cover the requested dimensions") {
    std::mt19937_64 rng(97);
    const PointCloud text = random_cloud(rng, 5, 2);
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text), 0);
    TCParams params;
    params.max_dim = 1;
    CHECK_THROWS_AS(tc_gradient(random_cloud(rng, 5, 2), diag_t, params), InputError);
}
