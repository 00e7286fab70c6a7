#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "topoadv/errors.hpp"
#include "topoadv/pointcloud.hpp"

using namespace topoadv;
using testutil::cloud_1d;
using testutil::random_cloud;

TEST_CASE("pairwise distances: two 1-D points") {
    const DistanceMatrix dist = pairwise_distances(cloud_1d({0.0, 3.0}));
    CHECK(dist.at(0, 1) == doctest::Approx(3.0));
    CHECK(dist.at(1, 0) == doctest::Approx(3.0));
    CHECK(dist.at(0, 0) == 0.0);
    CHECK(dist.at(1, 1) == 0.0);
}

TEST_CASE("pairwise distances match a naive double loop") {
    std::mt19937_64 rng(7);
    const PointCloud cloud = random_cloud(rng, 5, 3);
    const DistanceMatrix dist = pairwise_distances(cloud);
    for (std::size_t i = 0; i < cloud.n; ++i) {
        for (std::size_t j = 0; j < cloud.n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < cloud.d; ++k) {
                const double diff = cloud.at(i, k) - cloud.at(j, k);
                s += diff * diff;
            }
            CHECK(dist.at(i, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("non-finite coordinate names the offending row") {
    PointCloud cloud(3, 2);
    cloud.at(2, 1) = std::nan("");
    CHECK_THROWS_WITH_AS(pairwise_distances(cloud),
                         "non-finite coordinate in point cloud row 2", InputError);
}

TEST_CASE("sorted edges: ascending with lexicographic tie-break") {
    // 1-D points 0, 1, 3: distances 1, 2, 3
    const auto edges = sorted_edges(pairwise_distances(cloud_1d({0.0, 1.0, 3.0})));
    REQUIRE(edges.size() == 3);
    CHECK(edges[0].length == doctest::Approx(1.0));
    CHECK(edges[1].length == doctest::Approx(2.0));
    CHECK(edges[2].length == doctest::Approx(3.0));

    // two equal-length edges: (0,2) must precede (1,3)
    PointCloud square(4, 2);
    square.at(1, 0) = 1.0;
    square.at(2, 1) = 1.0;
    square.at(3, 0) = 1.0;
    square.at(3, 1) = 1.0;
    const auto sq_edges = sorted_edges(pairwise_distances(square));
    const auto diag1 = std::find_if(sq_edges.begin(), sq_edges.end(),
                                    [](const Edge& e) { return e.i == 0 && e.j == 3; });
    const auto diag2 = std::find_if(sq_edges.begin(), sq_edges.end(),
                                    [](const Edge& e) { return e.i == 1 && e.j == 2; });
    CHECK(diag1 < diag2);
}

TEST_CASE("sorted edges equal a reference stable sort") {
    std::mt19937_64 rng(11);
    const DistanceMatrix dist = pairwise_distances(random_cloud(rng, 10, 4));
    std::vector<Edge> reference;
    for (std::uint32_t i = 0; i < dist.n; ++i)
        for (std::uint32_t j = i + 1; j < dist.n; ++j)
            reference.push_back({dist.at(i, j), i, j});
    std::stable_sort(reference.begin(), reference.end(), edge_less);
    const auto edges = sorted_edges(dist);
    REQUIRE(edges.size() == reference.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        CHECK(edges[k].i == reference[k].i);
        CHECK(edges[k].j == reference[k].j);
        CHECK(edges[k].length == reference[k].length);
    }
}

TEST_CASE("distance matrix is invariant to rigid motions") {
    std::mt19937_64 rng(13);
    const PointCloud cloud = random_cloud(rng, 8, 2);
    const double angle = 0.7;
    PointCloud moved(cloud.n, 2);
    for (std::size_t i = 0; i < cloud.n; ++i) {
        moved.at(i, 0) = std::cos(angle) * cloud.at(i, 0) - std::sin(angle) * cloud.at(i, 1) + 4.5;
        moved.at(i, 1) = std::sin(angle) * cloud.at(i, 0) + std::cos(angle) * cloud.at(i, 1) - 2.0;
    }
    const DistanceMatrix a = pairwise_distances(cloud);
    const DistanceMatrix b = pairwise_distances(moved);
    for (std::size_t idx = 0; idx < a.dist.size(); ++idx)
        CHECK(a.dist[idx] == doctest::Approx(b.dist[idx]).epsilon(1e-9));
}

TEST_CASE("scaling the cloud scales every distance by the same factor") {
    std::mt19937_64 rng(17);
    PointCloud cloud = random_cloud(rng, 6, 3);
    const DistanceMatrix base = pairwise_distances(cloud);
    const double c = 2.5;
    for (double& v : cloud.data) v *= c;
    const DistanceMatrix scaled = pairwise_distances(cloud);
    for (std::size_t idx = 0; idx < base.dist.size(); ++idx)
        CHECK(scaled.dist[idx] == doctest::Approx(c * base.dist[idx]).epsilon(1e-12));
}

TEST_CASE("l2_normalize_rows produces unit rows and keeps zero rows") {
    PointCloud cloud(2, 3);
    cloud.at(0, 0) = 3.0;
    cloud.at(0, 1) = 4.0;
    const PointCloud out = l2_normalize_rows(cloud);
    CHECK(out.at(0, 0) == doctest::Approx(0.6));
    CHECK(out.at(0, 1) == doctest::Approx(0.8));
    CHECK(out.at(1, 0) == 0.0);
}
