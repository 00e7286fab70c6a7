#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace topoadv {

// n points in d-dimensional Euclidean space, row-major, double precision.
// Row order is significant: diagrams are invariant to it, features are not.
struct PointCloud {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data; // n * d, row-major

    PointCloud() = default;
    PointCloud(std::size_t n_, std::size_t d_) : n(n_), d(d_), data(n_ * d_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * d + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * d, d}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * d, d}; }
};

// Throws InputError naming the first row with a NaN/Inf coordinate.
void validate_cloud(const PointCloud& cloud);

// Dense symmetric Euclidean distance matrix, zero diagonal.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> dist; // n * n

    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n_) : n(n_), dist(n_ * n_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return dist[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return dist[i * n + j]; }

    double diameter() const;
};

struct Edge {
    double length;
    std::uint32_t i; // i < j
    std::uint32_t j;
};

// Ascending (length, i, j); the lexicographic tie-break makes diagrams and
// gradients deterministic.
inline bool edge_less(const Edge& a, const Edge& b) {
    if (a.length != b.length) return a.length < b.length;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

double euclidean(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

DistanceMatrix pairwise_distances(const PointCloud& cloud);

std::vector<Edge> sorted_edges(const DistanceMatrix& dist);

// Scales every row to unit L2 norm; zero rows are left unchanged.
PointCloud l2_normalize_rows(const PointCloud& cloud);

// Row-wise concatenation (same d).
PointCloud vcat(const PointCloud& a, const PointCloud& b);

} // namespace topoadv
