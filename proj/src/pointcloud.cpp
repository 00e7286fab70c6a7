#include "topoadv/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "topoadv/errors.hpp"

namespace topoadv {

void validate_cloud(const PointCloud& cloud) {
    if (cloud.n < 1 || cloud.d < 1)
        throw InputError("point cloud must have n >= 1 and d >= 1");
    if (cloud.data.size() != cloud.n * cloud.d)
        throw InputError("point cloud storage does not match n*d");
    for (std::size_t i = 0; i < cloud.n; ++i)
        for (std::size_t j = 0; j < cloud.d; ++j)
            if (!std::isfinite(cloud.at(i, j)))
                throw InputError("non-finite coordinate in point cloud row " + std::to_string(i));
}

double euclidean(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return s;
}

double DistanceMatrix::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
    validate_cloud(cloud);
    DistanceMatrix out(cloud.n);
    for (std::size_t i = 0; i < cloud.n; ++i) {
        for (std::size_t j = i + 1; j < cloud.n; ++j) {
            const double dij = euclidean(cloud.row(i), cloud.row(j));
            out.at(i, j) = dij;
            out.at(j, i) = dij;
        }
    }
    return out;
}

std::vector<Edge> sorted_edges(const DistanceMatrix& dist) {
    std::vector<Edge> edges;
    edges.reserve(dist.n * (dist.n - 1) / 2);
    for (std::uint32_t i = 0; i < dist.n; ++i)
        for (std::uint32_t j = i + 1; j < dist.n; ++j)
            edges.push_back({dist.at(i, j), i, j});
    std::stable_sort(edges.begin(), edges.end(), edge_less);
    return edges;
}

PointCloud l2_normalize_rows(const PointCloud& cloud) {
    PointCloud out = cloud;
    for (std::size_t i = 0; i < out.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < out.d; ++j) s += out.at(i, j) * out.at(i, j);
        const double norm = std::sqrt(s);
        if (norm > 0.0)
            for (std::size_t j = 0; j < out.d; ++j) out.at(i, j) /= norm;
    }
    return out;
}

PointCloud vcat(const PointCloud& a, const PointCloud& b) {
    if (a.d != b.d) throw InputError("vcat: dimension mismatch");
    PointCloud out(a.n + b.n, a.d);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    return out;
}

} // namespace topoadv
