#include "topoadv/grad.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "topoadv/errors.hpp"

namespace topoadv {

namespace {

constexpr double kDegenerateEdge = 1e-12;

// d|x_i - x_j|/dx_i = (x_i - x_j)/|x_i - x_j|, accumulated with weight coeff.
void add_edge_gradient(PointCloud& grad, const PointCloud& cloud, const DistanceMatrix& dist,
                       int i, int j, double coeff) {
    if (coeff == 0.0) return;
    const double len = dist.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    if (len <= kDegenerateEdge)
        throw DegenerateConfigError("coincident points on critical edge (" + std::to_string(i) +
                                        ", " + std::to_string(j) + ")",
                                    i, j);
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    for (std::size_t k = 0; k < cloud.d; ++k) {
        const double u = (cloud.at(ui, k) - cloud.at(uj, k)) / len;
        grad.at(ui, k) += coeff * u;
        grad.at(uj, k) -= coeff * u;
    }
}

// Structurally zero-persistence pair: birth and death track the same edge, so
// all contributions cancel exactly.
bool inert_pair(const PersistencePair& pair) {
    return pair.persistence() == 0.0 && pair.birth_i == pair.death_i &&
           pair.birth_j == pair.death_j;
}

void accumulate_tp(PointCloud& grad, const PointCloud& cloud, const DistanceMatrix& dist,
                   const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_t,
                   const TCParams& params) {
    for (int i = 0; i <= params.max_dim; ++i) {
        const double px = total_persistence(diag_x, i, params.alpha);
        const double pt = total_persistence(diag_t, i, params.alpha);
        // subgradient 0 when the absolute difference sits at its minimum
        const double sign = px > pt ? 1.0 : (px < pt ? -1.0 : 0.0);
        if (sign == 0.0) continue;
        for (const PersistencePair& pair : diag_x.pairs) {
            if (pair.dim != i || !pair.finite() || inert_pair(pair)) continue;
            const double dp = pair.persistence();
            const double w = params.alpha == 1.0
                                 ? 1.0
                                 : params.alpha * std::pow(dp, params.alpha - 1.0);
            if (!std::isfinite(w))
                throw NumericError("total persistence gradient diverges at zero persistence "
                                   "(alpha < 1)");
            add_edge_gradient(grad, cloud, dist, pair.death_i, pair.death_j, sign * w);
            if (pair.birth_i >= 0)
                add_edge_gradient(grad, cloud, dist, pair.birth_i, pair.birth_j, -sign * w);
        }
    }
}

void accumulate_mk(PointCloud& grad, const PointCloud& cloud, const DistanceMatrix& dist,
                   const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_t,
                   const TCParams& params) {
    const double sigma = params.sigma;
    const double prefactor = 1.0 / (8.0 * std::numbers::pi * sigma);
    const double inv8s = 1.0 / (8.0 * sigma);
    const double inv4s = 1.0 / (4.0 * sigma);
    for (int i = 0; i <= params.max_dim; ++i) {
        for (const PersistencePair& pair : diag_x.pairs) {
            if (pair.dim != i || !pair.finite() || inert_pair(pair)) continue;
            const double b = pair.birth, d = pair.death;
            double gb = 0.0, gd = 0.0;
            for (const PersistencePair& q : diag_t.pairs) {
                if (q.dim != i || !q.finite()) continue;
                const double qb = q.birth, qd = q.death;
                const double d2 = (b - qb) * (b - qb) + (d - qd) * (d - qd);
                const double m2 = (b - qd) * (b - qd) + (d - qb) * (d - qb);
                const double e1 = std::exp(-d2 * inv8s);
                const double e2 = std::exp(-m2 * inv8s);
                gb += inv4s * (-(b - qb) * e1 + (b - qd) * e2);
                gd += inv4s * (-(d - qd) * e1 + (d - qb) * e2);
            }
            add_edge_gradient(grad, cloud, dist, pair.death_i, pair.death_j, prefactor * gd);
            if (pair.birth_i >= 0)
                add_edge_gradient(grad, cloud, dist, pair.birth_i, pair.birth_j, prefactor * gb);
        }
    }
}

} // namespace

PointCloud tc_gradient(const PointCloud& cloud_x, const PersistenceDiagram& diag_t,
                       const TCParams& params) {
    params.validate();
    validate_cloud(cloud_x);
    if (diag_t.max_dim < params.max_dim)
        throw InputError("reference diagram does not cover the requested dimensions");

    const DistanceMatrix dist = pairwise_distances(cloud_x);
    const PersistenceDiagram diag_x = vr_persistence(dist, params.max_dim);

    PointCloud grad(cloud_x.n, cloud_x.d);
    if (params.method == TCMethod::TP)
        accumulate_tp(grad, cloud_x, dist, diag_x, diag_t, params);
    else
        accumulate_mk(grad, cloud_x, dist, diag_x, diag_t, params);
    return grad;
}

TopoFeatures batch_features(const PointCloud& batch_y, const PointCloud& holdout_z,
                            const PointCloud& text_t, const TCParams& params) {
    if (batch_y.n == 0 || holdout_z.n == 0 || text_t.n == 0)
        throw InputError("batch, holdout and text clouds must all be nonempty");
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text_t), params.max_dim);
    const PointCloud joint = vcat(batch_y, holdout_z);
    const PointCloud joint_grad = tc_gradient(joint, diag_t, params);

    TopoFeatures features;
    features.method = params.method;
    features.grads = PointCloud(batch_y.n, batch_y.d);
    features.batch_rows.resize(batch_y.n);
    for (std::size_t i = 0; i < batch_y.n; ++i) {
        features.batch_rows[i] = i;
        for (std::size_t k = 0; k < batch_y.d; ++k)
            features.grads.at(i, k) = joint_grad.at(i, k);
    }
    return features;
}

TopoFeatures exact_features(const PointCloud& batch_y, const PointCloud& holdout_z,
                            const PointCloud& text_t, const TCParams& params) {
    if (batch_y.n == 0 || holdout_z.n == 0 || text_t.n == 0)
        throw InputError("batch, holdout and text clouds must all be nonempty");
    const PersistenceDiagram diag_t = vr_persistence(pairwise_distances(text_t), params.max_dim);

    TopoFeatures features;
    features.method = params.method;
    features.grads = PointCloud(batch_y.n, batch_y.d);
    features.batch_rows.resize(batch_y.n);
    PointCloud single(1, batch_y.d);
    for (std::size_t i = 0; i < batch_y.n; ++i) {
        features.batch_rows[i] = i;
        for (std::size_t k = 0; k < batch_y.d; ++k) single.at(0, k) = batch_y.at(i, k);
        const PointCloud g = tc_gradient(vcat(single, holdout_z), diag_t, params);
        for (std::size_t k = 0; k < batch_y.d; ++k) features.grads.at(i, k) = g.at(0, k);
    }
    return features;
}

} // namespace topoadv
