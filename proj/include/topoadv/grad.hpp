#pragma once

#include <vector>

#include "topoadv/tcloss.hpp"

namespace topoadv {

// Per-sample gradients of a TC loss with respect to point coordinates:
// the detection features. Shape equals the examined batch, not batch+holdout.
struct TopoFeatures {
    PointCloud grads;                  // |Y| x d
    std::vector<std::size_t> batch_rows; // rows of the joint cloud belonging to Y
    TCMethod method = TCMethod::TP;
};

// Gradient of L_TC(X, T) with respect to X's coordinates. The reference
// diagram is held fixed; gradients chain through the recorded critical edges
// only. Coincident points on an edge that carries gradient raise
// DegenerateConfigError.
PointCloud tc_gradient(const PointCloud& cloud_x, const PersistenceDiagram& diag_t,
                       const TCParams& params);

// Batch feature extraction: one filtration on Y concatenated with the
// hold-out Z, back-propagated, keeping only the rows of Y.
TopoFeatures batch_features(const PointCloud& batch_y, const PointCloud& holdout_z,
                            const PointCloud& text_t, const TCParams& params);

// Per-sample variant: row i is the gradient of L_TC({y_i} u Z, T) w.r.t. y_i.
// One filtration per sample; intended for small batches.
TopoFeatures exact_features(const PointCloud& batch_y, const PointCloud& holdout_z,
                            const PointCloud& text_t, const TCParams& params);

} // namespace topoadv
