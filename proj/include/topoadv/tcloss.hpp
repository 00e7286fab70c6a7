#pragma once

#include "topoadv/persistence.hpp"

namespace topoadv {

enum class TCMethod { TP, MK };

struct TCParams {
    TCMethod method = TCMethod::TP;
    double alpha = 1.0;  // order of the total persistence
    double sigma = 1.0;  // scale of the multi-scale kernel
    int max_dim = 1;     // homology dimensions included in the loss sums

    void validate() const;
};

// Sum of (death - birth)^alpha over the finite pairs of one dimension.
// Essential pairs are excluded: their persistence is infinite.
double total_persistence(const PersistenceDiagram& diagram, int dim, double alpha);

// Sum over dimensions 0..max_dim of |Pers^a_i(X) - Pers^a_i(Y)|.
double tp_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params);

// Multi-scale kernel between the dim-slices of two diagrams:
//   (1/(8*pi*sigma)) * sum_{p,q} exp(-|p-q|^2/(8 sigma)) - exp(-|p-qbar|^2/(8 sigma))
// where qbar mirrors q through the diagonal. Finite pairs only.
double multiscale_kernel(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
                         int dim, double sigma);

// Sum over dimensions 0..max_dim of the multi-scale kernel values.
double mk_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params);

// Dispatch on params.method.
double tc_loss(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
               const TCParams& params);

// Median of squared distances between the two diagrams' finite points,
// divided by 8; falls back to 1.0 when either side is empty.
double mk_median_sigma(const PersistenceDiagram& diag_x, const PersistenceDiagram& diag_y,
                       int dim);

} // namespace topoadv
