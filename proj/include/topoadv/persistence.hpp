#pragma once

#include <limits>
#include <vector>

#include "topoadv/pointcloud.hpp"

namespace topoadv {

// Death value of classes that never die within the filtration.
inline constexpr double kEssential = std::numeric_limits<double>::infinity();

// One birth-death pair together with the critical edges that realize its
// birth and death values; the edges are what the gradient engine chains
// through.
struct PersistencePair {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;
    // Vertex pair whose distance equals birth (-1/-1 when birth is 0, dim 0).
    int birth_i = -1, birth_j = -1;
    // Vertex pair whose distance equals death (-1/-1 when essential).
    int death_i = -1, death_j = -1;

    bool essential() const { return death == kEssential; }
    bool finite() const { return !essential(); }
    double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    int max_dim = 0;
    std::size_t n_points = 0;
};

// Vietoris-Rips persistence up to homology dimension max_dim (0..2), with the
// filtration capped at the cloud diameter. The complex is complete at the cap,
// so the only essential class is the single dim-0 component.
//
// Dim 0 runs union-find over the sorted edge list (the finite deaths are the
// MST edge lengths); dims >= 1 reduce the boundary of (p+1)-simplices over
// GF(2), columns in filtration order under the lexicographic tie-break.
// Zero-persistence pairs are kept in dim 0 (exactly n-1 finite pairs) and
// dropped in dims >= 1.
PersistenceDiagram vr_persistence(const DistanceMatrix& dist, int max_dim);

struct MstResult {
    double total_length = 0.0;
    std::vector<Edge> edges; // ascending, same tie-break as the filtration
};

// Kruskal union-find minimum spanning tree. Shares the edge tie-break with
// vr_persistence so the finite dim-0 deaths equal the MST edge lengths
// exactly.
MstResult mst_h0(const DistanceMatrix& dist);

} // namespace topoadv
