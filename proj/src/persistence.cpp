#include "topoadv/persistence.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>

#include "topoadv/errors.hpp"

namespace topoadv {

namespace {

// Union-find with the elder rule: on a merge the component whose minimum
// vertex index is smaller survives.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), min_vertex_(n) {
        std::iota(parent_.begin(), parent_.end(), 0u);
        std::iota(min_vertex_.begin(), min_vertex_.end(), 0u);
    }

    std::uint32_t find(std::uint32_t x) {
        std::uint32_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            const std::uint32_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    // Returns false if already connected.
    bool merge(std::uint32_t a, std::uint32_t b) {
        std::uint32_t ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (min_vertex_[rb] < min_vertex_[ra]) std::swap(ra, rb);
        parent_[rb] = ra;
        min_vertex_[ra] = std::min(min_vertex_[ra], min_vertex_[rb]);
        return true;
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> min_vertex_;
};

struct Simplex {
    double diam;
    std::vector<std::uint32_t> v; // ascending vertex indices
};

bool simplex_less(const Simplex& a, const Simplex& b) {
    if (a.diam != b.diam) return a.diam < b.diam;
    return a.v < b.v;
}

double simplex_diameter(const std::vector<std::uint32_t>& v, const DistanceMatrix& dist) {
    double m = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b)
            m = std::max(m, dist.at(v[a], v[b]));
    return m;
}

// Lexicographically smallest vertex pair realizing the simplex diameter.
std::pair<std::uint32_t, std::uint32_t> max_edge(const std::vector<std::uint32_t>& v,
                                                 const DistanceMatrix& dist) {
    double best = -1.0;
    std::pair<std::uint32_t, std::uint32_t> edge{0, 0};
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b)
            if (dist.at(v[a], v[b]) > best) {
                best = dist.at(v[a], v[b]);
                edge = {v[a], v[b]};
            }
    return edge;
}

std::vector<Simplex> enumerate_simplices(std::size_t n, int dim, const DistanceMatrix& dist) {
    std::vector<Simplex> out;
    std::vector<std::uint32_t> combo(static_cast<std::size_t>(dim) + 1);
    // iterative combination enumeration
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = static_cast<std::uint32_t>(i);
    if (combo.size() > n) return out;
    while (true) {
        out.push_back({simplex_diameter(combo, dist), combo});
        // advance
        int k = static_cast<int>(combo.size()) - 1;
        while (k >= 0 && combo[k] == n - combo.size() + static_cast<std::size_t>(k)) --k;
        if (k < 0) break;
        ++combo[k];
        for (std::size_t t = static_cast<std::size_t>(k) + 1; t < combo.size(); ++t)
            combo[t] = combo[t - 1] + 1;
    }
    std::sort(out.begin(), out.end(), simplex_less);
    return out;
}

std::uint64_t encode(const std::vector<std::uint32_t>& v, std::size_t n) {
    std::uint64_t key = 0;
    for (std::uint32_t x : v) key = key * n + x;
    return key;
}

// Symmetric difference of two sorted index vectors (GF(2) column addition).
std::vector<std::uint32_t> add_columns(const std::vector<std::uint32_t>& a,
                                       const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) out.push_back(a[i++]);
        else if (b[j] < a[i]) out.push_back(b[j++]);
        else { ++i; ++j; }
    }
    out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
    out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
    return out;
}

// Pairs of homology dimension p from the boundary of (p+1)-simplices reduced
// over the p-simplex rows, both in filtration order. Pivots of the reduced
// matrix are uniquely determined, so per-dimension reduction yields the same
// pairing as a global one.
void reduce_dimension(int p, const DistanceMatrix& dist, std::vector<PersistencePair>& pairs) {
    const std::size_t n = dist.n;
    const std::vector<Simplex> rows = enumerate_simplices(n, p, dist);
    const std::vector<Simplex> cols = enumerate_simplices(n, p + 1, dist);
    if (cols.empty()) return;

    std::unordered_map<std::uint64_t, std::uint32_t> row_index;
    row_index.reserve(rows.size() * 2);
    for (std::uint32_t r = 0; r < rows.size(); ++r) row_index.emplace(encode(rows[r].v, n), r);

    std::vector<std::int64_t> pivot_owner(rows.size(), -1);
    std::vector<std::vector<std::uint32_t>> reduced(cols.size());

    std::vector<std::uint32_t> facet(static_cast<std::size_t>(p) + 1);
    for (std::uint32_t c = 0; c < cols.size(); ++c) {
        std::vector<std::uint32_t> column;
        column.reserve(cols[c].v.size());
        for (std::size_t drop = 0; drop < cols[c].v.size(); ++drop) {
            std::size_t t = 0;
            for (std::size_t s = 0; s < cols[c].v.size(); ++s)
                if (s != drop) facet[t++] = cols[c].v[s];
            column.push_back(row_index.at(encode(facet, n)));
        }
        std::sort(column.begin(), column.end());

        while (!column.empty()) {
            const std::uint32_t pivot = column.back();
            if (pivot_owner[pivot] < 0) {
                pivot_owner[pivot] = c;
                reduced[c] = column;
                if (cols[c].diam > rows[pivot].diam) {
                    PersistencePair pair;
                    pair.dim = p;
                    pair.birth = rows[pivot].diam;
                    pair.death = cols[c].diam;
                    const auto be = max_edge(rows[pivot].v, dist);
                    const auto de = max_edge(cols[c].v, dist);
                    pair.birth_i = static_cast<int>(be.first);
                    pair.birth_j = static_cast<int>(be.second);
                    pair.death_i = static_cast<int>(de.first);
                    pair.death_j = static_cast<int>(de.second);
                    pairs.push_back(pair);
                }
                break;
            }
            column = add_columns(column, reduced[static_cast<std::size_t>(pivot_owner[pivot])]);
        }
        // empty column: positive simplex, creator of a dim-(p+1) class
    }
}

} // namespace

PersistenceDiagram vr_persistence(const DistanceMatrix& dist, int max_dim) {
    if (max_dim < 0 || max_dim > 2)
        throw InputError("unsupported homology dimension " + std::to_string(max_dim) +
                         " (supported: 0..2)");
    PersistenceDiagram diagram;
    diagram.max_dim = max_dim;
    diagram.n_points = dist.n;

    // dim 0: union-find over sorted edges; finite deaths are the MST edges.
    UnionFind uf(dist.n);
    for (const Edge& e : sorted_edges(dist)) {
        if (uf.merge(e.i, e.j)) {
            PersistencePair pair;
            pair.dim = 0;
            pair.birth = 0.0;
            pair.death = e.length;
            pair.death_i = static_cast<int>(e.i);
            pair.death_j = static_cast<int>(e.j);
            diagram.pairs.push_back(pair);
        }
    }
    PersistencePair essential;
    essential.dim = 0;
    essential.birth = 0.0;
    essential.death = kEssential;
    diagram.pairs.push_back(essential);

    for (int p = 1; p <= max_dim; ++p) reduce_dimension(p, dist, diagram.pairs);
    return diagram;
}

MstResult mst_h0(const DistanceMatrix& dist) {
    MstResult out;
    UnionFind uf(dist.n);
    for (const Edge& e : sorted_edges(dist)) {
        if (uf.merge(e.i, e.j)) {
            out.edges.push_back(e);
            out.total_length += e.length;
        }
    }
    return out;
}

} // namespace topoadv
