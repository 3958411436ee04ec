#pragma once

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/graph.hpp"

// Based cochain complexes with labeled cells: tensor products, duals,
// restriction, connectivity graphs, cohomology dimensions, and brute-force
// distance search at desk scale.

namespace qldpc {

// One factor coordinate of a cell label: (level within the factor, cell
// index at that level). A product of r graphs carries length-r labels, which
// is what lets gadget code address slabs symbolically.
struct Cell {
    int level = 0;
    int index = 0;
    auto operator<=>(const Cell&) const = default;
};

using CellLabel = std::vector<Cell>;

inline std::string label_to_string(const CellLabel& l) {
    std::string s;
    for (size_t i = 0; i < l.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(l[i].level) + ':' + std::to_string(l[i].index);
    }
    return s;
}

class CochainComplex {
public:
    int dim = 0;                                   // r
    std::vector<std::vector<CellLabel>> cells;     // levels 0..r
    std::vector<BitMatrix> delta;                  // delta[i]: C^i -> C^{i+1}

    int level_size(int i) const {
        if (i < 0 || i > dim) return 0;
        return int(cells[i].size());
    }

    const BitMatrix& coboundary(int i) const { return delta[i]; }

    BitMatrix boundary(int i) const {  // C^i -> C^{i-1}
        return delta[i - 1].transposed();
    }

    int cell_index(int level, const CellLabel& l) const {
        build_lookup();
        auto it = lookup_[level].find(l);
        if (it == lookup_[level].end()) return -1;
        return it->second;
    }

    bool complex_axiom_holds() const {
        for (int i = 0; i + 1 < dim; ++i)
            if (!delta[i + 1].mul(delta[i]).is_zero()) return false;
        return true;
    }

    // Sizes consistent and delta*delta = 0.
    void validate() const {
        if (int(cells.size()) != dim + 1) throw std::runtime_error("complex: bad level count");
        if (int(delta.size()) != dim) throw std::runtime_error("complex: bad map count");
        for (int i = 0; i < dim; ++i) {
            if (delta[i].cols() != level_size(i) || delta[i].rows() != level_size(i + 1))
                throw std::runtime_error("complex: map dimension mismatch");
        }
        if (!complex_axiom_holds()) throw std::runtime_error("complex: delta*delta != 0");
    }

private:
    mutable std::vector<std::map<CellLabel, int>> lookup_;
    void build_lookup() const {
        if (!lookup_.empty()) return;
        lookup_.resize(cells.size());
        for (size_t lev = 0; lev < cells.size(); ++lev)
            for (size_t j = 0; j < cells[lev].size(); ++j)
                lookup_[lev][cells[lev][j]] = int(j);
    }
};

// 1-dimensional complex of a bipartite graph: C^0 = V_L, C^1 = V_R,
// delta_0 = H_G^T acting F2^{V_L} -> F2^{V_R}.
inline CochainComplex complex_from_graph(const BipartiteGraph& g) {
    CochainComplex c;
    c.dim = 1;
    c.cells.resize(2);
    for (int v = 0; v < g.left_count; ++v) c.cells[0].push_back({Cell{0, v}});
    for (int v = 0; v < g.right_count; ++v) c.cells[1].push_back({Cell{1, v}});
    BitMatrix d(g.right_count, g.left_count);
    for (auto [l, r] : g.edges) d.set(r, l, true);
    c.delta.push_back(std::move(d));
    return c;
}

// Reverse the grading and transpose all maps. Cell label tuples are kept
// as-is, so the dual of a product complex carries the same labels.
inline CochainComplex dual(const CochainComplex& c) {
    CochainComplex d;
    d.dim = c.dim;
    d.cells.resize(c.dim + 1);
    for (int i = 0; i <= c.dim; ++i) d.cells[i] = c.cells[c.dim - i];
    for (int i = 0; i < c.dim; ++i)
        d.delta.push_back(c.delta[c.dim - 1 - i].transposed());
    return d;
}

// Tensor product with deterministic label ordering: level-i cells are
// grouped by the degree j of the A part (ascending), A-index major.
inline CochainComplex tensor(const CochainComplex& a, const CochainComplex& b) {
    CochainComplex c;
    c.dim = a.dim + b.dim;
    c.cells.resize(c.dim + 1);

    // (level, j) -> offset of block A^j x B^{level-j} within level's cells
    std::map<std::pair<int, int>, int> block_offset;
    for (int i = 0; i <= c.dim; ++i) {
        for (int j = std::max(0, i - b.dim); j <= std::min(i, a.dim); ++j) {
            block_offset[{i, j}] = int(c.cells[i].size());
            for (const auto& la : a.cells[j]) {
                for (const auto& lb : b.cells[i - j]) {
                    CellLabel l = la;
                    l.insert(l.end(), lb.begin(), lb.end());
                    c.cells[i].push_back(std::move(l));
                }
            }
        }
    }

    for (int i = 0; i < c.dim; ++i) {
        BitMatrix d(c.level_size(i + 1), c.level_size(i));
        for (int j = std::max(0, i - b.dim); j <= std::min(i, a.dim); ++j) {
            int nb = b.level_size(i - j);
            int src_base = block_offset[{i, j}];
            // delta^A x I : (j, i-j) -> (j+1, i-j)
            if (j + 1 <= a.dim) {
                int dst_base = block_offset[{i + 1, j + 1}];
                const BitMatrix& da = a.delta[j];
                for (int col_a = 0; col_a < da.cols(); ++col_a)
                    for (int row_a = 0; row_a < da.rows(); ++row_a)
                        if (da.get(row_a, col_a))
                            for (int kb = 0; kb < nb; ++kb)
                                d.set(dst_base + row_a * nb + kb,
                                      src_base + col_a * nb + kb, true);
            }
            // I x delta^B : (j, i-j) -> (j, i-j+1)
            if (i - j + 1 <= b.dim) {
                int dst_base = block_offset[{i + 1, j}];
                const BitMatrix& db = b.delta[i - j];
                int nb_up = b.level_size(i - j + 1);
                for (int ka = 0; ka < a.level_size(j); ++ka)
                    for (int col_b = 0; col_b < db.cols(); ++col_b)
                        for (int row_b = 0; row_b < db.rows(); ++row_b)
                            if (db.get(row_b, col_b))
                                d.set(dst_base + ka * nb_up + row_b,
                                      src_base + ka * nb + col_b, true);
            }
        }
        c.delta.push_back(std::move(d));
    }
    return c;
}

inline CochainComplex tensor_all(const std::vector<CochainComplex>& parts) {
    if (parts.empty()) throw std::invalid_argument("tensor_all: no factors");
    CochainComplex c = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) c = tensor(c, parts[i]);
    return c;
}

inline int cohomology_dim(const CochainComplex& c, int i) {
    if (i < 0 || i > c.dim) throw std::invalid_argument("cohomology_dim: bad level");
    int dim_ker = (i == c.dim) ? c.level_size(i)
                               : c.level_size(i) - rank(c.delta[i]);
    int rank_prev = (i == 0) ? 0 : rank(c.delta[i - 1]);
    return dim_ker - rank_prev;
}

// --- poset navigation ---

// All level-`target` cells above the level-`from` cell `idx` (target >= from).
inline std::vector<int> up_set(const CochainComplex& c, int from, int idx, int target) {
    if (target < from || target > c.dim) return {};
    std::vector<int> cur = {idx};
    for (int lev = from; lev < target; ++lev) {
        std::set<int> nxt;
        for (int q : cur) {
            const BitMatrix& d = c.delta[lev];
            for (int r = 0; r < d.rows(); ++r)
                if (d.get(r, q)) nxt.insert(r);
        }
        cur.assign(nxt.begin(), nxt.end());
    }
    return cur;
}

inline std::vector<int> down_set(const CochainComplex& c, int from, int idx, int target) {
    if (target > from || target < 0) return {};
    std::vector<int> cur = {idx};
    for (int lev = from; lev > target; --lev) {
        std::set<int> nxt;
        for (int q : cur) {
            const BitMatrix& d = c.delta[lev - 1];
            for (int col = 0; col < d.cols(); ++col)
                if (d.get(q, col)) nxt.insert(col);
        }
        cur.assign(nxt.begin(), nxt.end());
    }
    return cur;
}

// Locality: max over cells of the number of comparable basis elements,
// counting the cell itself (c <= c).
inline int locality(const CochainComplex& c) {
    int w = 0;
    for (int lev = 0; lev <= c.dim; ++lev) {
        for (int q = 0; q < c.level_size(lev); ++q) {
            int cnt = 1;
            for (int up = lev + 1; up <= c.dim; ++up)
                cnt += int(up_set(c, lev, q, up).size());
            for (int dn = lev - 1; dn >= 0; --dn)
                cnt += int(down_set(c, lev, q, dn).size());
            w = std::max(w, cnt);
        }
    }
    return w;
}

// --- connectivity graph (vertices = cells of chosen levels) ---

struct ConnectivityGraph {
    // Vertex v corresponds to (level[v], index[v]).
    std::vector<int> level;
    std::vector<int> index;
    std::vector<std::vector<int>> adj;
    std::map<std::pair<int, int>, int> vertex_of;  // (level, cell index) -> v

    int vertex(int lev, int idx) const {
        auto it = vertex_of.find({lev, idx});
        return it == vertex_of.end() ? -1 : it->second;
    }
};

inline ConnectivityGraph connectivity_graph(const CochainComplex& c,
                                            const std::vector<int>& levels) {
    ConnectivityGraph g;
    std::set<int> lvset(levels.begin(), levels.end());
    for (int lev : lvset) {
        if (lev < 0 || lev > c.dim) throw std::invalid_argument("connectivity_graph: bad level");
        for (int q = 0; q < c.level_size(lev); ++q) {
            g.vertex_of[{lev, q}] = int(g.level.size());
            g.level.push_back(lev);
            g.index.push_back(q);
        }
    }
    int n = int(g.level.size());
    std::vector<std::set<int>> adj(n);
    auto add_clique = [&](const std::vector<int>& verts) {
        for (size_t i = 0; i < verts.size(); ++i)
            for (size_t j = i + 1; j < verts.size(); ++j) {
                adj[verts[i]].insert(verts[j]);
                adj[verts[j]].insert(verts[i]);
            }
    };
    // Up-sets of 0-cells and down-sets of r-cells induce cliques on the
    // chosen-level cells.
    for (int q = 0; q < c.level_size(0); ++q) {
        std::vector<int> verts;
        for (int lev : lvset)
            for (int u : up_set(c, 0, q, lev)) verts.push_back(g.vertex_of[{lev, u}]);
        add_clique(verts);
    }
    for (int q = 0; q < c.level_size(c.dim); ++q) {
        std::vector<int> verts;
        for (int lev : lvset)
            for (int u : down_set(c, c.dim, q, lev)) verts.push_back(g.vertex_of[{lev, u}]);
        add_clique(verts);
    }
    g.adj.resize(n);
    for (int v = 0; v < n; ++v) g.adj[v].assign(adj[v].begin(), adj[v].end());
    return g;
}

// --- brute-force distance search ---

struct DistanceResult {
    std::optional<int> distance;  // nullopt when no nontrivial class exists
    int searched_up_to = 0;       // weights <= this were exhausted
    bool exact = false;
    std::optional<BitVector> witness;
};

// Minimum weight of a nontrivial element of ker(check) / im(boundary_img),
// by canonical support growth guided by the lowest unsatisfied check.
inline DistanceResult min_weight_nontrivial(const BitMatrix& check,
                                            const std::vector<BitVector>& image_of_prev,
                                            int budget) {
    DistanceResult res;
    int n = check.cols();
    if (n == 0) { res.exact = true; return res; }

    std::vector<BitVector> cols(n);
    for (int q = 0; q < n; ++q) cols[q] = check.col(q);
    std::vector<std::vector<int>> check_to_cells(check.rows());
    for (int q = 0; q < n; ++q)
        for (int r : cols[q].support()) check_to_cells[r].push_back(q);

    int best = budget + 1;
    BitVector best_vec;
    std::set<std::vector<int>> seen;

    std::vector<int> support;
    BitVector synd(check.rows());
    std::function<void(int)> grow = [&](int q0) {
        if (int(support.size()) >= best) return;
        if (synd.is_zero() && !support.empty()) {
            BitVector v(n);
            for (int q : support) v.set(q, true);
            if (!in_span(v, image_of_prev)) {
                best = int(support.size());
                best_vec = v;
            }
            return;  // supersets of a cocycle are never lighter
        }
        auto s = synd.support();
        if (s.empty()) return;
        if (int(support.size()) + 1 > budget) return;
        int lowest_check = s.front();
        for (int q : check_to_cells[lowest_check]) {
            if (q <= support.front()) continue;  // q0 stays the minimum
            if (std::find(support.begin(), support.end(), q) != support.end()) continue;
            support.push_back(q);
            std::vector<int> key = support;
            std::sort(key.begin(), key.end());
            if (seen.insert(key).second) {
                synd.xor_in(cols[q]);
                grow(q0);
                synd.xor_in(cols[q]);
            }
            support.pop_back();
        }
    };

    for (int q0 = 0; q0 < n; ++q0) {
        support = {q0};
        synd = cols[q0];
        if (synd.is_zero()) {
            BitVector v(n);
            v.set(q0, true);
            if (!in_span(v, image_of_prev) && best > 1) { best = 1; best_vec = v; }
        } else if (budget >= 2) {
            grow(q0);
        }
    }

    res.searched_up_to = budget;
    if (best <= budget) {
        res.distance = best;
        res.witness = best_vec;
        res.exact = true;
    } else {
        res.exact = false;  // only a lower bound: > budget
    }
    return res;
}

// side: true = cosystolic (min weight of nontrivial cocycle at level i),
// false = systolic (nontrivial cycle).
inline DistanceResult min_nontrivial_weight(const CochainComplex& c, int i,
                                            bool cosystolic, int budget) {
    BitMatrix check = cosystolic
                          ? (i < c.dim ? c.delta[i] : BitMatrix(0, c.level_size(i)))
                          : (i > 0 ? c.boundary(i) : BitMatrix(0, c.level_size(i)));
    std::vector<BitVector> img;
    if (cosystolic) {
        if (i > 0) img = image_basis(c.delta[i - 1]);
    } else {
        if (i < c.dim) img = image_basis(c.delta[i].transposed());
    }
    if (cohomology_dim(c, i) == 0) {
        DistanceResult res;
        res.exact = true;  // no nontrivial class: "infinite" sentinel
        return res;
    }
    return min_weight_nontrivial(check, img, budget);
}

// Restrict the last tensor factor's level-1 cells to the complement of L and
// rebuild the product. L must be extendable for ker(boundary of last factor);
// otherwise the witness dual codeword (a coboundary supported inside L) is
// returned in the exception text.
inline CochainComplex restrict_last_factor(const std::vector<CochainComplex>& parts,
                                           const std::vector<int>& L) {
    if (parts.empty()) throw std::invalid_argument("restrict_last_factor: no factors");
    const CochainComplex& b = parts.back();
    if (b.dim != 1) throw std::invalid_argument("restrict_last_factor: last factor must be 1-dim");

    BitMatrix bd = b.boundary(1);  // F2^{B^1} -> F2^{B^0}
    if (!is_extendable(bd, L)) {
        // witness: nonzero coboundary supported inside L
        std::vector<char> in_l(b.level_size(1), 0);
        for (int v : L) in_l[v] = 1;
        const BitMatrix& d0 = b.delta[0];
        // rows of delta restricted to the complement of L, as constraints
        BitMatrix restr(d0.rows() - int(L.size()), d0.cols());
        int rr = 0;
        for (int r = 0; r < d0.rows(); ++r) {
            if (in_l[r]) continue;
            for (int cidx = 0; cidx < d0.cols(); ++cidx)
                if (d0.get(r, cidx)) restr.set(rr, cidx, true);
            ++rr;
        }
        auto kb = kernel_basis(restr);
        std::string witness = "?";
        for (const auto& x : kb) {
            BitVector img = d0.mul(x);
            if (!img.is_zero()) { witness = img.to_string(); break; }
        }
        throw std::invalid_argument("restrict_last_factor: L not extendable; witness dual codeword " +
                                    witness);
    }

    std::vector<char> keep(b.level_size(1), 1);
    for (int v : L) keep[v] = 0;
    CochainComplex br;
    br.dim = 1;
    br.cells.resize(2);
    br.cells[0] = b.cells[0];
    std::vector<int> kept;
    for (int v = 0; v < b.level_size(1); ++v)
        if (keep[v]) {
            kept.push_back(v);
            br.cells[1].push_back(b.cells[1][v]);
        }
    BitMatrix d(int(kept.size()), b.level_size(0));
    for (size_t r = 0; r < kept.size(); ++r)
        for (int cidx = 0; cidx < b.delta[0].cols(); ++cidx)
            if (b.delta[0].get(kept[r], cidx)) d.set(int(r), cidx, true);
    br.delta.push_back(std::move(d));

    std::vector<CochainComplex> newparts(parts.begin(), parts.end() - 1);
    newparts.push_back(std::move(br));
    return tensor_all(newparts);
}

// --- serialization: per-level labels, then coboundaries as sparse rows ---

inline void write_complex(std::ostream& os, const CochainComplex& c) {
    os << "complex dim " << c.dim << '\n';
    for (int i = 0; i <= c.dim; ++i) {
        os << "level " << i << ' ' << c.level_size(i) << '\n';
        for (const auto& l : c.cells[i]) os << label_to_string(l) << '\n';
    }
    for (int i = 0; i < c.dim; ++i) {
        os << "delta " << i << ' ' << c.delta[i].rows() << ' ' << c.delta[i].cols() << '\n';
        for (int r = 0; r < c.delta[i].rows(); ++r) {
            os << r << ':';
            for (int col = 0; col < c.delta[i].cols(); ++col)
                if (c.delta[i].get(r, col)) os << ' ' << col;
            os << '\n';
        }
    }
}

inline CochainComplex read_complex(std::istream& is) {
    CochainComplex c;
    std::string tok;
    if (!(is >> tok) || tok != "complex") throw std::runtime_error("read_complex: bad header");
    is >> tok >> c.dim;
    c.cells.resize(c.dim + 1);
    for (int i = 0; i <= c.dim; ++i) {
        int lev, n;
        is >> tok >> lev >> n;
        is.ignore();
        for (int j = 0; j < n; ++j) {
            std::string line;
            std::getline(is, line);
            CellLabel l;
            std::stringstream ss(line);
            std::string part;
            while (std::getline(ss, part, ',')) {
                auto colon = part.find(':');
                l.push_back(Cell{std::stoi(part.substr(0, colon)),
                                 std::stoi(part.substr(colon + 1))});
            }
            c.cells[i].push_back(std::move(l));
        }
    }
    for (int i = 0; i < c.dim; ++i) {
        int idx, rows, cols;
        is >> tok >> idx >> rows >> cols;
        is.ignore();
        BitMatrix d(rows, cols);
        for (int r = 0; r < rows; ++r) {
            std::string line;
            std::getline(is, line);
            std::stringstream ss(line);
            std::string head;
            ss >> head;
            int col;
            while (ss >> col) d.set(r, col, true);
        }
        c.delta.push_back(std::move(d));
    }
    return c;
}

}  // namespace qldpc
