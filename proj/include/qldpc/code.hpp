#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/complex.hpp"

// CSS codes at a complex level, encoding maps built from information sets
// (1-dimensional and product), restricted encodings, and logical readout.

namespace qldpc {

struct CssCode {
    int n = 0;
    int k = 0;
    int level = 0;
    BitMatrix hz;  // delta_i   : rows are (i+1)-cells; detects X errors
    BitMatrix hx;  // boundary_i: rows are (i-1)-cells; detects Z errors

    // Lazy coset bases for logical-class tests.
    const std::vector<BitVector>& coboundary_basis() const {
        if (!cob_) cob_ = image_basis(hx.transposed());  // im(delta_{i-1})
        return *cob_;
    }
    const std::vector<BitVector>& boundary_basis() const {
        if (!bnd_) bnd_ = image_basis(hz.transposed());  // im(partial_{i+1})
        return *bnd_;
    }

    // Cached membership testers (the hot path for Monte Carlo verdicts).
    bool in_coboundaries(const BitVector& v) const {
        if (!cob_test_) cob_test_ = SpanTester(coboundary_basis(), n);
        return cob_test_->contains(v);
    }
    bool in_boundaries(const BitVector& v) const {
        if (!bnd_test_) bnd_test_ = SpanTester(boundary_basis(), n);
        return bnd_test_->contains(v);
    }

private:
    mutable std::optional<std::vector<BitVector>> cob_;
    mutable std::optional<std::vector<BitVector>> bnd_;
    mutable std::optional<SpanTester> cob_test_;
    mutable std::optional<SpanTester> bnd_test_;
};

inline CssCode css_from_level(const CochainComplex& c, int i) {
    if (i < 0 || i > c.dim) throw std::invalid_argument("css_from_level: bad level");
    CssCode q;
    q.n = c.level_size(i);
    q.k = cohomology_dim(c, i);
    q.level = i;
    q.hz = (i < c.dim) ? c.delta[i] : BitMatrix(0, q.n);
    q.hx = (i > 0) ? c.boundary(i) : BitMatrix(0, q.n);
    return q;
}

// Logical labels reuse CellLabel: one (degree, member-vertex) pair per
// factor. Member vertices are indices into the factor's information set
// side (V_L for degree 0, V_R for degree 1 of a cochain-type factor).
struct EncodingMap {
    int level = 0;
    std::vector<CellLabel> logical_labels;
    BitMatrix gen;  // n x k, column j = cocycle representative of logical j

    int label_index(const CellLabel& l) const {
        for (size_t j = 0; j < logical_labels.size(); ++j)
            if (logical_labels[j] == l) return int(j);
        return -1;
    }

    BitVector encode(const BitVector& x) const { return gen.mul(x); }
};

// Check the encoding-map invariants against a code: columns are cocycles,
// independent modulo coboundaries.
inline bool encoding_valid(const CssCode& code, const EncodingMap& enc) {
    if (enc.gen.cols() != code.k || enc.gen.rows() != code.n) return false;
    for (int j = 0; j < enc.gen.cols(); ++j)
        if (!code.hz.mul(enc.gen.col(j)).is_zero()) return false;
    auto cob = code.coboundary_basis();
    std::vector<BitVector> all = cob;
    for (int j = 0; j < enc.gen.cols(); ++j) all.push_back(enc.gen.col(j));
    BitMatrix m = BitMatrix::from_rows(all, code.n);
    return rank(m) == int(cob.size()) + code.k;
}

// --- 1-dimensional encodings (per factor) ---

struct Encoding1D {
    std::vector<int> m0;  // information set of ker(delta) in V_L
    std::vector<int> m1;  // information set of ker(boundary) in V_R
    BitMatrix enc0;       // |V_L| x |m0|, unique-codeword lift
    BitMatrix enc1;       // |V_R| x |m1|, zero padding
};

inline Encoding1D enc_1d(const CochainComplex& graph_complex,
                         const std::vector<int>& m0, const std::vector<int>& m1) {
    if (graph_complex.dim != 1) throw std::invalid_argument("enc_1d: factor must be 1-dim");
    const BitMatrix& d = graph_complex.delta[0];
    int nl = d.cols(), nr = d.rows();

    Encoding1D e;
    e.m0 = m0;
    e.m1 = m1;

    // level 0: lift x on m0 to the unique kernel codeword
    auto kb = kernel_basis(d);
    if (m0.size() != kb.size())
        throw std::invalid_argument("enc_1d: m0 is not an information set for ker(delta)");
    e.enc0 = BitMatrix(nl, int(m0.size()));
    if (!m0.empty()) {
        BitMatrix kmat(nl, int(kb.size()));  // columns = kernel basis vectors
        for (size_t j = 0; j < kb.size(); ++j)
            for (int i : kb[j].support()) kmat.set(i, int(j), true);
        BitMatrix restr(int(m0.size()), int(kb.size()));
        for (size_t r = 0; r < m0.size(); ++r)
            for (size_t j = 0; j < kb.size(); ++j)
                if (kmat.get(m0[r], int(j))) restr.set(int(r), int(j), true);
        LinSolver solver(restr);
        if (solver.rank() != int(m0.size()))
            throw std::invalid_argument("enc_1d: m0 is not an information set for ker(delta)");
        for (size_t j = 0; j < m0.size(); ++j) {
            auto a = solver.solve(BitVector::unit(int(m0.size()), int(j)));
            BitVector word(nl);
            for (int t : a->support()) word.xor_in(kb[t]);
            for (int i : word.support()) e.enc0.set(i, int(j), true);
        }
    }

    // level 1: pad with zeros outside m1
    BitMatrix bd = graph_complex.boundary(1);
    if (!is_extendable(bd, m1) || int(m1.size()) != int(kernel_basis(bd).size()))
        throw std::invalid_argument("enc_1d: m1 is not an information set for ker(boundary)");
    e.enc1 = BitMatrix(nr, int(m1.size()));
    for (size_t j = 0; j < m1.size(); ++j) e.enc1.set(m1[j], int(j), true);
    return e;
}

inline Encoding1D enc_1d_default(const CochainComplex& graph_complex) {
    const BitMatrix& d = graph_complex.delta[0];
    return enc_1d(graph_complex, information_set(d), information_set(graph_complex.boundary(1)));
}

// --- product encoding ---

// factor_type[h]: true = cochain orientation (the factor as given),
// false = chain orientation (the dual of the factor).
struct ProductEncodingInput {
    const CochainComplex* factor = nullptr;  // 1-dim graph complex (primal)
    Encoding1D enc;                          // encodings for the primal orientation
    bool cochain = true;
};

namespace detail {

// Per-factor generator for degree j in the product: for a cochain-type
// factor degree 0 -> enc0, degree 1 -> enc1; a chain-type factor swaps the
// roles (its level-0 cells are the primal V_R).
inline const BitMatrix* factor_generator(const ProductEncodingInput& f, int degree,
                                         CochainComplex& dual_storage,
                                         std::optional<Encoding1D>& dual_enc) {
    if (f.cochain) return degree == 0 ? &f.enc.enc0 : &f.enc.enc1;
    if (!dual_enc) {
        dual_storage = dual(*f.factor);
        dual_enc = enc_1d(dual_storage, f.enc.m1, f.enc.m0);
    }
    return degree == 0 ? &dual_enc->enc0 : &dual_enc->enc1;
}

inline const std::vector<int>& factor_info_set(const ProductEncodingInput& f, int degree) {
    if (f.cochain) return degree == 0 ? f.enc.m0 : f.enc.m1;
    return degree == 0 ? f.enc.m1 : f.enc.m0;
}

}  // namespace detail

// Build the level-i product encoding for the product (in order) of the given
// factors, each in its chosen orientation. `product` must be the tensor of
// the oriented factor complexes in the same order.
//
// With dual_side = true, builds the paired Z-type encoding on the same
// cells: each logical label keeps its degree split, but the per-factor
// generator comes from the opposite orientation at the complementary
// degree, so column j is a cycle representative with gen^T gen_dual = I.
inline EncodingMap enc_product(const CochainComplex& product,
                               std::vector<ProductEncodingInput> factors, int level,
                               bool dual_side = false) {
    int r = int(factors.size());
    EncodingMap enc;
    enc.level = level;

    // Materialize dual complexes/encodings once per chain-type factor.
    std::vector<CochainComplex> dual_storage(r);
    std::vector<std::optional<Encoding1D>> dual_enc(r);

    // Enumerate degree splits in lexicographic order, then members.
    std::vector<int> split(r, 0);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> label_sets;
    std::function<void(int, int)> rec = [&](int h, int remaining) {
        if (h == r) {
            if (remaining == 0) {
                std::vector<int> sp = split;
                label_sets.push_back({sp, {}});
            }
            return;
        }
        for (int j = 0; j <= 1 && j <= remaining; ++j) {
            split[h] = j;
            rec(h + 1, remaining - j);
        }
        split[h] = 0;
    };
    rec(0, level);

    std::vector<std::pair<std::vector<int>, std::vector<int>>> labels;  // (split, members)
    for (auto& [sp, unused] : label_sets) {
        (void)unused;
        std::vector<std::vector<int>> member_sets(r);
        bool empty = false;
        for (int h = 0; h < r; ++h) {
            member_sets[h] = detail::factor_info_set(factors[h], sp[h]);
            if (member_sets[h].empty()) { empty = true; break; }
        }
        if (empty) continue;
        std::vector<int> idx(r, 0);
        for (;;) {
            std::vector<int> members(r);
            for (int h = 0; h < r; ++h) members[h] = member_sets[h][idx[h]];
            labels.push_back({sp, members});
            int h = r - 1;
            while (h >= 0 && ++idx[h] == int(member_sets[h].size())) idx[h--] = 0;
            if (h < 0) break;
        }
    }

    int n = product.level_size(level);
    enc.gen = BitMatrix(n, int(labels.size()));
    for (size_t j = 0; j < labels.size(); ++j) {
        const auto& [sp, members] = labels[j];
        CellLabel ll(r);
        std::vector<BitVector> cols(r);
        // Labels carry primal level bits (stable across orientation flips):
        // a chain-type factor's degree-j cells sit at primal level 1-j.
        std::vector<int> primal_bit(r);
        for (int h = 0; h < r; ++h)
            primal_bit[h] = factors[h].cochain ? sp[h] : 1 - sp[h];
        for (int h = 0; h < r; ++h) {
            ll[h] = Cell{primal_bit[h], members[h]};
            ProductEncodingInput flipped = factors[h];
            flipped.cochain = !flipped.cochain;
            const BitMatrix* g =
                dual_side
                    ? detail::factor_generator(flipped, 1 - sp[h], dual_storage[h], dual_enc[h])
                    : detail::factor_generator(factors[h], sp[h], dual_storage[h], dual_enc[h]);
            const auto& info = detail::factor_info_set(factors[h], sp[h]);
            int pos = -1;
            for (size_t t = 0; t < info.size(); ++t)
                if (info[t] == members[h]) { pos = int(t); break; }
            cols[h] = g->col(pos);
        }
        enc.logical_labels.push_back(ll);
        // tensor of the factor columns, placed by cell label lookup
        std::vector<std::vector<int>> supports(r);
        for (int h = 0; h < r; ++h) supports[h] = cols[h].support();
        std::vector<int> idx(r, 0);
        bool any_empty = false;
        for (int h = 0; h < r; ++h) if (supports[h].empty()) any_empty = true;
        if (any_empty) continue;
        for (;;) {
            CellLabel cl(r);
            for (int h = 0; h < r; ++h) cl[h] = Cell{primal_bit[h], supports[h][idx[h]]};
            int ci = product.cell_index(level, cl);
            if (ci < 0) throw std::runtime_error("enc_product: cell label not found");
            enc.gen.set(ci, int(j), true);
            int h = r - 1;
            while (h >= 0 && ++idx[h] == int(supports[h].size())) idx[h--] = 0;
            if (h < 0) break;
        }
    }
    return enc;
}

// Restricted encoding for the product with the last factor's level-1 cells
// cut down to the complement of L: drops logical labels whose last-factor
// coordinate is a degree-1 member of L, and restricts representatives (cell
// indices are translated between the two complexes by label).
inline EncodingMap enc_restricted(const CochainComplex& full_product,
                                  const CochainComplex& restricted_product,
                                  const EncodingMap& enc, const std::vector<int>& L) {
    EncodingMap out;
    out.level = enc.level;
    std::vector<int> kept_cols;
    for (size_t j = 0; j < enc.logical_labels.size(); ++j) {
        const CellLabel& l = enc.logical_labels[j];
        const Cell& last = l.back();
        bool dropped = last.level == 1 &&
                       std::find(L.begin(), L.end(), last.index) != L.end();
        if (!dropped) {
            kept_cols.push_back(int(j));
            out.logical_labels.push_back(l);
        }
    }
    int n = restricted_product.level_size(enc.level);
    out.gen = BitMatrix(n, int(kept_cols.size()));
    for (size_t jj = 0; jj < kept_cols.size(); ++jj) {
        BitVector col = enc.gen.col(kept_cols[jj]);
        for (int ci : col.support()) {
            int ri = restricted_product.cell_index(enc.level,
                                                   full_product.cells[enc.level][ci]);
            if (ri >= 0) out.gen.set(ri, int(jj), true);
        }
    }
    return out;
}

// Everything needed to work with one level of a product of graph complexes:
// the oriented product complex, the CSS code, and the paired X/Z encodings.
struct ProductCode {
    std::vector<BipartiteGraph> graphs;
    std::vector<bool> cochain;              // orientation per factor
    std::vector<Encoding1D> factor_encs;    // primal-orientation encodings
    std::vector<CochainComplex> factor_complexes;  // primal (cochain) per factor
    std::vector<CochainComplex> oriented;   // as entering the tensor product
    CochainComplex complex;                 // tensor of oriented factors
    int level = 0;
    CssCode code;
    EncodingMap enc;       // cocycle representatives (X-type logicals)
    EncodingMap enc_dual;  // paired cycle representatives (Z-type logicals)

    int r() const { return int(graphs.size()); }
};

inline ProductCode build_product_code(std::vector<BipartiteGraph> graphs,
                                      std::vector<bool> cochain, int level,
                                      std::vector<Encoding1D> encs = {}) {
    ProductCode p;
    p.graphs = std::move(graphs);
    p.cochain = std::move(cochain);
    p.level = level;
    int r = p.r();
    if (int(p.cochain.size()) != r)
        throw std::invalid_argument("build_product_code: orientation count mismatch");
    for (int h = 0; h < r; ++h)
        p.factor_complexes.push_back(complex_from_graph(p.graphs[h]));
    if (encs.empty()) {
        for (int h = 0; h < r; ++h)
            p.factor_encs.push_back(enc_1d_default(p.factor_complexes[h]));
    } else {
        p.factor_encs = std::move(encs);
    }
    for (int h = 0; h < r; ++h)
        p.oriented.push_back(p.cochain[h] ? p.factor_complexes[h]
                                          : dual(p.factor_complexes[h]));
    p.complex = tensor_all(p.oriented);
    p.code = css_from_level(p.complex, level);
    std::vector<ProductEncodingInput> inputs;
    for (int h = 0; h < r; ++h)
        inputs.push_back({&p.factor_complexes[h], p.factor_encs[h], p.cochain[h]});
    p.enc = enc_product(p.complex, inputs, level, false);
    p.enc_dual = enc_product(p.complex, inputs, level, true);
    if (p.enc.gen.cols() != p.code.k)
        throw std::runtime_error("build_product_code: encoding dimension != k");
    return p;
}

// --- logical readout ---

// Returns x with z + Enc(x) a coboundary, or nullopt when z is not a
// cocycle. One linear solve per call against a cached factorization.
class LogicalDecoder {
public:
    LogicalDecoder(const CssCode& code, const EncodingMap& enc)
        : code_(&code), enc_(&enc) {
        // System [gen | coboundary basis] y = z ; x = first k coordinates.
        auto cob = code.coboundary_basis();
        BitMatrix m(code.n, code.k + int(cob.size()));
        for (int j = 0; j < code.k; ++j)
            for (int i : enc.gen.col(j).support()) m.set(i, j, true);
        for (size_t j = 0; j < cob.size(); ++j)
            for (int i : cob[j].support()) m.set(i, code.k + int(j), true);
        solver_ = LinSolver(m);
    }

    std::optional<BitVector> decode(const BitVector& z) const {
        if (!code_->hz.mul(z).is_zero()) return std::nullopt;
        auto y = solver_.solve(z);
        if (!y) return std::nullopt;  // cannot happen for cocycles
        BitVector x(code_->k);
        for (int j = 0; j < code_->k; ++j)
            if (y->get(j)) x.set(j, true);
        return x;
    }

private:
    const CssCode* code_;
    const EncodingMap* enc_;
    LinSolver solver_;
};

inline std::optional<BitVector> logical_decode(const CssCode& code, const EncodingMap& enc,
                                               const BitVector& z) {
    return LogicalDecoder(code, enc).decode(z);
}

// side: true = X residual (trivial iff a coboundary), false = Z residual
// (trivial iff a boundary).
inline bool logical_class_trivial(const CssCode& code, const BitVector& v, bool x_side) {
    return x_side ? code.in_coboundaries(v) : code.in_boundaries(v);
}

// --- code summary report ---

inline void write_code_report(std::ostream& os, const CssCode& code,
                              const EncodingMap& enc, int locality_w,
                              const std::string& distance_note) {
    os << "{\n";
    os << "  \"n\": " << code.n << ",\n";
    os << "  \"k\": " << code.k << ",\n";
    os << "  \"level\": " << code.level << ",\n";
    os << "  \"locality\": " << locality_w << ",\n";
    os << "  \"distance\": \"" << distance_note << "\",\n";
    os << "  \"logical_labels\": [";
    for (size_t j = 0; j < enc.logical_labels.size(); ++j) {
        if (j) os << ", ";
        os << '"' << label_to_string(enc.logical_labels[j]) << '"';
    }
    os << "]\n}\n";
}

}  // namespace qldpc
