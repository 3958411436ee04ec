#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/rng.hpp"

// Dense bit-packed linear algebra over F2. Everything downstream (complex
// construction, decoding, encoding maps, tableau simulation) sits on these
// two types. Trailing pad bits of a BitVector/matrix row are kept zero.

namespace qldpc {

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(int n) : n_(n), w_((n + 63) / 64, 0) {}

    static BitVector unit(int n, int i) {
        BitVector v(n);
        v.set(i, true);
        return v;
    }

    static BitVector random(int n, Rng& rng) {
        BitVector v(n);
        for (auto& word : v.w_) word = rng.next();
        v.clear_pad();
        return v;
    }

    int size() const { return n_; }

    bool get(int i) const { return (w_[i >> 6] >> (i & 63)) & 1; }

    void set(int i, bool b) {
        uint64_t mask = 1ULL << (i & 63);
        if (b) w_[i >> 6] |= mask;
        else w_[i >> 6] &= ~mask;
    }

    void flip(int i) { w_[i >> 6] ^= 1ULL << (i & 63); }

    void clear() { for (auto& word : w_) word = 0; }

    void xor_in(const BitVector& other) {
        check_same_size(other);
        for (size_t k = 0; k < w_.size(); ++k) w_[k] ^= other.w_[k];
    }

    void and_in(const BitVector& other) {
        check_same_size(other);
        for (size_t k = 0; k < w_.size(); ++k) w_[k] &= other.w_[k];
    }

    int weight() const {
        int c = 0;
        for (uint64_t word : w_) c += std::popcount(word);
        return c;
    }

    // |this AND other| without materializing the intersection.
    int and_weight(const BitVector& other) const {
        check_same_size(other);
        int c = 0;
        for (size_t k = 0; k < w_.size(); ++k) c += std::popcount(w_[k] & other.w_[k]);
        return c;
    }

    bool is_zero() const {
        for (uint64_t word : w_) if (word) return false;
        return true;
    }

    bool dot(const BitVector& other) const { return and_weight(other) & 1; }

    std::vector<int> support() const {
        std::vector<int> s;
        for (size_t k = 0; k < w_.size(); ++k) {
            uint64_t word = w_[k];
            while (word) {
                int b = std::countr_zero(word);
                s.push_back(int(k) * 64 + b);
                word &= word - 1;
            }
        }
        return s;
    }

    friend BitVector operator^(BitVector a, const BitVector& b) {
        a.xor_in(b);
        return a;
    }

    bool operator==(const BitVector& o) const { return n_ == o.n_ && w_ == o.w_; }
    bool operator!=(const BitVector& o) const { return !(*this == o); }
    bool operator<(const BitVector& o) const { return n_ != o.n_ ? n_ < o.n_ : w_ < o.w_; }

    const std::vector<uint64_t>& words() const { return w_; }
    std::vector<uint64_t>& words() { return w_; }

    std::string to_string() const {
        std::string s(n_, '0');
        for (int i = 0; i < n_; ++i) if (get(i)) s[i] = '1';
        return s;
    }

private:
    void clear_pad() {
        if (n_ & 63) w_.back() &= (~0ULL) >> (64 - (n_ & 63));
    }
    void check_same_size(const BitVector& o) const {
        if (n_ != o.n_) throw std::invalid_argument("BitVector size mismatch");
    }
    int n_ = 0;
    std::vector<uint64_t> w_;
};

class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), w_(size_t(rows) * wpr_, 0) {}

    static BitMatrix identity(int n) {
        BitMatrix m(n, n);
        for (int i = 0; i < n; ++i) m.set(i, i, true);
        return m;
    }

    static BitMatrix from_rows(const std::vector<BitVector>& rows, int cols) {
        BitMatrix m(int(rows.size()), cols);
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j : rows[i].support()) m.set(int(i), j, true);
        return m;
    }

    static BitMatrix random(int rows, int cols, Rng& rng) {
        BitMatrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m.set(i, j, rng.bit());
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    bool get(int r, int c) const { return (w_[size_t(r) * wpr_ + (c >> 6)] >> (c & 63)) & 1; }

    void set(int r, int c, bool b) {
        uint64_t mask = 1ULL << (c & 63);
        size_t idx = size_t(r) * wpr_ + (c >> 6);
        if (b) w_[idx] |= mask;
        else w_[idx] &= ~mask;
    }

    void xor_row_into(int src, int dst) {
        uint64_t* d = &w_[size_t(dst) * wpr_];
        const uint64_t* s = &w_[size_t(src) * wpr_];
        for (int k = 0; k < wpr_; ++k) d[k] ^= s[k];
    }

    void swap_rows(int a, int b) {
        if (a == b) return;
        for (int k = 0; k < wpr_; ++k)
            std::swap(w_[size_t(a) * wpr_ + k], w_[size_t(b) * wpr_ + k]);
    }

    BitVector row(int r) const {
        BitVector v(cols_);
        const uint64_t* s = &w_[size_t(r) * wpr_];
        for (int k = 0; k < wpr_; ++k) v.words()[k] = s[k];
        return v;
    }

    void set_row(int r, const BitVector& v) {
        if (v.size() != cols_) throw std::invalid_argument("set_row size mismatch");
        uint64_t* d = &w_[size_t(r) * wpr_];
        for (int k = 0; k < wpr_; ++k) d[k] = v.words()[k];
    }

    BitVector col(int c) const {
        BitVector v(rows_);
        for (int r = 0; r < rows_; ++r) if (get(r, c)) v.set(r, true);
        return v;
    }

    bool row_is_zero(int r) const {
        const uint64_t* s = &w_[size_t(r) * wpr_];
        for (int k = 0; k < wpr_; ++k) if (s[k]) return false;
        return true;
    }

    BitVector mul(const BitVector& x) const {
        if (x.size() != cols_) throw std::invalid_argument("mul: dimension mismatch");
        BitVector y(rows_);
        for (int r = 0; r < rows_; ++r) {
            const uint64_t* s = &w_[size_t(r) * wpr_];
            uint64_t acc = 0;
            for (int k = 0; k < wpr_; ++k) acc ^= s[k] & x.words()[k];
            int par = 0;
            par = std::popcount(acc) & 1;
            if (par) y.set(r, true);
        }
        return y;
    }

    BitMatrix mul(const BitMatrix& other) const {
        if (cols_ != other.rows_) throw std::invalid_argument("mul: dimension mismatch");
        BitMatrix out(rows_, other.cols_);
        for (int r = 0; r < rows_; ++r) {
            uint64_t* dst = &out.w_[size_t(r) * out.wpr_];
            const uint64_t* src = &w_[size_t(r) * wpr_];
            for (int k = 0; k < wpr_; ++k) {
                uint64_t word = src[k];
                while (word) {
                    int b = std::countr_zero(word);
                    word &= word - 1;
                    const uint64_t* orow = &other.w_[size_t(k * 64 + b) * other.wpr_];
                    for (int t = 0; t < other.wpr_; ++t) dst[t] ^= orow[t];
                }
            }
        }
        return out;
    }

    BitMatrix transposed() const {
        BitMatrix t(cols_, rows_);
        for (int r = 0; r < rows_; ++r) {
            const uint64_t* s = &w_[size_t(r) * wpr_];
            for (int k = 0; k < wpr_; ++k) {
                uint64_t word = s[k];
                while (word) {
                    int b = std::countr_zero(word);
                    word &= word - 1;
                    t.set(k * 64 + b, r, true);
                }
            }
        }
        return t;
    }

    bool is_zero() const {
        for (uint64_t word : w_) if (word) return false;
        return true;
    }

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && w_ == o.w_;
    }

private:
    int rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<uint64_t> w_;
};

// Row echelon form with deterministic lowest-index pivoting. Keeping the
// pivot choice fixed makes every downstream solve reproducible, which the
// gadget hooks rely on.
struct Echelon {
    BitMatrix m;                 // reduced row echelon form
    std::vector<int> pivot_cols; // pivot column per eliminated row
    int rank = 0;
};

inline Echelon echelon_form(BitMatrix m) {
    Echelon e;
    int rows = m.rows(), cols = m.cols();
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (m.get(i, c)) { piv = i; break; }
        if (piv < 0) continue;
        m.swap_rows(r, piv);
        for (int i = 0; i < rows; ++i)
            if (i != r && m.get(i, c)) m.xor_row_into(r, i);
        e.pivot_cols.push_back(c);
        ++r;
    }
    e.m = std::move(m);
    e.rank = r;
    return e;
}

inline int rank(const BitMatrix& m) { return echelon_form(m).rank; }

// Reusable solver for M x = b with a fixed M. first-pivot solution: free
// variables are set to zero.
class LinSolver {
public:
    LinSolver() = default;
    explicit LinSolver(const BitMatrix& m) : cols_(m.cols()) {
        // Eliminate on [M | I] so we can map b to the reduced rhs.
        int rows = m.rows();
        BitMatrix aug(rows, m.cols() + rows);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < m.cols(); ++c)
                if (m.get(r, c)) aug.set(r, c, true);
            aug.set(r, m.cols() + r, true);
        }
        int r = 0;
        for (int c = 0; c < m.cols() && r < rows; ++c) {
            int piv = -1;
            for (int i = r; i < rows; ++i)
                if (aug.get(i, c)) { piv = i; break; }
            if (piv < 0) continue;
            aug.swap_rows(r, piv);
            for (int i = 0; i < rows; ++i)
                if (i != r && aug.get(i, c)) aug.xor_row_into(r, i);
            pivot_cols_.push_back(c);
            ++r;
        }
        rank_ = r;
        rows_ = rows;
        aug_ = std::move(aug);
    }

    int rank() const { return rank_; }

    std::optional<BitVector> solve(const BitVector& b) const {
        if (b.size() != rows_) throw std::invalid_argument("solve: rhs dimension mismatch");
        // Reduced rhs: row i of the eliminated system has rhs = <T_i, b>
        // where T is the recorded row-operation matrix.
        BitVector x(cols_);
        std::vector<char> rhs(rows_, 0);
        for (int i = 0; i < rows_; ++i) {
            int acc = 0;
            for (int j = 0; j < rows_; ++j)
                if (aug_.get(i, cols_ + j) && b.get(j)) acc ^= 1;
            rhs[i] = char(acc);
        }
        for (int i = rank_; i < rows_; ++i)
            if (rhs[i]) return std::nullopt;
        for (int i = 0; i < rank_; ++i)
            if (rhs[i]) x.set(pivot_cols_[i], true);
        return x;
    }

private:
    BitMatrix aug_;
    std::vector<int> pivot_cols_;
    int rank_ = 0, rows_ = 0, cols_ = 0;
};

inline std::optional<BitVector> solve(const BitMatrix& m, const BitVector& b) {
    if (b.size() != m.rows()) throw std::invalid_argument("solve: rhs dimension mismatch");
    return LinSolver(m).solve(b);
}

inline std::vector<BitVector> kernel_basis(const BitMatrix& m) {
    Echelon e = echelon_form(m);
    std::vector<char> is_pivot(m.cols(), 0);
    for (int c : e.pivot_cols) is_pivot[c] = 1;
    std::vector<BitVector> basis;
    for (int c = 0; c < m.cols(); ++c) {
        if (is_pivot[c]) continue;
        BitVector v(m.cols());
        v.set(c, true);
        for (int i = 0; i < e.rank; ++i)
            if (e.m.get(i, c)) v.set(e.pivot_cols[i], true);
        basis.push_back(std::move(v));
    }
    return basis;
}

// Basis of the column space, returned in reduced echelon form for
// determinism.
inline std::vector<BitVector> image_basis(const BitMatrix& m) {
    Echelon e = echelon_form(m.transposed());
    std::vector<BitVector> basis;
    for (int i = 0; i < e.rank; ++i) basis.push_back(e.m.row(i));
    return basis;
}

inline bool in_span(const BitVector& v, const std::vector<BitVector>& basis) {
    if (basis.empty()) return v.is_zero();
    BitMatrix m(int(basis.size()) + 1, v.size());
    for (size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].size() != v.size())
            throw std::invalid_argument("in_span: length mismatch");
        m.set_row(int(i), basis[i]);
    }
    m.set_row(int(basis.size()), v);
    Echelon base = echelon_form(BitMatrix::from_rows(basis, v.size()));
    return echelon_form(m).rank == base.rank;
}

inline bool in_coset(const BitVector& v, const std::vector<BitVector>& basis) {
    return in_span(v, basis);
}

// Reusable span-membership tester: eliminates the basis once, then reduces
// each query against the pivot rows.
class SpanTester {
public:
    SpanTester() = default;
    SpanTester(const std::vector<BitVector>& basis, int n) : n_(n) {
        Echelon e = echelon_form(BitMatrix::from_rows(basis, n));
        for (int i = 0; i < e.rank; ++i) {
            rows_.push_back(e.m.row(i));
            pivots_.push_back(e.pivot_cols[i]);
        }
    }

    bool contains(const BitVector& v) const {
        if (v.size() != n_) throw std::invalid_argument("SpanTester: length mismatch");
        BitVector r = v;
        for (size_t i = 0; i < rows_.size(); ++i)
            if (r.get(pivots_[i])) r.xor_in(rows_[i]);
        return r.is_zero();
    }

private:
    int n_ = 0;
    std::vector<BitVector> rows_;
    std::vector<int> pivots_;
};

}  // namespace qldpc
