#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/complex.hpp"

// Small-set flip decoders: syndrome-flip and error-flip variants with
// footprint instrumentation and the repetition-product robustness oracle.

namespace qldpc {

struct FlipCandidate {
    int anchor = -1;            // level-0 cell
    std::vector<int> flip;      // support of c, inside up_set(anchor, flip_level)
    int flip_level = 0;
    int weight_decrease = 0;    // drop in the tracked weight
    int delta_weight = 0;       // |delta(c)|
};

struct SynDecodeResult {
    BitVector correction;              // a^i
    BitVector residual;                // s + delta(a^i)
    std::vector<FlipCandidate> flips;  // applied in order
    int iterations = 0;
};

struct ErrDecodeResult {
    bool failed = false;
    BitVector a_low;                   // a^{i-1}
    BitVector a_same;                  // a^i
    std::vector<FlipCandidate> flips;  // applied in order (both levels)
    int iterations = 0;
};

// Reusable decoder for one (complex, level): caches up-sets, down-closures,
// and coboundary columns. The optional strengthened acceptance for the
// level-i branch requires a weight drop > (1-nu)|delta(c)| instead of > 0.
class FlipDecoder {
public:
    static constexpr int kMaxUpSet = 20;

    FlipDecoder(const CochainComplex& c, int level)
        : complex_(&c), level_(level) {
        if (level < 0 || level >= c.dim)
            throw std::invalid_argument("FlipDecoder: level must satisfy 0 <= i <= r-1");
        int n0 = c.level_size(0);
        up_same_.resize(n0);
        for (int q = 0; q < n0; ++q) up_same_[q] = up_set(c, 0, q, level);
        if (level > 0) {
            up_low_.resize(n0);
            for (int q = 0; q < n0; ++q) up_low_[q] = up_set(c, 0, q, level - 1);
        }
        anchors_of_syndrome_.resize(c.level_size(level + 1));
        for (int s = 0; s < c.level_size(level + 1); ++s)
            anchors_of_syndrome_[s] = down_set(c, level + 1, s, 0);
        anchors_of_cell_.resize(c.level_size(level));
        for (int q = 0; q < c.level_size(level); ++q)
            anchors_of_cell_[q] = down_set(c, level, q, 0);

        cols_same_.reserve(c.level_size(level));
        for (int q = 0; q < c.level_size(level); ++q)
            cols_same_.push_back(c.delta[level].col(q));
        if (level > 0) {
            cols_low_.reserve(c.level_size(level - 1));
            for (int q = 0; q < c.level_size(level - 1); ++q)
                cols_low_.push_back(c.delta[level - 1].col(q));
        }
    }

    int level() const { return level_; }
    const CochainComplex& complex() const { return *complex_; }

    // Best flip at `flip_level` whose coboundary reduces |target|: scans
    // anchors in the down-closure of supp(target), enumerates all nonzero
    // flips inside each anchor's up-set, maximizes (drop)/|delta(c)| with
    // exact integer cross-multiplication, ties broken by lowest (anchor,
    // flip bits as integer).
    std::optional<FlipCandidate> find_flip(const BitVector& target, int flip_level,
                                           std::optional<double> strengthen_nu) const {
        const auto& upsets = flip_level == level_ ? up_same_ : up_low_;
        const auto& cols = flip_level == level_ ? cols_same_ : cols_low_;
        const auto& anchor_map =
            flip_level == level_ ? anchors_of_syndrome_ : anchors_of_cell_;

        std::set<int> anchor_set;
        for (int s : target.support())
            for (int a : anchor_map[s]) anchor_set.insert(a);

        std::optional<FlipCandidate> best;
        int64_t best_num = 0, best_den = 1;
        uint64_t best_mask = 0;

        for (int anchor : anchor_set) {
            const auto& up = upsets[anchor];
            if (up.empty()) continue;
            if (int(up.size()) > kMaxUpSet)
                throw std::runtime_error("FlipDecoder: up-set too large to enumerate");
            int m = int(up.size());
            BitVector cur(target.size());
            uint64_t mask = 0;
            // Gray-code walk over nonzero subsets of the up-set.
            for (uint64_t g = 1; g < (1ULL << m); ++g) {
                uint64_t gray = g ^ (g >> 1);
                uint64_t prev = (g - 1) ^ ((g - 1) >> 1);
                int bit = std::countr_zero(gray ^ prev);
                cur.xor_in(cols[up[bit]]);
                mask = gray;
                int dw = cur.weight();
                if (dw == 0) continue;
                int overlap = cur.and_weight(target);
                int drop = 2 * overlap - dw;
                bool accept = strengthen_nu ? (double(drop) > (1.0 - *strengthen_nu) * dw)
                                            : (drop > 0);
                if (!accept) continue;
                // maximize drop/dw; on ties the earliest anchor wins (set
                // iteration is ascending), then the smallest mask.
                int64_t num = drop, den = dw;
                bool better = false;
                if (!best) {
                    better = true;
                } else {
                    int64_t lhs = num * best_den, rhs = best_num * den;
                    if (lhs > rhs) better = true;
                    else if (lhs == rhs && anchor == best->anchor && mask < best_mask)
                        better = true;
                }
                if (better) {
                    FlipCandidate cand;
                    cand.anchor = anchor;
                    cand.flip_level = flip_level;
                    for (int t = 0; t < m; ++t)
                        if ((mask >> t) & 1) cand.flip.push_back(up[t]);
                    cand.weight_decrease = drop;
                    cand.delta_weight = dw;
                    best = cand;
                    best_num = num;
                    best_den = den;
                    best_mask = mask;
                }
            }
        }
        return best;
    }

    // SSFlipSyn: repeatedly flip while the residual weight strictly drops.
    // Candidates are kept per-anchor in an ordered set and only anchors in
    // the down-closure of the changed syndrome cells are rescanned after a
    // flip, which keeps each iteration local. The flip sequence equals the
    // full-rescan reference implementation's (same score and tie-break).
    SynDecodeResult ss_flip_syn(const BitVector& s,
                                std::optional<double> strengthen_nu = std::nullopt) const {
        SynDecodeResult res;
        res.correction = BitVector(complex_->level_size(level_));
        res.residual = s;
        int guard = s.weight() + 1;

        auto cmp = [](const AnchorBest& a, const AnchorBest& b) {
            int64_t lhs = a.drop * b.dw, rhs = b.drop * a.dw;
            if (lhs != rhs) return lhs > rhs;
            if (a.anchor != b.anchor) return a.anchor < b.anchor;
            return a.mask < b.mask;
        };
        std::set<AnchorBest, decltype(cmp)> queue(cmp);
        std::map<int, AnchorBest> best_of_anchor;

        std::set<int> dirty;
        for (int cell : s.support())
            for (int a : anchors_of_syndrome_[cell]) dirty.insert(a);

        while (true) {
            for (int a : dirty) {
                auto it = best_of_anchor.find(a);
                if (it != best_of_anchor.end()) {
                    queue.erase(it->second);
                    best_of_anchor.erase(it);
                }
                auto cand = scan_anchor(res.residual, a, strengthen_nu);
                if (cand.dw > 0) {
                    queue.insert(cand);
                    best_of_anchor[a] = cand;
                }
            }
            dirty.clear();
            if (queue.empty() || res.residual.is_zero()) break;
            AnchorBest top = *queue.begin();

            FlipCandidate cand;
            cand.anchor = top.anchor;
            cand.flip_level = level_;
            const auto& up = up_same_[top.anchor];
            for (size_t t = 0; t < up.size(); ++t)
                if ((top.mask >> t) & 1) cand.flip.push_back(up[t]);
            cand.weight_decrease = int(top.drop);
            cand.delta_weight = int(top.dw);

            // mark anchors whose local view changes, then apply
            for (int q : cand.flip)
                for (int cell : cols_same_[q].support())
                    for (int a : anchors_of_syndrome_[cell]) dirty.insert(a);
            apply_flip(cand, res.correction, res.residual);
            res.flips.push_back(cand);
            ++res.iterations;
            if (res.iterations > guard)
                throw std::runtime_error("ss_flip_syn: weight failed to decrease");
        }
        return res;
    }

    // Reference implementation: full rescan each iteration (kept as the
    // equivalence oracle for the incremental version).
    SynDecodeResult ss_flip_syn_rescan(const BitVector& s,
                                       std::optional<double> strengthen_nu =
                                           std::nullopt) const {
        SynDecodeResult res;
        res.correction = BitVector(complex_->level_size(level_));
        res.residual = s;
        int guard = s.weight() + 1;
        while (res.residual.weight() > 0) {
            auto cand = find_flip(res.residual, level_, strengthen_nu);
            if (!cand) break;
            apply_flip(*cand, res.correction, res.residual);
            res.flips.push_back(*cand);
            ++res.iterations;
            if (res.iterations > guard)
                throw std::runtime_error("ss_flip_syn: weight failed to decrease");
        }
        return res;
    }

    // SSFlipErr: prefer level-(i-1) flips that shrink the error estimate,
    // else level-i flips that shrink its syndrome; FAIL when neither
    // applies while the decomposition is incomplete.
    ErrDecodeResult ss_flip_err(const BitVector& e,
                                std::optional<double> strengthen_nu = std::nullopt) const {
        ErrDecodeResult res;
        int n_low = level_ > 0 ? complex_->level_size(level_ - 1) : 0;
        res.a_low = BitVector(n_low);
        res.a_same = BitVector(complex_->level_size(level_));
        BitVector rem = e;                               // e + a^i + delta(a^{i-1})
        BitVector syn = complex_->delta[level_].mul(e);  // delta(e + a^i)
        int64_t guard = 16 + 8 * int64_t(e.weight() + 1) *
                                 (complex_->level_size(level_) + 1);
        while (!rem.is_zero()) {
            std::optional<FlipCandidate> cand;
            if (level_ > 0) cand = find_flip(rem, level_ - 1, std::nullopt);
            if (cand) {
                for (int q : cand->flip) {
                    res.a_low.flip(q);
                    rem.xor_in(cols_low_[q]);
                }
            } else {
                cand = find_flip(syn, level_, strengthen_nu);
                if (!cand) {
                    res.failed = true;
                    return res;
                }
                for (int q : cand->flip) {
                    res.a_same.flip(q);
                    rem.flip(q);
                    syn.xor_in(cols_same_[q]);
                }
            }
            res.flips.push_back(*cand);
            ++res.iterations;
            if (res.iterations > guard)
                throw std::runtime_error("ss_flip_err: no progress");
        }
        return res;
    }

    void apply_flip(const FlipCandidate& cand, BitVector& correction,
                    BitVector& residual) const {
        for (int q : cand.flip) {
            correction.flip(q);
            residual.xor_in(cols_same_[q]);
        }
    }

private:
    struct AnchorBest {
        int64_t drop = 0, dw = 0;
        int anchor = -1;
        uint64_t mask = 0;
    };

    // Best accepted flip inside one anchor's up-set, or dw = 0 when none.
    AnchorBest scan_anchor(const BitVector& target, int anchor,
                           std::optional<double> strengthen_nu) const {
        AnchorBest best;
        best.anchor = anchor;
        const auto& up = up_same_[anchor];
        if (up.empty()) return best;
        if (int(up.size()) > kMaxUpSet)
            throw std::runtime_error("FlipDecoder: up-set too large to enumerate");
        int m = int(up.size());
        BitVector cur(target.size());
        for (uint64_t g = 1; g < (1ULL << m); ++g) {
            uint64_t gray = g ^ (g >> 1);
            uint64_t prev = (g - 1) ^ ((g - 1) >> 1);
            int bit = std::countr_zero(gray ^ prev);
            cur.xor_in(cols_same_[up[bit]]);
            int dw = cur.weight();
            if (dw == 0) continue;
            int drop = 2 * cur.and_weight(target) - dw;
            bool accept = strengthen_nu ? (double(drop) > (1.0 - *strengthen_nu) * dw)
                                        : (drop > 0);
            if (!accept) continue;
            bool better = best.dw == 0;
            if (!better) {
                int64_t lhs = int64_t(drop) * best.dw, rhs = best.drop * dw;
                better = lhs > rhs || (lhs == rhs && gray < best.mask);
            }
            if (better) {
                best.drop = drop;
                best.dw = dw;
                best.mask = gray;
            }
        }
        return best;
    }
    const CochainComplex* complex_;
    int level_;
    std::vector<std::vector<int>> up_same_;   // up_set(c0, i)
    std::vector<std::vector<int>> up_low_;    // up_set(c0, i-1)
    std::vector<std::vector<int>> anchors_of_syndrome_;  // down-closure of (i+1)-cells
    std::vector<std::vector<int>> anchors_of_cell_;      // down-closure of i-cells
    std::vector<BitVector> cols_same_;  // delta_i columns
    std::vector<BitVector> cols_low_;   // delta_{i-1} columns
};

// --- footprints (data for the locality and density audits) ---

// Footprint of SSFlipSyn(delta(e)+f) per the definition: union over
// iterations of supp(e + a^i) at level i and of the residual at level i+1.
// Vertices are (level, cell) pairs.
inline std::set<std::pair<int, int>> syn_footprint(const CochainComplex& c, int level,
                                                   const BitVector& e, const BitVector& f,
                                                   const SynDecodeResult& run) {
    std::set<std::pair<int, int>> fp;
    BitVector err = e;                                  // e + a^i
    BitVector res = c.delta[level].mul(e) ^ f;          // delta(e+a^i)+f
    auto absorb = [&]() {
        for (int q : err.support()) fp.insert({level, q});
        for (int q : res.support()) fp.insert({level + 1, q});
    };
    // Time 0 counts supp(delta(e)) and supp(f) before cancellation; this is
    // what keeps components aligned between a full run and its restrictions.
    for (int q : c.delta[level].mul(e).support()) fp.insert({level + 1, q});
    for (int q : f.support()) fp.insert({level + 1, q});
    absorb();
    for (const auto& flip : run.flips) {
        for (int q : flip.flip) {
            err.flip(q);
            res.xor_in(c.delta[level].col(q));
        }
        absorb();
    }
    return fp;
}

// Footprint of SSFlipErr(e): union over iterations of supp(a^{i-1}),
// supp(e + a^i + delta(a^{i-1})), and supp(delta(e + a^i)).
inline std::set<std::pair<int, int>> err_footprint(const CochainComplex& c, int level,
                                                   const BitVector& e,
                                                   const ErrDecodeResult& run) {
    std::set<std::pair<int, int>> fp;
    BitVector alow(level > 0 ? c.level_size(level - 1) : 0);
    BitVector rem = e;
    BitVector syn = c.delta[level].mul(e);
    auto absorb = [&]() {
        for (int q : alow.support()) fp.insert({level - 1, q});
        for (int q : rem.support()) fp.insert({level, q});
        for (int q : syn.support()) fp.insert({level + 1, q});
    };
    absorb();
    for (const auto& flip : run.flips) {
        if (flip.flip_level == level - 1) {
            for (int q : flip.flip) {
                alow.flip(q);
                rem.xor_in(c.delta[level - 1].col(q));
            }
        } else {
            for (int q : flip.flip) {
                rem.flip(q);
                syn.xor_in(c.delta[level].col(q));
            }
        }
        absorb();
    }
    return fp;
}

struct FootprintAudit {
    bool pass = true;
    double min_density = 1.0;  // over components with nonempty footprint
    int components = 0;
};

// Per connected component of the subgraph of the connectivity graph induced
// by the footprint, the fraction of vertices lying in the seed set must meet
// the stated lower bound (1/4w^3 for syn runs, 1/8w^4 for err runs).
inline FootprintAudit footprint_density_audit(
    const std::set<std::pair<int, int>>& footprint,
    const std::set<std::pair<int, int>>& seeds, const ConnectivityGraph& g,
    double density_bound) {
    FootprintAudit audit;
    std::map<int, int> comp;  // graph vertex -> component id
    std::vector<int> verts;
    for (auto [lev, idx] : footprint) {
        int v = g.vertex(lev, idx);
        if (v < 0) throw std::invalid_argument("footprint vertex missing from graph");
        verts.push_back(v);
    }
    std::set<int> vset(verts.begin(), verts.end());
    int cid = 0;
    for (int v : verts) {
        if (comp.count(v)) continue;
        std::vector<int> stack = {v};
        comp[v] = cid;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int w : g.adj[u])
                if (vset.count(w) && !comp.count(w)) {
                    comp[w] = cid;
                    stack.push_back(w);
                }
        }
        ++cid;
    }
    audit.components = cid;
    std::vector<int> size(cid, 0), hits(cid, 0);
    for (auto [lev, idx] : footprint) {
        int v = g.vertex(lev, idx);
        size[comp[v]]++;
        if (seeds.count({lev, idx})) hits[comp[v]]++;
    }
    for (int c = 0; c < cid; ++c) {
        double density = double(hits[c]) / size[c];
        audit.min_density = std::min(audit.min_density, density);
        if (density < density_bound) audit.pass = false;
    }
    return audit;
}

// Lemma-style locality audit: the decoder run on each footprint component's
// restriction must reproduce the restriction of the global output.
inline bool locality_audit(const CochainComplex& c, int level, const BitVector& e,
                           const BitVector& f) {
    FlipDecoder dec(c, level);
    BitVector s = c.delta[level].mul(e) ^ f;
    auto run = dec.ss_flip_syn(s);
    auto fp = syn_footprint(c, level, e, f, run);
    auto g = connectivity_graph(c, {level, level + 1});

    // components of the induced subgraph
    std::map<std::pair<int, int>, int> comp;
    int cid = 0;
    for (auto cell : fp) {
        if (comp.count(cell)) continue;
        std::vector<std::pair<int, int>> stack = {cell};
        comp[cell] = cid;
        while (!stack.empty()) {
            auto cur = stack.back();
            stack.pop_back();
            int v = g.vertex(cur.first, cur.second);
            for (int u : g.adj[v]) {
                std::pair<int, int> other = {g.level[u], g.index[u]};
                if (fp.count(other) && !comp.count(other)) {
                    comp[other] = cid;
                    stack.push_back(other);
                }
            }
        }
        ++cid;
    }

    for (int component = 0; component < cid; ++component) {
        BitVector ev(e.size()), fv(f.size());
        for (int q : e.support())
            if (comp.count({level, q}) && comp[{level, q}] == component) ev.set(q, true);
        for (int q : f.support())
            if (comp.count({level + 1, q}) && comp[{level + 1, q}] == component)
                fv.set(q, true);
        auto sub = dec.ss_flip_syn(c.delta[level].mul(ev) ^ fv);
        // restriction of the global output to the component
        BitVector expect(e.size());
        for (int q : run.correction.support())
            if (comp.count({level, q}) && comp[{level, q}] == component) expect.set(q, true);
        if (!(sub.correction == expect)) return false;
    }
    return true;
}

// --- robustness oracle on products of repetition complexes ---

inline CochainComplex repetition_product(const std::vector<int>& lengths) {
    std::vector<CochainComplex> parts;
    for (int n : lengths) {
        std::vector<std::pair<int, int>> e;
        for (int j = 0; j < n; ++j) e.push_back({0, j});
        auto g = graph_from_edges(1, n, e);
        g.deg_left = n;
        g.deg_right = 1;
        parts.push_back(complex_from_graph(g));
    }
    return tensor_all(parts);
}

struct RobustnessResult {
    BitVector best_coboundary;
    int residual_weight = 0;   // |b + c| minimized
    int syndrome_weight = 0;   // |delta(c)|
    bool infinite = false;     // c itself is a coboundary
    double ratio() const {
        return infinite ? std::numeric_limits<double>::infinity()
                        : double(syndrome_weight) / residual_weight;
    }
};

// Brute-force the coboundary b minimizing |b + c|; the achieved ratio
// |delta(c)| / |b + c| estimates the robustness constant.
inline RobustnessResult robustness_check(const std::vector<int>& lengths, int level,
                                         const BitVector& c) {
    CochainComplex q = repetition_product(lengths);
    if (level < 0 || level > q.dim)
        throw std::invalid_argument("robustness_check: bad level");
    if (c.size() != q.level_size(level))
        throw std::invalid_argument("robustness_check: dimension mismatch");
    int prev = level > 0 ? q.level_size(level - 1) : 0;
    if (prev > 22) throw std::invalid_argument("robustness_check: dimension over budget");

    RobustnessResult res;
    res.syndrome_weight = level < q.dim ? q.delta[level].mul(c).weight() : 0;
    res.best_coboundary = BitVector(c.size());
    res.residual_weight = c.weight();
    for (uint64_t mask = 1; mask < (1ULL << prev); ++mask) {
        BitVector x(prev);
        for (int j = 0; j < prev; ++j)
            if ((mask >> j) & 1) x.set(j, true);
        BitVector b = q.delta[level - 1].mul(x);
        int w = (b ^ c).weight();
        if (w < res.residual_weight) {
            res.residual_weight = w;
            res.best_coboundary = b;
        }
    }
    if (res.residual_weight == 0) res.infinite = true;
    return res;
}

// Optional per-run trace for debugging and audits.
inline void dump_trace(std::ostream& os, const std::vector<FlipCandidate>& flips) {
    int it = 0;
    for (const auto& f : flips) {
        os << "iter=" << it++ << " anchor=" << f.anchor << " level=" << f.flip_level
           << " drop=" << f.weight_decrease << " dw=" << f.delta_weight << " flip=";
        for (size_t j = 0; j < f.flip.size(); ++j) {
            if (j) os << ',';
            os << f.flip[j];
        }
        os << '\n';
    }
}

}  // namespace qldpc
