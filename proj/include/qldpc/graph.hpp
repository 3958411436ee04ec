#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/rng.hpp"

// Bipartite graphs, random biregular generation, lossless-expansion
// certification at small scale, and information/extendable set machinery.

namespace qldpc {

struct BipartiteGraph {
    int left_count = 0;
    int right_count = 0;
    int deg_left = 0;   // 0 when not biregular / unknown
    int deg_right = 0;
    std::vector<std::pair<int, int>> edges;  // (left, right), unique, sorted

    std::vector<std::vector<int>> left_adj() const {
        std::vector<std::vector<int>> adj(left_count);
        for (auto [l, r] : edges) adj[l].push_back(r);
        return adj;
    }

    std::vector<std::vector<int>> right_adj() const {
        std::vector<std::vector<int>> adj(right_count);
        for (auto [l, r] : edges) adj[r].push_back(l);
        return adj;
    }

    // Parity-check / bipartite adjacency matrix H in F2^{V_L x V_R}.
    BitMatrix adjacency() const {
        BitMatrix h(left_count, right_count);
        for (auto [l, r] : edges) h.set(l, r, true);
        return h;
    }

    bool degree_audit() const {
        std::vector<int> dl(left_count, 0), dr(right_count, 0);
        for (auto [l, r] : edges) { dl[l]++; dr[r]++; }
        for (int d : dl) if (d != deg_left) return false;
        for (int d : dr) if (d != deg_right) return false;
        return true;
    }
};

inline BipartiteGraph graph_from_edges(int nl, int nr,
                                       std::vector<std::pair<int, int>> edges) {
    BipartiteGraph g;
    g.left_count = nl;
    g.right_count = nr;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    std::vector<int> dl(nl, 0), dr(nr, 0);
    for (auto [l, r] : g.edges) { dl[l]++; dr[r]++; }
    g.deg_left = nl ? *std::max_element(dl.begin(), dl.end()) : 0;
    g.deg_right = nr ? *std::max_element(dr.begin(), dr.end()) : 0;
    return g;
}

// Configuration-model generation of a simple biregular graph: pair left and
// right half-edges uniformly and resample whenever a multi-edge appears.
inline BipartiteGraph gen_biregular(int nl, int nr, int dl, int dr, uint64_t seed,
                                    int max_attempts = 1000) {
    if (nl <= 0 || nr <= 0 || dl <= 0 || dr <= 0)
        throw std::invalid_argument("gen_biregular: counts and degrees must be positive");
    if (int64_t(nl) * dl != int64_t(nr) * dr)
        throw std::invalid_argument("gen_biregular: nl*dl != nr*dr");
    if (dl > nr || dr > nl)
        throw std::invalid_argument("gen_biregular: degree exceeds opposite side (simple graph impossible)");
    Rng rng(seed);
    int stubs = nl * dl;
    std::vector<int> perm(stubs);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        for (int i = 0; i < stubs; ++i) perm[i] = i;
        for (int i = stubs - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(uint64_t(i) + 1)]);
        std::vector<std::pair<int, int>> edges(stubs);
        bool simple = true;
        std::set<std::pair<int, int>> seen;
        for (int i = 0; i < stubs; ++i) {
            int l = i / dl;
            int r = perm[i] / dr;
            if (!seen.insert({l, r}).second) { simple = false; break; }
            edges[i] = {l, r};
        }
        if (!simple) continue;
        BipartiteGraph g = graph_from_edges(nl, nr, std::move(edges));
        g.deg_left = dl;
        g.deg_right = dr;
        return g;
    }
    throw std::runtime_error("gen_biregular: resampling budget exceeded");
}

// side 0 = left, 1 = right
inline std::vector<int> neighborhood(const BipartiteGraph& g, const std::vector<int>& s,
                                     int side) {
    std::vector<char> mark(side == 0 ? g.right_count : g.left_count, 0);
    auto adj = side == 0 ? g.left_adj() : g.right_adj();
    for (int v : s) {
        if (v < 0 || v >= int(adj.size()))
            throw std::invalid_argument("neighborhood: vertex out of range");
        for (int u : adj[v]) mark[u] = 1;
    }
    std::vector<int> out;
    for (size_t i = 0; i < mark.size(); ++i) if (mark[i]) out.push_back(int(i));
    return out;
}

struct ExpansionReport {
    double mu = 0;
    double eps = 0;
    bool exhaustive = false;
    int64_t checked_count = 0;
    // Violating sets, as (side, vertex list); empty means none found.
    std::vector<std::pair<int, std::vector<int>>> violations;

    bool certified_ok() const { return exhaustive && violations.empty(); }
};

namespace detail {

inline void enumerate_subsets(int n, int max_size,
                              const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cur;
    // iterative DFS over prefix-ordered subsets
    std::function<void(int)> rec = [&](int start) {
        if (!cur.empty()) fn(cur);
        if (int(cur.size()) == max_size) return;
        for (int v = start; v < n; ++v) {
            cur.push_back(v);
            rec(v + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

}  // namespace detail

// Lossless-expansion check. Exhaustive mode enumerates every S on both sides
// with |S| <= mu*|side|; sampled mode draws random sets and can only ever
// report found violations (a heuristic, non-certifying report).
inline ExpansionReport check_lossless(const BipartiteGraph& g, double mu, double eps,
                                      bool exhaustive, uint64_t seed = 0,
                                      int64_t sample_count = 20000,
                                      int64_t budget = 40'000'000) {
    ExpansionReport rep;
    rep.mu = mu;
    rep.eps = eps;
    rep.exhaustive = exhaustive;
    auto ladj = g.left_adj();
    auto radj = g.right_adj();

    auto check_set = [&](int side, const std::vector<int>& s) {
        const auto& adj = side == 0 ? ladj : radj;
        int deg = side == 0 ? g.deg_left : g.deg_right;
        std::vector<char> mark(side == 0 ? g.right_count : g.left_count, 0);
        int nbrs = 0;
        for (int v : s)
            for (int u : adj[v])
                if (!mark[u]) { mark[u] = 1; ++nbrs; }
        ++rep.checked_count;
        if (nbrs < (1.0 - eps) * deg * double(s.size()))
            rep.violations.push_back({side, s});
    };

    if (exhaustive) {
        for (int side = 0; side < 2; ++side) {
            int n = side == 0 ? g.left_count : g.right_count;
            int max_size = int(mu * n);
            if (max_size <= 0) continue;
            // crude budget estimate: sum of binomials
            double est = 0, binom = 1;
            for (int k = 1; k <= max_size; ++k) {
                binom = binom * (n - k + 1) / k;
                est += binom;
                if (est > double(budget))
                    throw std::runtime_error(
                        "check_lossless: exhaustive enumeration budget exceeded; use sampled mode");
            }
            detail::enumerate_subsets(n, max_size,
                                      [&](const std::vector<int>& s) { check_set(side, s); });
        }
    } else {
        Rng rng(seed);
        for (int64_t t = 0; t < sample_count; ++t) {
            int side = int(rng.below(2));
            int n = side == 0 ? g.left_count : g.right_count;
            int max_size = int(mu * n);
            if (max_size <= 0) continue;
            int sz = 1 + int(rng.below(uint64_t(max_size)));
            std::vector<int> s;
            std::set<int> used;
            while (int(s.size()) < sz) {
                int v = int(rng.below(uint64_t(n)));
                if (used.insert(v).second) s.push_back(v);
            }
            std::sort(s.begin(), s.end());
            check_set(side, s);
        }
    }
    return rep;
}

// Vertex of S with the most unique neighbors, and that count.
inline std::pair<int, int> unique_neighbor_vertex(const BipartiteGraph& g,
                                                  const std::vector<int>& s, int side) {
    if (s.empty()) throw std::invalid_argument("unique_neighbor_vertex: empty set");
    auto adj = side == 0 ? g.left_adj() : g.right_adj();
    std::vector<int> cover(side == 0 ? g.right_count : g.left_count, 0);
    for (int v : s)
        for (int u : adj[v]) cover[u]++;
    int best = -1, best_count = -1;
    for (int v : s) {
        int cnt = 0;
        for (int u : adj[v])
            if (cover[u] == 1) ++cnt;
        if (cnt > best_count) { best = v; best_count = cnt; }
    }
    return {best, best_count};
}

// Information set for ker(H): columns on which kernel vectors realize all
// patterns freely, grown greedily (lowest index first) to maximal size
// = dim ker(H).
inline std::vector<int> information_set(const BitMatrix& h) {
    auto kb = kernel_basis(h);
    int k = int(kb.size());
    std::vector<int> cols;
    if (k == 0) return cols;
    BitMatrix kmat = BitMatrix::from_rows(kb, h.cols());  // k x n
    // Greedy: add column c if it increases the rank of the restriction.
    std::vector<BitVector> picked;  // columns of kmat restricted so far
    for (int c = 0; c < h.cols() && int(cols.size()) < k; ++c) {
        BitVector col = kmat.col(c);
        if (!in_span(col, picked)) {
            picked.push_back(col);
            cols.push_back(c);
        }
    }
    return cols;
}

// S is extendable for ker(H) iff restriction ker(H) -> F2^S is surjective.
inline bool is_extendable(const BitMatrix& h, const std::vector<int>& s) {
    if (s.empty()) return true;
    auto kb = kernel_basis(h);
    if (kb.empty()) return false;
    BitMatrix restr(int(kb.size()), int(s.size()));
    for (size_t i = 0; i < kb.size(); ++i)
        for (size_t j = 0; j < s.size(); ++j)
            if (kb[i].get(s[j])) restr.set(int(i), int(j), true);
    return rank(restr) == int(s.size());
}

struct ExtendableFamilyReport {
    std::vector<int> classes;        // color class id per right vertex
    int class_count = 0;
    std::vector<int> chosen_set;     // the returned S
    double achieved_rate = 0;        // |S| / |V_R|
    double target_rate = 0;          // 1 / (2 (dl dr + 1))
    bool scan_ok = false;            // no left vertex sees two members of S
    bool extendable_ok = false;
};

// Greedy distance-2 coloring of V_R (no two same-class vertices share a left
// neighbor), intersect classes with an information set of ker(H_G acting on
// F2^{V_R}), return the largest intersection.
inline std::pair<std::vector<int>, ExtendableFamilyReport>
build_extendable_family(const BipartiteGraph& g) {
    ExtendableFamilyReport rep;
    auto radj = g.right_adj();
    auto ladj = g.left_adj();
    int limit = g.deg_left * g.deg_right + 1;
    rep.classes.assign(g.right_count, -1);
    for (int v = 0; v < g.right_count; ++v) {
        std::vector<char> used(limit, 0);
        for (int u : radj[v])
            for (int w : ladj[u])
                if (w != v && rep.classes[w] >= 0) used[rep.classes[w]] = 1;
        int c = 0;
        while (c < limit && used[c]) ++c;
        if (c >= limit)
            throw std::runtime_error("build_extendable_family: coloring exceeded dl*dr+1 classes");
        rep.classes[v] = c;
        rep.class_count = std::max(rep.class_count, c + 1);
    }

    // Code on the right side: ker(H) with H = adjacency acting on F2^{V_R}.
    BitMatrix h = g.adjacency();
    std::vector<int> info = information_set(h);
    std::vector<char> in_info(g.right_count, 0);
    for (int c : info) in_info[c] = 1;

    std::vector<int> best;
    for (int c = 0; c < rep.class_count; ++c) {
        std::vector<int> s;
        for (int v = 0; v < g.right_count; ++v)
            if (rep.classes[v] == c && in_info[v]) s.push_back(v);
        if (s.size() > best.size()) best = s;
    }
    rep.chosen_set = best;
    rep.achieved_rate = g.right_count ? double(best.size()) / g.right_count : 0;
    rep.target_rate = 1.0 / (2.0 * (g.deg_left * g.deg_right + 1));

    // Post-checks from the construction: membership scan and extendability.
    std::vector<char> in_s(g.right_count, 0);
    for (int v : best) in_s[v] = 1;
    rep.scan_ok = true;
    for (int u = 0; u < g.left_count; ++u) {
        int hits = 0;
        for (int v : ladj[u]) hits += in_s[v];
        if (hits > 1) { rep.scan_ok = false; break; }
    }
    rep.extendable_ok = is_extendable(h, best);
    return {best, rep};
}

// --- serialization: header "nL nR dL dR", then one "l r" line per edge ---

inline void write_graph(std::ostream& os, const BipartiteGraph& g) {
    os << g.left_count << ' ' << g.right_count << ' ' << g.deg_left << ' '
       << g.deg_right << '\n';
    for (auto [l, r] : g.edges) os << l << ' ' << r << '\n';
}

inline BipartiteGraph read_graph(std::istream& is) {
    BipartiteGraph g;
    if (!(is >> g.left_count >> g.right_count >> g.deg_left >> g.deg_right))
        throw std::runtime_error("read_graph: bad header");
    int l, r;
    std::vector<std::pair<int, int>> edges;
    while (is >> l >> r) edges.push_back({l, r});
    BipartiteGraph out = graph_from_edges(g.left_count, g.right_count, std::move(edges));
    out.deg_left = g.deg_left;
    out.deg_right = g.deg_right;
    return out;
}

}  // namespace qldpc
