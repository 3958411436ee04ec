#pragma once

#include "qldpc/gadgets.hpp"

// Shared instance builders for the gadget and acceptance suites.

namespace qldpc::fixtures {

inline BipartiteGraph cycle_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) {
        e.push_back({i, i});
        e.push_back({i, (i + n - 1) % n});
    }
    auto g = graph_from_edges(n, n, e);
    g.deg_left = g.deg_right = 2;
    return g;
}

// `pairs` left vertices, each with two private right neighbors. ker(H) on
// the right side is spanned by v_j + w_j, so M^1 = {v_j}; the extendable
// family machinery yields |L| = pairs members with disjoint neighborhoods.
inline BipartiteGraph pendant_graph(int pairs) {
    std::vector<std::pair<int, int>> e;
    for (int j = 0; j < pairs; ++j) {
        e.push_back({j, 2 * j});
        e.push_back({j, 2 * j + 1});
    }
    auto g = graph_from_edges(pairs, 2 * pairs, e);
    g.deg_left = 2;
    g.deg_right = 1;
    return g;
}

inline PCRef toric(GadgetFactory& f, int m) {
    return f.product({cycle_graph(m), cycle_graph(m)}, {true, false}, 1);
}

// The r = 3 workhorse: (cochain, cochain, chain) pendant product at level 2.
// k = pairs^3, all logical labels in the (L)^3 mask.
inline PCRef pendant3(GadgetFactory& f, int pairs) {
    auto g = pendant_graph(pairs);
    return f.product({g, g, g}, {true, true, false}, 2);
}

inline std::vector<int> pendant_L(int pairs) {
    auto [L, rep] = build_extendable_family(pendant_graph(pairs));
    if (!rep.extendable_ok || !rep.scan_ok)
        throw std::runtime_error("pendant_L: family construction failed");
    return L;
}

// Incidence graph of the generalized quadrangle GQ(2,2): points are the
// 2-subsets of {0..5}, lines are the perfect matchings into three pairs.
// (3,3)-biregular on 15+15 vertices, girth 8, F2-rank 10.
inline BipartiteGraph gq22_graph() {
    std::map<std::pair<int, int>, int> pid;
    int np = 0;
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) pid[{a, b}] = np++;
    std::vector<std::pair<int, int>> e;
    int lid = 0;
    std::function<void(std::vector<int>, std::vector<int>)> rec =
        [&](std::vector<int> rest, std::vector<int> cur) {
            if (rest.empty()) {
                for (int p : cur) e.push_back({p, lid});
                ++lid;
                return;
            }
            int a = rest[0];
            for (size_t j = 1; j < rest.size(); ++j) {
                int b = rest[j];
                std::vector<int> nrest;
                for (size_t t = 1; t < rest.size(); ++t)
                    if (t != j) nrest.push_back(rest[t]);
                auto ncur = cur;
                ncur.push_back(pid[{std::min(a, b), std::max(a, b)}]);
                rec(nrest, ncur);
            }
        };
    rec({0, 1, 2, 3, 4, 5}, {});
    auto g = graph_from_edges(15, lid, e);
    g.deg_left = g.deg_right = 3;
    return g;
}

// Random 2-lift: doubles both sides, preserves biregularity, and never
// decreases girth. Used to grow the memory-experiment family.
inline BipartiteGraph lift2_graph(const BipartiteGraph& base, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<int, int>> e;
    for (auto [l, r] : base.edges) {
        int s = int(rng.bit());
        e.push_back({l, r * 2 + s});
        e.push_back({l + base.left_count, r * 2 + (1 - s)});
    }
    auto g = graph_from_edges(2 * base.left_count, 2 * base.right_count, e);
    g.deg_left = base.deg_left;
    g.deg_right = base.deg_right;
    return g;
}

// Prepare Enc(|x>) (z basis) or Enc(|(+/-)^x>) on fresh qubits via the
// non-fault-tolerant fixture, returning the layer after preparation.
inline int emit_basis_state(Circuit& c, const PCRef& pc, const std::vector<int>& data,
                            const BitVector& x, bool z_basis, int start) {
    int end = emit_nonft_prepare(c, pc, !z_basis, data, start);
    BlockRef block{pc, data, "prep"};
    if (!x.is_zero()) {
        if (z_basis)
            end = emit_logical_pauli(c, block, x, BitVector(), end);
        else
            end = emit_logical_pauli(c, block, BitVector(), x, end);
    }
    return end;
}

}  // namespace qldpc::fixtures
