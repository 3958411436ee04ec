#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "qldpc/circuit.hpp"
#include "qldpc/complex.hpp"

using namespace qldpc;

namespace {

BipartiteGraph cycle_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) {
        e.push_back({i, i});
        e.push_back({i, (i + n - 1) % n});
    }
    auto g = graph_from_edges(n, n, e);
    g.deg_left = g.deg_right = 2;
    return g;
}

}  // namespace

TEST_CASE("edge coloring basics") {
    // perfect matching -> 1 color
    auto m = gen_biregular(5, 5, 1, 1, 2);
    auto colors = edge_color(m);
    int cmax = 0;
    for (int c : colors) cmax = std::max(cmax, c + 1);
    CHECK(cmax == 1);

    // even cycle -> 2 colors
    auto cyc = cycle_graph(4);
    auto colors2 = edge_color(cyc);
    int cmax2 = 0;
    for (int c : colors2) cmax2 = std::max(cmax2, c + 1);
    CHECK(cmax2 <= 3);
    CHECK(cmax2 >= 2);

    // (3,6)-biregular -> proper with <= 7 colors
    auto g = gen_biregular(12, 6, 3, 6, 7);
    auto colors3 = edge_color(g);
    int cmax3 = 0;
    for (int c : colors3) cmax3 = std::max(cmax3, c + 1);
    CHECK(cmax3 <= 7);
    // properness scan
    std::map<std::pair<int, int>, int> col_of;
    for (size_t i = 0; i < g.edges.size(); ++i) col_of[g.edges[i]] = colors3[i];
    for (auto [e1, c1] : col_of)
        for (auto [e2, c2] : col_of)
            if (e1 != e2 && (e1.first == e2.first || e1.second == e2.second))
                CHECK(c1 != c2);

    // deterministic for fixed edge order
    CHECK(edge_color(g) == colors3);
}

TEST_CASE("edge coloring on random graphs stays within degree+1") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        int nl = 2 + int(rng.below(6)), nr = 2 + int(rng.below(6));
        std::vector<std::pair<int, int>> e;
        for (int l = 0; l < nl; ++l)
            for (int r = 0; r < nr; ++r)
                if (rng.below(3) == 0) e.push_back({l, r});
        if (e.empty()) continue;
        auto g = graph_from_edges(nl, nr, e);
        auto colors = edge_color(g);
        int used = 0;
        for (int c : colors) used = std::max(used, c + 1);
        CHECK(used <= std::max(g.deg_left, g.deg_right) + 1);
    }
}

TEST_CASE("build_synd_ext shape and depth") {
    // single weight-3 check: depth = 3 colors + init + measure = 5
    BitMatrix h(1, 3);
    for (int j = 0; j < 3; ++j) h.set(0, j, true);
    auto c = build_synd_ext(h, false);
    CHECK(c.depth() == 5);
    CHECK(c.num_qubits == 4);
    CHECK(c.num_measurements == 1);
    CHECK(c.all_layers_disjoint());

    // empty H: empty circuit
    auto c0 = build_synd_ext(BitMatrix(0, 3), false);
    CHECK(c0.depth() == 0);

    // toric Z checks (w from the complex): depth <= w+4
    auto cyc = complex_from_graph(cycle_graph(3));
    auto toric = tensor(cyc, dual(cyc));
    int w = locality(toric);
    auto cz = build_synd_ext(toric.delta[1], false);
    CHECK(cz.depth() <= w + 4);
    CHECK(cz.all_layers_disjoint());
    // orientation: data -> ancilla for Z checks
    for (const auto& layer : cz.layers)
        for (const auto& g : layer.gates)
            if (g.kind == GateKind::CNOT) {
                CHECK(g.q0 < toric.level_size(1));   // control is data
                CHECK(g.q1 >= toric.level_size(1));  // target is ancilla
            }
    auto cx = build_synd_ext(toric.boundary(1), true);
    for (const auto& layer : cx.layers)
        for (const auto& g : layer.gates)
            if (g.kind == GateKind::CNOT) {
                CHECK(g.q0 >= toric.level_size(1));  // control is ancilla
                CHECK(g.q1 < toric.level_size(1));
            }
}

TEST_CASE("depth and qubit_count accounting") {
    Circuit c;
    CHECK(depth(c) == 0);
    CHECK(qubit_count(c) == 0);

    c.num_qubits = 3;
    auto& l1 = c.add_layer();
    c.add_gate(l1, GateKind::H, 0);
    c.add_gate(l1, GateKind::CNOT, 1, 2);
    auto& l2 = c.add_layer();
    c.add_gate(l2, GateKind::MeasZ, 0);
    CHECK(depth(c) == 2);
    CHECK(c.num_measurements == 1);

    // concatenation depth additivity
    Circuit d;
    d.num_qubits = 3;
    auto& dl = d.add_layer();
    d.add_gate(dl, GateKind::X, 1);
    int before = c.depth();
    c.append(d, {0, 1, 2});
    CHECK(c.depth() == before + 1);
}

TEST_CASE("layer disjointness audit") {
    Circuit c;
    c.num_qubits = 3;
    auto& l = c.add_layer();
    c.add_gate(l, GateKind::CNOT, 0, 1);
    c.add_gate(l, GateKind::H, 2);
    CHECK(Circuit::layer_supports_disjoint(l));
    c.add_gate(l, GateKind::X, 1);
    CHECK(!Circuit::layer_supports_disjoint(l));
}

TEST_CASE("corrupt interleaves fault layers") {
    Circuit c;
    c.num_qubits = 2;
    auto& l1 = c.add_layer();
    c.add_gate(l1, GateKind::H, 0);
    auto& l2 = c.add_layer();
    c.add_gate(l2, GateKind::MeasZ, 0);

    Fault f;
    f.at[{0, 1}] = Pauli::X;
    f.at[{1, 2}] = Pauli::Y;
    auto cc = corrupt(c, f);
    CHECK(cc.depth() == 2 * c.depth());
    CHECK(cc.layers[1].gates.size() == 1);
    CHECK(cc.layers[1].gates[0].kind == GateKind::X);
    CHECK(cc.layers[3].gates[0].kind == GateKind::Y);

    // empty fault: same gates, doubled depth, no extra gates
    auto cc0 = corrupt(c, Fault{});
    CHECK(cc0.depth() == 4);
    CHECK(cc0.layers[1].gates.empty());

    Fault bad;
    bad.at[{5, 1}] = Pauli::X;
    CHECK_THROWS(corrupt(c, bad));
}

TEST_CASE("hook record offsets survive composition") {
    // subcircuit: measure qubit 0, then hook flips qubit 1 iff outcome set
    Circuit sub;
    sub.num_qubits = 2;
    auto& m = sub.add_layer();
    sub.add_gate(m, GateKind::MeasZ, 0);
    auto& hl = sub.add_layer();
    Hook h;
    h.name = "copy";
    h.reads_from = 0;
    h.reads_count = 1;
    h.fn = [](const std::vector<uint8_t>& rec) {
        HookResult r;
        r.x_mask = BitVector(2);
        if (!rec.empty() && rec[0]) r.x_mask.set(1, true);
        return r;
    };
    hl.hooks.push_back(h);

    Circuit big;
    big.num_qubits = 4;
    auto& pre = big.add_layer();
    big.add_gate(pre, GateKind::MeasZ, 3);  // shifts the record by one
    big.append(sub, {2, 0});
    REQUIRE(big.layers.size() == 3);
    REQUIRE(big.layers[2].hooks.size() == 1);
    CHECK(big.layers[2].hooks[0].reads_from == 1);
    // wrapped hook sees the local record and remaps masks
    std::vector<uint8_t> record = {1, 1};
    auto res = big.layers[2].hooks[0].fn(record);
    CHECK(res.x_mask.get(0));
    CHECK(res.x_mask.weight() == 1);

    // parallel merge keeps measurement ids contiguous per subcircuit
    Circuit par;
    par.num_qubits = 4;
    Circuit m1c;
    m1c.num_qubits = 1;
    auto& a1 = m1c.add_layer();
    m1c.add_gate(a1, GateKind::MeasZ, 0);
    par.merge_at(m1c, {0}, 0);
    par.merge_at(m1c, {1}, 0);
    REQUIRE(par.depth() == 1);
    CHECK(par.num_measurements == 2);
    CHECK(par.layers[0].gates[0].meas_id == 0);
    CHECK(par.layers[0].gates[1].meas_id == 1);
}

TEST_CASE("circuit dump") {
    BitMatrix h(1, 2);
    h.set(0, 0, true);
    h.set(0, 1, true);
    auto c = build_synd_ext(h, false);
    std::ostringstream os;
    dump_circuit(os, c);
    auto s = os.str();
    CHECK(s.find("R0 2") != std::string::npos);
    CHECK(s.find("CNOT") != std::string::npos);
    CHECK(s.find("MZ 2") != std::string::npos);
}
