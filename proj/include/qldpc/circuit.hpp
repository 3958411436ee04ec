#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/graph.hpp"

// Timestep-layered Clifford circuit IR with classical decode hooks, the
// Misra-Gries edge coloring, and the colored syndrome-extraction builder.

namespace qldpc {

enum class GateKind { X, Z, Y, H, CNOT, ResetZ, ResetX, MeasZ, MeasX };

// Y appears only in fault layers produced by corrupt(); the engines expand
// it to X then Z.
//
// Measurements carry a stable record id assigned at build time, so circuits
// merged in parallel keep every hook's read window contiguous no matter how
// layers interleave.
struct Gate {
    GateKind kind;
    int q0 = -1;
    int q1 = -1;      // CNOT target
    int meas_id = -1; // record slot for MeasZ/MeasX
};

struct HookResult {
    BitVector x_mask;  // conditional X support over the circuit's qubits
    BitVector z_mask;
    std::map<std::string, BitVector> outputs;  // named classical outputs
    bool herald_fail = false;
};

// A hook runs at the start of its timestep, reading the measurement record
// of its own circuit (offsets are fixed up on composition).
using HookFn = std::function<HookResult(const std::vector<uint8_t>&)>;

struct Hook {
    std::string name;
    int reads_from = 0;   // first record index the hook may read
    int reads_count = 0;  // how many records it may read
    HookFn fn;
};

struct Layer {
    std::vector<Hook> hooks;  // run in order, before the layer's gates
    std::vector<Gate> gates;
};

enum class Pauli : uint8_t { X = 1, Z = 2, Y = 3 };

// Pauli error assignment to (qubit, timestep) locations; timesteps are
// 1-indexed and the fault acts after that layer's gates.
struct Fault {
    std::map<std::pair<int, int>, Pauli> at;

    bool empty() const { return at.empty(); }
    int support_size() const { return int(at.size()); }
};

class Circuit {
public:
    int num_qubits = 0;
    std::vector<Layer> layers;
    int num_measurements = 0;
    std::vector<std::string> qubit_names;  // optional, sized or empty

    // Optional qubit recycling for deeply composed circuits: a released
    // register may be handed out again to an allocation whose first use is
    // at or after the release layer. Every consumer here either resets the
    // qubits or tolerates arbitrary initial content.
    bool use_pool = false;
    std::multimap<int, int> free_pool;  // free-from-layer -> qubit

    int depth() const { return int(layers.size()); }
    int qubit_count() const { return num_qubits; }

    Layer& add_layer() {
        layers.push_back({});
        return layers.back();
    }

    void add_gate(Layer& layer, GateKind kind, int q0, int q1 = -1) {
        check_qubit(q0);
        if (kind == GateKind::CNOT) {
            check_qubit(q1);
            if (q0 == q1) throw std::invalid_argument("CNOT with equal qubits");
        }
        int id = -1;
        if (kind == GateKind::MeasZ || kind == GateKind::MeasX) id = num_measurements++;
        layer.gates.push_back({kind, q0, q1, id});
    }

    // Disjoint-support audit over a layer's static gates.
    static bool layer_supports_disjoint(const Layer& layer) {
        std::set<int> used;
        for (const auto& g : layer.gates) {
            if (!used.insert(g.q0).second) return false;
            if (g.kind == GateKind::CNOT && !used.insert(g.q1).second) return false;
        }
        return true;
    }

    bool all_layers_disjoint() const {
        for (const auto& l : layers)
            if (!layer_supports_disjoint(l)) return false;
        return true;
    }

    // Merge a subcircuit starting at layer `start` (extending the layer list
    // as needed), mapping its qubit q to qmap[q]. Measurement ids shift by
    // this circuit's current count, so hook read windows stay contiguous
    // even when several subcircuits share layers. Returns one past the last
    // layer used.
    int merge_at(const Circuit& sub, const std::vector<int>& qmap, int start) {
        if (int(qmap.size()) != sub.num_qubits)
            throw std::invalid_argument("merge_at: qubit map size mismatch");
        for (int q : qmap) check_qubit(q);
        int record_base = num_measurements;
        while (depth() < start + sub.depth()) add_layer();
        for (int t = 0; t < sub.depth(); ++t) {
            const Layer& layer = sub.layers[t];
            Layer& out = layers[start + t];
            for (const auto& hook : layer.hooks) {
                Hook h;
                h.name = hook.name;
                h.reads_from = hook.reads_from + record_base;
                h.reads_count = hook.reads_count;
                HookFn inner = hook.fn;
                h.fn = [inner, record_base, qmap](const std::vector<uint8_t>& record) {
                    std::vector<uint8_t> local(record.begin() + record_base, record.end());
                    HookResult r = inner(local);
                    HookResult out_r;
                    // masks are remapped by support; engines embed them into
                    // the full qubit register
                    int max_q = 0;
                    for (int q : qmap) max_q = std::max(max_q, q + 1);
                    BitVector xm(max_q), zm(max_q);
                    if (r.x_mask.size())
                        for (int q : r.x_mask.support()) xm.set(qmap[q], true);
                    if (r.z_mask.size())
                        for (int q : r.z_mask.support()) zm.set(qmap[q], true);
                    out_r.x_mask = std::move(xm);
                    out_r.z_mask = std::move(zm);
                    out_r.outputs = std::move(r.outputs);
                    out_r.herald_fail = r.herald_fail;
                    return out_r;
                };
                out.hooks.push_back(std::move(h));
            }
            for (const auto& g : layer.gates) {
                Gate ng = g;
                ng.q0 = qmap[g.q0];
                if (g.kind == GateKind::CNOT) ng.q1 = qmap[g.q1];
                if (ng.meas_id >= 0) ng.meas_id += record_base;
                out.gates.push_back(ng);
            }
        }
        num_measurements += sub.num_measurements;
        return start + sub.depth();
    }

    // Append a subcircuit after the current last layer.
    int append(const Circuit& sub, const std::vector<int>& qmap) {
        return merge_at(sub, qmap, depth());
    }

    // Pad with idle layers up to the given depth.
    void pad_to_depth(int target) {
        while (depth() < target) add_layer();
    }

private:
    void check_qubit(int q) const {
        if (q < 0 || q >= num_qubits) throw std::invalid_argument("qubit index out of range");
    }
};

inline int depth(const Circuit& c) { return c.depth(); }
inline int qubit_count(const Circuit& c) { return c.qubit_count(); }

// Interleave explicit fault layers after each gate layer (Def. of corrupted
// circuits); the result has exactly twice the depth.
inline Circuit corrupt(const Circuit& circuit, const Fault& fault) {
    for (const auto& [loc, p] : fault.at) {
        (void)p;
        if (loc.first < 0 || loc.first >= circuit.num_qubits || loc.second < 1 ||
            loc.second > circuit.depth())
            throw std::invalid_argument("corrupt: fault location out of range");
    }
    Circuit out;
    out.num_qubits = circuit.num_qubits;
    out.qubit_names = circuit.qubit_names;
    out.num_measurements = circuit.num_measurements;
    for (int t = 0; t < circuit.depth(); ++t) {
        out.layers.push_back(circuit.layers[t]);
        Layer faults;
        for (const auto& [loc, p] : fault.at) {
            if (loc.second != t + 1) continue;
            GateKind k = p == Pauli::X ? GateKind::X
                                       : (p == Pauli::Z ? GateKind::Z : GateKind::Y);
            faults.gates.push_back({k, loc.first, -1});
        }
        out.layers.push_back(std::move(faults));
    }
    return out;
}

// --- Misra-Gries edge coloring ---

// Proper edge coloring with at most max_degree + 1 colors; deterministic
// for a fixed edge order.
class EdgeColorer {
public:
    EdgeColorer(int vertex_count, const std::vector<std::pair<int, int>>& edges)
        : n_(vertex_count), edges_(edges), color_(edges.size(), -1), adj_(vertex_count) {
        int maxdeg = 0;
        std::vector<int> deg(vertex_count, 0);
        for (size_t eid = 0; eid < edges.size(); ++eid) {
            auto [u, v] = edges[eid];
            adj_[u].push_back(int(eid));
            adj_[v].push_back(int(eid));
            maxdeg = std::max(maxdeg, std::max(++deg[u], ++deg[v]));
        }
        limit_ = maxdeg + 1;
        for (size_t eid = 0; eid < edges.size(); ++eid) color_edge(int(eid));
    }

    const std::vector<int>& colors() const { return color_; }
    int color_count() const {
        int c = 0;
        for (int x : color_) c = std::max(c, x + 1);
        return c;
    }

    bool proper() const {
        for (int v = 0; v < n_; ++v) {
            std::set<int> seen;
            for (int eid : adj_[v]) {
                if (color_[eid] < 0) return false;
                if (!seen.insert(color_[eid]).second) return false;
            }
        }
        return true;
    }

private:
    int other(int eid, int v) const {
        return edges_[eid].first == v ? edges_[eid].second : edges_[eid].first;
    }

    bool is_free(int v, int c) const {
        if (c < 0) return false;
        for (int eid : adj_[v])
            if (color_[eid] == c) return false;
        return true;
    }

    int find_free(int v) const {
        for (int c = 0; c < limit_; ++c)
            if (is_free(v, c)) return c;
        throw std::runtime_error("edge coloring: no free color within degree+1");
    }

    int edge_between(int u, int v) const {
        for (int eid : adj_[u])
            if (other(eid, u) == v) return eid;
        return -1;
    }

    void invert_cd_path(int v, int c, int d) {
        // walk the maximal path from v alternating d, c and swap colors
        int cur = v, want = d, prev_edge = -1;
        for (;;) {
            int next_edge = -1;
            for (int eid : adj_[cur])
                if (eid != prev_edge && color_[eid] == want) { next_edge = eid; break; }
            if (next_edge < 0) break;
            color_[next_edge] = want == d ? c : d;
            cur = other(next_edge, cur);
            prev_edge = next_edge;
            want = want == d ? c : d;
        }
    }

    void color_edge(int eid) {
        int u = edges_[eid].first, v = edges_[eid].second;
        // maximal fan of u starting at v
        std::vector<int> fan = {v};
        std::set<int> in_fan = {v};
        bool extended = true;
        while (extended) {
            extended = false;
            for (int e2 : adj_[u]) {
                int w = other(e2, u);
                if (color_[e2] < 0 || in_fan.count(w)) continue;
                if (is_free(fan.back(), color_[e2])) {
                    fan.push_back(w);
                    in_fan.insert(w);
                    extended = true;
                }
            }
        }
        int c = find_free(u);
        int d = find_free(fan.back());
        if (c != d) invert_cd_path(u, c, d);
        // after inversion, find w in the fan with d free, rotate prefix
        size_t wi = 0;
        while (wi < fan.size() && !is_free(fan[wi], d)) ++wi;
        if (wi == fan.size())
            throw std::runtime_error("edge coloring: fan rotation failed");
        for (size_t t = 0; t < wi; ++t) {
            int e_cur = edge_between(u, fan[t]);
            int e_next = edge_between(u, fan[t + 1]);
            color_[e_cur] = color_[e_next];
        }
        int e_w = edge_between(u, fan[wi]);
        color_[e_w] = d;
    }

    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> color_;
    std::vector<std::vector<int>> adj_;
    int limit_;
};

// Color the edges of a bipartite graph; returns one color id per edge in
// g.edges order, using at most max-degree + 1 colors.
inline std::vector<int> edge_color(const BipartiteGraph& g) {
    std::vector<std::pair<int, int>> edges;
    for (auto [l, r] : g.edges) edges.push_back({l, g.left_count + r});
    EdgeColorer ec(g.left_count + g.right_count, edges);
    if (!ec.proper()) throw std::runtime_error("edge_color: produced improper coloring");
    return ec.colors();
}

// --- syndrome extraction (colored CNOT schedule) ---

// Circuit on n data qubits (0..n-1) followed by m ancilla qubits. For Z
// checks the ancillas reset to |0> and CNOTs run data -> ancilla; for X
// checks the ancillas reset to |+> and CNOTs run ancilla -> data. Depth is
// (number of colors) + 2 <= w + 4. The m measurement outcomes appear in
// check order.
inline Circuit build_synd_ext(const BitMatrix& h, bool x_checks) {
    int m = h.rows(), n = h.cols();
    Circuit c;
    c.num_qubits = n + m;
    if (m == 0 || n == 0) return c;  // degenerate: nothing to measure

    std::vector<std::pair<int, int>> edges;  // (check, bit)
    for (int r = 0; r < m; ++r)
        for (int col = 0; col < n; ++col)
            if (h.get(r, col)) edges.push_back({r, col});
    if (edges.empty()) return c;

    BipartiteGraph tanner = graph_from_edges(m, n, edges);
    auto colors = edge_color(tanner);
    int ncolors = 0;
    for (int col : colors) ncolors = std::max(ncolors, col + 1);

    Layer& init = c.add_layer();
    for (int a = 0; a < m; ++a)
        c.add_gate(init, x_checks ? GateKind::ResetX : GateKind::ResetZ, n + a);

    for (int col = 0; col < ncolors; ++col) {
        Layer& layer = c.add_layer();
        for (size_t eid = 0; eid < tanner.edges.size(); ++eid) {
            if (colors[eid] != col) continue;
            auto [check, bit] = tanner.edges[eid];
            if (x_checks)
                c.add_gate(layer, GateKind::CNOT, n + check, bit);
            else
                c.add_gate(layer, GateKind::CNOT, bit, n + check);
        }
    }

    Layer& meas = c.add_layer();
    for (int a = 0; a < m; ++a)
        c.add_gate(meas, x_checks ? GateKind::MeasX : GateKind::MeasZ, n + a);
    return c;
}

// --- dump: one layer per line, golden-file stable ---

inline void dump_circuit(std::ostream& os, const Circuit& c) {
    os << "qubits " << c.num_qubits << '\n';
    for (const auto& layer : c.layers) {
        bool first = true;
        for (const auto& hook : layer.hooks) {
            if (!first) os << ' ';
            os << "HOOK " << hook.name;
            first = false;
        }
        for (const auto& g : layer.gates) {
            if (!first) os << ' ';
            first = false;
            switch (g.kind) {
                case GateKind::X: os << "X " << g.q0; break;
                case GateKind::Z: os << "Z " << g.q0; break;
                case GateKind::Y: os << "Y " << g.q0; break;
                case GateKind::H: os << "H " << g.q0; break;
                case GateKind::CNOT: os << "CNOT " << g.q0 << ' ' << g.q1; break;
                case GateKind::ResetZ: os << "R0 " << g.q0; break;
                case GateKind::ResetX: os << "R+ " << g.q0; break;
                case GateKind::MeasZ: os << "MZ " << g.q0; break;
                case GateKind::MeasX: os << "MX " << g.q0; break;
            }
        }
        os << '\n';
    }
}

}  // namespace qldpc
