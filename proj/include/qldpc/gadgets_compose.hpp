#pragma once

#include "qldpc/gadgets.hpp"

// Composed gadgets: upward code switching via teleportation, factor-type
// switching, the parallel Hadamard, slab permutations, cyclic shifts,
// targeted swap/CNOT/Hadamard, and bulk 2-dimensional state preparation.

namespace qldpc {

// Extendable-family L for a factor graph, cached per graph.
inline std::vector<int> family_L(GadgetFactory& f, const BipartiteGraph& g) {
    static std::map<std::string, std::vector<int>> cache;
    std::ostringstream key;
    key << g.left_count << 'x' << g.right_count << ':';
    for (auto [l, r] : g.edges) key << l << ',' << r << ';';
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
    auto [L, rep] = build_extendable_family(g);
    if (!rep.extendable_ok || !rep.scan_ok)
        throw std::runtime_error("family_L: extendable family construction failed");
    cache[key.str()] = L;
    (void)f;
    return L;
}

// Upward code switching in direction h (teleportation form): consumes |L|
// blocks of the (r-1)-dimensional code and produces one block of pc_target.
// The |+>-leg (or |0>-leg in the mirrored variant) is prepared on an
// auxiliary product with factor h in the opposite orientation and switched
// down, exactly as the bell-pair recipe prescribes.
struct SwitchUpResult {
    int end_layer = 0;
    BlockRef output;
    int depth = 0;
};

inline SwitchUpResult emit_switch_up(Circuit& c, GadgetFactory& f, const PCRef& pc_target,
                                     int h, const std::vector<int>& L,
                                     const std::vector<BlockRef>& inputs, int start) {
    int r = pc_target->r();
    int i = pc_target->level;
    bool mir = !pc_target->cochain[h];  // mirrored for a chain-type factor
    if (!mir && (i < 2 || i > r - 1))
        throw std::invalid_argument("switch_up: level out of range (standard)");
    if (mir && (i < 1 || i > r - 2))
        throw std::invalid_argument("switch_up: level out of range (mirrored)");

    auto ctx = f.switch_context(pc_target, h, L);
    if (inputs.size() != L.size())
        throw std::invalid_argument("switch_up: expected one input block per member of L");
    for (const auto& b : inputs)
        if (b.pc != ctx->a_pc)
            throw std::invalid_argument("switch_up: input block code mismatch");

    // wire 3: fresh target register prepared in |0^k> (|+^k> mirrored)
    auto w3_q = alloc_block(c, pc_target->code.n, start);
    int end3 = emit_state_prep(c, f, pc_target, /*plus=*/mir, w3_q, start);

    // wire 2: auxiliary product with factor h flipped, prepared and switched
    // down to |L| blocks of |+^kA> (|0^kA> mirrored)
    std::vector<bool> aux_orient = pc_target->cochain;
    aux_orient[h] = !aux_orient[h];
    int aux_level = mir ? i + 1 : i - 1;
    PCRef aux = f.product(pc_target->graphs, aux_orient, aux_level);
    auto w2_q = alloc_block(c, aux->code.n, start);
    int end2 = emit_state_prep(c, f, aux, /*plus=*/!mir, w2_q, start);

    int t = std::max(end3, end2);
    c.pad_to_depth(t);

    std::vector<BlockRef> wire2_blocks;
    t = emit_switch_down(c, f, aux, h, L, w2_q, t, &wire2_blocks);

    // bell-pair CNOTs between wire 2 blocks and the shared labels of wire 3
    c.pad_to_depth(t + 1);
    {
        Layer& bell = c.layers[t];
        for (size_t b = 0; b < wire2_blocks.size(); ++b)
            for (int q = 0; q < ctx->a_pc->code.n; ++q) {
                int shared = w3_q[ctx->block_cells[b][q]];
                int blk = wire2_blocks[b].qubits[q];
                if (!mir)
                    c.add_gate(bell, GateKind::CNOT, blk, shared);
                else
                    c.add_gate(bell, GateKind::CNOT, shared, blk);
            }
    }
    ++t;

    // entangling CNOTs between the inputs (wire 1) and wire 2
    c.pad_to_depth(t + 1);
    {
        Layer& ent = c.layers[t];
        for (size_t b = 0; b < inputs.size(); ++b)
            for (int q = 0; q < ctx->a_pc->code.n; ++q) {
                if (!mir)
                    c.add_gate(ent, GateKind::CNOT, inputs[b].qubits[q],
                               wire2_blocks[b].qubits[q]);
                else
                    c.add_gate(ent, GateKind::CNOT, wire2_blocks[b].qubits[q],
                               inputs[b].qubits[q]);
            }
    }
    ++t;

    // transversal logical measurements: wire 1 in X (Z mirrored), wire 2 in
    // Z (X mirrored), all blocks in one layer
    int record_base = c.num_measurements;
    int nA = ctx->a_pc->code.n;
    c.pad_to_depth(t + 1);
    {
        Layer& meas = c.layers[t];
        for (const auto& blk : inputs)
            for (int q = 0; q < nA; ++q)
                c.add_gate(meas, mir ? GateKind::MeasZ : GateKind::MeasX, blk.qubits[q]);
        for (const auto& blk : wire2_blocks)
            for (int q = 0; q < nA; ++q)
                c.add_gate(meas, mir ? GateKind::MeasX : GateKind::MeasZ, blk.qubits[q]);
    }
    ++t;

    // decode and apply the teleportation corrections on wire 3
    auto a_pc = ctx->a_pc;
    int rA = a_pc->r(), iA = a_pc->level;
    auto decZ = f.flip_decoder(&a_pc->complex, iA, f.key_of(a_pc));
    auto dualA = f.dual_complex(a_pc);
    auto decX = f.flip_decoder(dualA.get(), rA - iA, "dual:" + f.key_of(a_pc));
    auto ldecZ = std::make_shared<LogicalDecoder>(a_pc->code, a_pc->enc);
    auto dual_code = std::make_shared<CssCode>(css_from_level(*dualA, rA - iA));
    auto ldecX = std::make_shared<LogicalDecoder>(*dual_code, a_pc->enc_dual);

    // full-code logical index per (block, A-logical)
    std::vector<std::vector<int>> full_index(L.size());
    for (size_t b = 0; b < L.size(); ++b) {
        for (int j = 0; j < a_pc->code.k; ++j) {
            CellLabel full = a_pc->enc.logical_labels[j];
            full.insert(full.begin() + h, Cell{1, L[b]});
            int fi = pc_target->enc.label_index(full);
            if (fi < 0) throw std::runtime_error("switch_up: shared label missing");
            full_index[b].push_back(fi);
        }
    }

    c.pad_to_depth(t + 1);
    {
        Layer& corr = c.layers[t];
        Hook hook;
        hook.name = "switch_up_teleport_corrections";
        hook.reads_from = record_base;
        hook.reads_count = int(2 * L.size()) * nA;
        int nq_now = c.num_qubits;
        int blocks = int(L.size());
        auto pc_keep = pc_target;
        bool mirk = mir;
        auto fi_keep = full_index;
        std::vector<int> w3q = w3_q;
        auto aZ = decZ;
        auto aX = decX;
        auto lZ = ldecZ;
        auto lX = ldecX;
        auto keep_dual_code = dual_code;
        hook.fn = [record_base, nq_now, blocks, nA, pc_keep, mirk, fi_keep, w3q, aZ, aX, lZ,
                   lX, keep_dual_code](const std::vector<uint8_t>& record) {
            HookResult res;
            BitVector corr_x(pc_keep->code.k), corr_z(pc_keep->code.k);
            for (int b = 0; b < blocks; ++b) {
                // wire 1 block b
                BitVector z1(nA);
                for (int q = 0; q < nA; ++q)
                    if (record[record_base + b * nA + q]) z1.set(q, true);
                // wire 2 block b
                BitVector z2(nA);
                for (int q = 0; q < nA; ++q)
                    if (record[record_base + (blocks + b) * nA + q]) z2.set(q, true);

                auto decode_with = [&](const BitVector& z, bool x_type)
                    -> std::optional<BitVector> {
                    const auto& dec = x_type ? aX : aZ;
                    const auto& ldec = x_type ? lX : lZ;
                    const CochainComplex& dc = dec->complex();
                    auto run = dec->ss_flip_syn(dc.delta[dec->level()].mul(z));
                    return ldec->decode(z ^ run.correction);
                };
                // standard: wire1 measured X, wire2 measured Z
                auto m1 = decode_with(z1, !mirk);
                auto m2 = decode_with(z2, mirk);
                if (!m1 || !m2) {
                    res.herald_fail = true;
                    return res;
                }
                for (int j = 0; j < int(m1->size()); ++j) {
                    // X^{m2} Z^{m1} on the target (mirrored: Z^{m2} X^{m1})
                    if (m2->get(j)) (mirk ? corr_z : corr_x).flip(fi_keep[b][j]);
                    if (m1->get(j)) (mirk ? corr_x : corr_z).flip(fi_keep[b][j]);
                }
            }
            BitVector xphys = pc_keep->enc.encode(corr_x);
            BitVector zphys = pc_keep->enc_dual.encode(corr_z);
            res.x_mask = BitVector(nq_now);
            res.z_mask = BitVector(nq_now);
            for (int q : xphys.support()) res.x_mask.set(w3q[q], true);
            for (int q : zphys.support()) res.z_mask.set(w3q[q], true);
            return res;
        };
        corr.hooks.push_back(std::move(hook));
    }
    ++t;

    // wires 1 and 2 are fully measured out
    for (const auto& blk : inputs) release_block(c, blk.qubits, t);
    for (const auto& blk : wire2_blocks) release_block(c, blk.qubits, t);

    SwitchUpResult out;
    out.end_layer = t;
    out.output = BlockRef{pc_target, w3_q, "switched_up"};
    out.depth = t - start;
    return out;
}

// Switch factor h of a block to the given orientation: a switch_down
// immediately feeds a switch_up with the new factor type. Level moves by
// +1 (to cochain) or -1 (to chain) accordingly.
struct SwitchFactorResult {
    int end_layer = 0;
    BlockRef output;
};

inline SwitchFactorResult emit_switch_factor(Circuit& c, GadgetFactory& f,
                                             const BlockRef& block, int h,
                                             bool new_cochain, int start) {
    const PCRef& pc = block.pc;
    auto L = family_L(f, pc->graphs[h]);
    std::vector<BlockRef> blocks;
    int t = emit_switch_down(c, f, pc, h, L, block.qubits, start, &blocks);
    std::vector<bool> orient = pc->cochain;
    orient[h] = new_cochain;
    int a_level = blocks[0].pc->level;
    int new_level = a_level + (new_cochain ? 1 : 0);
    PCRef target = f.product(pc->graphs, orient, new_level);
    auto up = emit_switch_up(c, f, target, h, L, blocks, t);
    return {up.end_layer, up.output};
}

// Parallel logical Hadamard with identical input and output codes:
// transversal H into the dual view, then restore each factor's orientation
// one direction at a time, then error-correct.
inline GadgetSpec hadamard_same(GadgetFactory& f, const PCRef& pc) {
    GadgetSpec g;
    g.name = "hadamard_same";
    g.circuit.num_qubits = pc->code.n;
    g.circuit.use_pool = true;
    auto data = iota_map(pc->code.n);
    g.inputs.push_back({pc, data, "in"});
    g.components = {"transversal_h"};

    // depth-1 transversal H; the block becomes the dual view
    auto& hl = g.circuit.add_layer();
    for (int q = 0; q < pc->code.n; ++q) g.circuit.add_gate(hl, GateKind::H, q);
    PCRef cur_pc = f.dual_view(pc);
    std::vector<int> cur_q(pc->code.n);
    for (int ci = 0; ci < pc->code.n; ++ci) {
        int pi = pc->complex.cell_index(pc->level,
                                        cur_pc->complex.cells[cur_pc->level][ci]);
        cur_q[ci] = data[pi];
    }
    BlockRef cur{cur_pc, cur_q, "working"};
    int t = 1;

    // greedily restore factor orientations within valid level ranges
    int r = pc->r();
    std::vector<bool> restored(r, false);
    int remaining = r;
    while (remaining > 0) {
        int chosen = -1;
        for (int h = 0; h < r && chosen < 0; ++h) {
            if (restored[h]) continue;
            bool cur_type = cur.pc->cochain[h];
            int i = cur.pc->level;
            // down validity for the current type, then up validity for the
            // restored type
            bool down_ok = cur_type ? (i >= 2 && i <= r - 1) : (i >= 1 && i <= r - 2);
            int a_level = cur_type ? i - 1 : i;
            bool up_cochain = pc->cochain[h];
            int out_level = a_level + (up_cochain ? 1 : 0);
            bool up_ok = up_cochain ? (out_level >= 2 && out_level <= r - 1)
                                    : (out_level >= 1 && out_level <= r - 2);
            if (down_ok && up_ok) chosen = h;
        }
        if (chosen < 0)
            throw std::runtime_error("hadamard_same: no valid restore order (detour needed)");
        auto res = emit_switch_factor(g.circuit, f, cur, chosen, pc->cochain[chosen], t);
        cur = res.output;
        t = res.end_layer;
        restored[chosen] = true;
        --remaining;
        g.components.push_back("switch_factor_dir" + std::to_string(chosen));
    }
    if (cur.pc != pc)
        throw std::logic_error("hadamard_same: did not return to the input code");

    t = emit_err_corr(g.circuit, f, pc, cur.qubits, t);
    g.components.push_back("err_corr");

    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "H on every mask logical, same code";
    g.outputs.push_back({pc, cur.qubits, "out"});
    g.check();
    return g;
}

// Permutation of (copy, slab) pairs in direction h across kappa codeblocks:
// switch down, two rounds of physical block swaps (6 CNOT layers), switch
// up, error-correct. pi maps pair index (copy * |L| + slab position) to pair
// index. Detours through an auxiliary factor at boundary levels.
struct PermuteResult {
    int end_layer = 0;
    std::vector<BlockRef> outputs;
};

inline PermuteResult emit_permute_slabs(Circuit& c, GadgetFactory& f,
                                        std::vector<BlockRef> blocks, int h,
                                        const std::vector<int>& pi, int start) {
    int kappa = int(blocks.size());
    if (kappa == 0) throw std::invalid_argument("permute_slabs: no blocks");
    PCRef pc = blocks[0].pc;
    for (const auto& b : blocks)
        if (b.pc != pc) throw std::invalid_argument("permute_slabs: mixed block codes");
    auto L = family_L(f, pc->graphs[h]);
    int npairs = kappa * int(L.size());
    if (int(pi.size()) != npairs)
        throw std::invalid_argument("permute_slabs: permutation size mismatch");
    {
        std::vector<char> seen(npairs, 0);
        for (int v : pi) {
            if (v < 0 || v >= npairs || seen[v])
                throw std::invalid_argument("permute_slabs: not a permutation");
            seen[v] = 1;
        }
    }

    int t = start;
    int r = pc->r();

    // boundary detour: the main direction h must be switchable at the
    // current level; otherwise temporarily flip the lowest other factor
    int detour_h = -1;
    bool detour_new_type = false;
    {
        bool ok = pc->cochain[h] ? (pc->level >= 2 && pc->level <= r - 1)
                                 : (pc->level >= 1 && pc->level <= r - 2);
        if (!ok) {
            for (int hp = 0; hp < r && detour_h < 0; ++hp) {
                if (hp == h) continue;
                // flipping hp moves the level by +-1 toward validity
                bool hp_type = pc->cochain[hp];
                int i = pc->level;
                bool down_ok = hp_type ? (i >= 2 && i <= r - 1) : (i >= 1 && i <= r - 2);
                if (!down_ok) continue;
                int new_level = (hp_type ? i - 1 : i) + (!hp_type ? 1 : 0);
                bool main_ok_after = pc->cochain[h]
                                         ? (new_level >= 2 && new_level <= r - 1)
                                         : (new_level >= 1 && new_level <= r - 2);
                bool up_ok = !hp_type ? (new_level >= 2 && new_level <= r - 1)
                                      : (new_level >= 1 && new_level <= r - 2);
                if (main_ok_after && up_ok) {
                    detour_h = hp;
                    detour_new_type = !hp_type;
                }
            }
            if (detour_h < 0)
                throw std::runtime_error("permute_slabs: no valid detour direction");
            for (auto& b : blocks) {
                auto res = emit_switch_factor(c, f, b, detour_h, detour_new_type, t);
                b = res.output;
                t = std::max(t, res.end_layer);
            }
            pc = blocks[0].pc;
        }
    }

    // switch down every copy in parallel
    std::vector<std::vector<BlockRef>> sub(kappa);
    int down_end = t;
    for (int cidx = 0; cidx < kappa; ++cidx)
        down_end = std::max(down_end,
                            emit_switch_down(c, f, pc, h, L, blocks[cidx].qubits, t,
                                             &sub[cidx]));
    t = down_end;

    // flat list of (copy, slab) data blocks plus matching ancilla registers
    std::vector<std::vector<int>> data_q(npairs), anc_q(npairs);
    int n_a = sub[0][0].pc->code.n;
    for (int cidx = 0; cidx < kappa; ++cidx)
        for (size_t s = 0; s < L.size(); ++s)
            data_q[cidx * int(L.size()) + int(s)] = sub[cidx][s].qubits;
    for (int p = 0; p < npairs; ++p) anc_q[p] = alloc_block(c, n_a, t);

    // swap(a, b) = CNOT a->b, CNOT b->a, CNOT a->b
    auto emit_swap_layers = [&](const std::vector<std::pair<int, int>>& pairs, int at) {
        for (int step = 0; step < 3; ++step) {
            c.pad_to_depth(at + step + 1);
            Layer& layer = c.layers[at + step];
            for (auto [pa, pb] : pairs)
                for (int q = 0; q < n_a; ++q) {
                    int a = data_q[pa][q], b = anc_q[pb][q];
                    if (step == 1)
                        c.add_gate(layer, GateKind::CNOT, b, a);
                    else
                        c.add_gate(layer, GateKind::CNOT, a, b);
                }
        }
        return at + 3;
    };

    // round 1: data(p) <-> anc(p); round 2: anc(p) <-> data(pi(p))
    std::vector<std::pair<int, int>> round1, round2;
    for (int p = 0; p < npairs; ++p) round1.push_back({p, p});
    t = emit_swap_layers(round1, t);
    for (int p = 0; p < npairs; ++p) round2.push_back({pi[p], p});
    t = emit_swap_layers(round2, t);
    for (int p = 0; p < npairs; ++p) release_block(c, anc_q[p], t);

    // switch back up per copy, in parallel
    PermuteResult out;
    int up_end = t;
    for (int cidx = 0; cidx < kappa; ++cidx) {
        std::vector<BlockRef> wire1;
        for (size_t s = 0; s < L.size(); ++s) {
            BlockRef b = sub[cidx][s];
            b.qubits = data_q[cidx * int(L.size()) + int(s)];
            wire1.push_back(b);
        }
        auto up = emit_switch_up(c, f, pc, h, L, wire1, t);
        out.outputs.push_back(up.output);
        up_end = std::max(up_end, up.end_layer);
    }
    t = up_end;

    // error correction per copy, in parallel
    int ec_end = t;
    for (int cidx = 0; cidx < kappa; ++cidx)
        ec_end = std::max(ec_end, emit_err_corr(c, f, pc, out.outputs[cidx].qubits, t));
    t = ec_end;

    // detour back
    if (detour_h >= 0) {
        for (auto& b : out.outputs) {
            auto res = emit_switch_factor(c, f, b, detour_h, !detour_new_type, t);
            b = res.output;
            t = std::max(t, res.end_layer);
        }
    }

    out.end_layer = t;
    return out;
}

inline GadgetSpec permute_slabs(GadgetFactory& f, const PCRef& pc, int h,
                                const std::vector<int>& pi, int kappa) {
    GadgetSpec g;
    g.name = "permute_slabs_dir" + std::to_string(h);
    g.circuit.num_qubits = kappa * pc->code.n;
    g.circuit.use_pool = true;
    std::vector<BlockRef> blocks;
    for (int cidx = 0; cidx < kappa; ++cidx)
        blocks.push_back({pc, iota_map(pc->code.n, cidx * pc->code.n),
                          "copy_" + std::to_string(cidx)});
    g.inputs = blocks;
    auto res = emit_permute_slabs(g.circuit, f, blocks, h, pi, 0);
    g.outputs = res.outputs;
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "slab permutation in direction " + std::to_string(h);
    g.components = {"switch_down", "block_swaps", "switch_up", "err_corr"};
    g.check();
    return g;
}

// Cyclic shift: the CRT composition of r slab rotations. ells[h] <= |L|,
// shift s[h] applied to the first ells[h] slab positions in direction h.
inline GadgetSpec cyclic_shift(GadgetFactory& f, const PCRef& pc,
                               const std::vector<int>& ells, const std::vector<int>& ss) {
    int r = pc->r();
    if (int(ells.size()) != r || int(ss.size()) != r)
        throw std::invalid_argument("cyclic_shift: need one (ell, s) per direction");
    GadgetSpec g;
    g.name = "cyclic_shift";
    g.circuit.num_qubits = pc->code.n;
    g.circuit.use_pool = true;
    BlockRef cur{pc, iota_map(pc->code.n), "in"};
    g.inputs.push_back(cur);
    int t = 0;
    for (int h = 0; h < r; ++h) {
        auto L = family_L(f, pc->graphs[h]);
        if (ells[h] > int(L.size()))
            throw std::invalid_argument("cyclic_shift: ell exceeds |L|");
        std::vector<int> pi(L.size());
        for (size_t p = 0; p < L.size(); ++p) {
            if (int(p) < ells[h])
                pi[p] = (int(p) + ss[h]) % ells[h];
            else
                pi[p] = int(p);
        }
        auto res = emit_permute_slabs(g.circuit, f, {cur}, h, pi, t);
        cur = res.outputs[0];
        t = res.end_layer;
        g.components.push_back("permute_slabs_dir" + std::to_string(h));
    }
    g.outputs.push_back(cur);
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "cyclic shift on [ell_1]x...x[ell_r]";
    g.check();
    return g;
}

// Slab-transposition subroutine of the targeted gadgets: swap (copy, slab)
// pairs between two same-code blocks in direction h.
inline int emit_pair_slab_swap(Circuit& c, GadgetFactory& f, BlockRef& blk_a,
                               BlockRef& blk_b, int h, int slab_a, int slab_b, int start) {
    auto L = family_L(f, blk_a.pc->graphs[h]);
    int nl = int(L.size());
    std::vector<int> pi(2 * nl);
    for (int p = 0; p < 2 * nl; ++p) pi[p] = p;
    std::swap(pi[slab_a], pi[nl + slab_b]);
    auto res = emit_permute_slabs(c, f, {blk_a, blk_b}, h, pi, start);
    blk_a = res.outputs[0];
    blk_b = res.outputs[1];
    return res.end_layer;
}

// Extraction subroutine (Prop-9.4 pattern): moves the logical qubit at mask
// tuple b (slab positions per direction) of `block` into position b_tilde of
// the last of r fresh ancilla codeblocks. Returns the ancilla blocks; running
// it again with the same blocks undoes it.
struct ExtractionResult {
    int end_layer = 0;
    std::vector<BlockRef> chain;  // block 0 = input, then the r ancillas
};

inline ExtractionResult emit_extract(Circuit& c, GadgetFactory& f, const BlockRef& block,
                                     const std::vector<int>& b_pos,
                                     const std::vector<int>& bt_pos,
                                     std::vector<BlockRef> chain_in, int start,
                                     bool reverse) {
    int r = block.pc->r();
    ExtractionResult res;
    res.chain = std::move(chain_in);
    if (res.chain.empty()) {
        // fresh ancilla codeblocks via the state-preparation gadget
        res.chain.push_back(block);
        bool plus_ok = block.pc->level <= r - 2;
        int t0 = start;
        for (int a = 0; a < r; ++a) {
            auto q = alloc_block(c, block.pc->code.n, start);
            t0 = std::max(t0, emit_state_prep(c, f, block.pc, plus_ok, q, start));
            res.chain.push_back({block.pc, q, "anc_" + std::to_string(a)});
        }
        start = t0;
    } else {
        res.chain.insert(res.chain.begin(), block);
    }

    int t = start;
    if (!reverse) {
        for (int h = 0; h < r; ++h)
            t = emit_pair_slab_swap(c, f, res.chain[h], res.chain[h + 1], h, b_pos[h],
                                    bt_pos[h], t);
        for (int h = r - 2; h >= 0; --h)
            t = emit_pair_slab_swap(c, f, res.chain[h], res.chain[h + 1], h, b_pos[h],
                                    bt_pos[h], t);
    } else {
        for (int h = 0; h <= r - 2; ++h)
            t = emit_pair_slab_swap(c, f, res.chain[h], res.chain[h + 1], h, b_pos[h],
                                    bt_pos[h], t);
        for (int h = r - 1; h >= 0; --h)
            t = emit_pair_slab_swap(c, f, res.chain[h], res.chain[h + 1], h, b_pos[h],
                                    bt_pos[h], t);
    }
    res.end_layer = t;
    return res;
}

// Full physical swap of two identical codeblocks (3 CNOT layers).
inline int emit_block_swap(Circuit& c, const BlockRef& a, const BlockRef& b, int start) {
    int n = a.pc->code.n;
    for (int step = 0; step < 3; ++step) {
        c.pad_to_depth(start + step + 1);
        Layer& layer = c.layers[start + step];
        for (int q = 0; q < n; ++q) {
            if (step == 1)
                c.add_gate(layer, GateKind::CNOT, b.qubits[q], a.qubits[q]);
            else
                c.add_gate(layer, GateKind::CNOT, a.qubits[q], b.qubits[q]);
        }
    }
    return start + 3;
}

// Targeted swap of mask qubits b (in block 0) and b' (in block 1), identity
// on the rest of the mask.
inline GadgetSpec targeted_swap(GadgetFactory& f, const PCRef& pc,
                                const std::vector<int>& b_pos,
                                const std::vector<int>& bp_pos) {
    GadgetSpec g;
    g.name = "targeted_swap";
    int n = pc->code.n;
    g.circuit.num_qubits = 2 * n;
    g.circuit.use_pool = true;
    BlockRef in0{pc, iota_map(n), "block0"};
    BlockRef in1{pc, iota_map(n, n), "block1"};
    g.inputs = {in0, in1};
    g.logical_channel = "swap mask qubits b (block0) and b' (block1)";

    int r = pc->r();
    std::vector<int> bt(r, 0);  // extraction target position: slab 0 everywhere

    auto ex0 = emit_extract(g.circuit, f, in0, b_pos, bt, {}, 0, false);
    int t = ex0.end_layer;
    auto ex1 = emit_extract(g.circuit, f, in1, bp_pos, bt, {}, t, false);
    t = ex1.end_layer;

    t = emit_block_swap(g.circuit, ex0.chain[r], ex1.chain[r], t);

    auto back1 = emit_extract(g.circuit, f, ex1.chain[0], bp_pos, bt,
                              {ex1.chain.begin() + 1, ex1.chain.end()}, t, true);
    t = back1.end_layer;
    auto back0 = emit_extract(g.circuit, f, ex0.chain[0], b_pos, bt,
                              {ex0.chain.begin() + 1, ex0.chain.end()}, t, true);
    t = back0.end_layer;

    int e0 = emit_err_corr(g.circuit, f, pc, back0.chain[0].qubits, t);
    int e1 = emit_err_corr(g.circuit, f, pc, back1.chain[0].qubits, t);
    t = std::max(e0, e1);

    g.outputs = {back0.chain[0], back1.chain[0]};
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.components = {"state_prep", "permute_slabs", "block_swap", "err_corr"};
    g.check();
    return g;
}

// Transversal CNOT layer between two aligned blocks of the same code.
inline void c_emit_cnot(Circuit& c, const BlockRef& control, const BlockRef& target,
                        int at) {
    c.pad_to_depth(at + 1);
    Layer& layer = c.layers[at];
    for (int q = 0; q < control.pc->code.n; ++q)
        c.add_gate(layer, GateKind::CNOT, control.qubits[q], target.qubits[q]);
}

// Targeted CNOT between mask qubits b and b' (inter-block: control in block
// 0, target in block 1; intra-block: both within block 0).
inline GadgetSpec targeted_cnot(GadgetFactory& f, const PCRef& pc,
                                const std::vector<int>& b_pos,
                                const std::vector<int>& bp_pos, bool intra) {
    GadgetSpec g;
    g.name = intra ? "targeted_cnot_intra" : "targeted_cnot_inter";
    int n = pc->code.n;
    int r = pc->r();
    g.circuit.num_qubits = intra ? n : 2 * n;
    g.circuit.use_pool = true;
    BlockRef in0{pc, iota_map(n), "block0"};
    BlockRef in1 = intra ? in0 : BlockRef{pc, iota_map(n, n), "block1"};
    g.inputs = {in0};
    if (!intra) g.inputs.push_back(in1);

    std::vector<int> bt(r, 0);
    auto ex0 = emit_extract(g.circuit, f, in0, b_pos, bt, {}, 0, false);
    int t = ex0.end_layer;
    auto ex1 = emit_extract(g.circuit, f, intra ? ex0.chain[0] : in1, bp_pos, bt, {}, t,
                            false);
    t = ex1.end_layer;

    // transversal CNOT: control = the block holding b, target = b'
    c_emit_cnot(g.circuit, ex0.chain[r], ex1.chain[r], t);
    ++t;

    auto back1 = emit_extract(g.circuit, f, ex1.chain[0], bp_pos, bt,
                              {ex1.chain.begin() + 1, ex1.chain.end()}, t, true);
    t = back1.end_layer;
    auto back0 = emit_extract(g.circuit, f, intra ? back1.chain[0] : ex0.chain[0], b_pos,
                              bt, {ex0.chain.begin() + 1, ex0.chain.end()}, t, true);
    t = back0.end_layer;

    int e0 = emit_err_corr(g.circuit, f, pc, back0.chain[0].qubits, t);
    int e1 = e0;
    if (!intra) e1 = emit_err_corr(g.circuit, f, pc, back1.chain[0].qubits, t);
    t = std::max(e0, e1);

    g.outputs = {back0.chain[0]};
    if (!intra) g.outputs.push_back(back1.chain[0]);
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "CNOT on mask qubits b, b'";
    g.components = {"state_prep", "permute_slabs", "transversal_cnot_same", "err_corr"};
    g.check();
    return g;
}

// Targeted Hadamard on mask qubit b.
inline GadgetSpec targeted_h(GadgetFactory& f, const PCRef& pc,
                             const std::vector<int>& b_pos) {
    GadgetSpec g;
    g.name = "targeted_h";
    int n = pc->code.n;
    int r = pc->r();
    g.circuit.num_qubits = n;
    g.circuit.use_pool = true;
    BlockRef in0{pc, iota_map(n), "block0"};
    g.inputs = {in0};

    std::vector<int> bt(r, 0);
    auto ex = emit_extract(g.circuit, f, in0, b_pos, bt, {}, 0, false);
    int t = ex.end_layer;

    // parallel Hadamard on the extraction block's mask (includes b_tilde)
    auto had = hadamard_same(f, pc);
    std::vector<int> qmap = ex.chain[r].qubits;
    int extra = had.circuit.num_qubits - n;
    int extra_base = alloc_qubits(g.circuit, extra);
    for (int q = 0; q < extra; ++q) qmap.push_back(extra_base + q);
    g.circuit.merge_at(had.circuit, qmap, t);
    t += had.circuit.depth();
    BlockRef had_out = ex.chain[r];
    had_out.qubits.clear();
    for (int q : had.outputs[0].qubits) had_out.qubits.push_back(qmap[q]);
    ex.chain[r] = had_out;

    auto back = emit_extract(g.circuit, f, ex.chain[0], b_pos, bt,
                             {ex.chain.begin() + 1, ex.chain.end()}, t, true);
    t = back.end_layer;
    t = emit_err_corr(g.circuit, f, pc, back.chain[0].qubits, t);

    g.outputs = {back.chain[0]};
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "H on mask qubit b";
    g.components = {"state_prep", "permute_slabs", "hadamard_same", "err_corr"};
    g.check();
    return g;
}

// Bulk 2-dimensional state preparation: prepare the 3-dimensional code and
// switch one direction down, leaving |L| two-dimensional blocks.
inline GadgetSpec bulk_2d_prep(GadgetFactory& f, const PCRef& pc3, int h) {
    if (pc3->r() != 3) throw std::invalid_argument("bulk_2d_prep: needs r = 3");
    GadgetSpec g;
    g.name = "bulk_2d_prep";
    g.circuit.num_qubits = pc3->code.n;
    auto data = iota_map(pc3->code.n);
    bool plus = pc3->level == 1;
    int t = emit_state_prep(g.circuit, f, pc3, plus, data, 0);
    auto L = family_L(f, pc3->graphs[h]);
    std::vector<BlockRef> blocks;
    t = emit_switch_down(g.circuit, f, pc3, h, L, data, t, &blocks);
    g.outputs = blocks;
    g.declared_depth = g.circuit.depth();
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = plus ? "stack of 2-dim blocks in |+^k'>" : "stack in |0^k'>";
    g.components = {"state_prep", "switch_down"};
    g.check();
    return g;
}

}  // namespace qldpc
