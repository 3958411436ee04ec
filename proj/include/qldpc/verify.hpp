#pragma once

#include <ostream>

#include "qldpc/gadgets_compose.hpp"

// Noiseless gadget channel checks, shared by the acceptance suite and the
// command-line verifier. Every check runs the exact engine on spanning
// logical inputs and compares signed stabilizer content.

namespace qldpc {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify_detail {

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

// Run a pre-built gadget on prepared block inputs and report the output
// qubit maps in the combined circuit.
struct GadgetRun {
    RunResult run;
    std::vector<std::vector<int>> out_qubits;
};

inline GadgetRun run_gadget_on(const GadgetSpec& g, const std::vector<PCRef>& in_pcs,
                               const std::vector<BitVector>& in_x, bool z_basis,
                               uint64_t seed) {
    Circuit c;
    c.use_pool = false;
    int total_in = 0;
    for (const auto& pc : in_pcs) total_in += pc->code.n;
    c.num_qubits = total_in;
    int t = 0, base = 0;
    for (size_t b = 0; b < in_pcs.size(); ++b) {
        auto data = iota_map(in_pcs[b]->code.n, base);
        t = std::max(t, emit_basis_state(c, in_pcs[b], data, in_x[b], z_basis, 0));
        base += in_pcs[b]->code.n;
    }
    std::vector<int> qmap = iota_map(total_in);
    for (int q = total_in; q < g.circuit.num_qubits; ++q) qmap.push_back(alloc_qubits(c, 1));
    c.merge_at(g.circuit, qmap, t);
    GadgetRun out;
    out.run = exact_run(c, {}, seed);
    for (const auto& blk : g.outputs) {
        std::vector<int> oq;
        for (int q : blk.qubits) oq.push_back(qmap[q]);
        out.out_qubits.push_back(oq);
    }
    return out;
}

}  // namespace verify_detail

struct GadgetCheckOptions {
    int pendant_pairs = 2;      // mask width of the main r=3 instance
    int basis_sweep = 12;       // random basis states per channel
    bool include_crt_order30 = true;
    uint64_t seed = 20260808;
    std::ostream* log = nullptr;
};

// The full noiseless channel suite. Returns one entry per check.
std::vector<CheckResult> run_gadget_channel_checks(GadgetFactory& f,
                                                   const GadgetCheckOptions& opt);

inline std::vector<CheckResult> run_gadget_channel_checks(GadgetFactory& f,
                                                          const GadgetCheckOptions& opt) {
    using namespace verify_detail;
    std::vector<CheckResult> results;
    Rng rng(opt.seed);
    auto note = [&](const std::string& name, bool pass, const std::string& detail = "") {
        results.push_back({name, pass, detail});
        if (opt.log) (*opt.log) << (pass ? "PASS " : "FAIL ") << name
                                << (detail.empty() ? "" : ": " + detail) << '\n';
    };

    auto g2 = pendant_graph(opt.pendant_pairs);
    auto L2 = build_extendable_family(g2).first;
    PCRef pc_hi = f.product({g2, g2, g2}, {true, true, false}, 2);
    PCRef pc_lo = f.product({g2, g2, g2}, {true, false, false}, 1);
    PCRef tor = f.product({cycle_graph(3), cycle_graph(3)}, {true, false}, 1);

    // ---- state preparation (both bases) ----
    {
        auto g = state_prep(f, pc_lo, true);
        auto run = exact_run(g.circuit, {}, rng.next());
        bool ok = !run.herald_fail &&
                  block_holds_basis_state(run.state, g.outputs[0],
                                          BitVector(pc_lo->code.k), false);
        note("state_prep_plus", ok);
    }
    {
        auto g = state_prep(f, pc_hi, false);
        auto run = exact_run(g.circuit, {}, rng.next());
        bool ok = !run.herald_fail &&
                  block_holds_basis_state(run.state, g.outputs[0],
                                          BitVector(pc_hi->code.k), true);
        note("state_prep_zero", ok);
    }

    // ---- switch_down basis sweep (both variants) ----
    for (auto [pc, h, tag] : {std::tuple<PCRef, int, const char*>{pc_hi, 0, "primal"},
                              {pc_lo, 2, "mirrored"}}) {
        bool ok = true;
        auto gadget = switch_down(f, pc, h, L2);
        for (int trial = 0; trial < opt.basis_sweep && ok; ++trial) {
            BitVector x = BitVector::random(pc->code.k, rng);
            auto res = run_gadget_on(gadget, {pc}, {x}, true, rng.next());
            if (res.run.herald_fail) { ok = false; break; }
            for (size_t b = 0; b < gadget.outputs.size() && ok; ++b) {
                const auto& apc = gadget.outputs[b].pc;
                BitVector xb(apc->code.k);
                for (int j = 0; j < apc->code.k; ++j) {
                    CellLabel full = apc->enc.logical_labels[j];
                    full.insert(full.begin() + h, Cell{1, L2[b]});
                    int fi = pc->enc.label_index(full);
                    if (x.get(fi)) xb.set(j, true);
                }
                ok = ok && block_holds_basis_state(
                               res.run.state, {apc, res.out_qubits[b], ""}, xb, true);
            }
        }
        note(std::string("switch_down_") + tag, ok);
    }

    // ---- switch_up round trip + zero padding + bell parity ----
    for (auto [pc, h, tag] : {std::tuple<PCRef, int, const char*>{pc_hi, 0, "standard"},
                              {pc_lo, 2, "mirrored"}}) {
        bool ok = true;
        for (int trial = 0; trial < opt.basis_sweep && ok; ++trial) {
            BitVector x = BitVector::random(pc->code.k, rng);
            Circuit c;
            c.num_qubits = pc->code.n;
            c.use_pool = true;
            auto data = iota_map(pc->code.n);
            int t = emit_basis_state(c, pc, data, x, true, 0);
            std::vector<BlockRef> blocks;
            t = emit_switch_down(c, f, pc, h, L2, data, t, &blocks);
            auto up = emit_switch_up(c, f, pc, h, L2, blocks, t);
            auto run = exact_run(c, {}, rng.next());
            if (run.herald_fail) { ok = false; break; }
            BitVector want(pc->code.k);
            for (size_t b = 0; b < L2.size(); ++b)
                for (int j = 0; j < blocks[b].pc->code.k; ++j) {
                    CellLabel full = blocks[b].pc->enc.logical_labels[j];
                    full.insert(full.begin() + h, Cell{1, L2[b]});
                    int fi = pc->enc.label_index(full);
                    if (x.get(fi)) want.set(fi, true);
                }
            ok = block_holds_basis_state(run.state, up.output, want, true);
        }
        note(std::string("switch_up_round_trip_") + tag, ok);
    }

    // ---- measure_logical (Z and X) ----
    {
        bool ok = true;
        for (int trial = 0; trial < opt.basis_sweep && ok; ++trial) {
            bool zb = trial % 2 == 0;
            BitVector x = BitVector::random(tor->code.k, rng);
            Circuit c;
            c.num_qubits = tor->code.n;
            auto data = iota_map(tor->code.n);
            int t = emit_basis_state(c, tor, data, x, zb, 0);
            emit_measure_logical(c, f, tor, zb, data, t, "logical");
            auto run = exact_run(c, {}, rng.next());
            bool got = false;
            for (const auto& out : run.hook_outputs)
                if (out.count("logical")) got = out.at("logical") == x;
            ok = !run.herald_fail && got;
        }
        note("measure_logical", ok);
    }

    // ---- transversal CNOT same ----
    {
        bool ok = true;
        auto gadget = transversal_cnot_same(tor);
        for (int xm = 0; xm < 4 && ok; ++xm)
            for (int ym = 0; ym < 4 && ok; ++ym) {
                BitVector x(2), y(2);
                for (int j = 0; j < 2; ++j) {
                    if ((xm >> j) & 1) x.set(j, true);
                    if ((ym >> j) & 1) y.set(j, true);
                }
                auto res = run_gadget_on(gadget, {tor, tor}, {x, y}, true, rng.next());
                ok = block_holds_basis_state(res.run.state, {tor, res.out_qubits[0], ""},
                                             x, true) &&
                     block_holds_basis_state(res.run.state, {tor, res.out_qubits[1], ""},
                                             x ^ y, true);
            }
        note("transversal_cnot_same", ok);
    }

    // ---- transversal CNOT diff ----
    {
        bool ok = true;
        int h = 0;
        auto gadget = transversal_cnot_diff(f, pc_hi, h, L2);
        auto ctx = f.switch_context(pc_hi, h, L2);
        for (int trial = 0; trial < opt.basis_sweep && ok; ++trial) {
            std::vector<PCRef> pcs;
            std::vector<BitVector> xs;
            for (size_t b = 0; b < L2.size(); ++b) {
                pcs.push_back(ctx->a_pc);
                xs.push_back(BitVector::random(ctx->a_pc->code.k, rng));
            }
            pcs.push_back(pc_hi);
            xs.push_back(BitVector::random(pc_hi->code.k, rng));
            auto res = run_gadget_on(gadget, pcs, xs, true, rng.next());
            BitVector want = xs.back();
            for (size_t b = 0; b < L2.size(); ++b)
                for (int j = 0; j < ctx->a_pc->code.k; ++j) {
                    CellLabel full = ctx->a_pc->enc.logical_labels[j];
                    full.insert(full.begin() + h, Cell{1, L2[b]});
                    int fi = pc_hi->enc.label_index(full);
                    if (xs[b].get(j)) want.flip(fi);
                }
            ok = block_holds_basis_state(res.run.state,
                                         {pc_hi, res.out_qubits.back(), ""}, want, true);
            for (size_t b = 0; b < L2.size() && ok; ++b)
                ok = block_holds_basis_state(res.run.state,
                                             {ctx->a_pc, res.out_qubits[b], ""}, xs[b],
                                             true);
        }
        note("transversal_cnot_diff", ok);
    }

    // ---- transversal H (pairing audit happens inside the builder) ----
    {
        bool ok = true;
        auto gadget = transversal_h(f, tor);
        for (int trial = 0; trial < opt.basis_sweep && ok; ++trial) {
            BitVector x = BitVector::random(tor->code.k, rng);
            auto res = run_gadget_on(gadget, {tor}, {x}, true, rng.next());
            BitVector x_out =
                translate_logicals(tor->enc, gadget.outputs[0].pc->enc, x);
            ok = block_holds_basis_state(
                res.run.state, {gadget.outputs[0].pc, res.out_qubits[0], ""}, x_out,
                false);
        }
        note("transversal_h", ok);
    }

    // ---- hadamard_same ----
    {
        bool ok = true;
        auto gadget = hadamard_same(f, pc_hi);
        ok = gadget.outputs[0].pc == pc_hi;
        for (int trial = 0; trial < std::min(opt.basis_sweep, 6) && ok; ++trial) {
            BitVector x = BitVector::random(pc_hi->code.k, rng);
            auto res = run_gadget_on(gadget, {pc_hi}, {x}, true, rng.next());
            ok = !res.run.herald_fail &&
                 block_holds_basis_state(res.run.state, {pc_hi, res.out_qubits[0], ""},
                                         x, false);
        }
        note("hadamard_same", ok);
    }

    // ---- permute_slabs (identity, transposition, cross-copy kappa=2) ----
    {
        bool ok = true;
        int h = 0;
        auto expected_perm = [&](const std::vector<int>& pi, int copies,
                                 const std::vector<BitVector>& xs, int copy) {
            BitVector want(pc_hi->code.k);
            for (int sc = 0; sc < copies; ++sc)
                for (int j = 0; j < pc_hi->code.k; ++j) {
                    if (!xs[sc].get(j)) continue;
                    CellLabel lab = pc_hi->enc.logical_labels[j];
                    int pos = int(std::find(L2.begin(), L2.end(), lab[h].index) -
                                  L2.begin());
                    int pair = sc * int(L2.size()) + pos;
                    int dst = pi[pair];
                    if (dst / int(L2.size()) != copy) continue;
                    lab[h].index = L2[dst % int(L2.size())];
                    want.set(pc_hi->enc.label_index(lab), true);
                }
            return want;
        };
        std::vector<std::pair<std::vector<int>, int>> cases = {
            {{0, 1}, 1}, {{1, 0}, 1}, {{2, 1, 0, 3}, 2}};
        for (auto& [pi, kappa] : cases) {
            if (!ok) break;
            auto gadget = permute_slabs(f, pc_hi, h, pi, kappa);
            std::vector<PCRef> pcs(kappa, pc_hi);
            std::vector<BitVector> xs;
            for (int cc = 0; cc < kappa; ++cc)
                xs.push_back(BitVector::random(pc_hi->code.k, rng));
            auto res = run_gadget_on(gadget, pcs, xs, true, rng.next());
            ok = !res.run.herald_fail;
            for (int cc = 0; cc < kappa && ok; ++cc)
                ok = block_holds_basis_state(res.run.state,
                                             {pc_hi, res.out_qubits[cc], ""},
                                             expected_perm(pi, kappa, xs, cc), true);
        }
        note("permute_slabs", ok);
    }

    // ---- cyclic_shift: single application and the order-30 CRT loop ----
    {
        bool ok = true;
        auto gadget = cyclic_shift(f, pc_hi, {2, 2, 2}, {1, 1, 1});
        for (int trial = 0; trial < 3 && ok; ++trial) {
            BitVector x = BitVector::random(pc_hi->code.k, rng);
            auto res = run_gadget_on(gadget, {pc_hi}, {x}, true, rng.next());
            BitVector want(pc_hi->code.k);
            for (int j = 0; j < pc_hi->code.k; ++j) {
                if (!x.get(j)) continue;
                CellLabel lab = pc_hi->enc.logical_labels[j];
                for (int hh = 0; hh < 3; ++hh) {
                    int pos = int(std::find(L2.begin(), L2.end(), lab[hh].index) -
                                  L2.begin());
                    if (pos < 2) lab[hh].index = L2[(pos + 1) % 2];
                }
                want.set(pc_hi->enc.label_index(lab), true);
            }
            ok = !res.run.herald_fail &&
                 block_holds_basis_state(res.run.state, {pc_hi, res.out_qubits[0], ""},
                                         want, true);
        }
        note("cyclic_shift_single", ok);
    }
    if (opt.include_crt_order30) {
        // mixed factors: |L| = 2, 3, 5 so ell = (2,3,5) is available; thirty
        // applications of the (1,1,1) shift must compose to the identity
        auto ga = pendant_graph(2);
        auto gb = pendant_graph(3);
        auto gc = pendant_graph(5);
        PCRef crt = f.product({ga, gb, gc}, {true, true, false}, 2);
        auto gadget = cyclic_shift(f, crt, {2, 3, 5}, {1, 1, 1});
        bool ok = true;
        BitVector x = BitVector::random(crt->code.k, rng);
        Circuit c;
        c.num_qubits = crt->code.n;
        c.use_pool = true;
        auto data = iota_map(crt->code.n);
        int t = emit_basis_state(c, crt, data, x, true, 0);
        std::vector<int> cur = data;
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<int> qmap = cur;
            for (int q = crt->code.n; q < gadget.circuit.num_qubits; ++q)
                qmap.push_back(alloc_qubits(c, 1));
            c.merge_at(gadget.circuit, qmap, t);
            t += gadget.circuit.depth();
            std::vector<int> next;
            for (int q : gadget.outputs[0].qubits) next.push_back(qmap[q]);
            cur = next;
        }
        auto run = exact_run(c, {}, rng.next());
        ok = !run.herald_fail &&
             block_holds_basis_state(run.state, {crt, cur, ""}, x, true);
        note("cyclic_shift_order30", ok);
    }

    // ---- targeted swap / CNOT / H ----
    {
        bool ok = true;
        std::vector<int> b0 = {0, 0, 0}, b1 = {1, 1, 1};
        auto gadget = targeted_swap(f, pc_hi, b0, b1);
        for (int trial = 0; trial < 2 && ok; ++trial) {
            BitVector x0 = BitVector::random(pc_hi->code.k, rng);
            BitVector x1 = BitVector::random(pc_hi->code.k, rng);
            auto res = run_gadget_on(gadget, {pc_hi, pc_hi}, {x0, x1}, true, rng.next());
            // expected: mask qubit at slab positions b0 of block0 swaps with
            // b1 of block1; identity elsewhere on the mask
            auto mask_index = [&](const std::vector<int>& pos) {
                CellLabel lab(3);
                for (int hh = 0; hh < 3; ++hh) lab[hh] = Cell{1, L2[pos[hh]]};
                return pc_hi->enc.label_index(lab);
            };
            int i0 = mask_index(b0), i1 = mask_index(b1);
            BitVector w0 = x0, w1 = x1;
            w0.set(i0, x1.get(i1));
            w1.set(i1, x0.get(i0));
            ok = !res.run.herald_fail &&
                 block_holds_basis_state(res.run.state, {pc_hi, res.out_qubits[0], ""},
                                         w0, true) &&
                 block_holds_basis_state(res.run.state, {pc_hi, res.out_qubits[1], ""},
                                         w1, true);
        }
        note("targeted_swap", ok);
    }
    {
        auto g1 = pendant_graph(1);
        PCRef tiny = f.product({g1, g1, g1}, {true, true, false}, 2);
        std::vector<int> b0 = {0, 0, 0};
        bool ok = true;
        auto gadget = targeted_cnot(f, tiny, b0, b0, false);
        for (int cv = 0; cv < 2 && ok; ++cv)
            for (int tv = 0; tv < 2 && ok; ++tv) {
                BitVector xc(1), xt(1);
                if (cv) xc.set(0, true);
                if (tv) xt.set(0, true);
                auto res = run_gadget_on(gadget, {tiny, tiny}, {xc, xt}, true, rng.next());
                ok = !res.run.herald_fail &&
                     block_holds_basis_state(res.run.state, {tiny, res.out_qubits[0], ""},
                                             xc, true) &&
                     block_holds_basis_state(res.run.state, {tiny, res.out_qubits[1], ""},
                                             xc ^ xt, true);
            }
        note("targeted_cnot", ok);

        bool okh = true;
        auto gh = targeted_h(f, tiny, b0);
        for (int xv = 0; xv < 2 && okh; ++xv) {
            BitVector x(1);
            if (xv) x.set(0, true);
            auto res = run_gadget_on(gh, {tiny}, {x}, true, rng.next());
            okh = !res.run.herald_fail &&
                  block_holds_basis_state(res.run.state, {tiny, res.out_qubits[0], ""},
                                          x, false);
        }
        note("targeted_h", okh);
    }

    // ---- bulk 2d prep ----
    {
        auto gadget = bulk_2d_prep(f, pc_hi, 0);
        auto run = exact_run(gadget.circuit, {}, rng.next());
        bool ok = !run.herald_fail;
        ok = ok && int(gadget.outputs.size()) == int(L2.size());
        for (const auto& block : gadget.outputs) {
            ok = ok && block_holds_basis_state(run.state, block,
                                               BitVector(block.pc->code.k), true);
            ok = ok && run.state.local_group(block.qubits).has_value();
        }
        note("bulk_2d_prep", ok);
    }

    return results;
}

// Depth-bound audit across constructed instances (exact integer equality).
inline std::vector<CheckResult> run_depth_checks(GadgetFactory& f) {
    using namespace verify_detail;
    std::vector<CheckResult> results;
    auto note = [&](const std::string& name, bool pass) {
        results.push_back({name, pass, ""});
    };

    auto g2 = pendant_graph(2);
    PCRef pc_hi = f.product({g2, g2, g2}, {true, true, false}, 2);
    PCRef pc_lo = f.product({g2, g2, g2}, {true, false, false}, 1);
    PCRef tor = f.product({cycle_graph(4), cycle_graph(4)}, {true, false}, 1);
    auto L2 = build_extendable_family(g2).first;

    bool synd_ok = true;
    for (const PCRef& pc : {pc_hi, pc_lo, tor}) {
        int w = locality(pc->complex);
        auto cz = build_synd_ext(pc->code.hz, false);
        auto cx = build_synd_ext(pc->code.hx, true);
        synd_ok = synd_ok && cz.depth() <= w + 4 && cx.depth() <= w + 4;
    }
    note("synd_ext_depth_le_w+4", synd_ok);

    {
        int w = locality(pc_lo->complex);
        auto g = state_prep(f, pc_lo, true);
        note("state_prep_depth_w+6", g.circuit.depth() == w + 6);
    }
    {
        int w = locality(tor->complex);
        auto g = err_corr(f, tor);
        note("err_corr_depth_2w+10", g.circuit.depth() == 2 * w + 10);
    }
    note("switch_down_depth_2", switch_down(f, pc_hi, 0, L2).circuit.depth() == 2);
    note("measure_depth_2", measure_logical(f, tor, true).circuit.depth() == 2);
    note("transversal_cnot_depth_1", transversal_cnot_same(tor).circuit.depth() == 1);
    note("transversal_h_depth_1", transversal_h(f, tor).circuit.depth() == 1);
    return results;
}

}  // namespace qldpc
