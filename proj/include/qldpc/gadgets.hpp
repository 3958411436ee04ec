#pragma once

#include <memory>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qldpc/circuit.hpp"
#include "qldpc/code.hpp"
#include "qldpc/decoder.hpp"
#include "qldpc/sim.hpp"

// Gadget builders: every builder returns a Circuit plus block metadata and
// asserts its declared depth. Composition works through emit_* functions
// that write into a shared circuit at explicit layers and qubit maps.

namespace qldpc {

using PCRef = std::shared_ptr<const ProductCode>;

struct BlockRef {
    PCRef pc;
    std::vector<int> qubits;  // circuit qubit per code cell (C^i order)
    std::string role;
};

struct GadgetSpec {
    std::string name;
    Circuit circuit;
    int declared_depth = 0;
    int declared_qubit_budget = 0;
    std::string logical_channel;
    std::vector<BlockRef> inputs;
    std::vector<BlockRef> outputs;
    std::vector<std::string> components;

    void check() const {
        if (circuit.depth() != declared_depth)
            throw std::runtime_error(name + ": depth " + std::to_string(circuit.depth()) +
                                     " != declared " + std::to_string(declared_depth));
        if (circuit.qubit_count() > declared_qubit_budget)
            throw std::runtime_error(name + ": qubit budget exceeded");
        if (!circuit.all_layers_disjoint())
            throw std::runtime_error(name + ": a layer has overlapping gate supports");
    }
};

inline void write_gadget_manifest(std::ostream& os, const GadgetSpec& g) {
    os << "gadget " << g.name << '\n';
    os << "  depth " << g.circuit.depth() << '\n';
    os << "  qubits " << g.circuit.qubit_count() << " budget " << g.declared_qubit_budget
       << '\n';
    os << "  channel " << g.logical_channel << '\n';
    os << "  components";
    for (const auto& c : g.components) os << ' ' << c;
    os << '\n';
}

// Builds and caches product codes, their duals, flip decoders, solvers, and
// restricted-complex contexts, keyed structurally so repeated compositions
// share the heavy objects.
class GadgetFactory {
public:
    PCRef product(const std::vector<BipartiteGraph>& graphs, const std::vector<bool>& cochain,
                  int level) {
        std::string key = pc_key(graphs, cochain, level);
        auto it = pcs_.find(key);
        if (it != pcs_.end()) return it->second;
        auto pc = std::make_shared<ProductCode>(build_product_code(graphs, cochain, level));
        pcs_[key] = pc;
        return pc;
    }

    // Same factors, opposite orientations, complementary level. Cell labels
    // coincide as tuples; qubit order differs (use cell_map to translate).
    PCRef dual_view(const PCRef& pc) {
        std::vector<bool> flipped;
        for (bool b : pc->cochain) flipped.push_back(!b);
        return product(pc->graphs, flipped, pc->r() - pc->level);
    }

    std::shared_ptr<const FlipDecoder> flip_decoder(const CochainComplex* c, int level,
                                                    const std::string& key) {
        auto it = decoders_.find({key, level});
        if (it != decoders_.end()) return it->second;
        auto d = std::make_shared<FlipDecoder>(*c, level);
        decoders_[{key, level}] = d;
        return d;
    }

    std::shared_ptr<const CochainComplex> dual_complex(const PCRef& pc) {
        std::string key = "dual:" + pc_key(pc->graphs, pc->cochain, pc->level);
        auto it = complexes_.find(key);
        if (it != complexes_.end()) return it->second;
        auto d = std::make_shared<CochainComplex>(dual(pc->complex));
        complexes_[key] = d;
        return d;
    }

    std::string key_of(const PCRef& pc) const {
        return pc_key(pc->graphs, pc->cochain, pc->level);
    }

    // Context for measuring out direction h: the restricted complex, its
    // decoder, the Alg-3 solver, and the cell bookkeeping. For a chain-type
    // factor the whole construction is mirrored through the dual view.
    struct SwitchContext {
        bool mirrored = false;      // true: X-measurement variant
        PCRef pc;                   // the code being switched down
        PCRef work;                 // = pc (primal) or dual_view (mirrored)
        int direction = 0;          // factor index h
        std::vector<int> L;
        std::shared_ptr<CochainComplex> restricted;   // C_Lbar (work orientation)
        std::shared_ptr<const FlipDecoder> decoder;   // level i_w of restricted
        std::shared_ptr<LinSolver> line3;             // [delta_Lbar | Enc_Lbar]
        int c_dim = 0;                                // |C_Lbar^{i_w - 1}|
        EncodingMap enc_restricted_map;
        std::vector<int> measured_cells;   // C^i indices (pc order), CL^i order
        std::vector<int> retained_cells;   // C^i indices per (m, A-cell) pair
        PCRef a_pc;                        // code of one retained block
        std::vector<std::vector<int>> block_cells;  // per m in L: C^i indices
        BitMatrix corr_map;  // maps c in CL^{i_w-1} to delta^C(c) on retained cells
    };

    std::shared_ptr<const SwitchContext> switch_context(const PCRef& pc, int h,
                                                        const std::vector<int>& L) {
        std::ostringstream key;
        key << key_of(pc) << "#sw" << h;
        for (int v : L) key << '.' << v;
        auto it = switches_.find(key.str());
        if (it != switches_.end()) return it->second;
        auto ctx = std::make_shared<SwitchContext>(build_switch_context(pc, h, L));
        switches_[key.str()] = ctx;
        return ctx;
    }

private:
    static std::string pc_key(const std::vector<BipartiteGraph>& graphs,
                              const std::vector<bool>& cochain, int level) {
        std::ostringstream os;
        os << level << '|';
        for (size_t hh = 0; hh < graphs.size(); ++hh) {
            os << (cochain[hh] ? 'c' : 'd') << graphs[hh].left_count << 'x'
               << graphs[hh].right_count << ':';
            for (auto [l, r] : graphs[hh].edges) os << l << ',' << r << ';';
            os << '|';
        }
        return os.str();
    }

    SwitchContext build_switch_context(const PCRef& pc, int h, const std::vector<int>& L);

    std::map<std::string, PCRef> pcs_;
    std::map<std::pair<std::string, int>, std::shared_ptr<const FlipDecoder>> decoders_;
    std::map<std::string, std::shared_ptr<const CochainComplex>> complexes_;
    std::map<std::string, std::shared_ptr<const SwitchContext>> switches_;
};

// --- small utilities ---

inline std::vector<int> iota_map(int n, int base = 0) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = base + i;
    return v;
}

inline int alloc_qubits(Circuit& c, int count) {
    int base = c.num_qubits;
    c.num_qubits += count;
    return base;
}

// Pool-aware register allocation: first use at `from_layer`.
inline std::vector<int> alloc_block(Circuit& c, int count, int from_layer) {
    std::vector<int> out;
    if (c.use_pool) {
        while (int(out.size()) < count) {
            auto it = c.free_pool.begin();
            if (it == c.free_pool.end() || it->first > from_layer) break;
            out.push_back(it->second);
            c.free_pool.erase(it);
        }
    }
    while (int(out.size()) < count) out.push_back(c.num_qubits++);
    return out;
}

inline void release_block(Circuit& c, const std::vector<int>& qubits, int from_layer) {
    if (!c.use_pool) return;
    for (int q : qubits) c.free_pool.insert({from_layer, q});
}

// Embed a vector over block cells into a circuit-wide mask.
inline BitVector embed_mask(int num_qubits, const std::vector<int>& qubits,
                            const BitVector& v) {
    BitVector out(num_qubits);
    for (int i : v.support()) out.set(qubits[i], true);
    return out;
}

// A Pauli on a block, as a PauliRow over the whole register.
inline PauliRow embed_pauli(int num_qubits, const std::vector<int>& qubits,
                            const BitVector& x, const BitVector& z) {
    PauliRow p{BitVector(num_qubits), BitVector(num_qubits), 0};
    if (x.size())
        for (int i : x.support()) p.x.set(qubits[i], true);
    if (z.size())
        for (int i : z.support()) p.z.set(qubits[i], true);
    return p;
}

// Restrict an oriented 1-dim factor complex by dropping the given cells at
// `drop_level` (0 or 1) along with the incident matrix rows/columns.
inline CochainComplex restrict_oriented(const CochainComplex& f, int drop_level,
                                        const std::vector<int>& L) {
    if (f.dim != 1) throw std::invalid_argument("restrict_oriented: factor must be 1-dim");
    std::vector<char> drop(f.level_size(drop_level), 0);
    for (int v : L) drop[v] = 1;
    CochainComplex out;
    out.dim = 1;
    out.cells.resize(2);
    std::vector<int> kept;
    for (int lev = 0; lev < 2; ++lev) {
        if (lev != drop_level) {
            out.cells[lev] = f.cells[lev];
            continue;
        }
        for (int v = 0; v < f.level_size(lev); ++v)
            if (!drop[v]) {
                kept.push_back(v);
                out.cells[lev].push_back(f.cells[lev][v]);
            }
    }
    if (drop_level == 1) {
        BitMatrix d(int(kept.size()), f.level_size(0));
        for (size_t r = 0; r < kept.size(); ++r)
            for (int c = 0; c < f.delta[0].cols(); ++c)
                if (f.delta[0].get(kept[r], c)) d.set(int(r), c, true);
        out.delta.push_back(std::move(d));
    } else {
        BitMatrix d(f.level_size(1), int(kept.size()));
        for (int r = 0; r < f.delta[0].rows(); ++r)
            for (size_t c = 0; c < kept.size(); ++c)
                if (f.delta[0].get(r, kept[c])) d.set(r, int(c), true);
        out.delta.push_back(std::move(d));
    }
    return out;
}

// Drop logical labels whose coordinate h is the primal-bit-1 member of L,
// restricting generator columns to the cells of the restricted complex.
inline EncodingMap enc_restricted_dir(const CochainComplex& full,
                                      const CochainComplex& restricted,
                                      const EncodingMap& enc, int h,
                                      const std::vector<int>& L) {
    EncodingMap out;
    out.level = enc.level;
    std::vector<int> kept_cols;
    for (size_t j = 0; j < enc.logical_labels.size(); ++j) {
        const Cell& coord = enc.logical_labels[j][h];
        bool dropped = coord.level == 1 &&
                       std::find(L.begin(), L.end(), coord.index) != L.end();
        if (!dropped) {
            kept_cols.push_back(int(j));
            out.logical_labels.push_back(enc.logical_labels[j]);
        }
    }
    out.gen = BitMatrix(restricted.level_size(enc.level), int(kept_cols.size()));
    for (size_t jj = 0; jj < kept_cols.size(); ++jj) {
        BitVector col = enc.gen.col(kept_cols[jj]);
        for (int ci : col.support()) {
            int ri = restricted.cell_index(enc.level, full.cells[enc.level][ci]);
            if (ri >= 0) out.gen.set(ri, int(jj), true);
        }
    }
    return out;
}

inline GadgetFactory::SwitchContext GadgetFactory::build_switch_context(
    const PCRef& pc, int h, const std::vector<int>& L) {
    SwitchContext ctx;
    ctx.pc = pc;
    ctx.direction = h;
    ctx.L = L;
    ctx.mirrored = !pc->cochain[h];
    ctx.work = ctx.mirrored ? dual_view(pc) : pc;
    const ProductCode& w = *ctx.work;
    int iw = w.level;
    int r = w.r();
    if (iw < 2 || iw > r - 1)
        throw std::invalid_argument("switch_context: level out of range for this variant");

    // The measured-out direction must expose L inside the factor's level-1
    // information set (primal bit 1 either way).
    BitMatrix bd = w.factor_complexes[h].boundary(1);
    for (int v : L) {
        const auto& m1 = w.factor_encs[h].m1;
        if (std::find(m1.begin(), m1.end(), v) == m1.end())
            throw std::invalid_argument("switch_context: L not inside M^{B,1}");
    }
    if (!is_extendable(bd, L))
        throw std::invalid_argument("switch_context: L not extendable for ker(boundary)");

    // restricted product in the work orientation
    std::vector<CochainComplex> parts = w.oriented;
    parts[h] = restrict_oriented(w.oriented[h], w.cochain[h] ? 1 : 0, L);
    ctx.restricted = std::make_shared<CochainComplex>(tensor_all(parts));

    std::ostringstream dkey;
    dkey << key_of(ctx.work) << "#restr" << h;
    for (int v : L) dkey << '.' << v;
    ctx.decoder = flip_decoder(ctx.restricted.get(), iw, dkey.str());

    ctx.enc_restricted_map =
        enc_restricted_dir(w.complex, *ctx.restricted, w.enc, h, L);

    // line-3 solver: [delta_Lbar^{i-1} | Enc_Lbar] y = z + a
    ctx.c_dim = ctx.restricted->level_size(iw - 1);
    int n_res = ctx.restricted->level_size(iw);
    int k_res = ctx.enc_restricted_map.gen.cols();
    BitMatrix m(n_res, ctx.c_dim + k_res);
    const BitMatrix& dl = ctx.restricted->delta[iw - 1];
    for (int row = 0; row < n_res; ++row)
        for (int col = 0; col < ctx.c_dim; ++col)
            if (dl.get(row, col)) m.set(row, col, true);
    for (int col = 0; col < k_res; ++col)
        for (int row : ctx.enc_restricted_map.gen.col(col).support())
            m.set(row, ctx.c_dim + col, true);
    ctx.line3 = std::make_shared<LinSolver>(m);

    // measured cells: CL^i cells in order, mapped to pc->complex indices
    // (identical label tuples; the work complex only reorders them)
    for (int ci = 0; ci < n_res; ++ci) {
        int pi = pc->complex.cell_index(pc->level, ctx.restricted->cells[iw][ci]);
        if (pi < 0) throw std::runtime_error("switch_context: measured cell missing");
        ctx.measured_cells.push_back(pi);
    }

    // retained blocks: for each m in L, the A-part cells at the appropriate
    // level with coordinate h = (1, m)
    std::vector<BipartiteGraph> agraphs;
    std::vector<bool> aorient;
    std::vector<Encoding1D> aencs;
    for (int t = 0; t < pc->r(); ++t) {
        if (t == h) continue;
        agraphs.push_back(pc->graphs[t]);
        aorient.push_back(pc->cochain[t]);
        aencs.push_back(pc->factor_encs[t]);
    }
    int a_level = ctx.mirrored ? pc->level : pc->level - 1;
    std::string akey = pc_key(agraphs, aorient, a_level);
    auto it = pcs_.find(akey);
    if (it != pcs_.end()) {
        ctx.a_pc = it->second;
    } else {
        auto apc = std::make_shared<ProductCode>(
            build_product_code(agraphs, aorient, a_level, aencs));
        pcs_[akey] = apc;
        ctx.a_pc = apc;
    }
    for (int m : L) {
        std::vector<int> cells;
        for (const auto& alabel : ctx.a_pc->complex.cells[a_level]) {
            CellLabel full_label = alabel;
            full_label.insert(full_label.begin() + h, Cell{1, m});
            int pi = pc->complex.cell_index(pc->level, full_label);
            if (pi < 0) throw std::runtime_error("switch_context: retained cell missing");
            cells.push_back(pi);
        }
        ctx.block_cells.push_back(cells);
        for (int ci : cells) ctx.retained_cells.push_back(ci);
    }

    // correction map: c in CL^{iw-1} -> delta^{work}(c)|_{retained}, rows
    // indexed as (block-major, A-cell minor) matching retained_cells
    const CochainComplex& wc = w.complex;
    int iw_full = iw;
    BitMatrix corr(int(ctx.retained_cells.size()), ctx.c_dim);
    for (int col = 0; col < ctx.c_dim; ++col) {
        // embed the CL^{iw-1} basis cell into the full work complex
        int wi = wc.cell_index(iw_full - 1, ctx.restricted->cells[iw_full - 1][col]);
        if (wi < 0) throw std::runtime_error("switch_context: lift cell missing");
        BitVector img = wc.delta[iw_full - 1].col(wi);
        for (int row : img.support()) {
            const CellLabel& lab = wc.cells[iw_full][row];
            // find in retained list via pc index
            int pi = pc->complex.cell_index(pc->level, lab);
            for (size_t t = 0; t < ctx.retained_cells.size(); ++t)
                if (ctx.retained_cells[t] == pi) corr.set(int(t), col, true);
        }
    }
    ctx.corr_map = std::move(corr);
    return ctx;
}

// --- emit helpers (compose into an existing circuit) ---

// Syndrome extraction padded to exactly w+4 layers starting at `start`.
// Returns the ancilla measurement record base.
inline int emit_synd_ext_padded(Circuit& c, const BitMatrix& checks, bool x_checks,
                                const std::vector<int>& data_q,
                                const std::vector<int>& anc_q, int start, int w) {
    Circuit se = build_synd_ext(checks, x_checks);
    if (se.depth() > w + 4)
        throw std::runtime_error("emit_synd_ext_padded: coloring exceeded w+4");
    int record_base = c.num_measurements;
    std::vector<int> qmap = data_q;
    for (int a = 0; a < checks.rows(); ++a) qmap.push_back(anc_q[a]);
    c.merge_at(se, qmap, start);
    c.pad_to_depth(start + w + 4);
    return record_base;
}

// State preparation (Alg-4 form): reset, padded syndrome extraction, decode
// hook with conditional Pauli fix. Exactly w+6 layers from `start`.
inline int emit_state_prep(Circuit& c, GadgetFactory& f, const PCRef& pc, bool plus,
                           const std::vector<int>& data_q, int start) {
    const CochainComplex& C = pc->complex;
    int i = pc->level, r = pc->r();
    int w = locality(C);
    int n = pc->code.n;

    std::shared_ptr<const FlipDecoder> dec;
    std::shared_ptr<const CochainComplex> dualC;
    BitMatrix checks;
    std::shared_ptr<LinSolver> solver;
    if (plus) {
        if (i + 1 > r - 1)
            throw std::invalid_argument("state_prep(plus): needs level i+1 <= r-1");
        dec = f.flip_decoder(&C, i + 1, f.key_of(pc));
        checks = pc->code.hz;
        solver = std::make_shared<LinSolver>(pc->code.hz);
    } else {
        if (r - i + 1 > r - 1)
            throw std::invalid_argument("state_prep(zero): needs level i >= 2");
        dualC = f.dual_complex(pc);
        dec = f.flip_decoder(dualC.get(), r - i + 1, "dual:" + f.key_of(pc));
        checks = pc->code.hx;
        solver = std::make_shared<LinSolver>(pc->code.hx);
    }

    int m = checks.rows();
    auto anc = alloc_block(c, m, start + 1);

    c.pad_to_depth(start + 1);
    Layer& init = c.layers[start];
    for (int q = 0; q < n; ++q)
        c.add_gate(init, plus ? GateKind::ResetX : GateKind::ResetZ, data_q[q]);

    int record_base = emit_synd_ext_padded(c, checks, !plus, data_q, anc, start + 1, w);
    release_block(c, anc, start + w + 6);

    c.pad_to_depth(start + w + 6);
    Layer& fix = c.layers[start + w + 5];
    Hook hook;
    hook.name = plus ? "state_prep_fix_x" : "state_prep_fix_z";
    hook.reads_from = record_base;
    hook.reads_count = m;
    int nq_now = c.num_qubits;
    bool is_plus = plus;
    auto dec_keep = dec;
    auto solver_keep = solver;
    auto pc_keep = pc;
    std::vector<int> dq = data_q;
    hook.fn = [record_base, m, nq_now, is_plus, dec_keep, solver_keep, pc_keep,
               dq](const std::vector<uint8_t>& record) {
        HookResult res;
        BitVector s(m);
        for (int j = 0; j < m; ++j)
            if (record[record_base + j]) s.set(j, true);
        // decode the syndrome's syndrome, then solve for the fix
        const CochainComplex& dc = dec_keep->complex();
        BitVector ds = dc.delta[dec_keep->level()].mul(s);
        auto run = dec_keep->ss_flip_syn(ds);
        auto x = solver_keep->solve(s ^ run.correction);
        if (!x) {
            res.herald_fail = true;
            return res;
        }
        BitVector mask(nq_now);
        for (int q : x->support()) mask.set(dq[q], true);
        if (is_plus)
            res.x_mask = std::move(mask);
        else
            res.z_mask = std::move(mask);
        return res;
    };
    fix.hooks.push_back(std::move(hook));
    return start + w + 6;
}

// Error correction (Alg-5 form): Z-side extraction + flip correction, then
// X-side. Exactly 2w+10 layers from `start`.
inline int emit_err_corr(Circuit& c, GadgetFactory& f, const PCRef& pc,
                         const std::vector<int>& data_q, int start) {
    const CochainComplex& C = pc->complex;
    int i = pc->level, r = pc->r();
    if (i < 1 || i > r - 1)
        throw std::invalid_argument("err_corr: needs 1 <= i <= r-1");
    int w = locality(C);

    auto decZ = f.flip_decoder(&C, i, f.key_of(pc));
    auto dualC = f.dual_complex(pc);
    auto decX = f.flip_decoder(dualC.get(), r - i, "dual:" + f.key_of(pc));

    int mz = pc->code.hz.rows();
    auto ancz = alloc_block(c, mz, start);
    int basez = emit_synd_ext_padded(c, pc->code.hz, false, data_q, ancz, start, w);
    release_block(c, ancz, start + w + 5);
    c.pad_to_depth(start + w + 5);
    {
        Layer& corr = c.layers[start + w + 4];
        Hook hook;
        hook.name = "err_corr_x_fix";
        hook.reads_from = basez;
        hook.reads_count = mz;
        int nq_now = c.num_qubits;
        auto dk = decZ;
        std::vector<int> dq = data_q;
        hook.fn = [basez, mz, nq_now, dk, dq](const std::vector<uint8_t>& record) {
            HookResult res;
            BitVector s(mz);
            for (int j = 0; j < mz; ++j)
                if (record[basez + j]) s.set(j, true);
            auto run = dk->ss_flip_syn(s);
            res.x_mask = BitVector(nq_now);
            for (int q : run.correction.support()) res.x_mask.set(dq[q], true);
            return res;
        };
        corr.hooks.push_back(std::move(hook));
    }

    int mx = pc->code.hx.rows();
    auto ancx = alloc_block(c, mx, start + w + 5);
    int basex = emit_synd_ext_padded(c, pc->code.hx, true, data_q, ancx, start + w + 5, w);
    release_block(c, ancx, start + 2 * w + 10);
    c.pad_to_depth(start + 2 * w + 10);
    {
        Layer& corr = c.layers[start + 2 * w + 9];
        Hook hook;
        hook.name = "err_corr_z_fix";
        hook.reads_from = basex;
        hook.reads_count = mx;
        int nq_now = c.num_qubits;
        auto dk = decX;
        std::vector<int> dq = data_q;
        hook.fn = [basex, mx, nq_now, dk, dq](const std::vector<uint8_t>& record) {
            HookResult res;
            BitVector s(mx);
            for (int j = 0; j < mx; ++j)
                if (record[basex + j]) s.set(j, true);
            auto run = dk->ss_flip_syn(s);
            res.z_mask = BitVector(nq_now);
            for (int q : run.correction.support()) res.z_mask.set(dq[q], true);
            return res;
        };
        corr.hooks.push_back(std::move(hook));
    }
    return start + 2 * w + 10;
}

// Transversal logical measurement (Alg-6 form): depth 2, classical output
// under `out_name` (k bits) in the hook outputs; heralds when the corrected
// word is not a (co)cycle.
inline int emit_measure_logical(Circuit& c, GadgetFactory& f, const PCRef& pc, bool z_basis,
                                const std::vector<int>& data_q, int start,
                                const std::string& out_name) {
    const CochainComplex& C = pc->complex;
    int i = pc->level, r = pc->r();
    int n = pc->code.n;
    int record_base = c.num_measurements;

    c.pad_to_depth(start + 1);
    Layer& meas = c.layers[start];
    for (int q = 0; q < n; ++q)
        c.add_gate(meas, z_basis ? GateKind::MeasZ : GateKind::MeasX, data_q[q]);

    std::shared_ptr<const FlipDecoder> dec;
    std::shared_ptr<LogicalDecoder> ldec;
    std::shared_ptr<CssCode> dual_code;
    if (z_basis) {
        dec = f.flip_decoder(&C, i, f.key_of(pc));
        ldec = std::make_shared<LogicalDecoder>(pc->code, pc->enc);
    } else {
        auto dualC = f.dual_complex(pc);
        dec = f.flip_decoder(dualC.get(), r - i, "dual:" + f.key_of(pc));
        dual_code = std::make_shared<CssCode>(css_from_level(*dualC, r - i));
        ldec = std::make_shared<LogicalDecoder>(*dual_code, pc->enc_dual);
    }

    c.pad_to_depth(start + 2);
    Layer& decode = c.layers[start + 1];
    Hook hook;
    hook.name = out_name;
    hook.reads_from = record_base;
    hook.reads_count = n;
    auto dk = dec;
    auto lk = ldec;
    auto code_keep = dual_code;  // keep alive for the dual decoder
    std::string name = out_name;
    hook.fn = [record_base, n, dk, lk, name, code_keep](const std::vector<uint8_t>& record) {
        HookResult res;
        BitVector z(n);
        for (int j = 0; j < n; ++j)
            if (record[record_base + j]) z.set(j, true);
        const CochainComplex& dc = dk->complex();
        auto run = dk->ss_flip_syn(dc.delta[dk->level()].mul(z));
        auto x = lk->decode(z ^ run.correction);
        if (!x) {
            res.herald_fail = true;
            return res;
        }
        res.outputs[name] = *x;
        return res;
    };
    decode.hooks.push_back(std::move(hook));
    return start + 2;
}

// Downward code switching in direction h (Alg-3 form): depth 2. Measures
// the non-retained qubits in Z (or X for a chain-type factor), decodes,
// solves for the coset representative, applies the conditional correction
// on the retained qubits. Returns one block per member of L.
inline int emit_switch_down(Circuit& c, GadgetFactory& f, const PCRef& pc, int h,
                            const std::vector<int>& L, const std::vector<int>& data_q,
                            int start, std::vector<BlockRef>* out_blocks) {
    auto ctx = f.switch_context(pc, h, L);
    bool mirrored = ctx->mirrored;

    int record_base = c.num_measurements;
    c.pad_to_depth(start + 1);
    Layer& meas = c.layers[start];
    for (int pi : ctx->measured_cells)
        c.add_gate(meas, mirrored ? GateKind::MeasX : GateKind::MeasZ, data_q[pi]);

    c.pad_to_depth(start + 2);
    Layer& corr = c.layers[start + 1];
    Hook hook;
    hook.name = mirrored ? "switch_down_fix_z" : "switch_down_fix_x";
    hook.reads_from = record_base;
    hook.reads_count = int(ctx->measured_cells.size());
    int nq_now = c.num_qubits;
    auto ck = ctx;
    std::vector<int> dq = data_q;
    hook.fn = [record_base, nq_now, ck, dq, mirrored](const std::vector<uint8_t>& record) {
        HookResult res;
        int nm = int(ck->measured_cells.size());
        BitVector z(nm);
        for (int j = 0; j < nm; ++j)
            if (record[record_base + j]) z.set(j, true);
        int iw = ck->work->level;
        BitVector s = ck->restricted->delta[iw].mul(z);
        auto run = ck->decoder->ss_flip_syn(s);
        auto y = ck->line3->solve(z ^ run.correction);
        if (!y) {
            res.herald_fail = true;
            return res;
        }
        BitVector cvec(ck->c_dim);
        for (int j = 0; j < ck->c_dim; ++j)
            if (y->get(j)) cvec.set(j, true);
        BitVector corr_bits = ck->corr_map.mul(cvec);
        BitVector mask(nq_now);
        for (int t : corr_bits.support()) mask.set(dq[ck->retained_cells[t]], true);
        if (mirrored)
            res.z_mask = std::move(mask);
        else
            res.x_mask = std::move(mask);
        return res;
    };
    corr.hooks.push_back(std::move(hook));

    if (out_blocks) {
        out_blocks->clear();
        for (size_t b = 0; b < ctx->block_cells.size(); ++b) {
            BlockRef ref;
            ref.pc = ctx->a_pc;
            for (int pi : ctx->block_cells[b]) ref.qubits.push_back(data_q[pi]);
            ref.role = "retained_" + std::to_string(ctx->L[b]);
            out_blocks->push_back(std::move(ref));
        }
    }
    // the measured qubits are dead once their outcomes are recorded
    std::vector<int> dead;
    for (int pi : ctx->measured_cells) dead.push_back(data_q[pi]);
    release_block(c, dead, start + 2);
    return start + 2;
}

// Non-fault-tolerant code-state preparation (test/experiment fixture, not a
// paper gadget): measure one side's checks on a product state and fix the
// random signs by solving a linear system. Works at any level.
inline int emit_nonft_prepare(Circuit& c, const PCRef& pc, bool plus,
                              const std::vector<int>& data_q, int start) {
    const BitMatrix& checks = plus ? pc->code.hz : pc->code.hx;
    int n = pc->code.n, m = checks.rows();
    auto anc = alloc_block(c, m, start + 1);
    c.pad_to_depth(start + 1);
    Layer& init = c.layers[start];
    for (int q = 0; q < n; ++q)
        c.add_gate(init, plus ? GateKind::ResetX : GateKind::ResetZ, data_q[q]);
    Circuit se = build_synd_ext(checks, !plus);
    int record_base = c.num_measurements;
    std::vector<int> qmap = data_q;
    for (int a = 0; a < m; ++a) qmap.push_back(anc[a]);
    int end = c.merge_at(se, qmap, start + 1);
    release_block(c, anc, end + 1);
    c.pad_to_depth(end + 1);
    Layer& fix = c.layers[end];
    Hook hook;
    hook.name = "nonft_prepare_fix";
    hook.reads_from = record_base;
    hook.reads_count = m;
    auto solver = std::make_shared<LinSolver>(checks);
    int nq_now = c.num_qubits;
    bool is_plus = plus;
    std::vector<int> dq = data_q;
    hook.fn = [record_base, m, solver, nq_now, is_plus, dq](const std::vector<uint8_t>& rec) {
        HookResult res;
        BitVector s(m);
        for (int j = 0; j < m; ++j)
            if (rec[record_base + j]) s.set(j, true);
        auto x = solver->solve(s);
        if (!x) {
            res.herald_fail = true;
            return res;
        }
        BitVector mask(nq_now);
        for (int q : x->support()) mask.set(dq[q], true);
        if (is_plus)
            res.x_mask = std::move(mask);
        else
            res.z_mask = std::move(mask);
        return res;
    };
    fix.hooks.push_back(std::move(hook));
    return end + 1;
}

// Apply logical X^a Z^b to a block (one layer of physical Paulis on the
// encoded representatives).
inline int emit_logical_pauli(Circuit& c, const BlockRef& block, const BitVector& a,
                              const BitVector& b, int start) {
    BitVector xphys(block.pc->code.n), zphys(block.pc->code.n);
    if (a.size()) xphys = block.pc->enc.encode(a);
    if (b.size()) zphys = block.pc->enc_dual.encode(b);
    c.pad_to_depth(start + 1);
    Layer& layer = c.layers[start];
    for (int q = 0; q < block.pc->code.n; ++q) {
        bool xb = xphys.get(q), zb = zphys.get(q);
        if (xb && zb)
            c.add_gate(layer, GateKind::Y, block.qubits[q]);
        else if (xb)
            c.add_gate(layer, GateKind::X, block.qubits[q]);
        else if (zb)
            c.add_gate(layer, GateKind::Z, block.qubits[q]);
    }
    return start + 1;
}

// --- standalone gadget wrappers ---

inline GadgetSpec state_prep(GadgetFactory& f, const PCRef& pc, bool plus) {
    GadgetSpec g;
    g.name = plus ? "state_prep_plus" : "state_prep_zero";
    g.circuit.num_qubits = pc->code.n;
    std::vector<int> data = iota_map(pc->code.n);
    int end = emit_state_prep(g.circuit, f, pc, plus, data, 0);
    int w = locality(pc->complex);
    g.declared_depth = w + 6;
    if (end != w + 6) throw std::logic_error("state_prep: depth accounting broke");
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = plus ? "prepare Enc(|+^k>)" : "prepare Enc(|0^k>)";
    g.outputs.push_back({pc, data, "prepared"});
    g.check();
    return g;
}

inline GadgetSpec err_corr(GadgetFactory& f, const PCRef& pc) {
    GadgetSpec g;
    g.name = "err_corr";
    g.circuit.num_qubits = pc->code.n;
    std::vector<int> data = iota_map(pc->code.n);
    int end = emit_err_corr(g.circuit, f, pc, data, 0);
    int w = locality(pc->complex);
    g.declared_depth = 2 * w + 10;
    if (end != 2 * w + 10) throw std::logic_error("err_corr: depth accounting broke");
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "identity";
    g.inputs.push_back({pc, data, "in"});
    g.outputs.push_back({pc, data, "out"});
    g.check();
    return g;
}

inline GadgetSpec measure_logical(GadgetFactory& f, const PCRef& pc, bool z_basis) {
    GadgetSpec g;
    g.name = z_basis ? "measure_logical_z" : "measure_logical_x";
    g.circuit.num_qubits = pc->code.n;
    std::vector<int> data = iota_map(pc->code.n);
    emit_measure_logical(g.circuit, f, pc, z_basis, data, 0, "logical");
    g.declared_depth = 2;
    g.declared_qubit_budget = pc->code.n;
    g.logical_channel = z_basis ? "measure logical Z, output x" : "measure logical X";
    g.inputs.push_back({pc, data, "in"});
    g.check();
    return g;
}

inline GadgetSpec switch_down(GadgetFactory& f, const PCRef& pc, int h,
                              const std::vector<int>& L) {
    GadgetSpec g;
    g.name = "switch_down_dir" + std::to_string(h);
    g.circuit.num_qubits = pc->code.n;
    std::vector<int> data = iota_map(pc->code.n);
    std::vector<BlockRef> blocks;
    emit_switch_down(g.circuit, f, pc, h, L, data, 0, &blocks);
    g.declared_depth = 2;
    g.declared_qubit_budget = pc->code.n;
    g.logical_channel = "discard logicals outside M^{A} x L";
    g.inputs.push_back({pc, data, "in"});
    g.outputs = blocks;
    g.check();
    return g;
}

// Transversal CNOT between two identical codeblocks: depth 1.
inline GadgetSpec transversal_cnot_same(const PCRef& pc) {
    GadgetSpec g;
    g.name = "transversal_cnot_same";
    int n = pc->code.n;
    g.circuit.num_qubits = 2 * n;
    auto& layer = g.circuit.add_layer();
    for (int q = 0; q < n; ++q)
        g.circuit.add_gate(layer, GateKind::CNOT, q, n + q);
    g.declared_depth = 1;
    g.declared_qubit_budget = 2 * n;
    g.logical_channel = "CNOT^k control block 1, target block 2";
    g.inputs.push_back({pc, iota_map(n), "control"});
    g.inputs.push_back({pc, iota_map(n, n), "target"});
    g.outputs = g.inputs;
    g.check();
    return g;
}

// Transversal CNOT between |L| lower-dimensional blocks (controls) and the
// shared-label qubits of a product codeblock (target): depth 1.
inline GadgetSpec transversal_cnot_diff(GadgetFactory& f, const PCRef& pc, int h,
                                        const std::vector<int>& L) {
    auto ctx = f.switch_context(pc, h, L);
    GadgetSpec g;
    g.name = "transversal_cnot_diff";
    int n_tar = pc->code.n;
    int n_block = ctx->a_pc->code.n;
    int n_con = n_block * int(L.size());
    g.circuit.num_qubits = n_con + n_tar;
    auto& layer = g.circuit.add_layer();
    for (size_t b = 0; b < ctx->block_cells.size(); ++b)
        for (int t = 0; t < n_block; ++t)
            g.circuit.add_gate(layer, GateKind::CNOT, int(b) * n_block + t,
                               n_con + ctx->block_cells[b][t]);
    g.declared_depth = 1;
    g.declared_qubit_budget = g.circuit.num_qubits;
    g.logical_channel = "CNOT on shared logical labels M^A x L";
    for (size_t b = 0; b < ctx->block_cells.size(); ++b)
        g.inputs.push_back({ctx->a_pc, iota_map(n_block, int(b) * n_block),
                            "control_" + std::to_string(L[b])});
    g.inputs.push_back({pc, iota_map(n_tar, n_con), "target"});
    g.outputs = g.inputs;
    g.check();
    return g;
}

// Transversal Hadamard: depth 1; the output code is the dual view. The
// encoding pairing (x.x' = y.y') is certified before emitting.
inline GadgetSpec transversal_h(GadgetFactory& f, const PCRef& pc) {
    // pairing audit: gen^T gen_dual must be the identity
    for (int a = 0; a < pc->code.k; ++a)
        for (int b = 0; b < pc->code.k; ++b)
            if (pc->enc.gen.col(a).dot(pc->enc_dual.gen.col(b)) != (a == b))
                throw std::runtime_error("transversal_h: encoding pairing audit failed");
    GadgetSpec g;
    g.name = "transversal_h";
    int n = pc->code.n;
    g.circuit.num_qubits = n;
    auto& layer = g.circuit.add_layer();
    for (int q = 0; q < n; ++q) g.circuit.add_gate(layer, GateKind::H, q);
    g.declared_depth = 1;
    g.declared_qubit_budget = n;
    g.logical_channel = "H^k into the dual-view code";
    g.inputs.push_back({pc, iota_map(n), "in"});
    PCRef out_pc = f.dual_view(pc);
    // qubit map: dual-view cell order differs; translate by label
    std::vector<int> out_q(n);
    for (int ci = 0; ci < n; ++ci) {
        int pi = pc->complex.cell_index(pc->level,
                                        out_pc->complex.cells[out_pc->level][ci]);
        if (pi < 0) throw std::runtime_error("transversal_h: label translation failed");
        out_q[ci] = pi;
    }
    g.outputs.push_back({out_pc, out_q, "dual"});
    g.check();
    return g;
}

// --- verification helpers (exact-engine checks used by tests and the CLI) ---

inline bool block_is_code_state(const StabilizerState& st, const BlockRef& block) {
    int nq = st.num_qubits();
    for (int r = 0; r < block.pc->code.hz.rows(); ++r) {
        PauliRow p = embed_pauli(nq, block.qubits, BitVector(block.pc->code.n),
                                 block.pc->code.hz.row(r));
        if (st.expectation(p) != 1) return false;
    }
    for (int r = 0; r < block.pc->code.hx.rows(); ++r) {
        PauliRow p = embed_pauli(nq, block.qubits, block.pc->code.hx.row(r),
                                 BitVector(block.pc->code.n));
        if (st.expectation(p) != 1) return false;
    }
    return true;
}

// Expectation of logical Z_j (via the dual representative) on a block.
inline int logical_z_expectation(const StabilizerState& st, const BlockRef& block, int j) {
    PauliRow p = embed_pauli(st.num_qubits(), block.qubits, BitVector(block.pc->code.n),
                             block.pc->enc_dual.gen.col(j));
    return st.expectation(p);
}

inline int logical_x_expectation(const StabilizerState& st, const BlockRef& block, int j) {
    PauliRow p = embed_pauli(st.num_qubits(), block.qubits, block.pc->enc.gen.col(j),
                             BitVector(block.pc->code.n));
    return st.expectation(p);
}

// Re-index a logical vector from one encoding's label order to another's
// (the label sets must coincide as tuples).
inline BitVector translate_logicals(const EncodingMap& from, const EncodingMap& to,
                                    const BitVector& x) {
    BitVector y(int(to.logical_labels.size()));
    for (size_t j = 0; j < to.logical_labels.size(); ++j) {
        int fi = from.label_index(to.logical_labels[j]);
        if (fi < 0) throw std::invalid_argument("translate_logicals: label missing");
        if (x.get(fi)) y.set(int(j), true);
    }
    return y;
}

// Check that a block holds Enc(|x>) (z_basis) or Enc(|(+/-)^x>) exactly.
inline bool block_holds_basis_state(const StabilizerState& st, const BlockRef& block,
                                    const BitVector& x, bool z_basis) {
    if (!block_is_code_state(st, block)) return false;
    for (int j = 0; j < block.pc->code.k; ++j) {
        int want = x.get(j) ? -1 : 1;
        int got = z_basis ? logical_z_expectation(st, block, j)
                          : logical_x_expectation(st, block, j);
        if (got != want) return false;
    }
    return true;
}

}  // namespace qldpc
