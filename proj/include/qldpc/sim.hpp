#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qldpc/bits.hpp"
#include "qldpc/circuit.hpp"
#include "qldpc/rng.hpp"

// Two execution engines for Pauli-faulted CSS Clifford circuits: an exact
// stabilizer tableau (ground truth, destabilizer form) and a Pauli-frame
// engine for bulk Monte Carlo against a reference record.

namespace qldpc {

struct PauliRow {
    BitVector x, z;
    uint8_t phase = 0;  // sign (-1)^phase

    bool operator==(const PauliRow& o) const {
        return x == o.x && z == o.z && phase == o.phase;
    }
    bool operator<(const PauliRow& o) const {
        if (!(x == o.x)) return x < o.x;
        if (!(z == o.z)) return z < o.z;
        return phase < o.phase;
    }
};

class StabilizerState {
public:
    explicit StabilizerState(int n = 0) : n_(n) {
        rows_.reserve(2 * n);
        for (int i = 0; i < 2 * n; ++i)
            rows_.push_back({BitVector(n), BitVector(n), 0});
        // destabilizers X_i, stabilizers Z_i: the all-|0> state
        for (int i = 0; i < n; ++i) {
            rows_[i].x.set(i, true);
            rows_[n + i].z.set(i, true);
        }
    }

    int num_qubits() const { return n_; }

    void apply_h(int q) {
        for (auto& r : rows_) {
            bool xb = r.x.get(q), zb = r.z.get(q);
            if (xb && zb) r.phase ^= 1;
            r.x.set(q, zb);
            r.z.set(q, xb);
        }
    }

    void apply_cnot(int c, int t) {
        for (auto& r : rows_) {
            bool xc = r.x.get(c), zt = r.z.get(t);
            if (xc && zt && (r.x.get(t) == r.z.get(c))) r.phase ^= 1;
            if (xc) r.x.flip(t);
            if (zt) r.z.flip(c);
        }
    }

    void apply_x(int q) {
        for (auto& r : rows_)
            if (r.z.get(q)) r.phase ^= 1;
    }

    void apply_z(int q) {
        for (auto& r : rows_)
            if (r.x.get(q)) r.phase ^= 1;
    }

    void apply_y(int q) {
        for (auto& r : rows_)
            if (r.x.get(q) != r.z.get(q)) r.phase ^= 1;
    }

    void apply_pauli(const BitVector& xmask, const BitVector& zmask) {
        for (auto& r : rows_) {
            int anti = r.z.and_weight(xmask) + r.x.and_weight(zmask);
            if (anti & 1) r.phase ^= 1;
        }
    }

    // Measure Z_q. Non-deterministic outcomes come from `random_bit` unless
    // `forced` is set; a forced value contradicting a deterministic outcome
    // reports mismatch = true and leaves the deterministic outcome.
    struct MeasResult {
        int outcome = 0;
        bool was_random = false;
        bool mismatch = false;
    };

    MeasResult measure_z(int q, Rng& rng, std::optional<int> forced = std::nullopt) {
        MeasResult res;
        int p = -1;
        for (int i = n_; i < 2 * n_; ++i)
            if (rows_[i].x.get(q)) { p = i; break; }
        if (p >= 0) {
            res.was_random = true;
            // Always consume one bit so forced runs keep the stream aligned
            // with their reference run.
            int drawn = int(rng.bit());
            int outcome = forced ? *forced : drawn;
            for (int i = 0; i < 2 * n_; ++i)
                if (i != p && rows_[i].x.get(q)) rowsum(i, p);
            rows_[p - n_] = rows_[p];
            rows_[p].x = BitVector(n_);
            rows_[p].z = BitVector(n_);
            rows_[p].z.set(q, true);
            rows_[p].phase = uint8_t(outcome);
            res.outcome = outcome;
            return res;
        }
        // deterministic: accumulate stabilizer combination in a scratch row
        PauliRow scratch{BitVector(n_), BitVector(n_), 0};
        for (int i = 0; i < n_; ++i)
            if (rows_[i].x.get(q)) rowsum_into(scratch, rows_[n_ + i]);
        res.outcome = scratch.phase;
        if (forced && *forced != res.outcome) res.mismatch = true;
        return res;
    }

    MeasResult measure_x(int q, Rng& rng, std::optional<int> forced = std::nullopt) {
        apply_h(q);
        auto res = measure_z(q, rng, forced);
        apply_h(q);
        return res;
    }

    // Resets measure and correct; the collapse branch matters for entangled
    // partners, so the internal outcome can be forced just like recorded
    // measurements (used by the cross-engine differential test).
    void reset_z(int q, Rng& rng, std::optional<int> forced = std::nullopt) {
        auto m = measure_z(q, rng, forced);
        if (m.outcome) apply_x(q);
    }

    void reset_x(int q, Rng& rng, std::optional<int> forced = std::nullopt) {
        apply_h(q);
        reset_z(q, rng, forced);
        apply_h(q);
    }

    // Expectation of a Pauli (x|z) with sign (-1)^phase: +1 / -1 when the
    // operator is in +-(stabilizer group), 0 when the outcome is random.
    int expectation(const PauliRow& p) const {
        for (int i = n_; i < 2 * n_; ++i)
            if (anticommutes(rows_[i], p)) return 0;
        PauliRow scratch{BitVector(n_), BitVector(n_), 0};
        for (int i = 0; i < n_; ++i)
            if (anticommutes(rows_[i], p)) rowsum_into(scratch, rows_[n_ + i]);
        if (!(scratch.x == p.x) || !(scratch.z == p.z))
            return 0;  // not in the group at all (can happen for mixed input)
        return (scratch.phase ^ p.phase) ? -1 : 1;
    }

    // Canonical signed generating set of the stabilizer group (row-reduced
    // over the (x|z) symplectic matrix, X block first).
    std::vector<PauliRow> canonical_stabilizers() const {
        std::vector<PauliRow> rows(rows_.begin() + n_, rows_.end());
        canonicalize(rows, n_);
        return rows;
    }

    // Stabilizer rows supported entirely inside `qubits`, canonicalized and
    // re-indexed to the subset; the block is pure iff count == |qubits|.
    std::optional<std::vector<PauliRow>> local_group(const std::vector<int>& qubits) const {
        std::vector<int> order = qubits;
        std::vector<char> inside(n_, 0);
        for (int q : qubits) inside[q] = 1;
        for (int q = 0; q < n_; ++q)
            if (!inside[q]) order.push_back(q);
        std::vector<PauliRow> rows(rows_.begin() + n_, rows_.end());
        canonicalize_ordered(rows, n_, order);
        std::vector<PauliRow> local;
        for (const auto& r : rows) {
            bool in = true;
            for (int q : (r.x).support()) in = in && inside[q];
            for (int q : (r.z).support()) in = in && inside[q];
            if (!in || (r.x.is_zero() && r.z.is_zero())) continue;
            PauliRow lr{BitVector(int(qubits.size())), BitVector(int(qubits.size())), r.phase};
            for (size_t j = 0; j < qubits.size(); ++j) {
                if (r.x.get(qubits[j])) lr.x.set(int(j), true);
                if (r.z.get(qubits[j])) lr.z.set(int(j), true);
            }
            local.push_back(lr);
        }
        canonicalize(local, int(qubits.size()));
        if (int(local.size()) != int(qubits.size())) return std::nullopt;
        return local;
    }

    static bool anticommutes(const PauliRow& a, const PauliRow& b) {
        return ((a.x.and_weight(b.z) + a.z.and_weight(b.x)) & 1) != 0;
    }

    // h *= i (Pauli row multiplication with sign tracking)
    static void rowsum_into(PauliRow& h, const PauliRow& i) {
        int64_t plus = 0, minus = 0;
        const auto& x1 = i.x.words();
        const auto& z1 = i.z.words();
        const auto& x2 = h.x.words();
        const auto& z2 = h.z.words();
        for (size_t w = 0; w < x1.size(); ++w) {
            uint64_t a = x1[w], b = z1[w], c = x2[w], d = z2[w];
            uint64_t p = (a & b & ~c & d) | (a & ~b & c & d) | (~a & b & c & ~d);
            uint64_t m = (a & b & c & ~d) | (a & ~b & ~c & d) | (~a & b & c & d);
            plus += std::popcount(p);
            minus += std::popcount(m);
        }
        int64_t total = 2 * (int64_t(h.phase) + int64_t(i.phase)) + plus - minus;
        total %= 4;
        if (total < 0) total += 4;
        if (total == 1 || total == 3)
            throw std::logic_error("rowsum: non-Hermitian product");
        h.phase = uint8_t(total / 2);
        h.x.xor_in(i.x);
        h.z.xor_in(i.z);
    }

    static void canonicalize(std::vector<PauliRow>& rows, int n) {
        std::vector<int> order(n);
        for (int q = 0; q < n; ++q) order[q] = q;
        canonicalize_ordered(rows, n, order);
        // drop identity rows (with +1 sign they are redundant; -1 identity
        // would mean an inconsistent generating set)
        std::vector<PauliRow> keep;
        for (auto& r : rows) {
            if (r.x.is_zero() && r.z.is_zero()) {
                if (r.phase) throw std::logic_error("canonicalize: -identity in group");
                continue;
            }
            keep.push_back(std::move(r));
        }
        rows = std::move(keep);
    }

private:
    void rowsum(int h, int i) { rowsum_into(rows_[h], rows_[i]); }

    static void canonicalize_ordered(std::vector<PauliRow>& rows, int n,
                                     const std::vector<int>& order) {
        size_t r = 0;
        auto eliminate = [&](auto getter) {
            for (int qi = 0; qi < n && r < rows.size(); ++qi) {
                int q = order[qi];
                size_t piv = SIZE_MAX;
                for (size_t i = r; i < rows.size(); ++i)
                    if (getter(rows[i], q)) { piv = i; break; }
                if (piv == SIZE_MAX) continue;
                std::swap(rows[r], rows[piv]);
                for (size_t i = 0; i < rows.size(); ++i)
                    if (i != r && getter(rows[i], q)) rowsum_into(rows[i], rows[r]);
                ++r;
            }
        };
        eliminate([](const PauliRow& row, int q) { return row.x.get(q); });
        eliminate([](const PauliRow& row, int q) { return row.x.is_zero() && row.z.get(q); });
    }

    int n_;
    std::vector<PauliRow> rows_;
};

inline bool same_stabilizer_group(const std::vector<PauliRow>& a,
                                  const std::vector<PauliRow>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!(a[i] == b[i])) return false;
    return true;
}

// --- execution ---

struct RunResult {
    std::vector<uint8_t> record;                          // measurement outcomes
    std::vector<uint8_t> reset_record;                    // internal reset outcomes
    std::vector<std::pair<BitVector, BitVector>> hook_masks;  // per hook call
    std::vector<std::map<std::string, BitVector>> hook_outputs;
    bool herald_fail = false;
    bool forced_mismatch = false;
    StabilizerState state{0};
};

// Faithful tableau execution. `fault` Paulis are applied after each layer's
// gates; `forced` / `forced_resets` pin every measurement outcome (used by
// the cross-engine differential test), flagging deterministic disagreement.
inline RunResult exact_run(const Circuit& circuit, const Fault& fault, uint64_t seed,
                           const StabilizerState* initial = nullptr,
                           const std::vector<uint8_t>* forced = nullptr,
                           const std::vector<uint8_t>* forced_resets = nullptr) {
    RunResult res;
    res.state = initial ? *initial : StabilizerState(circuit.num_qubits);
    if (res.state.num_qubits() != circuit.num_qubits)
        throw std::invalid_argument("exact_run: initial state size mismatch");
    res.record.assign(circuit.num_measurements, 0);
    Rng rng(seed);
    for (int t = 0; t < circuit.depth(); ++t) {
        const Layer& layer = circuit.layers[t];
        for (const auto& hook : layer.hooks) {
            HookResult h = hook.fn(res.record);
            res.hook_masks.push_back({h.x_mask, h.z_mask});
            res.hook_outputs.push_back(h.outputs);
            res.herald_fail = res.herald_fail || h.herald_fail;
            if (h.x_mask.size() || h.z_mask.size()) {
                BitVector xm(circuit.num_qubits), zm(circuit.num_qubits);
                if (h.x_mask.size())
                    for (int q : h.x_mask.support()) xm.set(q, true);
                if (h.z_mask.size())
                    for (int q : h.z_mask.support()) zm.set(q, true);
                res.state.apply_pauli(xm, zm);
            }
        }
        for (const auto& g : layer.gates) {
            switch (g.kind) {
                case GateKind::X: res.state.apply_x(g.q0); break;
                case GateKind::Z: res.state.apply_z(g.q0); break;
                case GateKind::Y: res.state.apply_y(g.q0); break;
                case GateKind::H: res.state.apply_h(g.q0); break;
                case GateKind::CNOT: res.state.apply_cnot(g.q0, g.q1); break;
                case GateKind::ResetZ:
                case GateKind::ResetX: {
                    std::optional<int> force;
                    if (forced_resets) {
                        if (res.reset_record.size() >= forced_resets->size())
                            throw std::invalid_argument("exact_run: forced resets too short");
                        force = (*forced_resets)[res.reset_record.size()];
                    }
                    // peek the internal outcome by measuring, then correct
                    auto m = g.kind == GateKind::ResetZ
                                 ? res.state.measure_z(g.q0, rng, force)
                                 : res.state.measure_x(g.q0, rng, force);
                    if (m.mismatch) res.forced_mismatch = true;
                    if (m.outcome) {
                        if (g.kind == GateKind::ResetZ)
                            res.state.apply_x(g.q0);
                        else
                            res.state.apply_z(g.q0);
                    }
                    res.reset_record.push_back(uint8_t(m.outcome));
                    break;
                }
                case GateKind::MeasZ:
                case GateKind::MeasX: {
                    std::optional<int> force;
                    if (forced) {
                        if (g.meas_id >= int(forced->size()))
                            throw std::invalid_argument("exact_run: forced record too short");
                        force = (*forced)[g.meas_id];
                    }
                    auto m = g.kind == GateKind::MeasZ
                                 ? res.state.measure_z(g.q0, rng, force)
                                 : res.state.measure_x(g.q0, rng, force);
                    if (m.mismatch) res.forced_mismatch = true;
                    res.record[g.meas_id] = uint8_t(m.outcome);
                    break;
                }
            }
        }
        for (const auto& [loc, p] : fault.at) {
            if (loc.second != t + 1) continue;
            if (p == Pauli::X || p == Pauli::Y) res.state.apply_x(loc.first);
            if (p == Pauli::Z || p == Pauli::Y) res.state.apply_z(loc.first);
        }
    }
    return res;
}

struct FrameResult {
    std::vector<uint8_t> flips;        // per measurement: noisy xor reference
    std::vector<uint8_t> reset_flips;  // per reset: internal-outcome flip
    BitVector x_frame, z_frame;        // final deviation
    std::vector<std::map<std::string, BitVector>> hook_outputs;
    bool herald_fail = false;
};

// Pauli-frame propagation relative to a reference run of the same circuit
// with zero fault. Classical hooks see reference-xor-flip outcomes and the
// frame absorbs the difference between noisy and reference hook masks.
inline FrameResult frame_run(const Circuit& circuit, const Fault& fault,
                             const RunResult& reference) {
    if (int(reference.record.size()) != circuit.num_measurements)
        throw std::invalid_argument("frame_run: reference/circuit mismatch");
    FrameResult res;
    res.x_frame = BitVector(circuit.num_qubits);
    res.z_frame = BitVector(circuit.num_qubits);
    res.flips.assign(circuit.num_measurements, 0);
    std::vector<uint8_t> noisy(circuit.num_measurements, 0);  // reference xor flips
    size_t hook_idx = 0;
    for (int t = 0; t < circuit.depth(); ++t) {
        const Layer& layer = circuit.layers[t];
        for (const auto& hook : layer.hooks) {
            if (hook_idx >= reference.hook_masks.size())
                throw std::invalid_argument("frame_run: reference hook count mismatch");
            HookResult h = hook.fn(noisy);
            res.hook_outputs.push_back(h.outputs);
            res.herald_fail = res.herald_fail || h.herald_fail;
            const auto& [rx, rz] = reference.hook_masks[hook_idx];
            auto xor_embedded = [](BitVector& frame, const BitVector& mask) {
                if (!mask.size()) return;
                for (int q : mask.support()) frame.flip(q);
            };
            xor_embedded(res.x_frame, h.x_mask);
            xor_embedded(res.x_frame, rx);
            xor_embedded(res.z_frame, h.z_mask);
            xor_embedded(res.z_frame, rz);
            ++hook_idx;
        }
        for (const auto& g : layer.gates) {
            switch (g.kind) {
                case GateKind::X:
                case GateKind::Z:
                case GateKind::Y:
                    break;  // deterministic circuit Paulis cancel in the frame
                case GateKind::H: {
                    bool fx = res.x_frame.get(g.q0), fz = res.z_frame.get(g.q0);
                    res.x_frame.set(g.q0, fz);
                    res.z_frame.set(g.q0, fx);
                    break;
                }
                case GateKind::CNOT:
                    if (res.x_frame.get(g.q0)) res.x_frame.flip(g.q1);
                    if (res.z_frame.get(g.q1)) res.z_frame.flip(g.q0);
                    break;
                case GateKind::ResetZ:
                case GateKind::ResetX:
                    res.reset_flips.push_back(g.kind == GateKind::ResetZ
                                                  ? res.x_frame.get(g.q0)
                                                  : res.z_frame.get(g.q0));
                    res.x_frame.set(g.q0, false);
                    res.z_frame.set(g.q0, false);
                    break;
                case GateKind::MeasZ: {
                    uint8_t flip = res.x_frame.get(g.q0);
                    res.flips[g.meas_id] = flip;
                    noisy[g.meas_id] = uint8_t(reference.record[g.meas_id] ^ flip);
                    res.z_frame.set(g.q0, false);
                    break;
                }
                case GateKind::MeasX: {
                    uint8_t flip = res.z_frame.get(g.q0);
                    res.flips[g.meas_id] = flip;
                    noisy[g.meas_id] = uint8_t(reference.record[g.meas_id] ^ flip);
                    res.x_frame.set(g.q0, false);
                    break;
                }
            }
        }
        for (const auto& [loc, p] : fault.at) {
            if (loc.second != t + 1) continue;
            if (p == Pauli::X || p == Pauli::Y) res.x_frame.flip(loc.first);
            if (p == Pauli::Z || p == Pauli::Y) res.z_frame.flip(loc.first);
        }
    }
    return res;
}

// Full cross-engine differential check: reference run, frame propagation,
// then a branch-aligned noisy exact run with every (internal or recorded)
// outcome forced to the frame prediction. Agreement means no deterministic
// outcome disagreed and undoing the final frame recovers the reference
// state's signed stabilizer group.
struct DifferentialResult {
    bool outcomes_ok = false;
    bool state_ok = false;
    FrameResult frame;
    bool ok() const { return outcomes_ok && state_ok; }
};

inline DifferentialResult differential_check(const Circuit& circuit, const Fault& fault,
                                             uint64_t seed,
                                             const StabilizerState* initial = nullptr) {
    DifferentialResult res;
    auto ref = exact_run(circuit, {}, seed, initial);
    res.frame = frame_run(circuit, fault, ref);
    std::vector<uint8_t> predicted(ref.record.size());
    for (size_t i = 0; i < predicted.size(); ++i)
        predicted[i] = uint8_t(ref.record[i] ^ res.frame.flips[i]);
    std::vector<uint8_t> predicted_resets(ref.reset_record.size());
    for (size_t i = 0; i < predicted_resets.size(); ++i)
        predicted_resets[i] = uint8_t(ref.reset_record[i] ^ res.frame.reset_flips[i]);
    auto noisy = exact_run(circuit, fault, seed, initial, &predicted, &predicted_resets);
    res.outcomes_ok = !noisy.forced_mismatch;
    noisy.state.apply_pauli(res.frame.x_frame, res.frame.z_frame);
    res.state_ok = same_stabilizer_group(noisy.state.canonical_stabilizers(),
                                         ref.state.canonical_stabilizers());
    return res;
}

// --- noise ---

// iid noise at rate p per (qubit, timestep) location with a Pauli mix; this
// is the canonical eps-locally-stochastic instance with eps = p.
struct NoiseModel {
    double p = 0;
    double wx = 1, wy = 1, wz = 1;  // relative mix weights

    Pauli draw(Rng& rng) const {
        double total = wx + wy + wz;
        double u = rng.uniform() * total;
        if (u < wx) return Pauli::X;
        if (u < wx + wy) return Pauli::Y;
        return Pauli::Z;
    }
};

inline Fault sample_fault(const NoiseModel& model, const Circuit& circuit, uint64_t seed) {
    Fault f;
    Rng rng(seed);
    for (int t = 1; t <= circuit.depth(); ++t)
        for (int q = 0; q < circuit.num_qubits; ++q)
            if (rng.bernoulli(model.p)) f.at[{q, t}] = model.draw(rng);
    return f;
}

// Shot record line: seed, fault support size, flip-record hash, success.
inline void write_shot_record(std::ostream& os, uint64_t seed, int fault_support,
                              const std::vector<uint8_t>& flips, bool success) {
    uint64_t h = 1469598103934665603ULL;
    for (uint8_t b : flips) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    os << "seed=" << seed << " fault=" << fault_support << " fliphash=" << h
       << " success=" << (success ? 1 : 0) << '\n';
}

}  // namespace qldpc
