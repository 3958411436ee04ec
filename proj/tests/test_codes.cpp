#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "qldpc/code.hpp"

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

// One left vertex with two private right neighbors per "pendant pair":
// ker(boundary) has one codeword v_j + w_j per pair, so M^1 = {v_j}.
BipartiteGraph pendant_graph(int pairs) {
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

ProductCode toric(int m) {
    return build_product_code({cycle_graph(m), cycle_graph(m)}, {true, false}, 1);
}

}  // namespace

TEST_CASE("css_from_level basics") {
    auto t = toric(3);
    CHECK(t.code.n == 18);
    CHECK(t.code.k == 2);
    // all check pairs commute
    CHECK(t.code.hz.mul(t.code.hx.transposed()).is_zero());

    // single-edge product, level 1: n = 2, k = 0
    auto e1 = gen_biregular(1, 1, 1, 1, 0);
    auto p = build_product_code({e1, e1}, {true, true}, 1);
    CHECK(p.code.n == 2);
    CHECK(p.code.k == 0);
}

TEST_CASE("enc_1d on a cycle") {
    auto c4 = complex_from_graph(cycle_graph(4));
    auto info0 = information_set(c4.delta[0]);
    auto info1 = information_set(c4.boundary(1));
    REQUIRE(info0.size() == 1);
    REQUIRE(info1.size() == 1);
    auto e = enc_1d(c4, info0, info1);

    // Enc^0(1) is the all-ones kernel codeword
    CHECK(e.enc0.col(0).weight() == 4);
    // Enc^1 restricted to m1 is the identity; Enc^0(0) = 0
    CHECK(e.enc1.col(0) == BitVector::unit(4, info1[0]));

    // non-information-set input rejected
    CHECK_THROWS(enc_1d(c4, {0, 1}, info1));
    CHECK_THROWS(enc_1d(c4, info0, {}));
}

TEST_CASE("enc_product on the toric code") {
    auto t = toric(3);
    CHECK(t.enc.gen.cols() == 2);
    CHECK(t.enc.logical_labels.size() == 2);
    // labels mix the two factors' information-set members at complementary
    // degrees; with primal level bits they read (1,a)(1,b) and (0,a')(0,b')
    std::set<std::pair<int, int>> bitpairs;
    for (const auto& l : t.enc.logical_labels)
        bitpairs.insert({l[0].level, l[1].level});
    CHECK(bitpairs == std::set<std::pair<int, int>>{{1, 1}, {0, 0}});

    // chain-map property: delta(Enc x) = 0 for all x
    for (int mask = 0; mask < 4; ++mask) {
        BitVector x(2);
        for (int j = 0; j < 2; ++j)
            if ((mask >> j) & 1) x.set(j, true);
        CHECK(t.code.hz.mul(t.enc.encode(x)).is_zero());
    }
    CHECK(encoding_valid(t.code, t.enc));
}

TEST_CASE("dual pairing is the identity on logical labels") {
    auto check_pairing = [](const ProductCode& p) {
        REQUIRE(p.enc_dual.gen.cols() == p.code.k);
        // dual columns are cycles
        for (int j = 0; j < p.code.k; ++j)
            CHECK(p.code.hx.mul(p.enc_dual.gen.col(j)).is_zero());
        // labels pair up one-to-one
        for (int a = 0; a < p.code.k; ++a) {
            CHECK(p.enc.logical_labels[a] == p.enc_dual.logical_labels[a]);
            for (int b = 0; b < p.code.k; ++b) {
                bool dot = p.enc.gen.col(a).dot(p.enc_dual.gen.col(b));
                CHECK(dot == (a == b));
            }
        }
    };
    check_pairing(toric(3));
    check_pairing(build_product_code({pendant_graph(2), cycle_graph(3)}, {true, false}, 1));
    check_pairing(build_product_code(
        {pendant_graph(2), pendant_graph(2), pendant_graph(2)}, {true, true, false}, 2));
}

TEST_CASE("pairing invariant under representative shifts (eq. x.x' = y.y')") {
    auto t = toric(3);
    Rng rng(3);
    auto cob = t.code.coboundary_basis();
    auto bnd = t.code.boundary_basis();
    for (int trial = 0; trial < 40; ++trial) {
        BitVector x(BitVector::random(t.code.k, rng));
        BitVector xp(BitVector::random(t.code.k, rng));
        BitVector y = t.enc.encode(x);
        BitVector yp = t.enc_dual.encode(xp);
        // shift representatives by random (co)boundaries
        for (const auto& b : cob)
            if (rng.bit()) y.xor_in(b);
        for (const auto& b : bnd)
            if (rng.bit()) yp.xor_in(b);
        CHECK(y.dot(yp) == x.dot(xp));
    }
}

TEST_CASE("logical_decode") {
    auto t = toric(4);
    LogicalDecoder dec(t.code, t.enc);
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        BitVector x = BitVector::random(t.code.k, rng);
        BitVector z = t.enc.encode(x);
        auto got = dec.decode(z);
        REQUIRE(got.has_value());
        CHECK(*got == x);

        // coset invariance: add a coboundary
        BitVector c = BitVector::random(t.complex.level_size(0), rng);
        BitVector z2 = z ^ t.complex.delta[0].mul(c);
        auto got2 = dec.decode(z2);
        REQUIRE(got2.has_value());
        CHECK(*got2 == x);
    }
    // non-cocycle input is rejected
    BitVector bad(t.code.n);
    bad.set(0, true);
    if (t.code.hz.mul(bad).is_zero()) bad.set(1, true);
    CHECK(!dec.decode(bad).has_value());
}

TEST_CASE("logical_class_trivial") {
    auto t = toric(3);
    CHECK(logical_class_trivial(t.code, BitVector(t.code.n), true));
    Rng rng(5);
    BitVector c = BitVector::random(t.complex.level_size(0), rng);
    CHECK(logical_class_trivial(t.code, t.complex.delta[0].mul(c), true));
    CHECK(!logical_class_trivial(t.code, t.enc.gen.col(0), true));
    CHECK(!logical_class_trivial(t.code, t.enc_dual.gen.col(0), false));
    BitVector d = BitVector::random(t.complex.level_size(2), rng);
    CHECK(logical_class_trivial(t.code, t.complex.delta[1].transposed().mul(d), false));
}

TEST_CASE("enc_restricted satisfies the restriction identity") {
    auto a = cycle_graph(3);
    auto b = cycle_graph(4);
    auto p = build_product_code({a, b}, {true, true}, 1);

    // L: a singleton inside M^{B,1}
    auto binfo = p.factor_encs[1].m1;
    REQUIRE(binfo.size() == 1);
    std::vector<int> L = {binfo[0]};

    auto restricted = restrict_last_factor({p.oriented[0], p.oriented[1]}, L);
    auto enc_r = enc_restricted(p.complex, restricted, p.enc, L);

    // identity: Enc(x)|_{C_Lbar} = Enc_Lbar(x|_{M_Lbar}) for every basis x
    for (int j = 0; j < p.code.k; ++j) {
        BitVector x = BitVector::unit(p.code.k, j);
        BitVector full = p.enc.encode(x);
        BitVector restr_full(restricted.level_size(1));
        for (int ci : full.support()) {
            int ri = restricted.cell_index(1, p.complex.cells[1][ci]);
            if (ri >= 0) restr_full.set(ri, true);
        }
        BitVector xr(int(enc_r.logical_labels.size()));
        for (size_t t2 = 0; t2 < enc_r.logical_labels.size(); ++t2) {
            int full_idx = p.enc.label_index(enc_r.logical_labels[t2]);
            REQUIRE(full_idx >= 0);
            if (x.get(full_idx)) xr.set(int(t2), true);
        }
        CHECK(enc_r.encode(xr) == restr_full);
    }

    // L = empty keeps everything
    auto enc_r0 = enc_restricted(p.complex, p.complex, p.enc, {});
    CHECK(enc_r0.gen == p.enc.gen);
}

TEST_CASE("mask labels of a three-factor instance cover L^r") {
    // r = 3, one cochain factor: mask logicals are all (1,a)(1,b)(1,c)
    auto g = pendant_graph(2);
    auto p = build_product_code({g, g, g}, {true, false, false}, 1);
    auto [L, rep] = build_extendable_family(g);
    CHECK(rep.extendable_ok);
    REQUIRE(int(L.size()) >= 1);
    int found = 0;
    for (int a : L)
        for (int b : L)
            for (int c : L) {
                CellLabel l = {Cell{1, a}, Cell{1, b}, Cell{1, c}};
                if (p.enc.label_index(l) >= 0) ++found;
            }
    CHECK(found == int(L.size() * L.size() * L.size()));
}

TEST_CASE("code report writer emits labels") {
    auto t = toric(3);
    std::ostringstream os;
    write_code_report(os, t.code, t.enc, locality(t.complex), ">=3");
    auto s = os.str();
    CHECK(s.find("\"n\": 18") != std::string::npos);
    CHECK(s.find("\"k\": 2") != std::string::npos);
}
