#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>

#include "qldpc/badsets.hpp"

using namespace qldpc;

namespace {

// Reference implementation: enumerate every subset of vertices, keep the
// connected ones, and test density directly. Only for |V| <= ~16.
bool brute_avoiding(const SimpleGraph& g, const std::vector<int>& f, int eta,
                    double gamma) {
    std::vector<char> in_f(g.n, 0);
    for (int v : f) in_f[v] = 1;
    for (uint32_t mask = 1; mask < (1u << g.n); ++mask) {
        int size = std::popcount(mask);
        if (size < eta) continue;
        // connected?
        int first = std::countr_zero(mask);
        uint32_t seen = 1u << first;
        std::vector<int> stack = {first};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : g.adj[v])
                if ((mask >> u) & 1 && !((seen >> u) & 1)) {
                    seen |= 1u << u;
                    stack.push_back(u);
                }
        }
        if (seen != mask) continue;
        int hits = 0;
        for (int v = 0; v < g.n; ++v)
            if (((mask >> v) & 1) && in_f[v]) ++hits;
        if (double(hits) >= gamma * size) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("is_avoiding_exact basics") {
    auto g = SimpleGraph::path(10);

    CHECK(is_avoiding_exact(g, {}, 4, 0.5).avoiding);

    // F = V is never avoiding (when eta <= |V|, gamma <= 1)
    std::vector<int> all;
    for (int v = 0; v < 10; ++v) all.push_back(v);
    auto full = is_avoiding_exact(g, all, 10, 1.0);
    CHECK(!full.avoiding);
    CHECK(int(full.witness.size()) >= 10);

    // alternating vertices on P10 at eta=10, gamma=0.6: max density 0.5
    std::vector<int> alternating = {0, 2, 4, 6, 8};
    CHECK(is_avoiding_exact(g, alternating, 10, 0.6).avoiding);
    CHECK(!is_avoiding_exact(g, alternating, 10, 0.5).avoiding);
}

TEST_CASE("is_avoiding_exact agrees with subset brute force") {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        SimpleGraph g;
        switch (trial % 3) {
            case 0: g = SimpleGraph::path(10); break;
            case 1: g = SimpleGraph::cycle(10); break;
            default: g = SimpleGraph::grid(3, 4); break;
        }
        std::vector<int> f;
        for (int v = 0; v < g.n; ++v)
            if (rng.below(3) == 0) f.push_back(v);
        int eta = 2 + int(rng.below(5));
        double gamma = 0.3 + 0.1 * double(rng.below(7));
        CHECK(is_avoiding_exact(g, f, eta, gamma).avoiding ==
              brute_avoiding(g, f, eta, gamma));
    }
}

TEST_CASE("avoidance is monotone in F") {
    Rng rng(7);
    auto g = SimpleGraph::grid(3, 4);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<int> f;
        for (int v = 0; v < g.n; ++v)
            if (rng.below(2) == 0) f.push_back(v);
        int eta = 3 + int(rng.below(4));
        double gamma = 0.5;
        if (is_avoiding_exact(g, f, eta, gamma).avoiding && !f.empty()) {
            // shrinking F keeps it avoiding
            std::vector<int> smaller(f.begin(), f.end() - 1);
            CHECK(is_avoiding_exact(g, smaller, eta, gamma).avoiding);
        }
    }
}

TEST_CASE("cluster_density_audit") {
    auto g = SimpleGraph::path(20);

    // isolated single faults with eta too large to reach: vacuous
    auto audit = cluster_density_audit(g, {5}, 30);
    CHECK(audit.clusters_grown == 0);

    // dense blob of size >= eta reports density near 1
    std::vector<int> blob = {3, 4, 5, 6, 7, 8};
    auto audit2 = cluster_density_audit(g, blob, 6);
    CHECK(audit2.clusters_grown >= 1);
    CHECK(audit2.max_density == 1.0);

    // soundness vs the exact check on small random instances: whenever the
    // audit reports a violation the exact check confirms it
    Rng rng(9);
    for (int trial = 0; trial < 60; ++trial) {
        SimpleGraph h = (trial % 2) ? SimpleGraph::grid(3, 4) : SimpleGraph::cycle(12);
        std::vector<int> f;
        for (int v = 0; v < h.n; ++v)
            if (rng.below(3) == 0) f.push_back(v);
        int eta = 3 + int(rng.below(4));
        double gamma = 0.4 + 0.1 * double(rng.below(5));
        auto a = cluster_density_audit(h, f, eta);
        if (a.clusters_grown > 0 && a.max_density >= gamma)
            CHECK(!is_avoiding_exact(h, f, eta, gamma).avoiding);
    }
}

TEST_CASE("percolation_bound formula") {
    // eps = 0 -> bound 0
    CHECK(percolation_bound(50, 3, 8, 0.5, 0.0) == 0.0);

    // |V|=100, Delta=3, eta=10, gamma=0.5, eps=0.05: 200 * (e*0.1)^10
    // (bare formula; these parameters do not meet the degree precondition)
    double expect = 200.0 * std::pow(std::exp(1.0) * 0.1, 10.0);
    CHECK(std::abs(percolation_bound(100, 3, 10, 0.5, 0.05, false) - expect) < 1e-12);

    // doubling eta squares the (e eps/gamma)^eta factor
    double b1 = percolation_bound(1, 2, 6, 0.5, 0.03, false) / 2.0;
    double b2 = percolation_bound(1, 2, 12, 0.5, 0.03, false) / 2.0;
    CHECK(std::abs(b2 - b1 * b1) < 1e-15);

    // violated preconditions are rejected with a reason
    CHECK_THROWS(percolation_bound(10, 3, 5, 0.5, 0.4));   // eps > gamma/e
    CHECK_THROWS(percolation_bound(10, 9, 5, 0.2, 0.07));  // degree condition
}

TEST_CASE("mc_percolation endpoints") {
    auto g = SimpleGraph::cycle(12);
    auto zero = mc_percolation(g, 0.0, 4, 0.5, 200, 1);
    CHECK(zero.violations == 0);

    auto one = mc_percolation(g, 1.0, 4, 0.5, 50, 1);
    CHECK(one.violations == 50);
    CHECK(one.frequency == 1.0);
}

TEST_CASE("mc_percolation frequency below bound at high confidence") {
    // small graph meeting the preconditions: Delta = 2, gamma = 0.9,
    // eps = 0.03 gives Delta^2 (e eps/gamma)^gamma = 4 * 0.0906^0.9 < 1/2
    auto g = SimpleGraph::path(16);
    double gamma = 0.9, eps = 0.03;
    int eta = 6;
    double bound = percolation_bound(g.n, g.max_degree(), eta, gamma, eps);
    auto mc = mc_percolation(g, eps, eta, gamma, 4000, 11);
    // one-sided: the lower confidence bound for the true rate stays below
    // the formula bound
    CHECK(mc.wilson_low <= bound);
}
