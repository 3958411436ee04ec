#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <vector>

#include "qldpc/rng.hpp"

// Bad-set family machinery: exact avoidance checking on small graphs, the
// greedy cluster-growth density audit used at scale, the percolation bound
// formula, and its Monte Carlo validation.

namespace qldpc {

struct SimpleGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;

    static SimpleGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
        SimpleGraph g;
        g.n = n;
        g.adj.resize(n);
        std::set<std::pair<int, int>> seen;
        for (auto [a, b] : edges) {
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            if (!seen.insert({a, b}).second) continue;
            g.adj[a].push_back(b);
            g.adj[b].push_back(a);
        }
        return g;
    }

    static SimpleGraph path(int n) {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
        return from_edges(n, e);
    }

    static SimpleGraph cycle(int n) {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
        return from_edges(n, e);
    }

    static SimpleGraph grid(int rows, int cols) {
        std::vector<std::pair<int, int>> e;
        auto id = [cols](int r, int c) { return r * cols + c; };
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                if (c + 1 < cols) e.push_back({id(r, c), id(r, c + 1)});
                if (r + 1 < rows) e.push_back({id(r, c), id(r + 1, c)});
            }
        return from_edges(rows * cols, e);
    }

    int max_degree() const {
        int d = 0;
        for (const auto& a : adj) d = std::max(d, int(a.size()));
        return d;
    }
};

struct AvoidanceResult {
    bool avoiding = true;
    std::vector<int> witness;  // a connected V' with |V'| >= eta and density >= gamma
    int64_t explored = 0;
};

// Exact check: F avoids E(G, eta, gamma) iff no connected vertex set V' with
// |V'| >= eta has |F cap V'| >= gamma |V'|. Exhaustive connected-subset
// enumeration with density pruning; feasible at |V| <= ~30 with sparse F.
inline AvoidanceResult is_avoiding_exact(const SimpleGraph& g, const std::vector<int>& f,
                                         int eta, double gamma,
                                         int64_t budget = 50'000'000) {
    AvoidanceResult res;
    if (eta <= 0) throw std::invalid_argument("is_avoiding_exact: eta must be positive");
    std::vector<char> in_f(g.n, 0);
    for (int v : f) in_f[v] = 1;
    int f_total = 0;
    for (char b : in_f) f_total += b;

    // quick out: fewer than ceil(gamma*eta) marked vertices can never reach
    // density gamma at size >= eta
    if (double(f_total) < gamma * eta) return res;

    std::vector<char> in_s(g.n, 0), banned(g.n, 0);
    std::vector<int> members;

    // grow connected sets containing root, avoiding earlier roots
    std::function<bool(int, int)> grow = [&](int f_count, int root) -> bool {
        if (++res.explored > budget)
            throw std::runtime_error("is_avoiding_exact: enumeration budget exceeded");
        int s = int(members.size());
        if (s >= eta && double(f_count) >= gamma * s) {
            res.avoiding = false;
            res.witness = members;
            return true;
        }
        // optimistic completion: the density optimum over future growth is
        // attained either when just reaching size eta or after absorbing
        // every remaining F vertex
        int rf = f_total - f_count;
        int g1 = std::max(0, std::min(rf, eta - s));
        double d1 = double(f_count + g1) / std::max(eta, s + g1);
        double d2 = double(f_count + rf) / std::max(eta, s + rf);
        if (std::max(d1, d2) < gamma) return false;

        // frontier: lowest-index unbanned neighbor extensions
        std::vector<int> frontier;
        for (int v : members)
            for (int u : g.adj[v])
                if (!in_s[u] && !banned[u] && u != root) frontier.push_back(u);
        std::sort(frontier.begin(), frontier.end());
        frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
        // standard connected-enumeration: choose each frontier vertex as the
        // next member; once skipped it stays excluded within this branch
        std::vector<int> locally_banned;
        for (int u : frontier) {
            in_s[u] = 1;
            members.push_back(u);
            if (grow(f_count + in_f[u], root)) return true;
            members.pop_back();
            in_s[u] = 0;
            banned[u] = 1;
            locally_banned.push_back(u);
        }
        for (int u : locally_banned) banned[u] = 0;
        return false;
    };

    std::vector<char> root_done(g.n, 0);
    for (int root = 0; root < g.n; ++root) {
        members = {root};
        in_s[root] = 1;
        bool found = grow(in_f[root], -1);
        in_s[root] = 0;
        if (found) return res;
        banned[root] = 1;  // sets containing root were fully explored
    }
    return res;
}

struct ClusterAudit {
    double max_density = 0.0;  // over grown clusters of size >= eta
    int clusters_grown = 0;
    std::vector<int> worst_cluster;
};

// Greedy closure statistic: components of G[F] are merged through bridge
// vertices whenever that captures more of F, then padded to size eta. A
// reported density >= gamma always exhibits a genuine bad set; clusters that
// cannot reach size eta are vacuous.
inline ClusterAudit cluster_density_audit(const SimpleGraph& g, const std::vector<int>& f,
                                          int eta) {
    ClusterAudit audit;
    std::vector<char> in_f(g.n, 0);
    for (int v : f) in_f[v] = 1;
    std::vector<char> used(g.n, 0);

    for (int start : f) {
        if (used[start]) continue;
        // component of G[F] containing start
        std::set<int> cluster = {int(start)};
        std::vector<int> stack = {start};
        used[start] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u : g.adj[v])
                if (in_f[u] && !cluster.count(u)) {
                    cluster.insert(u);
                    used[u] = 1;
                    stack.push_back(u);
                }
        }
        // merge nearby F through single bridge vertices while it helps
        bool merged = true;
        while (merged) {
            merged = false;
            for (int v : std::vector<int>(cluster.begin(), cluster.end())) {
                for (int u : g.adj[v]) {
                    if (cluster.count(u)) continue;
                    int gain = 0;
                    for (int w : g.adj[u])
                        if (in_f[w] && !cluster.count(w)) ++gain;
                    if (in_f[u] || gain > 0) {
                        cluster.insert(u);
                        if (in_f[u]) used[u] = 1;
                        for (int w : g.adj[u])
                            if (in_f[w] && !cluster.count(w)) {
                                cluster.insert(w);
                                used[w] = 1;
                            }
                        merged = true;
                    }
                }
            }
        }
        // pad with arbitrary neighbors (lowest index) up to eta
        while (int(cluster.size()) < eta) {
            int best = -1;
            for (int v : cluster)
                for (int u : g.adj[v])
                    if (!cluster.count(u) && (best < 0 || u < best)) best = u;
            if (best < 0) break;  // component exhausted
            cluster.insert(best);
        }
        if (int(cluster.size()) < eta) continue;  // vacuous
        int hits = 0;
        for (int v : cluster) hits += in_f[v];
        double density = double(hits) / double(cluster.size());
        ++audit.clusters_grown;
        if (density > audit.max_density) {
            audit.max_density = density;
            audit.worst_cluster.assign(cluster.begin(), cluster.end());
        }
    }
    return audit;
}

// Exact percolation bound |V| * 2 (e*eps/gamma)^eta. The bound is only a
// theorem under the stated preconditions; require_preconditions = false
// evaluates the bare formula.
inline double percolation_bound(int vertex_count, int max_degree, double eta, double gamma,
                                double eps, bool require_preconditions = true) {
    const double e = std::exp(1.0);
    if (require_preconditions) {
        if (!(eps <= gamma / e))
            throw std::invalid_argument("percolation_bound: need eps <= gamma/e");
        if (!(max_degree * max_degree * std::pow(e * eps / gamma, gamma) <= 0.5))
            throw std::invalid_argument(
                "percolation_bound: need Delta^2 (e eps/gamma)^gamma <= 1/2");
    }
    return vertex_count * 2.0 * std::pow(e * eps / gamma, eta);
}

struct McPercolation {
    int64_t trials = 0;
    int64_t violations = 0;
    double frequency = 0;
    double wilson_low = 0;   // one-sided lower confidence bound
    double wilson_high = 1;  // one-sided upper confidence bound
};

inline McPercolation mc_percolation(const SimpleGraph& g, double p, int eta, double gamma,
                                    int64_t trials, uint64_t seed, double z = 2.576) {
    McPercolation res;
    res.trials = trials;
    Rng rng(seed);
    for (int64_t t = 0; t < trials; ++t) {
        std::vector<int> f;
        for (int v = 0; v < g.n; ++v)
            if (rng.bernoulli(p)) f.push_back(v);
        if (double(f.size()) < gamma * eta) continue;  // cannot violate
        auto check = is_avoiding_exact(g, f, eta, gamma);
        if (!check.avoiding) ++res.violations;
    }
    res.frequency = double(res.violations) / double(trials);
    double n = double(trials), ph = res.frequency, z2 = z * z;
    double denom = 1 + z2 / n;
    double center = (ph + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
    res.wilson_low = std::max(0.0, center - half);
    res.wilson_high = std::min(1.0, center + half);
    return res;
}

inline void write_percolation_csv_row(std::ostream& os, int64_t trial, int f_size,
                                      double worst_density, bool avoiding) {
    os << trial << ',' << f_size << ',' << worst_density << ',' << (avoiding ? 1 : 0)
       << '\n';
}

}  // namespace qldpc
