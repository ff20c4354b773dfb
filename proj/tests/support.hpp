#pragma once
// Test-only helpers and independent oracles. Nothing here is linked into the
// library; the oracles are written from the formulas, not from the engine code.

#include "engram/memory_graph.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace engram {

struct GistWriteKeyTestAccess {
    static GistWriteKey key() { return GistWriteKey{}; }
};

}  // namespace engram

namespace oracle {

/// Undirected weighted graph on nodes 0..n-1; w[i][j] == 0 means no edge.
struct SmallGraph {
    int n = 0;
    std::vector<std::vector<double>> w;

    [[nodiscard]] int edges() const {
        int e = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) e += w[i][j] > 0 ? 1 : 0;
        return e;
    }
};

/// Random graph with n nodes and up to max_edges distinct edges, weights in (0,1].
inline SmallGraph random_graph(std::mt19937_64& rng, int n, int max_edges) {
    SmallGraph g{n, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))};
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    const int target = n > 1 ? std::uniform_int_distribution<int>(0, max_edges)(rng) : 0;
    for (int k = 0; k < target * 3 && g.edges() < target; ++k) {
        int a = pick(rng), b = pick(rng);
        if (a == b || g.w[a][b] > 0) continue;
        g.w[a][b] = g.w[b][a] = weight(rng);
    }
    return g;
}

/// Sum over every ordered tuple (seed, v1..vL) of distinct nodes, L <= hops,
/// whose consecutive pairs are edges, of seed * prod(w) * decay^L. Each tuple
/// is checked by odometer enumeration of all n^L candidates. Seeds keep their
/// seed activation; totals are clamped to 1 and dropped below the floor.
/// Returns -1 for nodes absent from the map.
inline std::vector<double> spread(const SmallGraph& g, const std::map<int, double>& seeds, double decay, int hops,
                                  double floor) {
    std::vector<double> acc(g.n, 0.0);
    for (const auto& [s, a] : seeds) {
        for (int len = 1; len <= hops; ++len) {
            std::vector<int> t(len, 0);
            while (true) {
                bool ok = true;
                double value = a;
                int prev = s;
                for (int i = 0; i < len && ok; ++i) {
                    if (t[i] == s) ok = false;
                    for (int j = 0; j < i && ok; ++j) ok = t[j] != t[i];
                    if (ok && g.w[prev][t[i]] <= 0) ok = false;
                    if (ok) value *= g.w[prev][t[i]] * decay;
                    prev = t[i];
                }
                if (ok && !seeds.contains(t[len - 1])) acc[t[len - 1]] += value;
                int k = len - 1;
                while (k >= 0 && ++t[k] == g.n) t[k--] = 0;
                if (k < 0) break;
            }
        }
    }
    std::vector<double> out(g.n, -1.0);
    for (int i = 0; i < g.n; ++i) {
        double v = seeds.contains(i) ? seeds.at(i) : std::min(1.0, acc[i]);
        if ((seeds.contains(i) || acc[i] > 0) && v >= floor) out[i] = v;
    }
    return out;
}

/// Best path product from any query node to every node, over all simple
/// paths of any length (exhaustive DFS). -1 for unreachable nodes.
inline std::vector<double> relevance(const SmallGraph& g, const std::vector<int>& query) {
    std::vector<double> best(g.n, -1.0);
    std::vector<bool> on(g.n, false);
    std::function<void(int, double)> dfs = [&](int v, double p) {
        best[v] = std::max(best[v], p);
        on[v] = true;
        for (int u = 0; u < g.n; ++u)
            if (!on[u] && g.w[v][u] > 0) dfs(u, p * g.w[v][u]);
        on[v] = false;
    };
    for (int q : query) dfs(q, 1.0);
    return best;
}

/// Spearman rho as the Pearson correlation of average ranks, ranks computed
/// by counting (O(n^2)).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double o : v) {
                less += o < v[i] ? 1 : 0;
                equal += o == v[i] ? 1 : 0;
            }
            r[i] = less + (equal + 1) / 2.0;
        }
        return r;
    };
    auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxx == 0 || syy == 0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle

namespace engram {

/// Loads a SmallGraph into a MemoryGraph as concepts c0..c{n-1}.
inline std::vector<NodeId> load_small(MemoryGraph& mg, const oracle::SmallGraph& g) {
    std::vector<NodeId> ids;
    for (int i = 0; i < g.n; ++i) ids.push_back(mg.add_concept("c" + std::to_string(i), 0));
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.w[i][j] > 0) mg.connect(ids[i], ids[j], g.w[i][j], 0);
    return ids;
}

}  // namespace engram
