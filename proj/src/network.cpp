#include "mrn/network.hpp"

#include <algorithm>
#include <queue>

#include "mrn/errors.hpp"

namespace mrn {

Topology make_topology(int k, const std::vector<std::uint8_t>& adjacency) {
    Topology t;
    t.k = k;
    t.adj = adjacency;
    t.neighbors.assign(static_cast<std::size_t>(k), {});
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (adjacency[static_cast<std::size_t>(i) * k + j]) t.neighbors[i].push_back(j);
        }
    }
    validate_topology(t);
    return t;
}

void validate_topology(const Topology& topo) {
    const int k = topo.k;
    if (k < 2) throw ConfigError("topology: need at least 2 regions");
    if (topo.adj.size() != static_cast<std::size_t>(k) * k) {
        throw ConfigError("topology: adjacency matrix size mismatch");
    }
    for (int i = 0; i < k; ++i) {
        if (topo.adj[static_cast<std::size_t>(i) * k + i]) {
            throw ConfigError("topology: region " + std::to_string(i + 1) + " adjacent to itself");
        }
        for (int j = 0; j < k; ++j) {
            if (topo.adj[static_cast<std::size_t>(i) * k + j] != topo.adj[static_cast<std::size_t>(j) * k + i]) {
                throw ConfigError("topology: adjacency not symmetric at (" + std::to_string(i + 1) +
                                  "," + std::to_string(j + 1) + ")");
            }
        }
        if (topo.neighbors[i].empty()) {
            throw ConfigError("topology: region " + std::to_string(i + 1) + " has no neighbors");
        }
    }
    // Reachability from region 0; disconnected parts make some ODs unservable.
    std::vector<char> seen(static_cast<std::size_t>(k), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : topo.neighbors[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        if (!seen[i]) throw ConfigError("topology: region " + std::to_string(i + 1) + " unreachable");
    }
}

std::vector<int> allowed_stopovers(const Topology& topo, int i, int j) {
    if (i == j) return {i};
    return topo.neighbors[i];
}

std::vector<Triple> transfer_triples(const Topology& topo) {
    std::vector<Triple> out;
    for (int i = 0; i < topo.k; ++i) {
        for (int j = 0; j < topo.k; ++j) {
            if (j == i) continue;
            for (int h : topo.neighbors[i]) out.push_back({i, h, j});
        }
    }
    return out;
}

std::vector<std::pair<int, int>> ordered_border_pairs(const Topology& topo) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < topo.k; ++i) {
        for (int h : topo.neighbors[i]) out.emplace_back(i, h);
    }
    return out;
}

double boundary_capacity(const RegionParams& params, double n_h) {
    if (n_h < 0.0) throw DomainError("boundary_capacity: negative accumulation");
    if (n_h <= params.critical) return params.capacity_max;
    if (n_h >= params.n_jam) return 0.0;
    return params.capacity_max * (params.n_jam - n_h) / (params.n_jam - params.critical);
}

void finalize_region(RegionParams& params) {
    if (!(params.n_jam > 0.0)) throw ConfigError(params.name + ": n_jam must be positive");
    if (params.mfd.n_jam == 0.0) params.mfd.n_jam = params.n_jam;
    if (params.mfd.n_jam != params.n_jam) {
        throw ConfigError(params.name + ": outflow curve domain differs from n_jam");
    }
    if (!(params.capacity_max > 0.0)) throw ConfigError(params.name + ": capacity_max must be positive");
    if (!(params.avg_trip_length_m > 0.0)) throw ConfigError(params.name + ": avg_trip_length_m must be positive");
    validate_mfd(params.mfd, params.name);
    params.critical = critical_accumulation(params.mfd);
    params.max_outflow = mfd_outflow(params.mfd, params.critical);
    // Finite travel-time ceiling: ten times the estimate just inside jam. Walk
    // back from n_jam until the outflow is meaningfully positive.
    double n = params.n_jam;
    double g = mfd_outflow(params.mfd, n);
    while (g < 1e-9 && n > 1.0) {
        n -= 1.0;
        g = mfd_outflow(params.mfd, n);
    }
    params.tau_cap = 10.0 * params.n_jam / std::max(g, 1e-9);
}

} // namespace mrn
