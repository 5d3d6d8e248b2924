#pragma once

#include <vector>

#include "mrn/network.hpp"

namespace mrn {

// Disaggregated accumulations: n[i][j] vehicles currently in region i whose
// destination is region j. Row sums give the aggregated accumulation N_i.
struct NetworkState {
    int k = 0;
    std::vector<double> n; // k*k, row-major

    double& at(int i, int j) { return n[static_cast<std::size_t>(i) * k + j]; }
    double at(int i, int j) const { return n[static_cast<std::size_t>(i) * k + j]; }
};

NetworkState empty_state(int k);

// Aggregated accumulation of region i.
double region_total(const NetworkState& state, int i);

// Vehicles in the whole network.
double network_total(const NetworkState& state);

// Split rates theta[i][h][j]: share of region i's flow toward destination j
// that crosses next into region h. Disallowed triples are identically zero;
// internal cells carry theta[i][i][i] = 1.
struct SplitRates {
    int k = 0;
    std::vector<double> theta; // k*k*k

    double& at(int i, int h, int j) {
        return theta[(static_cast<std::size_t>(i) * k + h) * k + j];
    }
    double at(int i, int h, int j) const {
        return theta[(static_cast<std::size_t>(i) * k + h) * k + j];
    }
};

// Equal shares over each pair's allowed stop-overs.
SplitRates uniform_splits(const Topology& topo);

// All flow on the direct next-hop where the destination is adjacent,
// equal shares otherwise. Free-flow shortest-path routing.
SplitRates direct_splits(const Topology& topo);

// Checks simplex structure: zeros off the allowed pattern, rows summing to 1
// within tol, entries within [0,1]. Throws DomainError on violation.
void validate_splits(const SplitRates& splits, const Topology& topo, double tol = 1e-9);

} // namespace mrn
