#pragma once

#include <string>
#include <vector>

#include "mrn/mfd.hpp"

namespace mrn {

struct RegionParams {
    std::string name;
    double area_km2 = 0.0;
    double n_detectors = 0.0;
    double n_jam = 0.0;            // vehicles
    double avg_trip_length_m = 0.0;
    double capacity_max = 0.0;     // vehicles/second accepted across the border
    MfdPolynomial mfd;

    // Derived on load.
    double critical = 0.0;     // argmax of the outflow curve
    double max_outflow = 0.0;  // G at critical
    double tau_cap = 0.0;      // finite ceiling for travel time near gridlock
};

struct Topology {
    int k = 0;
    std::vector<std::uint8_t> adj;          // k*k, symmetric, zero diagonal
    std::vector<std::vector<int>> neighbors; // sorted ascending per region

    bool adjacent(int i, int j) const { return adj[static_cast<std::size_t>(i) * k + j] != 0; }
};

// A routing option (origin, first stop-over, destination). Internal trips are
// the degenerate triple i == h == j.
struct Triple {
    int i = 0;
    int h = 0;
    int j = 0;
};

Topology make_topology(int k, const std::vector<std::uint8_t>& adjacency);

// Throws ConfigError on asymmetric adjacency, self loops, isolated or
// unreachable regions.
void validate_topology(const Topology& topo);

// First stop-over candidates for an origin/destination pair: the origin's
// neighbors for i != j, the region itself for an internal trip.
std::vector<int> allowed_stopovers(const Topology& topo, int i, int j);

// All transfer triples (i != j) in fixed order: origin ascending, destination
// ascending, stop-over ascending. This order also defines feature layouts and
// CSV columns.
std::vector<Triple> transfer_triples(const Topology& topo);

// Ordered adjacent pairs (i, h), ascending. Order shared with toll schedules
// and flow features.
std::vector<std::pair<int, int>> ordered_border_pairs(const Topology& topo);

// Vehicles/second region h accepts from upstream: constant capacity_max up to
// the critical accumulation, then linearly down to zero at n_jam.
double boundary_capacity(const RegionParams& params, double n_h);

// Fills the derived fields (critical, max_outflow, tau_cap) and validates.
void finalize_region(RegionParams& params);

} // namespace mrn
