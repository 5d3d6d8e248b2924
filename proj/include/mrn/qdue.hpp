#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mrn/plant.hpp"

namespace mrn {

struct ChoiceSpec {
    double mu = 1.0;               // logit scale, 1/CHF
    double vot_chf_per_hour = 27.0;
};

// Dense k*k matrices; entries for non-adjacent pairs are computed but unused
// by routing, which walks the adjacency only.
struct TravelTimeMatrix {
    int k = 0;
    std::vector<double> tau; // seconds

    double at(int i, int h) const { return tau[static_cast<std::size_t>(i) * k + h]; }
};

struct CostMatrix {
    int k = 0;
    std::vector<double> c; // CHF

    double at(int i, int h) const { return c[static_cast<std::size_t>(i) * k + h]; }
    double& at(int i, int h) { return c[static_cast<std::size_t>(i) * k + h]; }
};

struct PriceMatrix {
    int k = 0;
    std::vector<double> p; // CHF, nonnegative, diagonal zero

    double at(int i, int h) const { return p[static_cast<std::size_t>(i) * k + h]; }
    double& at(int i, int h) { return p[static_cast<std::size_t>(i) * k + h]; }
};

PriceMatrix zero_prices(int k);

// Time to traverse a region at accumulation n: n / G(n), with the free-flow
// limit 1/c at n = 0 and a finite ceiling when the outflow vanishes.
double region_travel_time(const RegionParams& params, double n);

// tau[i][h] = travel time in i plus travel time in h.
TravelTimeMatrix travel_time_matrix(const NetworkState& state, const std::vector<RegionParams>& regions);

// c[i][h] = tau[i][h] * vot / 3600 (+ toll when prices are given).
CostMatrix generalized_costs(const TravelTimeMatrix& tt, const ChoiceSpec& spec,
                             const PriceMatrix* prices = nullptr);

// Cheapest-continuation distances from `source` to every region over the
// border graph with edge weights costs[u][v].
std::vector<double> dijkstra_costs(const CostMatrix& costs, const Topology& topo, int source);

// Cost of the cheapest path i -> h -> ... -> j whose first stop-over is h.
// Unreachable destinations yield +infinity.
double shortest_path_cost(const CostMatrix& costs, const Topology& topo, int i, int h, int j);

// Multinomial logit shares over alternatives with the given generalized
// costs. Infinite-cost alternatives get probability zero; throws DomainError
// when no alternative is finite.
std::vector<double> mnl_split(const std::vector<double>& alternative_costs, double mu);

struct QdueRun {
    Trajectory trajectory;
    std::vector<SplitRates> splits;  // one per step, used during that step
    std::vector<CostMatrix> costs;   // per step, untolled generalized costs
    std::vector<PriceMatrix> prices; // per step, zero matrices when untolled
};

// Prices applied during a step; return nullptr for none.
using PriceProvider = std::function<const PriceMatrix*(int step, const NetworkState& state)>;

// Reactive user-equilibrium simulation: each step recomputes costs from the
// step-start state (plus tolls when provided), enumerates the first-hop
// alternatives per OD pair, applies logit splits, then advances the plant.
QdueRun run_qdue(const Topology& topo,
                 const std::vector<RegionParams>& regions,
                 const DemandProfile& demand,
                 const ChoiceSpec& choice,
                 int steps,
                 double dt,
                 const PriceProvider& prices = nullptr);

} // namespace mrn
