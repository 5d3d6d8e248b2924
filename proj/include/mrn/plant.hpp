#pragma once

#include <functional>
#include <vector>

#include "mrn/demand.hpp"
#include "mrn/network.hpp"
#include "mrn/state.hpp"

namespace mrn {

// Realized flows of one simulation step (vehicles/second, after receiving
// capacity and cell availability corrections).
struct FlowRecord {
    int k = 0;
    std::vector<double> m_ii;              // k: internal trip completions
    std::vector<double> m_ihj;             // k*k*k: transfer flows, zeros off-pattern
    std::vector<std::uint8_t> cap_clamped; // k*k*k: receiving capacity bound the flow
    std::vector<std::uint8_t> rescaled;    // k*k cells: availability rescaling applied
    std::vector<int> jam_violations;       // regions exceeding n_jam after the update

    double transfer(int i, int h, int j) const {
        return m_ihj[(static_cast<std::size_t>(i) * k + h) * k + j];
    }
    // Aggregate flow crossing the border i -> h during the step.
    double border_flow(int i, int h) const {
        double sum = 0.0;
        for (int j = 0; j < k; ++j) sum += transfer(i, h, j);
        return sum;
    }
};

// One forward-Euler step of the reservoir dynamics. `q` holds the step-mean
// exogenous OD demand rates (veh/s, k*k row-major). Receiving capacities are
// evaluated at the step-start state; when a cell's outflow would overdraw its
// content, all its outflows are scaled down proportionally.
std::pair<NetworkState, FlowRecord> plant_step(const NetworkState& state,
                                               const SplitRates& splits,
                                               const std::vector<double>& q,
                                               const Topology& topo,
                                               const std::vector<RegionParams>& regions,
                                               double dt);

struct Trajectory {
    double dt = 0.0;
    std::vector<NetworkState> states; // steps+1 entries, states[0] is the initial state
    std::vector<FlowRecord> flows;    // one per step
    std::vector<double> injected;     // vehicles entering per step

    int steps() const { return static_cast<int>(flows.size()); }
    double injected_total() const {
        double sum = 0.0;
        for (double v : injected) sum += v;
        return sum;
    }
};

// Splits used for step k given the step-start state.
using SplitProvider = std::function<const SplitRates&(int step, const NetworkState& state)>;

Trajectory simulate(const NetworkState& initial,
                    const DemandProfile& demand,
                    const SplitProvider& splits_for_step,
                    int steps,
                    double dt,
                    const Topology& topo,
                    const std::vector<RegionParams>& regions);

} // namespace mrn
