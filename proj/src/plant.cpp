#include "mrn/plant.hpp"

#include <algorithm>
#include <cmath>

#include "mrn/errors.hpp"

namespace mrn {

std::pair<NetworkState, FlowRecord> plant_step(const NetworkState& state,
                                               const SplitRates& splits,
                                               const std::vector<double>& q,
                                               const Topology& topo,
                                               const std::vector<RegionParams>& regions,
                                               double dt) {
    const int k = state.k;
    if (dt <= 0.0) throw DomainError("plant_step: dt must be positive");
    if (q.size() != static_cast<std::size_t>(k) * k) throw DomainError("plant_step: demand size mismatch");

    FlowRecord rec;
    rec.k = k;
    rec.m_ii.assign(static_cast<std::size_t>(k), 0.0);
    rec.m_ihj.assign(static_cast<std::size_t>(k) * k * k, 0.0);
    rec.cap_clamped.assign(rec.m_ihj.size(), 0);
    rec.rescaled.assign(static_cast<std::size_t>(k) * k, 0);

    std::vector<double> totals(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) totals[i] = region_total(state, i);

    // Receiving capacities at the step-start state.
    std::vector<double> capacity(static_cast<std::size_t>(k));
    for (int h = 0; h < k; ++h) {
        capacity[h] = boundary_capacity(regions[h], std::min(totals[h], regions[h].n_jam));
    }

    auto flow_at = [&](int i, int h, int j) -> double& {
        return rec.m_ihj[(static_cast<std::size_t>(i) * k + h) * k + j];
    };

    // Desired flows from the step-start state, receiving capacity applied per
    // triple.
    for (int i = 0; i < k; ++i) {
        if (totals[i] <= 0.0) continue;
        const double g = mfd_outflow(regions[i].mfd, std::min(totals[i], regions[i].n_jam));
        rec.m_ii[i] = state.at(i, i) / totals[i] * g;
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const double share = state.at(i, j) / totals[i] * g;
            for (int h : topo.neighbors[i]) {
                const double raw = splits.at(i, h, j) * share;
                if (raw <= 0.0) continue;
                if (raw > capacity[h]) {
                    flow_at(i, h, j) = capacity[h];
                    rec.cap_clamped[(static_cast<std::size_t>(i) * k + h) * k + j] = 1;
                } else {
                    flow_at(i, h, j) = raw;
                }
            }
        }
    }

    // A cell cannot send more than it holds: rescale its outflows if the step
    // would overdraw it. Inflows are not counted as same-step availability.
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double out = 0.0;
            if (j == i) {
                out = rec.m_ii[i];
            } else {
                for (int h : topo.neighbors[i]) out += flow_at(i, h, j);
            }
            const double cell = state.at(i, j);
            if (dt * out > cell && out > 0.0) {
                const double gamma = cell / (dt * out);
                rec.rescaled[static_cast<std::size_t>(i) * k + j] = 1;
                if (j == i) {
                    rec.m_ii[i] *= gamma;
                } else {
                    for (int h : topo.neighbors[i]) flow_at(i, h, j) *= gamma;
                }
            }
        }
    }

    NetworkState next = state;
    for (int i = 0; i < k; ++i) {
        // Internal cell: exogenous demand, trip endings, arrivals that reached
        // their destination region.
        double delta = q[static_cast<std::size_t>(i) * k + i] - rec.m_ii[i];
        for (int h : topo.neighbors[i]) delta += flow_at(h, i, i);
        next.at(i, i) += dt * delta;

        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            double d = q[static_cast<std::size_t>(i) * k + j];
            for (int h : topo.neighbors[i]) d -= flow_at(i, h, j);
            // Through traffic arriving in i still headed for j.
            for (int h : topo.neighbors[i]) {
                if (h != j) d += flow_at(h, i, j);
            }
            next.at(i, j) += dt * d;
        }
    }

    // Availability rescaling keeps cells nonnegative; only rounding noise may
    // dip below zero.
    for (double& v : next.n) {
        if (v < 0.0) {
            if (v < -1e-9) throw NumericalError("plant_step: cell driven negative beyond tolerance");
            v = 0.0;
        }
    }
    for (int i = 0; i < k; ++i) {
        if (region_total(next, i) > regions[i].n_jam + 1e-9) rec.jam_violations.push_back(i);
    }
    return {std::move(next), std::move(rec)};
}

Trajectory simulate(const NetworkState& initial,
                    const DemandProfile& demand,
                    const SplitProvider& splits_for_step,
                    int steps,
                    double dt,
                    const Topology& topo,
                    const std::vector<RegionParams>& regions) {
    const int k = initial.k;
    Trajectory traj;
    traj.dt = dt;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.flows.reserve(static_cast<std::size_t>(steps));
    traj.injected.reserve(static_cast<std::size_t>(steps));
    traj.states.push_back(initial);

    std::vector<double> q(static_cast<std::size_t>(k) * k);
    for (int step = 0; step < steps; ++step) {
        const double t0 = step * dt;
        const double t1 = t0 + dt;
        double injected = 0.0;
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                const double rate = od_step_average(demand, i, j, t0, t1);
                q[static_cast<std::size_t>(i) * k + j] = rate;
                injected += rate * dt;
            }
        }
        const SplitRates& splits = splits_for_step(step, traj.states.back());
        auto [next, rec] = plant_step(traj.states.back(), splits, q, topo, regions, dt);
        traj.states.push_back(std::move(next));
        traj.flows.push_back(std::move(rec));
        traj.injected.push_back(injected);
    }
    return traj;
}

} // namespace mrn
