#include "mrn/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrn/errors.hpp"

namespace mrn {

NetworkState empty_state(int k) {
    NetworkState s;
    s.k = k;
    s.n.assign(static_cast<std::size_t>(k) * k, 0.0);
    return s;
}

double region_total(const NetworkState& state, int i) {
    double sum = 0.0;
    for (int j = 0; j < state.k; ++j) sum += state.at(i, j);
    return sum;
}

double network_total(const NetworkState& state) {
    double sum = 0.0;
    for (double v : state.n) sum += v;
    return sum;
}

SplitRates uniform_splits(const Topology& topo) {
    SplitRates s;
    s.k = topo.k;
    s.theta.assign(static_cast<std::size_t>(topo.k) * topo.k * topo.k, 0.0);
    for (int i = 0; i < topo.k; ++i) {
        s.at(i, i, i) = 1.0;
        for (int j = 0; j < topo.k; ++j) {
            if (j == i) continue;
            const auto& hs = topo.neighbors[i];
            for (int h : hs) s.at(i, h, j) = 1.0 / static_cast<double>(hs.size());
        }
    }
    return s;
}

SplitRates direct_splits(const Topology& topo) {
    SplitRates s;
    s.k = topo.k;
    s.theta.assign(static_cast<std::size_t>(topo.k) * topo.k * topo.k, 0.0);
    for (int i = 0; i < topo.k; ++i) {
        s.at(i, i, i) = 1.0;
        for (int j = 0; j < topo.k; ++j) {
            if (j == i) continue;
            const auto& hs = topo.neighbors[i];
            const bool adjacent = std::find(hs.begin(), hs.end(), j) != hs.end();
            if (adjacent) {
                s.at(i, j, j) = 1.0;
            } else {
                for (int h : hs) s.at(i, h, j) = 1.0 / static_cast<double>(hs.size());
            }
        }
    }
    return s;
}

void validate_splits(const SplitRates& splits, const Topology& topo, double tol) {
    const int k = topo.k;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            double sum = 0.0;
            for (int h = 0; h < k; ++h) {
                const double v = splits.at(i, h, j);
                const bool allowed = (i == j) ? (h == i) : topo.adjacent(i, h);
                if (!allowed && v != 0.0) {
                    throw DomainError("splits: nonzero share on disallowed triple (" +
                                      std::to_string(i + 1) + "," + std::to_string(h + 1) + "," +
                                      std::to_string(j + 1) + ")");
                }
                if (v < -tol || v > 1.0 + tol) {
                    throw DomainError("splits: share outside [0,1] on triple (" +
                                      std::to_string(i + 1) + "," + std::to_string(h + 1) + "," +
                                      std::to_string(j + 1) + ")");
                }
                sum += v;
            }
            if (std::abs(sum - 1.0) > tol) {
                throw DomainError("splits: shares for pair (" + std::to_string(i + 1) + "," +
                                  std::to_string(j + 1) + ") sum to " + std::to_string(sum));
            }
        }
    }
}

} // namespace mrn
