#include "mrn/qdue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "mrn/errors.hpp"

namespace mrn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

PriceMatrix zero_prices(int k) {
    PriceMatrix p;
    p.k = k;
    p.p.assign(static_cast<std::size_t>(k) * k, 0.0);
    return p;
}

double region_travel_time(const RegionParams& params, double n) {
    if (n < 0.0) throw DomainError("region_travel_time: negative accumulation for " + params.name);
    if (n == 0.0) {
        // lim n->0 of n / (a n^3 + b n^2 + c n) = 1/c.
        return 1.0 / params.mfd.c;
    }
    const double g = mfd_outflow(params.mfd, std::min(n, params.n_jam));
    if (g <= 0.0 || n / g > params.tau_cap) return params.tau_cap;
    return n / g;
}

TravelTimeMatrix travel_time_matrix(const NetworkState& state, const std::vector<RegionParams>& regions) {
    const int k = state.k;
    TravelTimeMatrix tt;
    tt.k = k;
    tt.tau.assign(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> per_region(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) per_region[i] = region_travel_time(regions[i], region_total(state, i));
    for (int i = 0; i < k; ++i)
        for (int h = 0; h < k; ++h)
            tt.tau[static_cast<std::size_t>(i) * k + h] = per_region[i] + per_region[h];
    return tt;
}

CostMatrix generalized_costs(const TravelTimeMatrix& tt, const ChoiceSpec& spec, const PriceMatrix* prices) {
    CostMatrix cm;
    cm.k = tt.k;
    cm.c.assign(tt.tau.size(), 0.0);
    for (std::size_t idx = 0; idx < tt.tau.size(); ++idx) {
        double v = tt.tau[idx] * spec.vot_chf_per_hour / 3600.0;
        if (prices != nullptr) v += prices->p[idx];
        cm.c[idx] = v;
    }
    return cm;
}

std::vector<double> dijkstra_costs(const CostMatrix& costs, const Topology& topo, int source) {
    const int k = topo.k;
    std::vector<double> dist(static_cast<std::size_t>(k), kInf);
    std::vector<char> done(static_cast<std::size_t>(k), 0);
    dist[static_cast<std::size_t>(source)] = 0.0;
    using Item = std::pair<double, int>; // (distance, node); node breaks ties deterministically
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        for (int v : topo.neighbors[static_cast<std::size_t>(u)]) {
            const double cand = d + costs.at(u, v);
            if (cand < dist[static_cast<std::size_t>(v)]) {
                dist[static_cast<std::size_t>(v)] = cand;
                heap.emplace(cand, v);
            }
        }
    }
    return dist;
}

double shortest_path_cost(const CostMatrix& costs, const Topology& topo, int i, int h, int j) {
    if (i == h && h == j) return costs.at(i, i);
    if (!topo.adjacent(i, h)) return kInf;
    const auto dist = dijkstra_costs(costs, topo, h);
    const double onward = dist[static_cast<std::size_t>(j)];
    if (!std::isfinite(onward)) return kInf;
    return costs.at(i, h) + onward;
}

std::vector<double> mnl_split(const std::vector<double>& alternative_costs, double mu) {
    if (alternative_costs.empty()) throw DomainError("mnl_split: no alternatives");
    if (!(mu > 0.0)) throw DomainError("mnl_split: mu must be positive");
    double best = kInf;
    for (double c : alternative_costs) best = std::min(best, c);
    if (!std::isfinite(best)) throw DomainError("mnl_split: all alternatives unreachable");
    // Shift by the cheapest cost so the largest exponent is exactly zero.
    std::vector<double> out(alternative_costs.size(), 0.0);
    double denom = 0.0;
    for (std::size_t a = 0; a < alternative_costs.size(); ++a) {
        const double c = alternative_costs[a];
        const double w = std::isfinite(c) ? std::exp(-mu * (c - best)) : 0.0;
        out[a] = w;
        denom += w;
    }
    for (double& w : out) w /= denom;
    return out;
}

QdueRun run_qdue(const Topology& topo,
                 const std::vector<RegionParams>& regions,
                 const DemandProfile& demand,
                 const ChoiceSpec& choice,
                 int steps,
                 double dt,
                 const PriceProvider& prices) {
    if (static_cast<int>(regions.size()) != topo.k)
        throw ConfigError("run_qdue: region count does not match topology");
    QdueRun run;
    run.splits.reserve(static_cast<std::size_t>(steps));
    run.costs.reserve(static_cast<std::size_t>(steps));
    run.prices.reserve(static_cast<std::size_t>(steps));

    SplitRates current = uniform_splits(topo);
    const auto provider = [&](int step, const NetworkState& state) -> const SplitRates& {
        const auto tt = travel_time_matrix(state, regions);
        run.costs.push_back(generalized_costs(tt, choice));
        const PriceMatrix* pm = prices ? prices(step, state) : nullptr;
        run.prices.push_back(pm != nullptr ? *pm : zero_prices(topo.k));
        const CostMatrix tolled =
            pm != nullptr ? generalized_costs(tt, choice, pm) : run.costs.back();

        // One cheapest-continuation pass per potential stop-over region.
        std::vector<std::vector<double>> dist(static_cast<std::size_t>(topo.k));
        for (int h = 0; h < topo.k; ++h) dist[static_cast<std::size_t>(h)] = dijkstra_costs(tolled, topo, h);

        SplitRates sr;
        sr.k = topo.k;
        sr.theta.assign(static_cast<std::size_t>(topo.k) * topo.k * topo.k, 0.0);
        for (int i = 0; i < topo.k; ++i) {
            sr.at(i, i, i) = 1.0;
            for (int j = 0; j < topo.k; ++j) {
                if (j == i) continue;
                const auto& alts = topo.neighbors[static_cast<std::size_t>(i)];
                std::vector<double> alt_costs(alts.size());
                for (std::size_t a = 0; a < alts.size(); ++a)
                    alt_costs[a] = tolled.at(i, alts[a]) + dist[static_cast<std::size_t>(alts[a])][static_cast<std::size_t>(j)];
                const auto shares = mnl_split(alt_costs, choice.mu);
                for (std::size_t a = 0; a < alts.size(); ++a) sr.at(i, alts[a], j) = shares[a];
            }
        }
        current = sr;
        run.splits.push_back(current);
        return current;
    };

    run.trajectory = simulate(empty_state(topo.k), demand, provider, steps, dt, topo, regions);
    return run;
}

} // namespace mrn
