#include "mrn/dso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrn/errors.hpp"

namespace mrn {

namespace {

constexpr double kAlphaFloor = 1e-12; // below this a cap row degenerates to f <= 0
constexpr double kArrivalCredit = 0.03; // destination-arrival weight relative to a completion
constexpr double kDenomFloor = 1e-9;  // recovery denominator guard
constexpr double kFlowFloor = 1e-12;  // recovery whole-row guard

} // namespace

void validate_lrho(const LrhoConfig& cfg) {
    if (cfg.n_p < 1) throw ConfigError("lrho: n_p must be >= 1");
    if (cfg.n_c < 1) throw ConfigError("lrho: n_c must be >= 1");
    if (!(cfg.t_c > 0.0)) throw ConfigError("lrho: t_c must be positive");
    if (!(cfg.sigma > 0.0) || cfg.sigma > 1.0) throw ConfigError("lrho: sigma must be in (0, 1]");
}

AlphaParams compute_alphas(const NetworkState& state) {
    AlphaParams a;
    a.k = state.k;
    a.alpha_ii.assign(static_cast<std::size_t>(state.k), 0.0);
    a.alpha_ij.assign(static_cast<std::size_t>(state.k) * state.k, 0.0);
    for (int i = 0; i < state.k; ++i) {
        const double total = region_total(state, i);
        if (total <= 0.0) continue;
        a.alpha_ii[static_cast<std::size_t>(i)] = state.at(i, i) / total;
        for (int j = 0; j < state.k; ++j) {
            if (j == i) continue;
            a.alpha_ij[static_cast<std::size_t>(i) * state.k + j] = state.at(i, j) / total;
        }
    }
    return a;
}

int LpLayout::pair_index(int i, int h) const {
    for (std::size_t p = 0; p < pairs.size(); ++p)
        if (pairs[p].first == i && pairs[p].second == h) return static_cast<int>(p);
    throw DomainError("lp layout: no border pair (" + std::to_string(i + 1) + ", " + std::to_string(h + 1) + ")");
}

int LpLayout::triple_index(int i, int h, int j) const {
    for (std::size_t t = 0; t < triples.size(); ++t)
        if (triples[t].i == i && triples[t].h == h && triples[t].j == j) return static_cast<int>(t);
    throw DomainError("lp layout: no transfer triple (" + std::to_string(i + 1) + ", " + std::to_string(h + 1) +
                      ", " + std::to_string(j + 1) + ")");
}

DsoLp build_lp(const NetworkState& state,
               const AlphaParams& alphas,
               const std::vector<PwaMfd>& pwa,
               const std::vector<std::vector<double>>& q_forecast,
               const Topology& topo,
               const std::vector<RegionParams>& regions,
               const LrhoConfig& cfg) {
    validate_lrho(cfg);
    const int k = topo.k;
    if (static_cast<int>(pwa.size()) != k) throw ConfigError("build_lp: one linearized curve per region required");
    if (static_cast<int>(q_forecast.size()) != cfg.n_p) throw ConfigError("build_lp: forecast must cover the horizon");
    for (const auto& q : q_forecast)
        if (static_cast<int>(q.size()) != k * k) throw ConfigError("build_lp: forecast cell count mismatch");

    DsoLp out;
    out.layout.k = k;
    out.layout.n_p = cfg.n_p;
    out.layout.pairs = ordered_border_pairs(topo);
    out.layout.triples = transfer_triples(topo);
    const LpLayout& L = out.layout;

    LinearProgram& lp = out.lp;
    lp.n = L.total_vars();
    lp.c.assign(static_cast<std::size_t>(lp.n), 0.0);
    // Throughput objective: trip completions plus a small credit for transfers
    // that land in their destination region. The credit breaks ties toward
    // finishing trips (an arrival cannot be farmed by circulating) yet stays
    // below the marginal completion loss of feeding a congested region, so
    // holding flow out of a collapsed region still wins.
    for (int s = 0; s < cfg.n_p; ++s) {
        for (int i = 0; i < k; ++i) lp.c[static_cast<std::size_t>(L.f_ii(s, i))] = cfg.t_c;
        for (std::size_t t = 0; t < L.triples.size(); ++t) {
            const Triple& tr = L.triples[t];
            if (tr.h == tr.j)
                lp.c[static_cast<std::size_t>(L.f_ihj(s, static_cast<int>(t)))] = kArrivalCredit * cfg.t_c;
        }
    }

    const auto origin_demand = [&](int s, int i) {
        double q = 0.0;
        for (int j = 0; j < k; ++j) q += q_forecast[static_cast<std::size_t>(s)][static_cast<std::size_t>(i) * k + j];
        return q;
    };

    // State recursion, one equality per (step, region).
    for (int s = 0; s < cfg.n_p; ++s) {
        for (int i = 0; i < k; ++i) {
            std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
            row[static_cast<std::size_t>(L.acc(s + 1, i))] = 1.0;
            double rhs = cfg.t_c * origin_demand(s, i);
            if (s == 0) {
                rhs += region_total(state, i);
            } else {
                row[static_cast<std::size_t>(L.acc(s, i))] = -1.0;
            }
            row[static_cast<std::size_t>(L.f_ii(s, i))] += cfg.t_c;
            for (int h : topo.neighbors[static_cast<std::size_t>(i)]) {
                row[static_cast<std::size_t>(L.f_ih(s, L.pair_index(i, h)))] += cfg.t_c;
                row[static_cast<std::size_t>(L.f_ih(s, L.pair_index(h, i)))] -= cfg.t_c;
            }
            lp.a_eq.push_back(std::move(row));
            lp.b_eq.push_back(rhs);
        }
    }

    // Destination coupling: the border-pair flow is the sum of its transfer flows.
    for (int s = 0; s < cfg.n_p; ++s) {
        for (std::size_t p = 0; p < L.pairs.size(); ++p) {
            const auto [i, h] = L.pairs[p];
            std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
            row[static_cast<std::size_t>(L.f_ih(s, static_cast<int>(p)))] = -1.0;
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                row[static_cast<std::size_t>(L.f_ihj(s, L.triple_index(i, h, j)))] = 1.0;
            }
            lp.a_eq.push_back(std::move(row));
            lp.b_eq.push_back(0.0);
        }
    }

    // Outflow caps. At step 0 the accumulation is a known constant, so the
    // whole line family collapses to its pointwise minimum.
    for (int s = 0; s < cfg.n_p; ++s) {
        for (int i = 0; i < k; ++i) {
            const double a_ii = alphas.alpha_ii[static_cast<std::size_t>(i)];
            const int var = L.f_ii(s, i);
            if (s == 0 || a_ii < kAlphaFloor) {
                std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
                row[static_cast<std::size_t>(var)] = 1.0;
                lp.a_ub.push_back(std::move(row));
                lp.b_ub.push_back(s == 0 && a_ii >= kAlphaFloor
                                      ? a_ii * pwa_eval(pwa[static_cast<std::size_t>(i)], region_total(state, i))
                                      : 0.0);
            } else {
                const auto& curve = pwa[static_cast<std::size_t>(i)];
                for (std::size_t l = 0; l < curve.slopes.size(); ++l) {
                    std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
                    row[static_cast<std::size_t>(var)] = 1.0;
                    row[static_cast<std::size_t>(L.acc(s, i))] = -a_ii * curve.slopes[l];
                    lp.a_ub.push_back(std::move(row));
                    lp.b_ub.push_back(a_ii * curve.intercepts[l]);
                }
            }
        }
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) {
                if (j == i) continue;
                const double a_ij = alphas.ij(i, j);
                std::vector<int> vars;
                for (int h : allowed_stopovers(topo, i, j)) vars.push_back(L.f_ihj(s, L.triple_index(i, h, j)));
                if (s == 0 || a_ij < kAlphaFloor) {
                    std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
                    for (int v : vars) row[static_cast<std::size_t>(v)] = 1.0;
                    lp.a_ub.push_back(std::move(row));
                    lp.b_ub.push_back(s == 0 && a_ij >= kAlphaFloor
                                          ? a_ij * pwa_eval(pwa[static_cast<std::size_t>(i)], region_total(state, i))
                                          : 0.0);
                } else {
                    const auto& curve = pwa[static_cast<std::size_t>(i)];
                    for (std::size_t l = 0; l < curve.slopes.size(); ++l) {
                        std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
                        for (int v : vars) row[static_cast<std::size_t>(v)] = 1.0;
                        row[static_cast<std::size_t>(L.acc(s, i))] = -a_ij * curve.slopes[l];
                        lp.a_ub.push_back(std::move(row));
                        lp.b_ub.push_back(a_ij * curve.intercepts[l]);
                    }
                }
            }
        }
    }

    // Jam bound on every predicted accumulation; the lower bound is implicit.
    for (int s = 1; s <= cfg.n_p; ++s) {
        for (int i = 0; i < k; ++i) {
            std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
            row[static_cast<std::size_t>(L.acc(s, i))] = 1.0;
            lp.a_ub.push_back(std::move(row));
            lp.b_ub.push_back(regions[static_cast<std::size_t>(i)].n_jam);
        }
    }

    return out;
}

SplitRates recover_split_rates(const LpSolution& solution,
                               const LpLayout& layout,
                               const AlphaParams& alphas,
                               const std::vector<PwaMfd>& pwa,
                               const NetworkState& state,
                               const SplitRates& prev_theta,
                               const Topology& topo,
                               const LrhoConfig& cfg) {
    if (solution.status != LpStatus::optimal) throw NumericalError("recover_split_rates: solution not optimal");
    const int k = layout.k;
    SplitRates theta;
    theta.k = k;
    theta.theta.assign(static_cast<std::size_t>(k) * k * k, 0.0);

    for (int i = 0; i < k; ++i) {
        theta.at(i, i, i) = 1.0;
        const double g = pwa_eval(pwa[static_cast<std::size_t>(i)], region_total(state, i));
        for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const auto stops = allowed_stopovers(topo, i, j);
            const double denom = alphas.ij(i, j) * g;

            std::vector<double> raw(stops.size(), 0.0);
            double raw_sum = 0.0;
            if (denom >= kDenomFloor) {
                for (std::size_t a = 0; a < stops.size(); ++a) {
                    const int var = layout.f_ihj(0, layout.triple_index(i, stops[a], j));
                    raw[a] = std::max(0.0, solution.x[static_cast<std::size_t>(var)]) / denom;
                    raw_sum += raw[a];
                }
            }
            if (denom < kDenomFloor || raw_sum < kFlowFloor) {
                for (int h : stops) theta.at(i, h, j) = prev_theta.at(i, h, j);
                continue;
            }
            // Normalize, clip against the previous cycle's rates, renormalize.
            double clipped_sum = 0.0;
            std::vector<double> clipped(stops.size(), 0.0);
            for (std::size_t a = 0; a < stops.size(); ++a) {
                const double prev = prev_theta.at(i, stops[a], j);
                const double lo = std::max(0.0, prev - cfg.sigma);
                const double hi = std::min(1.0, prev + cfg.sigma);
                clipped[a] = std::clamp(raw[a] / raw_sum, lo, hi);
                clipped_sum += clipped[a];
            }
            for (std::size_t a = 0; a < stops.size(); ++a) theta.at(i, stops[a], j) = clipped[a] / clipped_sum;
        }
    }
    return theta;
}

LrhoResult run_lrho(const Topology& topo,
                    const std::vector<RegionParams>& regions,
                    const DemandProfile& demand,
                    const std::vector<PwaMfd>& pwa,
                    const LrhoConfig& cfg,
                    int steps,
                    double dt) {
    validate_lrho(cfg);
    if (static_cast<int>(regions.size()) != topo.k)
        throw ConfigError("run_lrho: region count does not match topology");

    LrhoResult result;
    SplitRates held = direct_splits(topo); // rate-limited walk starts from free-flow routing
    SplitRates prev = held;

    const auto provider = [&](int step, const NetworkState& state) -> const SplitRates& {
        if (step % cfg.n_c != 0) return held;
        const double t0 = step * dt;
        std::vector<std::vector<double>> forecast(static_cast<std::size_t>(cfg.n_p));
        for (int s = 0; s < cfg.n_p; ++s) {
            auto& q = forecast[static_cast<std::size_t>(s)];
            q.assign(static_cast<std::size_t>(topo.k) * topo.k, 0.0);
            for (int i = 0; i < topo.k; ++i)
                for (int j = 0; j < topo.k; ++j)
                    q[static_cast<std::size_t>(i) * topo.k + j] =
                        od_step_average(demand, i, j, t0 + s * cfg.t_c, t0 + (s + 1) * cfg.t_c);
        }

        const AlphaParams alphas = compute_alphas(state);
        DsoLp inst = build_lp(state, alphas, pwa, forecast, topo, regions, cfg);
        const LpSolution sol = solve_lp(inst.lp);
        if (sol.status != LpStatus::optimal)
            throw NumericalError("run_lrho: optimization failed at cycle " + std::to_string(step / cfg.n_c) +
                                 (sol.status == LpStatus::infeasible ? " (infeasible)" : " (unbounded)"));
        held = recover_split_rates(sol, inst.layout, alphas, pwa, state, prev, topo, cfg);
        prev = held;
        result.theta_schedule.push_back(held);
        result.objectives.push_back(sol.objective);
        result.lp_iterations.push_back(sol.iterations);
        return held;
    };

    result.trajectory = simulate(empty_state(topo.k), demand, provider, steps, dt, topo, regions);
    return result;
}

} // namespace mrn
