#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "mrn/dso.hpp"
#include "mrn/errors.hpp"
#include "mrn/mfd.hpp"

using namespace mrn;

namespace {

Topology pair2() { return make_topology(2, {0, 1, 1, 0}); }

Topology complete4() {
    return make_topology(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0});
}

RegionParams parabola_region() {
    RegionParams r;
    r.name = "P";
    r.area_km2 = 2.0;
    r.n_detectors = 100;
    r.n_jam = 4000.0;
    r.avg_trip_length_m = 1000.0;
    r.capacity_max = 2.0;
    r.mfd = {0.0, -1.0e-6, 4.0e-3, 4000.0};
    finalize_region(r);
    return r;
}

RegionParams fast_region() {
    RegionParams r;
    r.name = "F";
    r.area_km2 = 1.0;
    r.n_detectors = 10;
    r.n_jam = 1000.0;
    r.avg_trip_length_m = 500.0;
    r.capacity_max = 50.0;
    r.mfd = {0.0, -1.2e-4, 0.2, 1000.0};
    finalize_region(r);
    return r;
}

std::vector<PwaMfd> curves_for(const std::vector<RegionParams>& regions, int lines) {
    std::vector<PwaMfd> out;
    for (const RegionParams& r : regions) out.push_back(pwa_approximate(r.mfd, lines));
    return out;
}

// Pointwise minimum of the tangent family, straight from the coefficients.
double min_line(const PwaMfd& curve, double n) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < curve.slopes.size(); ++l) {
        g = std::min(g, curve.slopes[l] * n + curve.intercepts[l]);
    }
    return std::max(0.0, g);
}

// Independent optimum for the one-cell two-step drain problem:
//   max  t (f0 + f1)
//   s.t. f0 <= min(lines(n0), n0/t),  f1 <= min(lines(n1), n1/t),
//        n1 = n0 - t f0 >= 0.
// The value is concave in f0 (minimum of affine functions), so a ternary
// search converges to machine precision.
double two_step_drain_optimum(const PwaMfd& curve, double n0, double t) {
    const auto value = [&](double f0) {
        const double n1 = n0 - t * f0;
        const double f1 = std::max(0.0, std::min(min_line(curve, n1), n1 / t));
        return t * f0 + t * f1;
    };
    double lo = 0.0;
    double hi = std::min(min_line(curve, n0), n0 / t);
    for (int it = 0; it < 300; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (value(m1) < value(m2)) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    return value(0.5 * (lo + hi));
}

} // namespace

TEST_CASE("config validation and alphas") {
    LrhoConfig good;
    validate_lrho(good);
    LrhoConfig bad = good;
    bad.n_p = 0;
    CHECK_THROWS_AS(validate_lrho(bad), ConfigError);
    bad = good;
    bad.n_c = 0;
    CHECK_THROWS_AS(validate_lrho(bad), ConfigError);
    bad = good;
    bad.t_c = 0.0;
    CHECK_THROWS_AS(validate_lrho(bad), ConfigError);
    bad = good;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(validate_lrho(bad), ConfigError);
    bad.sigma = 1.5;
    CHECK_THROWS_AS(validate_lrho(bad), ConfigError);

    NetworkState s = empty_state(2);
    s.at(0, 0) = 50.0;
    s.at(0, 1) = 150.0;
    const AlphaParams a = compute_alphas(s);
    CHECK(a.alpha_ii[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(a.ij(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(a.alpha_ii[1] == 0.0); // empty region
    CHECK(a.ij(1, 0) == 0.0);
}

TEST_CASE("variable layout covers every column exactly once") {
    const Topology topo = complete4();
    const std::vector<RegionParams> regions(4, parabola_region());
    LrhoConfig cfg; // n_p = 3
    const DsoLp inst = build_lp(empty_state(4), compute_alphas(empty_state(4)),
                                curves_for(regions, 20),
                                {std::vector<double>(16, 0.0), std::vector<double>(16, 0.0),
                                 std::vector<double>(16, 0.0)},
                                topo, regions, cfg);
    const LpLayout& L = inst.layout;
    CHECK(L.flows_per_step() == 4 + 12 + 36);
    CHECK(L.total_vars() == 3 * (52 + 4));
    CHECK(inst.lp.n == 168);

    std::set<int> seen;
    for (int s = 0; s < 3; ++s) {
        for (int i = 0; i < 4; ++i) seen.insert(L.f_ii(s, i));
        for (int p = 0; p < 12; ++p) seen.insert(L.f_ih(s, p));
        for (int t = 0; t < 36; ++t) seen.insert(L.f_ihj(s, t));
    }
    for (int s = 1; s <= 3; ++s) {
        for (int i = 0; i < 4; ++i) seen.insert(L.acc(s, i));
    }
    CHECK(static_cast<int>(seen.size()) == 168);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 167);

    for (std::size_t p = 0; p < L.pairs.size(); ++p) {
        CHECK(L.pair_index(L.pairs[p].first, L.pairs[p].second) == static_cast<int>(p));
    }
    for (std::size_t t = 0; t < L.triples.size(); ++t) {
        CHECK(L.triple_index(L.triples[t].i, L.triples[t].h, L.triples[t].j) == static_cast<int>(t));
    }
    CHECK_THROWS_AS(L.pair_index(0, 0), DomainError);
}

TEST_CASE("row counts of the full four-region instance") {
    const Topology topo = complete4();
    const std::vector<RegionParams> regions(4, parabola_region());
    LrhoConfig cfg;
    NetworkState s = empty_state(4);
    for (double& v : s.n) v = 100.0; // every alpha strictly positive
    const std::vector<std::vector<double>> q(3, std::vector<double>(16, 0.1));
    const DsoLp inst = build_lp(s, compute_alphas(s), curves_for(regions, 20), q, topo, regions, cfg);

    // Recursion k*n_p plus coupling P*n_p equalities.
    CHECK(inst.lp.a_eq.size() == 4 * 3 + 12 * 3);
    // Step 0 collapses to one row per outflow group (k + k(k-1) = 16); later
    // steps expand each group into the 20 tangent rows; plus k*n_p jam rows.
    CHECK(inst.lp.a_ub.size() == 16 + 2 * 16 * 20 + 12);

    // Jam rows sit at the tail with rhs n_jam.
    for (std::size_t r = inst.lp.b_ub.size() - 12; r < inst.lp.b_ub.size(); ++r) {
        CHECK(inst.lp.b_ub[r] == doctest::Approx(4000.0).epsilon(1e-15));
    }
}

TEST_CASE("anchored instance arithmetic on two regions") {
    const Topology topo = pair2();
    const std::vector<RegionParams> regions{parabola_region(), parabola_region()};
    const std::vector<PwaMfd> pwa = curves_for(regions, 20);
    LrhoConfig cfg;
    cfg.n_p = 1;
    cfg.t_c = 20.0;

    NetworkState s = empty_state(2);
    s.at(0, 0) = 100.0;
    std::vector<std::vector<double>> q{{0.3, 0.0, 0.0, 0.0}};
    const DsoLp inst = build_lp(s, compute_alphas(s), pwa, q, topo, regions, cfg);
    const LpLayout& L = inst.layout;

    CHECK(L.total_vars() == 8); // 2 f_II + 2 f_IH + 2 f_IHJ + 2 N
    REQUIRE(inst.lp.a_eq.size() == 4);

    // Recursion row of region 1: N1' + t(f_11 + f_10->1) - t f_1->01 = N + t q.
    const auto& row0 = inst.lp.a_eq[0];
    CHECK(row0[static_cast<std::size_t>(L.acc(1, 0))] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(row0[static_cast<std::size_t>(L.f_ii(0, 0))] == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(row0[static_cast<std::size_t>(L.f_ih(0, L.pair_index(0, 1)))] == doctest::Approx(20.0).epsilon(1e-15));
    CHECK(row0[static_cast<std::size_t>(L.f_ih(0, L.pair_index(1, 0)))] == doctest::Approx(-20.0).epsilon(1e-15));
    CHECK(inst.lp.b_eq[0] == doctest::Approx(100.0 + 20.0 * 0.3).epsilon(1e-12));
    CHECK(inst.lp.b_eq[1] == doctest::Approx(0.0).epsilon(1e-15));

    // Objective rewards trip completions: t on every f_II, a small credit on
    // destination-arrival transfers (here the only triple is 1->2 for dest 2,
    // an arrival), and 0 on pair flows and accumulations.
    CHECK(inst.lp.c[static_cast<std::size_t>(L.f_ii(0, 0))] == 20.0);
    CHECK(inst.lp.c[static_cast<std::size_t>(L.f_ih(0, 0))] == 0.0);
    CHECK(inst.lp.c[static_cast<std::size_t>(L.f_ihj(0, 0))] == doctest::Approx(0.03 * 20.0).epsilon(1e-15));
    CHECK(inst.lp.c[static_cast<std::size_t>(L.acc(1, 0))] == 0.0);

    // Step-0 caps use the known accumulation: f_00 <= alpha_II pwa(100), and
    // the empty groups pin their flows to zero.
    CHECK(inst.lp.b_ub[0] == doctest::Approx(pwa_eval(pwa[0], 100.0)).epsilon(1e-12));
    CHECK(inst.lp.b_ub[1] == 0.0); // region 2 internal, empty
    CHECK(inst.lp.b_ub[2] == 0.0); // (1 -> 2) transfers, empty cell
    CHECK(inst.lp.b_ub[3] == 0.0); // (2 -> 1) transfers, empty cell

    // Forecast shape errors.
    CHECK_THROWS_AS(build_lp(s, compute_alphas(s), pwa, {}, topo, regions, cfg), ConfigError);
    CHECK_THROWS_AS(build_lp(s, compute_alphas(s), pwa, {{0.0, 0.0}}, topo, regions, cfg), ConfigError);
    CHECK_THROWS_AS(build_lp(s, compute_alphas(s), {pwa[0]}, q, topo, regions, cfg), ConfigError);
}

TEST_CASE("two-step optima match the drain oracle") {
    const Topology topo = pair2();
    LrhoConfig cfg;
    cfg.n_p = 2;
    cfg.t_c = 20.0;
    const std::vector<std::vector<double>> q(2, std::vector<double>(4, 0.0));

    SUBCASE("internal traffic, outflow curve binding") {
        const std::vector<RegionParams> regions{parabola_region(), parabola_region()};
        const std::vector<PwaMfd> pwa = curves_for(regions, 20);
        for (double n0 : {200.0, 500.0, 1500.0, 2600.0, 3500.0}) {
            NetworkState s = empty_state(2);
            s.at(0, 0) = n0;
            const DsoLp inst = build_lp(s, compute_alphas(s), pwa, q, topo, regions, cfg);
            const LpSolution sol = solve_lp(inst.lp);
            REQUIRE(sol.status == LpStatus::optimal);
            const double want = two_step_drain_optimum(pwa[0], n0, cfg.t_c);
            CHECK(std::abs(sol.objective - want) <= 1e-6 * std::max(1.0, want));
        }
    }

    SUBCASE("fast dynamics, availability binding") {
        const std::vector<RegionParams> regions{fast_region(), fast_region()};
        const std::vector<PwaMfd> pwa = curves_for(regions, 20);
        NetworkState s = empty_state(2);
        s.at(0, 0) = 10.0;
        const DsoLp inst = build_lp(s, compute_alphas(s), pwa, q, topo, regions, cfg);
        const LpSolution sol = solve_lp(inst.lp);
        REQUIRE(sol.status == LpStatus::optimal);
        // Everything drains: 10 vehicles served across the horizon.
        CHECK(sol.objective == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(sol.objective == doctest::Approx(two_step_drain_optimum(pwa[0], 10.0, cfg.t_c)).epsilon(1e-9));
    }

    SUBCASE("transfer traffic obeys the same cap family") {
        const std::vector<RegionParams> regions{parabola_region(), parabola_region()};
        const std::vector<PwaMfd> pwa = curves_for(regions, 20);
        NetworkState s = empty_state(2);
        s.at(0, 1) = 400.0; // all vehicles bound for region 2
        const DsoLp inst = build_lp(s, compute_alphas(s), pwa, q, topo, regions, cfg);
        const LpSolution sol = solve_lp(inst.lp);
        REQUIRE(sol.status == LpStatus::optimal);
        // Arrival transfers earn 3% of a completion, so the optimum is the
        // drain optimum scaled by the credit (same caps, same argmax).
        const double want = 0.03 * two_step_drain_optimum(pwa[0], 400.0, cfg.t_c);
        CHECK(std::abs(sol.objective - want) <= 1e-6 * std::max(1.0, want));
        // Coupling ties the pair flow to its only transfer flow.
        const LpLayout& L = inst.layout;
        const double f_pair = sol.x[static_cast<std::size_t>(L.f_ih(0, L.pair_index(0, 1)))];
        const double f_trip = sol.x[static_cast<std::size_t>(L.f_ihj(0, L.triple_index(0, 1, 1)))];
        CHECK(f_pair == doctest::Approx(f_trip).epsilon(1e-9));
    }
}

TEST_CASE("split-rate recovery") {
    const Topology topo = complete4();
    const std::vector<RegionParams> regions(4, parabola_region());
    const std::vector<PwaMfd> pwa = curves_for(regions, 20);
    LrhoConfig cfg;
    cfg.n_p = 1;
    cfg.sigma = 0.2;

    SUBCASE("normalize, clip toward previous, renormalize") {
        NetworkState s = empty_state(4);
        s.at(0, 1) = 200.0;
        const AlphaParams alphas = compute_alphas(s);
        const DsoLp inst = build_lp(s, alphas, pwa, {std::vector<double>(16, 0.0)}, topo, regions, cfg);
        const LpLayout& L = inst.layout;

        LpSolution sol;
        sol.status = LpStatus::optimal;
        sol.x.assign(static_cast<std::size_t>(L.total_vars()), 0.0);
        // Optimizer wants everything through stop-over 2; previous cycle sent
        // everything through stop-over 3 (0-based 1 and 2).
        const double denom = alphas.ij(0, 1) * pwa_eval(pwa[0], 200.0);
        sol.x[static_cast<std::size_t>(L.f_ihj(0, L.triple_index(0, 1, 1)))] = denom;

        SplitRates prev = uniform_splits(topo);
        prev.at(0, 1, 1) = 0.0;
        prev.at(0, 2, 1) = 1.0;
        prev.at(0, 3, 1) = 0.0;

        const SplitRates theta = recover_split_rates(sol, L, alphas, pwa, s, prev, topo, cfg);
        validate_splits(theta, topo);
        CHECK(theta.at(0, 1, 1) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(theta.at(0, 2, 1) == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(theta.at(0, 3, 1) == doctest::Approx(0.0).epsilon(1e-15));
        // Pairs without flow hold the previous rates.
        CHECK(theta.at(1, 0, 0) == doctest::Approx(prev.at(1, 0, 0)).epsilon(1e-15));
        CHECK(theta.at(2, 1, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }

    SUBCASE("empty network holds everything") {
        const NetworkState s = empty_state(4);
        const AlphaParams alphas = compute_alphas(s);
        const DsoLp inst = build_lp(s, alphas, pwa, {std::vector<double>(16, 0.0)}, topo, regions, cfg);
        LpSolution sol;
        sol.status = LpStatus::optimal;
        sol.x.assign(static_cast<std::size_t>(inst.layout.total_vars()), 0.0);
        const SplitRates prev = uniform_splits(topo);
        const SplitRates theta = recover_split_rates(sol, inst.layout, alphas, pwa, s, prev, topo, cfg);
        for (std::size_t idx = 0; idx < theta.theta.size(); ++idx) {
            CHECK(theta.theta[idx] == prev.theta[idx]);
        }
    }

    SUBCASE("non-optimal solutions are rejected") {
        const NetworkState s = empty_state(4);
        const DsoLp inst = build_lp(s, compute_alphas(s), pwa, {std::vector<double>(16, 0.0)},
                                    topo, regions, cfg);
        LpSolution sol;
        sol.status = LpStatus::infeasible;
        CHECK_THROWS_AS(recover_split_rates(sol, inst.layout, compute_alphas(s), pwa, s,
                                            uniform_splits(topo), topo, cfg),
                        NumericalError);
    }
}

TEST_CASE("closed-loop rolling horizon") {
    const Topology topo = pair2();
    const std::vector<RegionParams> regions{parabola_region(), parabola_region()};
    const std::vector<PwaMfd> pwa = curves_for(regions, 20);
    LrhoConfig cfg; // n_p 3, n_c 4

    SUBCASE("zero demand stays at rest") {
        DemandProfile demand;
        demand.k = 2;
        demand.od.resize(4);
        const LrhoResult r = run_lrho(topo, regions, demand, pwa, cfg, 12, 20.0);
        CHECK(r.theta_schedule.size() == 3);
        CHECK(r.objectives.size() == 3);
        for (double obj : r.objectives) CHECK(std::abs(obj) <= 1e-9);
        const SplitRates uniform = uniform_splits(topo);
        for (const SplitRates& th : r.theta_schedule) {
            for (std::size_t i = 0; i < th.theta.size(); ++i) CHECK(th.theta[i] == uniform.theta[i]);
        }
        CHECK(network_total(r.trajectory.states.back()) == 0.0);
    }

    SUBCASE("loaded scenario bookkeeping and determinism") {
        DemandProfile demand;
        demand.k = 2;
        demand.od.resize(4);
        demand.od[0 * 2 + 0].push_back({0.0, 100.0, 300.0, 100.0, 1.1});
        demand.od[0 * 2 + 1].push_back({0.0, 100.0, 300.0, 100.0, 0.7});
        validate_demand(demand);

        const LrhoResult a = run_lrho(topo, regions, demand, pwa, cfg, 30, 20.0);
        CHECK(a.theta_schedule.size() == 8); // cycles start at steps 0,4,...,28
        CHECK(a.objectives.size() == 8);
        CHECK(a.lp_iterations.size() == 8);
        for (const SplitRates& th : a.theta_schedule) validate_splits(th, topo);
        for (double obj : a.objectives) CHECK(obj >= -1e-9);
        CHECK(a.objectives[1] > 0.0); // once loaded the plan serves vehicles

        const LrhoResult b = run_lrho(topo, regions, demand, pwa, cfg, 30, 20.0);
        REQUIRE(a.trajectory.states.size() == b.trajectory.states.size());
        for (std::size_t s = 0; s < a.trajectory.states.size(); ++s) {
            for (std::size_t c2 = 0; c2 < a.trajectory.states[s].n.size(); ++c2) {
                CHECK(a.trajectory.states[s].n[c2] == b.trajectory.states[s].n[c2]);
            }
        }
        for (std::size_t c2 = 0; c2 < a.objectives.size(); ++c2) {
            CHECK(a.objectives[c2] == b.objectives[c2]);
            CHECK(a.lp_iterations[c2] == b.lp_iterations[c2]);
        }
    }
}
