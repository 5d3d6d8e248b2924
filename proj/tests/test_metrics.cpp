#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "mrn/errors.hpp"
#include "mrn/metrics.hpp"

using namespace mrn;

namespace {

RegionParams region_with_trip_length(double metres) {
    RegionParams r;
    r.name = "R";
    r.area_km2 = 2.0;
    r.n_detectors = 100;
    r.n_jam = 4000.0;
    r.avg_trip_length_m = metres;
    r.capacity_max = 2.0;
    r.mfd = {0.0, -1.0e-6, 4.0e-3, 4000.0};
    finalize_region(r);
    return r;
}

FlowRecord empty_flows(int k) {
    FlowRecord f;
    f.k = k;
    f.m_ii.assign(static_cast<std::size_t>(k), 0.0);
    f.m_ihj.assign(static_cast<std::size_t>(k) * k * k, 0.0);
    f.cap_clamped.assign(f.m_ihj.size(), 0);
    f.rescaled.assign(static_cast<std::size_t>(k) * k, 0);
    return f;
}

NetworkState state_with(int k, int i, int j, double n) {
    NetworkState s = empty_state(k);
    s.at(i, j) = n;
    return s;
}

} // namespace

TEST_CASE("time spent is a left Riemann sum") {
    Trajectory traj;
    traj.dt = 20.0;
    for (int s = 0; s < 151; ++s) traj.states.push_back(state_with(2, 0, 0, 1000.0));
    for (int s = 0; s < 150; ++s) traj.flows.push_back(empty_flows(2));

    // 150 steps of 1000 veh: 20 * 150000 / 3600 = 2500/3 veh*h.
    CHECK(time_spent(traj, 0) == doctest::Approx(833.3333333333).epsilon(1e-10));
    CHECK(time_spent(traj, 0) == doctest::Approx(2500.0 / 3.0).epsilon(1e-15));
    CHECK(time_spent(traj, 1) == 0.0);

    // The final state is the right endpoint and must not be counted.
    Trajectory two;
    two.dt = 20.0;
    two.states.push_back(state_with(2, 0, 0, 0.0));
    two.states.push_back(state_with(2, 0, 0, 1200.0));
    two.flows.push_back(empty_flows(2));
    CHECK(time_spent(two, 0) == 0.0);
}

TEST_CASE("traveled distance and served vehicles") {
    const std::vector<RegionParams> regions{region_with_trip_length(2000.0),
                                            region_with_trip_length(500.0)};
    Trajectory traj;
    traj.dt = 20.0;
    for (int s = 0; s < 51; ++s) traj.states.push_back(empty_state(2));
    for (int s = 0; s < 50; ++s) {
        FlowRecord f = empty_flows(2);
        f.m_ii[0] = 0.5;
        traj.flows.push_back(f);
    }

    // 20 s * 50 steps * 0.5 veh/s * 2000 m / 1000 = 1000 veh*km.
    CHECK(total_traveled_distance(traj, regions) == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(vehicles_served(traj) == doctest::Approx(500.0).epsilon(1e-12));

    // Transfers count with the sender's trip length.
    FlowRecord f = empty_flows(2);
    f.m_ihj[(0 * 2 + 1) * 2 + 1] = 0.25; // 1 -> 2, destination 2
    Trajectory hop;
    hop.dt = 20.0;
    hop.states.assign(2, empty_state(2));
    hop.flows.push_back(f);
    CHECK(total_traveled_distance(hop, regions) == doctest::Approx(20.0 * 0.25 * 2.0).epsilon(1e-12));
    CHECK(vehicles_served(hop) == 0.0); // transfers are not completions
}

TEST_CASE("mean absolute error") {
    CHECK(mean_absolute_error({1.0, 2.0, 3.0}, {1.0, 2.0, 5.0}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(mean_absolute_error({1.0}, {1.0}) == 0.0);
    CHECK_THROWS_AS(mean_absolute_error({}, {}), DomainError);
    CHECK_THROWS_AS(mean_absolute_error({1.0}, {1.0, 2.0}), DomainError);
}

TEST_CASE("report comparison") {
    MetricsReport base;
    base.ts_per_region = {100.0, 127.0};
    base.ts_step_sum = {0.0, 0.0};
    base.tts = 227.0;
    base.ttd = 400.0;
    base.served = 1000.0;

    MetricsReport var = base;
    var.ts_per_region = {88.5536, 117.0};
    var.tts = 205.5536;
    var.ttd = 410.0;
    var.served = 990.0;

    const std::vector<ImprovementRow> rows = compare_reports(base, var);
    REQUIRE(rows.size() == 5u);
    CHECK(rows[0].metric == "TS_1");
    CHECK(rows[0].improvement_pct == doctest::Approx(11.4464).epsilon(1e-10));
    CHECK(rows[1].metric == "TS_2");
    CHECK(rows[1].improvement_pct == doctest::Approx(7.87401574803).epsilon(1e-10));
    CHECK(rows[2].metric == "TTS");
    CHECK(rows[2].improvement_pct == doctest::Approx((227.0 - 205.5536) / 227.0 * 100.0).epsilon(1e-12));
    CHECK(rows[3].metric == "TTD");
    CHECK(rows[3].improvement_pct == doctest::Approx(-2.5).epsilon(1e-12)); // variant traveled farther
    CHECK(rows[4].metric == "N");
    CHECK(rows[4].improvement_pct == doctest::Approx(1.0).epsilon(1e-12));

    const std::string text = comparison_text(rows, "plain", "managed");
    CHECK(text.find("metric") != std::string::npos);
    CHECK(text.find("plain") != std::string::npos);
    CHECK(text.find("managed") != std::string::npos);
    CHECK(text.find("TTS") != std::string::npos);
    CHECK(text.find("11.4464") != std::string::npos);
    CHECK(text.find("7.8740") != std::string::npos);

    MetricsReport zero = base;
    zero.tts = 0.0;
    CHECK_THROWS_AS(compare_reports(zero, var), DomainError);
}

TEST_CASE("metrics of an assembled trajectory are consistent") {
    const std::vector<RegionParams> regions{region_with_trip_length(1000.0),
                                            region_with_trip_length(1000.0)};
    Trajectory traj;
    traj.dt = 20.0;
    traj.states.push_back(state_with(2, 0, 0, 300.0));
    traj.states.push_back(state_with(2, 1, 1, 250.0));
    traj.states.push_back(state_with(2, 1, 1, 200.0));
    FlowRecord f = empty_flows(2);
    f.m_ii[0] = 0.4;
    traj.flows.push_back(f);
    traj.flows.push_back(empty_flows(2));

    const MetricsReport rep = compute_metrics(traj, regions);
    CHECK(rep.tts == doctest::Approx(rep.ts_per_region[0] + rep.ts_per_region[1]).epsilon(1e-15));
    CHECK(rep.ts_per_region[0] == doctest::Approx(20.0 * 300.0 / 3600.0).epsilon(1e-12));
    CHECK(rep.ts_per_region[1] == doctest::Approx(20.0 * 250.0 / 3600.0).epsilon(1e-12));
    CHECK(rep.ts_step_sum[0] == doctest::Approx(300.0).epsilon(1e-15));
    CHECK(rep.ts_step_sum[1] == doctest::Approx(250.0).epsilon(1e-15));
    CHECK(rep.served == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(rep.final_accumulation == doctest::Approx(200.0).epsilon(1e-15));
}

TEST_CASE("price summary") {
    const std::vector<std::pair<int, int>> pairs{{0, 1}, {1, 0}};
    std::vector<PriceMatrix> cycles(4, zero_prices(2));
    cycles[1].at(0, 1) = 2.0;
    cycles[2].at(0, 1) = 4.0;

    const PriceSummary sum = summarize_prices(cycles, pairs);
    REQUIRE(sum.pairs == pairs);
    CHECK(sum.active_cycles[0] == 2);
    CHECK(sum.average_active[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(sum.active_cycles[1] == 0);
    CHECK(sum.average_active[1] == 0.0);
    CHECK(sum.total_active == 2);
    CHECK(sum.overall_average_active == doctest::Approx(3.0).epsilon(1e-15));
}
