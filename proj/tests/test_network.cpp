#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mrn/errors.hpp"
#include "mrn/network.hpp"

using namespace mrn;

namespace {

Topology complete4() {
    return make_topology(4, {0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0});
}

// A path graph 1-2-3 (0-based 0-1-2).
Topology path3() { return make_topology(3, {0, 1, 0, 1, 0, 1, 0, 1, 0}); }

RegionParams center_region() {
    RegionParams r;
    r.name = "R1";
    r.area_km2 = 1.5;
    r.n_detectors = 113;
    r.n_jam = 5000.0;
    r.avg_trip_length_m = 500.0;
    r.capacity_max = 4.5;
    r.mfd = {2.10e-10, -2.25e-6, 6.06e-3, 5000.0};
    finalize_region(r);
    return r;
}

} // namespace

TEST_CASE("topology construction and validation") {
    const Topology t = complete4();
    CHECK(t.k == 4);
    CHECK(t.adjacent(0, 3));
    CHECK_FALSE(t.adjacent(2, 2));
    CHECK(t.neighbors[0] == std::vector<int>{1, 2, 3});

    const Topology p = path3();
    CHECK(p.neighbors[1] == std::vector<int>{0, 2});
    CHECK_FALSE(p.adjacent(0, 2));

    CHECK_THROWS_AS(make_topology(1, {0}), ConfigError);                            // too small
    CHECK_THROWS_AS(make_topology(2, {0, 1, 0, 0}), ConfigError);                   // asymmetric
    CHECK_THROWS_AS(make_topology(2, {1, 1, 1, 0}), ConfigError);                   // self loop
    CHECK_THROWS_AS(make_topology(2, {0, 1, 1}), ConfigError);                      // wrong size
    CHECK_THROWS_AS(make_topology(3, {0, 1, 0, 1, 0, 0, 0, 0, 0}), ConfigError);    // isolated region 3
    CHECK_THROWS_AS(make_topology(4, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0}), ConfigError); // split
}

TEST_CASE("stop-over enumeration") {
    const Topology t = complete4();
    CHECK(allowed_stopovers(t, 2, 2) == std::vector<int>{2});
    CHECK(allowed_stopovers(t, 0, 2) == std::vector<int>{1, 2, 3});

    const Topology p = path3();
    CHECK(allowed_stopovers(p, 0, 2) == std::vector<int>{1}); // only the middle region borders the origin
    CHECK(allowed_stopovers(p, 1, 0) == std::vector<int>{0, 2});
}

TEST_CASE("canonical triple and pair orders") {
    const Topology t = complete4();
    const auto triples = transfer_triples(t);
    CHECK(triples.size() == 36); // 12 od pairs x 3 stop-overs
    // Origin-major, destination next, stop-over innermost.
    CHECK(triples[0].i == 0);
    CHECK(triples[0].j == 1);
    CHECK(triples[0].h == 1);
    CHECK(triples[1].h == 2);
    CHECK(triples[2].h == 3);
    CHECK(triples[3].j == 2);
    CHECK(triples.back().i == 3);
    CHECK(triples.back().j == 2);
    CHECK(triples.back().h == 2);
    for (const auto& tr : triples) {
        CHECK(tr.i != tr.j);
        CHECK(t.adjacent(tr.i, tr.h));
    }

    const auto pairs = ordered_border_pairs(t);
    CHECK(pairs.size() == 12);
    CHECK(pairs[0] == std::pair<int, int>{0, 1});
    CHECK(pairs[11] == std::pair<int, int>{3, 2});

    const auto path_triples = transfer_triples(path3());
    CHECK(path_triples.size() == 8); // ods (0,1)x1, (0,2)x1, (1,0)x2, (1,2)x2, (2,0)x1, (2,1)x1
}

TEST_CASE("region finalization derives curve properties") {
    const RegionParams r = center_region();
    CHECK(r.critical == doctest::Approx(1800.5).epsilon(1e-3));
    CHECK(r.max_outflow == doctest::Approx(4.84).epsilon(1e-2));
    CHECK(r.tau_cap > 0.0);
    // The ceiling must dominate any travel time realizable strictly inside the domain.
    CHECK(r.tau_cap >= r.n_jam / r.max_outflow);

    RegionParams bad = center_region();
    bad.n_jam = -5.0;
    CHECK_THROWS_AS(finalize_region(bad), ConfigError);
    bad = center_region();
    bad.avg_trip_length_m = 0.0;
    CHECK_THROWS_AS(finalize_region(bad), ConfigError);
    bad = center_region();
    bad.capacity_max = 0.0;
    CHECK_THROWS_AS(finalize_region(bad), ConfigError);
}

TEST_CASE("boundary capacity profile") {
    const RegionParams r = center_region();
    CHECK(boundary_capacity(r, 0.0) == doctest::Approx(4.5));
    CHECK(boundary_capacity(r, r.critical) == doctest::Approx(4.5));
    CHECK(boundary_capacity(r, r.n_jam) == doctest::Approx(0.0));
    CHECK(boundary_capacity(r, r.n_jam + 100.0) == doctest::Approx(0.0));
    // Linear halfway between critical and jam.
    const double mid = 0.5 * (r.critical + r.n_jam);
    CHECK(boundary_capacity(r, mid) == doctest::Approx(2.25).epsilon(1e-9));
    // Monotone nonincreasing on a coarse sweep.
    double prev = boundary_capacity(r, 0.0);
    for (double n = 100.0; n <= r.n_jam; n += 100.0) {
        const double c = boundary_capacity(r, n);
        CHECK(c <= prev + 1e-12);
        prev = c;
    }
    CHECK_THROWS_AS(boundary_capacity(r, -1.0), DomainError);
}
