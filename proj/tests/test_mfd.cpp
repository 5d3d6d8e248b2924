#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mrn/errors.hpp"
#include "mrn/mfd.hpp"

using namespace mrn;

namespace {

// Zurich-style curves used throughout the suites.
const MfdPolynomial kCenter{2.10e-10, -2.25e-6, 6.06e-3, 5000.0};
const MfdPolynomial kBorder{7.72e-11, -1.25e-6, 5.13e-3, 8000.0};
const MfdPolynomial kParabola{0.0, -1e-6, 4e-3, 4000.0};

double raw_poly(const MfdPolynomial& m, double n) { return ((m.a * n + m.b) * n + m.c) * n; }

// Independent argmax oracle on a fixed grid; deliberately knows nothing about
// stationary points.
struct GridPeak {
    double n = 0.0;
    double g = 0.0;
};

GridPeak grid_search_peak(const MfdPolynomial& m, double resolution) {
    GridPeak best;
    const long long cells = static_cast<long long>(std::floor(m.n_jam / resolution));
    for (long long s = 0; s <= cells; ++s) {
        const double n = std::min(m.n_jam, static_cast<double>(s) * resolution);
        const double g = std::max(0.0, raw_poly(m, n));
        if (g > best.g) {
            best.g = g;
            best.n = n;
        }
    }
    return best;
}

} // namespace

TEST_CASE("outflow evaluation and domain") {
    CHECK(mfd_outflow(kCenter, 0.0) == 0.0);
    CHECK(mfd_outflow(kCenter, 1000.0) == doctest::Approx(4.02).epsilon(1e-9));
    CHECK(mfd_outflow(kBorder, 2755.0) == doctest::Approx(6.26).epsilon(1e-3));
    CHECK_THROWS_AS(mfd_outflow(kCenter, -1.0), DomainError);
    CHECK_THROWS_AS(mfd_outflow(kCenter, 5001.0), DomainError);

    // Raw polynomial dips below zero late in the domain; the outflow is clamped.
    const MfdPolynomial dipping{0.0, -1e-3, 1.0, 2000.0};
    CHECK(raw_poly(dipping, 1500.0) < 0.0);
    CHECK(mfd_outflow(dipping, 1500.0) == 0.0);
}

TEST_CASE("derivative matches central differences") {
    const double h = 1e-3;
    for (double n : {10.0, 500.0, 1800.0, 3000.0, 4500.0}) {
        const double numeric = (raw_poly(kCenter, n + h) - raw_poly(kCenter, n - h)) / (2.0 * h);
        CHECK(mfd_derivative(kCenter, n) == doctest::Approx(numeric).epsilon(1e-7));
    }
}

TEST_CASE("critical accumulation against a 0.1-veh grid oracle") {
    for (const auto& m : {kCenter, kBorder}) {
        const GridPeak peak = grid_search_peak(m, 0.1);
        CHECK(std::abs(critical_accumulation(m) - peak.n) <= 0.5);
        CHECK(max_outflow(m) == doctest::Approx(peak.g).epsilon(0.005));
        CHECK(max_outflow(m) >= peak.g - 1e-12); // the grid can only undershoot the true peak
    }
    // Frozen magnitudes for the shipped curves.
    CHECK(critical_accumulation(kCenter) == doctest::Approx(1800.5).epsilon(5e-4));
    CHECK(max_outflow(kCenter) == doctest::Approx(4.84).epsilon(2e-3));
    CHECK(critical_accumulation(kBorder) == doctest::Approx(2755.3).epsilon(5e-4));
    CHECK(max_outflow(kBorder) == doctest::Approx(6.26).epsilon(2e-3));
    // Parabola vertex is exact: -c/(2b).
    CHECK(critical_accumulation(kParabola) == doctest::Approx(2000.0).epsilon(1e-12));
    CHECK(max_outflow(kParabola) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("curve validation rejects malformed shapes") {
    CHECK_NOTHROW(validate_mfd(kCenter, "center"));
    CHECK_NOTHROW(validate_mfd(kBorder, "border"));
    CHECK_NOTHROW(validate_mfd(kParabola, "parabola"));

    MfdPolynomial bad = kCenter;
    bad.n_jam = 0.0;
    CHECK_THROWS_AS(validate_mfd(bad, "zero jam"), ConfigError);

    bad = kCenter;
    bad.c = -1e-3;
    CHECK_THROWS_AS(validate_mfd(bad, "negative free-flow slope"), ConfigError);

    // Negative interior outflow.
    CHECK_THROWS_AS(validate_mfd(MfdPolynomial{0.0, -1e-3, 1.0, 2000.0}, "dipping"), ConfigError);

    // Rising tail after the congested branch (second derivative sign regain).
    CHECK_THROWS_AS(validate_mfd(MfdPolynomial{1e-9, -3e-6, 2e-3, 3000.0}, "regaining"), ConfigError);
}

TEST_CASE("envelope tangency bound") {
    // Concave everywhere: the envelope is the curve itself.
    CHECK(envelope_tangency_bound(kParabola) == doctest::Approx(4000.0));

    for (const auto& m : {kCenter, kBorder}) {
        const double bound = envelope_tangency_bound(m);
        CHECK(bound > critical_accumulation(m));
        CHECK(bound < m.n_jam);
        // Defining property: the tangent at the bound passes through the jam point.
        const double tangent_at_jam = raw_poly(m, bound) + mfd_derivative(m, bound) * (m.n_jam - bound);
        CHECK(tangent_at_jam == doctest::Approx(raw_poly(m, m.n_jam)).epsilon(1e-6));
    }
    CHECK(envelope_tangency_bound(kCenter) == doctest::Approx(2857.0).epsilon(2e-3));
    CHECK(envelope_tangency_bound(kBorder) == doctest::Approx(4096.0).epsilon(2e-3));
}

TEST_CASE("piecewise-linear approximation: structure") {
    const PwaMfd pwa = pwa_approximate(kCenter, 20);
    CHECK(pwa.slopes.size() == 20);
    CHECK(pwa.intercepts.size() == 20);
    CHECK(pwa.n_jam == kCenter.n_jam);
    // Tangents of a concave function at increasing abscissae have
    // non-increasing slopes.
    for (std::size_t l = 1; l < pwa.slopes.size(); ++l) CHECK(pwa.slopes[l] <= pwa.slopes[l - 1] + 1e-12);

    // pwa_eval is the pointwise minimum of its lines.
    for (double n : {0.0, 700.0, 1800.5, 3000.0, 5000.0}) {
        double manual = pwa.slopes[0] * n + pwa.intercepts[0];
        for (std::size_t l = 1; l < pwa.slopes.size(); ++l)
            manual = std::min(manual, pwa.slopes[l] * n + pwa.intercepts[l]);
        CHECK(pwa_eval(pwa, n) == doctest::Approx(manual).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pwa_eval(pwa, -1.0), DomainError);
    CHECK_THROWS_AS(pwa_eval(pwa, 5001.0), DomainError);
    CHECK_THROWS_AS(pwa_approximate(kCenter, 1), ConfigError);
}

TEST_CASE("piecewise-linear approximation: fidelity on a 1-veh grid") {
    for (const auto& m : {kCenter, kBorder, kParabola}) {
        const PwaMfd pwa = pwa_approximate(m, 20);
        const double bound = envelope_tangency_bound(m);
        double worst_rel = 0.0;
        for (double n = 0.0; n <= m.n_jam; n += 1.0) {
            const double g = mfd_outflow(m, n);
            const double p = pwa_eval(pwa, n);
            CHECK(p >= g - 1e-9); // over-approximation everywhere
            if (n <= bound && g > 1e-9) worst_rel = std::max(worst_rel, (p - g) / g);
        }
        // Within the envelope-tight range the 20-line fit stays within 2%.
        CHECK(worst_rel <= 0.02);
    }
}
