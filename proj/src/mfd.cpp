#include "mrn/mfd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrn/errors.hpp"

namespace mrn {

namespace {

double poly(const MfdPolynomial& m, double n) {
    return ((m.a * n + m.b) * n + m.c) * n;
}

// Stationary points of G, ascending. G' = 3a n^2 + 2b n + c.
std::vector<double> stationary_points(const MfdPolynomial& m) {
    std::vector<double> out;
    if (m.a == 0.0) {
        if (m.b != 0.0) out.push_back(-m.c / (2.0 * m.b));
        return out;
    }
    const double qa = 3.0 * m.a, qb = 2.0 * m.b, qc = m.c;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return out;
    const double s = std::sqrt(disc);
    // Numerically stable pair of quadratic roots.
    const double q = -0.5 * (qb + (qb >= 0.0 ? s : -s));
    double r1 = q / qa;
    double r2 = (q != 0.0) ? qc / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    out.push_back(r1);
    if (r2 != r1) out.push_back(r2);
    return out;
}

} // namespace

double mfd_outflow(const MfdPolynomial& mfd, double n) {
    if (n < 0.0 || n > mfd.n_jam) {
        throw DomainError("mfd_outflow: accumulation " + std::to_string(n) +
                          " outside [0, " + std::to_string(mfd.n_jam) + "]");
    }
    return std::max(0.0, poly(mfd, n));
}

double mfd_derivative(const MfdPolynomial& mfd, double n) {
    return (3.0 * mfd.a * n + 2.0 * mfd.b) * n + mfd.c;
}

double critical_accumulation(const MfdPolynomial& mfd) {
    double best_n = 0.0;
    double best_g = 0.0;
    for (double cand : stationary_points(mfd)) {
        if (cand <= 0.0 || cand >= mfd.n_jam) continue;
        const double g = poly(mfd, cand);
        if (g > best_g) {
            best_g = g;
            best_n = cand;
        }
    }
    if (poly(mfd, mfd.n_jam) > best_g) best_n = mfd.n_jam;
    return best_n;
}

double max_outflow(const MfdPolynomial& mfd) {
    return mfd_outflow(mfd, critical_accumulation(mfd));
}

void validate_mfd(const MfdPolynomial& mfd, const std::string& label) {
    if (!(mfd.n_jam > 0.0)) throw ConfigError(label + ": n_jam must be positive");
    if (!(mfd.c > 0.0)) throw ConfigError(label + ": linear coefficient must be positive (free-flow speed)");
    // Nonnegative outflow across the domain, checked on a 1-veh grid.
    for (double n = 0.0; n <= mfd.n_jam; n += 1.0) {
        if (poly(mfd, n) < -1e-12) {
            throw ConfigError(label + ": outflow negative at N = " + std::to_string(n));
        }
    }
    // Single interior peak: derivative changes sign + -> - exactly once.
    int sign_changes = 0;
    bool saw_negative = false;
    double prev = mfd_derivative(mfd, 0.0);
    for (double n = 1.0; n <= mfd.n_jam; n += 1.0) {
        const double d = mfd_derivative(mfd, n);
        if (prev > 0.0 && d <= 0.0) ++sign_changes;
        if (prev <= 0.0 && d > 0.0) saw_negative = true; // regained growth after the peak
        prev = d;
    }
    if (sign_changes != 1 || saw_negative) {
        throw ConfigError(label + ": outflow curve must have exactly one interior maximum");
    }
    const double crit = critical_accumulation(mfd);
    if (!(crit > 0.0 && crit < mfd.n_jam)) {
        throw ConfigError(label + ": critical accumulation not inside (0, n_jam)");
    }
}

double envelope_tangency_bound(const MfdPolynomial& mfd) {
    const double njam = mfd.n_jam;
    // Concave on the whole domain: envelope is the curve itself.
    if (6.0 * mfd.a * njam + 2.0 * mfd.b <= 0.0) return njam;
    const double inflection = -mfd.b / (3.0 * mfd.a);
    if (inflection <= 0.0) return njam; // convex everywhere: degenerate, segment from 0
    // phi(x) = tangent at x evaluated at n_jam, minus G(n_jam). Decreasing on
    // the concave side; a root there is where the envelope leaves the curve.
    auto phi = [&](double x) {
        return poly(mfd, x) + mfd_derivative(mfd, x) * (njam - x) - poly(mfd, njam);
    };
    const double crit = critical_accumulation(mfd);
    double lo = std::min(crit, inflection);
    double hi = std::min(inflection, njam);
    if (phi(lo) <= 0.0) return lo;
    if (phi(hi) > 0.0) {
        // Every tangent on the concave side clears the endpoint; the envelope
        // kinks at the inflection and continues as a chord.
        return hi;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double pwa_eval(const PwaMfd& pwa, double n) {
    if (n < 0.0 || n > pwa.n_jam) {
        throw DomainError("pwa_eval: accumulation " + std::to_string(n) +
                          " outside [0, " + std::to_string(pwa.n_jam) + "]");
    }
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pwa.slopes.size(); ++i) {
        v = std::min(v, pwa.slopes[i] * n + pwa.intercepts[i]);
    }
    return v;
}

namespace {

struct Line {
    double slope;
    double intercept;
};

Line tangent_at(const MfdPolynomial& m, double x) {
    const double g = poly(m, x);
    const double d = mfd_derivative(m, x);
    return {d, g - d * x};
}

// Max relative over-approximation of min(tangent at x0, tangent at x1) against
// G on [x0, x1]. The extreme sits at or near the tangent intersection, so the
// scan includes it explicitly.
double segment_gap(const MfdPolynomial& m, double x0, double x1) {
    const Line l0 = tangent_at(m, x0);
    const Line l1 = tangent_at(m, x1);
    auto rel = [&](double x) {
        const double upper = std::min(l0.slope * x + l0.intercept, l1.slope * x + l1.intercept);
        const double g = poly(m, x);
        return (upper - g) / std::max(g, 1e-9);
    };
    double worst = 0.0;
    const int samples = 96;
    for (int i = 1; i < samples; ++i) {
        worst = std::max(worst, rel(x0 + (x1 - x0) * i / samples));
    }
    if (l0.slope != l1.slope) {
        const double xi = (l1.intercept - l0.intercept) / (l0.slope - l1.slope);
        if (xi > x0 && xi < x1) worst = std::max(worst, rel(xi));
    }
    return worst;
}

// Greedy walk: pick the farthest next abscissa keeping the segment gap within tol.
std::vector<double> greedy_abscissae(const MfdPolynomial& m, double bound, double tol, int max_segments) {
    std::vector<double> xs{0.0};
    double x = 0.0;
    while (x < bound && static_cast<int>(xs.size()) <= max_segments) {
        double next;
        if (segment_gap(m, x, bound) <= tol) {
            next = bound;
        } else {
            double lo = x, hi = bound;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (segment_gap(m, x, mid) <= tol ? lo : hi) = mid;
            }
            next = lo;
            if (!(next > x)) next = std::min(bound, x + 1e-6 * m.n_jam); // safety step
        }
        xs.push_back(next);
        x = next;
    }
    return xs;
}

} // namespace

PwaMfd pwa_approximate(const MfdPolynomial& mfd, int l_count) {
    if (l_count < 2) throw ConfigError("pwa_approximate: need at least 2 lines");
    const double bound = envelope_tangency_bound(mfd);
    const int segments = l_count - 1;

    // Find the smallest balanced tolerance the line budget affords.
    double lo = 1e-8, hi = 4.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = std::sqrt(lo * hi);
        const auto xs = greedy_abscissae(mfd, bound, mid, segments + 1);
        const bool fits = xs.back() >= bound && static_cast<int>(xs.size()) - 1 <= segments;
        (fits ? hi : lo) = mid;
    }
    std::vector<double> xs = greedy_abscissae(mfd, bound, hi, segments + 1);

    // The walk may finish under budget; spend leftover lines on the currently
    // worst segments.
    while (static_cast<int>(xs.size()) < segments + 1) {
        std::size_t worst_i = 0;
        double worst = -1.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const double gap = segment_gap(mfd, xs[i], xs[i + 1]);
            if (gap > worst) {
                worst = gap;
                worst_i = i;
            }
        }
        xs.insert(xs.begin() + static_cast<std::ptrdiff_t>(worst_i) + 1,
                  0.5 * (xs[worst_i] + xs[worst_i + 1]));
    }

    PwaMfd pwa;
    pwa.n_jam = mfd.n_jam;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const Line l = tangent_at(mfd, xs[i]);
        pwa.slopes.push_back(l.slope);
        pwa.intercepts.push_back(l.intercept);
    }
    // Final line: the envelope segment through (bound, G(bound)). Where the
    // envelope follows the curve to n_jam this is the plain tangent there;
    // otherwise use the flatter of tangent and chord so the segment clears the
    // convex tail.
    {
        const double g_bound = poly(mfd, bound);
        double slope = mfd_derivative(mfd, bound);
        if (bound < mfd.n_jam) {
            const double chord = (poly(mfd, mfd.n_jam) - g_bound) / (mfd.n_jam - bound);
            slope = std::min(slope, chord);
        }
        pwa.slopes.push_back(slope);
        pwa.intercepts.push_back(g_bound - slope * bound);
    }
    return pwa;
}

} // namespace mrn
