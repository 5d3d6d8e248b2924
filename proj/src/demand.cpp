#include "mrn/demand.hpp"

#include <algorithm>
#include <cmath>

#include "mrn/errors.hpp"

namespace mrn {

void validate_demand(const DemandProfile& profile) {
    if (profile.k < 1 || profile.od.size() != static_cast<std::size_t>(profile.k) * profile.k) {
        throw ConfigError("demand: OD table size mismatch");
    }
    for (const auto& cell : profile.od) {
        for (const auto& tz : cell) {
            if (tz.t_start < 0.0 || tz.t_rise < 0.0 || tz.t_const < 0.0 || tz.t_fall < 0.0) {
                throw ConfigError("demand: trapezoid durations must be nonnegative");
            }
            if (tz.magnitude < 0.0) throw ConfigError("demand: trapezoid magnitude must be nonnegative");
        }
    }
}

double trapezoid_rate(const Trapezoid& tz, double t) {
    const double u = t - tz.t_start;
    if (u <= 0.0) return 0.0;
    if (u < tz.t_rise) return tz.magnitude * u / tz.t_rise;
    const double after_rise = u - tz.t_rise;
    if (after_rise <= tz.t_const) return tz.magnitude;
    const double into_fall = after_rise - tz.t_const;
    if (into_fall < tz.t_fall) return tz.magnitude * (1.0 - into_fall / tz.t_fall);
    return 0.0;
}

namespace {

// Integral of a linear ramp from v0 at a to v1 at b, restricted to [t0, t1].
double ramp_integral(double a, double b, double v0, double v1, double t0, double t1) {
    const double lo = std::max(a, t0);
    const double hi = std::min(b, t1);
    if (hi <= lo || b <= a) return 0.0;
    auto value = [&](double t) { return v0 + (v1 - v0) * (t - a) / (b - a); };
    return 0.5 * (value(lo) + value(hi)) * (hi - lo);
}

} // namespace

double trapezoid_volume_between(const Trapezoid& tz, double t0, double t1) {
    if (t1 <= t0) return 0.0;
    const double s = tz.t_start;
    const double r_end = s + tz.t_rise;
    const double c_end = r_end + tz.t_const;
    const double f_end = c_end + tz.t_fall;
    double v = 0.0;
    v += ramp_integral(s, r_end, 0.0, tz.magnitude, t0, t1);
    v += ramp_integral(r_end, c_end, tz.magnitude, tz.magnitude, t0, t1);
    v += ramp_integral(c_end, f_end, tz.magnitude, 0.0, t0, t1);
    return v;
}

double od_demand(const DemandProfile& profile, int i, int j, double t) {
    double q = 0.0;
    for (const auto& tz : profile.od[static_cast<std::size_t>(i) * profile.k + j]) {
        q += trapezoid_rate(tz, t);
    }
    return q;
}

double od_step_average(const DemandProfile& profile, int i, int j, double t0, double t1) {
    if (t1 <= t0) throw DomainError("od_step_average: empty interval");
    double v = 0.0;
    for (const auto& tz : profile.od[static_cast<std::size_t>(i) * profile.k + j]) {
        v += trapezoid_volume_between(tz, t0, t1);
    }
    return v / (t1 - t0);
}

double od_total_volume(const DemandProfile& profile, int i, int j) {
    double v = 0.0;
    for (const auto& tz : profile.od[static_cast<std::size_t>(i) * profile.k + j]) {
        v += tz.magnitude * (tz.t_const + 0.5 * (tz.t_rise + tz.t_fall));
    }
    return v;
}

double total_volume(const DemandProfile& profile) {
    double v = 0.0;
    for (int i = 0; i < profile.k; ++i) {
        for (int j = 0; j < profile.k; ++j) v += od_total_volume(profile, i, j);
    }
    return v;
}

double demand_end_time(const DemandProfile& profile) {
    double end = 0.0;
    for (const auto& cell : profile.od) {
        for (const auto& tz : cell) {
            end = std::max(end, tz.t_start + tz.t_rise + tz.t_const + tz.t_fall);
        }
    }
    return end;
}

} // namespace mrn
