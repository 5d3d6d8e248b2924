#pragma once

#include <vector>

namespace mrn {

// One trapezoidal demand pulse: linear rise over t_rise starting at t_start,
// a plateau at `magnitude` veh/s for t_const, then a linear fall over t_fall.
struct Trapezoid {
    double t_start = 0.0;
    double t_rise = 0.0;
    double t_const = 0.0;
    double t_fall = 0.0;
    double magnitude = 0.0;
};

// Per-OD-pair demand as a sum of trapezoids. Cell (i, j) holds trips from
// region i to region j; the diagonal is internal demand.
struct DemandProfile {
    int k = 0;
    std::vector<std::vector<Trapezoid>> od; // k*k cells, row-major
};

void validate_demand(const DemandProfile& profile);

// Instantaneous rate of one pulse at time t (veh/s).
double trapezoid_rate(const Trapezoid& tz, double t);

// Exact integral of one pulse over [t0, t1] (vehicles).
double trapezoid_volume_between(const Trapezoid& tz, double t0, double t1);

// Instantaneous OD rate at time t.
double od_demand(const DemandProfile& profile, int i, int j, double t);

// Mean OD rate over [t0, t1], computed from the exact integral so cumulative
// step injections match the analytic demand volume.
double od_step_average(const DemandProfile& profile, int i, int j, double t0, double t1);

// Total vehicles an OD pair injects over all time.
double od_total_volume(const DemandProfile& profile, int i, int j);

// Total vehicles the whole profile injects over all time.
double total_volume(const DemandProfile& profile);

// Time after which every pulse is finished.
double demand_end_time(const DemandProfile& profile);

} // namespace mrn
