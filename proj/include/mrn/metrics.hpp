#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mrn/plant.hpp"
#include "mrn/qdue.hpp"

namespace mrn {

// Left-Riemann accumulation integral for one region, in veh·h.
double time_spent(const Trajectory& traj, int region);

// Flow-weighted distance with the sending region's average trip length, veh·km.
double total_traveled_distance(const Trajectory& traj, const std::vector<RegionParams>& regions);

// Cumulative internal trip completions, veh.
double vehicles_served(const Trajectory& traj);

double mean_absolute_error(const std::vector<double>& predicted, const std::vector<double>& actual);

struct MetricsReport {
    std::vector<double> ts_per_region;  // veh·h
    std::vector<double> ts_step_sum;    // raw Σ_k N_I(k), step-sum companion
    double tts = 0.0;                   // veh·h
    double ttd = 0.0;                   // veh·km
    double served = 0.0;                // veh
    double final_accumulation = 0.0;    // veh left in the network at the end
};

MetricsReport compute_metrics(const Trajectory& traj, const std::vector<RegionParams>& regions);

struct ImprovementRow {
    std::string metric;
    double baseline = 0.0;
    double variant = 0.0;
    double improvement_pct = 0.0; // (baseline - variant) / baseline * 100
};

// Per-metric improvement of `variant` over `baseline`; throws DomainError on
// a zero baseline entry.
std::vector<ImprovementRow> compare_reports(const MetricsReport& baseline, const MetricsReport& variant);

// Aligned plain-text table of a comparison (one row per metric).
std::string comparison_text(const std::vector<ImprovementRow>& rows,
                            const std::string& baseline_name,
                            const std::string& variant_name);

struct PriceSummary {
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> average_active; // CHF over cycles where the toll is on; 0 if never active
    std::vector<int> active_cycles;
    double overall_average_active = 0.0;
    int total_active = 0;
};

PriceSummary summarize_prices(const std::vector<PriceMatrix>& cycle_prices,
                              const std::vector<std::pair<int, int>>& pairs);

} // namespace mrn
