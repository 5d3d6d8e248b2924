#include "mrn/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "mrn/errors.hpp"

namespace mrn {

double time_spent(const Trajectory& traj, int region) {
    double step_sum = 0.0;
    for (int k = 0; k < traj.steps(); ++k) step_sum += region_total(traj.states[static_cast<std::size_t>(k)], region);
    return step_sum * traj.dt / 3600.0;
}

double total_traveled_distance(const Trajectory& traj, const std::vector<RegionParams>& regions) {
    double meters_per_second_sum = 0.0;
    for (const FlowRecord& f : traj.flows) {
        for (int i = 0; i < f.k; ++i) {
            double outflow = f.m_ii[static_cast<std::size_t>(i)];
            for (int h = 0; h < f.k; ++h)
                for (int j = 0; j < f.k; ++j)
                    if (j != i) outflow += f.transfer(i, h, j);
            meters_per_second_sum += regions[static_cast<std::size_t>(i)].avg_trip_length_m * outflow;
        }
    }
    return meters_per_second_sum * traj.dt / 1000.0;
}

double vehicles_served(const Trajectory& traj) {
    double rate_sum = 0.0;
    for (const FlowRecord& f : traj.flows)
        for (int i = 0; i < f.k; ++i) rate_sum += f.m_ii[static_cast<std::size_t>(i)];
    return rate_sum * traj.dt;
}

double mean_absolute_error(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.empty() || predicted.size() != actual.size())
        throw DomainError("mean_absolute_error: need equal nonempty vectors");
    double total = 0.0;
    for (std::size_t s = 0; s < predicted.size(); ++s) total += std::abs(predicted[s] - actual[s]);
    return total / static_cast<double>(predicted.size());
}

MetricsReport compute_metrics(const Trajectory& traj, const std::vector<RegionParams>& regions) {
    MetricsReport r;
    const int k = traj.states.empty() ? 0 : traj.states.front().k;
    r.ts_per_region.assign(static_cast<std::size_t>(k), 0.0);
    r.ts_step_sum.assign(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i) {
        double step_sum = 0.0;
        for (int s = 0; s < traj.steps(); ++s) step_sum += region_total(traj.states[static_cast<std::size_t>(s)], i);
        r.ts_step_sum[static_cast<std::size_t>(i)] = step_sum;
        r.ts_per_region[static_cast<std::size_t>(i)] = step_sum * traj.dt / 3600.0;
        r.tts += r.ts_per_region[static_cast<std::size_t>(i)];
    }
    r.ttd = total_traveled_distance(traj, regions);
    r.served = vehicles_served(traj);
    if (!traj.states.empty()) r.final_accumulation = network_total(traj.states.back());
    return r;
}

std::vector<ImprovementRow> compare_reports(const MetricsReport& baseline, const MetricsReport& variant) {
    if (baseline.ts_per_region.size() != variant.ts_per_region.size())
        throw DomainError("compare_reports: region count mismatch");
    std::vector<ImprovementRow> rows;
    const auto push = [&rows](const std::string& name, double base, double var) {
        if (base == 0.0) throw DomainError("compare_reports: zero baseline for " + name);
        rows.push_back({name, base, var, (base - var) / base * 100.0});
    };
    for (std::size_t i = 0; i < baseline.ts_per_region.size(); ++i)
        push("TS_" + std::to_string(i + 1), baseline.ts_per_region[i], variant.ts_per_region[i]);
    push("TTS", baseline.tts, variant.tts);
    push("TTD", baseline.ttd, variant.ttd);
    push("N", baseline.served, variant.served);
    return rows;
}

std::string comparison_text(const std::vector<ImprovementRow>& rows,
                            const std::string& baseline_name,
                            const std::string& variant_name) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-8s %16s %16s %14s\n", "metric", baseline_name.c_str(),
                  variant_name.c_str(), "improvement %");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%-8s %16.4f %16.4f %14.4f\n", r.metric.c_str(), r.baseline, r.variant,
                      r.improvement_pct);
        out += line;
    }
    return out;
}

PriceSummary summarize_prices(const std::vector<PriceMatrix>& cycle_prices,
                              const std::vector<std::pair<int, int>>& pairs) {
    PriceSummary s;
    s.pairs = pairs;
    s.average_active.assign(pairs.size(), 0.0);
    s.active_cycles.assign(pairs.size(), 0);
    double overall = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        double total = 0.0;
        int active = 0;
        for (const auto& pm : cycle_prices) {
            const double v = pm.at(pairs[p].first, pairs[p].second);
            if (v > 0.0) {
                total += v;
                ++active;
            }
        }
        s.average_active[p] = active > 0 ? total / active : 0.0;
        s.active_cycles[p] = active;
        overall += total;
        s.total_active += active;
    }
    s.overall_average_active = s.total_active > 0 ? overall / s.total_active : 0.0;
    return s;
}

} // namespace mrn
