#pragma once

#include <string>
#include <vector>

#include "mrn/config.hpp"

namespace mrn {

inline constexpr const char* kToolVersion = "0.1.0";

struct StageSet {
    bool qdue = false;
    bool dso = false;
    bool train = false;
    bool priced = false;
    bool compare = false;
};

// Comma-separated stage list, e.g. "qdue,dso,compare"; "all" selects every
// stage. Unknown names are configuration errors.
StageSet parse_stages(const std::string& list);

std::vector<PwaMfd> build_pwa_set(const std::vector<RegionParams>& regions, int lines);

// Runs the selected stages in dependency order. Every stage reads its inputs
// from `out_dir` artifacts (never from in-process results), so any stage can
// be rerun in isolation against persisted predecessors. `config_bytes` is
// fingerprinted into the run manifest.
void run_pipeline(const ScenarioConfig& cfg,
                  const std::string& config_bytes,
                  const std::string& out_dir,
                  const StageSet& stages);

// Derives plot-ready data files from whatever stage artifacts exist in
// `out_dir` (accumulations vs critical lines, cumulative trip endings, split
// comparison, loss curves, price series).
void emit_plot_data(const ScenarioConfig& cfg, const std::string& out_dir);

} // namespace mrn
