#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrn/demand.hpp"
#include "mrn/dso.hpp"
#include "mrn/mlp.hpp"
#include "mrn/network.hpp"
#include "mrn/qdue.hpp"

namespace mrn {

struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 1;
    double horizon_s = 0.0;
    double step_s = 20.0;
    std::vector<RegionParams> regions; // finalized (derived MFD fields filled)
    Topology topo;
    DemandProfile demand;
    ChoiceSpec choice;
    LrhoConfig lrho;
    int pwa_lines = 20;
    TrainConfig training;
    std::vector<int> hidden_sizes{50, 50};

    int steps() const;
};

// Strict parse: unknown keys are rejected with a field path; region
// references are 1-based in the file. `origin` names the source in errors.
ScenarioConfig parse_config(const std::string& text, const std::string& origin);

ScenarioConfig load_config(const std::string& path);

// Stable content fingerprint for manifests.
std::string content_fingerprint(const std::string& bytes);

} // namespace mrn
