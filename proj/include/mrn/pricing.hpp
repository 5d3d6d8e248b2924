#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mrn/dso.hpp"
#include "mrn/mlp.hpp"
#include "mrn/qdue.hpp"

namespace mrn {

// Feature layout: all allowed split rates over the canonical transfer-triple
// order, then border flows per ordered adjacent pair (veh/s), then per-region
// accumulation over critical accumulation. Width on a complete 4-region
// network: 36 + 12 + 4 = 52.
int feature_width(const Topology& topo);

std::vector<double> feature_vector(const Topology& topo,
                                   const std::vector<RegionParams>& regions,
                                   const SplitRates& splits,
                                   const FlowRecord& flows,
                                   const NetworkState& state);

struct PricingData {
    std::vector<std::pair<int, int>> pairs;       // tolled border pairs, canonical order
    std::vector<std::vector<double>> features;    // per sample, shuffled
    std::vector<std::vector<double>> targets;     // per pair: per sample, CHF
    std::size_t n_train = 0;                      // leading share used for fitting
};

// One sample per plant step of an equilibrium run; targets are that step's
// untolled generalized costs per border pair. Samples are shuffled with the
// given seed, then split 70/30 into train and test blocks.
PricingData build_dataset(const QdueRun& run,
                          const Topology& topo,
                          const std::vector<RegionParams>& regions,
                          std::uint64_t seed);

struct PairModel {
    int i = 0;
    int h = 0;
    MinMaxScaler scaler;
    MlpModel model;
};

struct ModelSet {
    int k = 0;
    int width = 0;
    std::vector<PairModel> models; // canonical border-pair order
};

struct PairTraining {
    TrainHistory history;
    double test_mae = 0.0;
};

struct TrainedModels {
    ModelSet set;
    std::vector<PairTraining> reports; // aligned with set.models
};

// Fits one network per border pair on the train block (features scaled per
// model), sequentially in pair order; each model draws from its own labelled
// seed stream so the set is reproducible as a whole.
TrainedModels train_models(const PricingData& data,
                           const std::vector<int>& hidden_sizes,
                           const TrainConfig& cfg,
                           std::uint64_t seed);

ModelSet load_models(const std::string& path);
void save_models(const ModelSet& set, const std::string& path);

// Assembles predicted border-pair costs into a dense matrix; entries without
// a tolled pair stay 0.
CostMatrix predict_costs(const ModelSet& set, const std::vector<double>& features);

// p = max(0, c_observed - c_optimal) on tolled pairs, 0 elsewhere.
PriceMatrix price_matrix(const CostMatrix& c_qdue, const CostMatrix& c_star, const ModelSet& set);

// Share of feature coordinates that fall inside the training range of the
// given scaler; quantifies how far prediction inputs drift from the
// training distribution.
double feature_coverage(const MinMaxScaler& scaler, const std::vector<double>& features);

// Prices for one control cycle from current untolled costs and a cost
// predictor. Exposed so a perfect-oracle predictor can stand in for the
// trained models.
using CostPredictor = std::function<CostMatrix(const std::vector<double>& features, const CostMatrix& c_now)>;

struct PricedRun {
    QdueRun run;
    std::vector<PriceMatrix> cycle_prices; // one per control cycle
    std::vector<double> cycle_coverage;    // feature coverage per priced cycle
};

// Closed loop: every n_c steps build features from the reference
// system-optimal run (its split rates, border flows, and accumulations at the
// cycle-start step), predict the optimal costs, and hold
// p = max(0, c_now - c_predicted) while the plant advances under tolled
// logit splits. The first cycle is untolled.
PricedRun run_priced(const Topology& topo,
                     const std::vector<RegionParams>& regions,
                     const DemandProfile& demand,
                     const ChoiceSpec& choice,
                     const LrhoResult& reference,
                     const ModelSet& set,
                     const LrhoConfig& cfg,
                     int steps,
                     double dt);

// Same loop with an arbitrary predictor (used for oracle tests); coverage is
// reported against the provided scaler when given, else all-covered.
PricedRun run_priced_with(const Topology& topo,
                          const std::vector<RegionParams>& regions,
                          const DemandProfile& demand,
                          const ChoiceSpec& choice,
                          const LrhoResult& reference,
                          const CostPredictor& predictor,
                          const MinMaxScaler* coverage_scaler,
                          const std::vector<std::pair<int, int>>& tolled_pairs,
                          const LrhoConfig& cfg,
                          int steps,
                          double dt);

} // namespace mrn
