#include "mrn/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "mrn/errors.hpp"

namespace mrn {

int feature_width(const Topology& topo) {
    const auto triples = transfer_triples(topo);
    const auto pairs = ordered_border_pairs(topo);
    return static_cast<int>(triples.size() + pairs.size()) + topo.k;
}

std::vector<double> feature_vector(const Topology& topo,
                                   const std::vector<RegionParams>& regions,
                                   const SplitRates& splits,
                                   const FlowRecord& flows,
                                   const NetworkState& state) {
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(feature_width(topo)));
    for (const Triple& t : transfer_triples(topo)) f.push_back(splits.at(t.i, t.h, t.j));
    for (const auto& [i, h] : ordered_border_pairs(topo)) f.push_back(flows.border_flow(i, h));
    for (int i = 0; i < topo.k; ++i)
        f.push_back(region_total(state, i) / regions[static_cast<std::size_t>(i)].critical);
    return f;
}

PricingData build_dataset(const QdueRun& run,
                          const Topology& topo,
                          const std::vector<RegionParams>& regions,
                          std::uint64_t seed) {
    const int steps = run.trajectory.steps();
    if (steps < 10) throw DomainError("build_dataset: need at least 10 samples");
    PricingData data;
    data.pairs = ordered_border_pairs(topo);

    std::vector<std::size_t> order(static_cast<std::size_t>(steps));
    for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
    Rng rng(derive_seed(seed, "pricing-shuffle"));
    rng.shuffle(order);

    data.features.reserve(order.size());
    data.targets.assign(data.pairs.size(), {});
    for (auto& t : data.targets) t.reserve(order.size());
    for (std::size_t s : order) {
        const int k = static_cast<int>(s);
        data.features.push_back(feature_vector(topo, regions, run.splits[s], run.trajectory.flows[s],
                                               run.trajectory.states[s]));
        for (std::size_t p = 0; p < data.pairs.size(); ++p)
            data.targets[p].push_back(run.costs[static_cast<std::size_t>(k)].at(data.pairs[p].first,
                                                                                data.pairs[p].second));
    }
    data.n_train = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(steps)));
    data.n_train = std::clamp<std::size_t>(data.n_train, 1, order.size() - 1);
    return data;
}

TrainedModels train_models(const PricingData& data,
                           const std::vector<int>& hidden_sizes,
                           const TrainConfig& cfg,
                           std::uint64_t seed) {
    if (data.features.empty()) throw DomainError("train_models: empty dataset");
    const int width = static_cast<int>(data.features.front().size());

    std::vector<std::vector<double>> train_rows(data.features.begin(),
                                                data.features.begin() + static_cast<std::ptrdiff_t>(data.n_train));
    TrainedModels out;
    out.set.width = width;
    int max_region = 0;
    for (const auto& [i, h] : data.pairs) max_region = std::max({max_region, i + 1, h + 1});
    out.set.k = max_region;

    std::vector<int> sizes{width};
    for (int h : hidden_sizes) sizes.push_back(h);
    sizes.push_back(1);

    for (std::size_t p = 0; p < data.pairs.size(); ++p) {
        PairModel pm;
        pm.i = data.pairs[p].first;
        pm.h = data.pairs[p].second;
        pm.scaler = scaler_fit(train_rows);

        Dataset train;
        for (std::size_t s = 0; s < data.n_train; ++s) {
            train.x.push_back(scaler_transform(pm.scaler, data.features[s]));
            train.y.push_back(data.targets[p][s]);
        }
        Rng rng(derive_seed(seed, "pricing-train", static_cast<std::uint64_t>(p)));
        pm.model = mlp_init(sizes, rng);
        PairTraining report;
        report.history = mlp_train(pm.model, train, cfg, rng);

        Dataset test;
        for (std::size_t s = data.n_train; s < data.features.size(); ++s) {
            test.x.push_back(scaler_transform(pm.scaler, data.features[s]));
            test.y.push_back(data.targets[p][s]);
        }
        report.test_mae = test.x.empty() ? 0.0 : mlp_mae(pm.model, test);

        out.set.models.push_back(std::move(pm));
        out.reports.push_back(std::move(report));
    }
    return out;
}

void save_models(const ModelSet& set, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["k"] = set.k;
    doc["width"] = set.width;
    auto& arr = doc["models"] = nlohmann::ordered_json::array();
    for (const auto& pm : set.models) {
        nlohmann::ordered_json m;
        m["from_region"] = pm.i + 1;
        m["to_region"] = pm.h + 1;
        m["scaler_min"] = pm.scaler.lo;
        m["scaler_max"] = pm.scaler.hi;
        m["layer_sizes"] = pm.model.sizes;
        m["weights"] = pm.model.w;
        m["biases"] = pm.model.b;
        arr.push_back(std::move(m));
    }
    std::ofstream out(path);
    if (!out) throw IoError("save_models: cannot open " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("save_models: write failed for " + path);
}

ModelSet load_models(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_models: cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_models: parse failure in " + path + ": " + e.what());
    }
    try {
        if (doc.at("format_version").get<int>() != 1)
            throw IoError("load_models: unsupported format version in " + path);
        ModelSet set;
        set.k = doc.at("k").get<int>();
        set.width = doc.at("width").get<int>();
        for (const auto& m : doc.at("models")) {
            PairModel pm;
            pm.i = m.at("from_region").get<int>() - 1;
            pm.h = m.at("to_region").get<int>() - 1;
            pm.scaler.lo = m.at("scaler_min").get<std::vector<double>>();
            pm.scaler.hi = m.at("scaler_max").get<std::vector<double>>();
            pm.model.sizes = m.at("layer_sizes").get<std::vector<int>>();
            pm.model.w = m.at("weights").get<std::vector<std::vector<double>>>();
            pm.model.b = m.at("biases").get<std::vector<std::vector<double>>>();
            set.models.push_back(std::move(pm));
        }
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_models: malformed model file " + path + ": " + e.what());
    }
}

CostMatrix predict_costs(const ModelSet& set, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != set.width)
        throw DomainError("predict_costs: feature width mismatch");
    CostMatrix c;
    c.k = set.k;
    c.c.assign(static_cast<std::size_t>(set.k) * set.k, 0.0);
    for (const auto& pm : set.models)
        c.at(pm.i, pm.h) = mlp_forward(pm.model, scaler_transform(pm.scaler, features))[0];
    return c;
}

PriceMatrix price_matrix(const CostMatrix& c_qdue, const CostMatrix& c_star, const ModelSet& set) {
    if (c_qdue.k != c_star.k) throw DomainError("price_matrix: dimension mismatch");
    PriceMatrix p = zero_prices(c_qdue.k);
    for (const auto& pm : set.models) p.at(pm.i, pm.h) = std::max(0.0, c_qdue.at(pm.i, pm.h) - c_star.at(pm.i, pm.h));
    return p;
}

double feature_coverage(const MinMaxScaler& scaler, const std::vector<double>& features) {
    if (features.size() != scaler.lo.size()) throw DomainError("feature_coverage: width mismatch");
    if (features.empty()) return 1.0;
    std::size_t inside = 0;
    for (std::size_t f = 0; f < features.size(); ++f)
        if (features[f] >= scaler.lo[f] && features[f] <= scaler.hi[f]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(features.size());
}

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
                          double dt) {
    validate_lrho(cfg);
    if (reference.trajectory.steps() < steps)
        throw ConfigError("run_priced: reference run shorter than the priced horizon");

    PricedRun out;
    PriceMatrix held = zero_prices(topo.k);

    const PriceProvider provider = [&](int step, const NetworkState& state) -> const PriceMatrix* {
        if (step % cfg.n_c != 0) return &held;
        const int cycle = step / cfg.n_c;
        if (cycle == 0) {
            held = zero_prices(topo.k); // no information before the first cycle completes
            out.cycle_prices.push_back(held);
            out.cycle_coverage.push_back(1.0);
            return &held;
        }
        const auto features = feature_vector(topo, regions, reference.theta_schedule[static_cast<std::size_t>(cycle)],
                                             reference.trajectory.flows[static_cast<std::size_t>(step)],
                                             reference.trajectory.states[static_cast<std::size_t>(step)]);
        const CostMatrix c_now = generalized_costs(travel_time_matrix(state, regions), choice);
        const CostMatrix c_star = predictor(features, c_now);
        held = zero_prices(topo.k);
        for (const auto& [i, h] : tolled_pairs) held.at(i, h) = std::max(0.0, c_now.at(i, h) - c_star.at(i, h));
        out.cycle_prices.push_back(held);
        out.cycle_coverage.push_back(coverage_scaler != nullptr ? feature_coverage(*coverage_scaler, features)
                                                                : 1.0);
        return &held;
    };

    out.run = run_qdue(topo, regions, demand, choice, steps, dt, provider);
    return out;
}

PricedRun run_priced(const Topology& topo,
                     const std::vector<RegionParams>& regions,
                     const DemandProfile& demand,
                     const ChoiceSpec& choice,
                     const LrhoResult& reference,
                     const ModelSet& set,
                     const LrhoConfig& cfg,
                     int steps,
                     double dt) {
    if (set.models.empty()) throw ConfigError("run_priced: empty model set");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& pm : set.models) pairs.emplace_back(pm.i, pm.h);
    const CostPredictor predictor = [&](const std::vector<double>& features, const CostMatrix&) {
        return predict_costs(set, features);
    };
    return run_priced_with(topo, regions, demand, choice, reference, predictor, &set.models.front().scaler,
                           pairs, cfg, steps, dt);
}

} // namespace mrn
